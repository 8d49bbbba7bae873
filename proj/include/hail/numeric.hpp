#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hail/errors.hpp"

namespace hail {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Seeded source of randomness used everywhere in the library.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The distributions are implemented here rather than taken from
/// <random> because the standard leaves their algorithms to the vendor:
///   uniform(): top 53 bits of one draw, scaled to [0, 1)
///   normal():  Box-Muller on two uniform() draws, second value cached
/// so a given seed yields the same stream on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);
    std::uint64_t next_u64() { return engine_(); }

    Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double scale);
    Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, double stddev);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Derive an independent stream seed from a base seed and a tag.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag);

void require_finite(const Matrix& m, const char* what);
void require_finite(const Vector& v, const char* what);

struct RidgeConfig {
    double eta = 1.0;
};

/// Regularized least squares: the W minimizing ||Y - F W||_F^2 + eta ||W||_F^2,
/// obtained from (F^T F + eta I) W = F^T Y by Cholesky factorization.
Matrix ridge_solve(const Matrix& features, const Matrix& targets, const RidgeConfig& cfg);

struct KMeansResult {
    Matrix centroids;                 // k x d
    std::vector<int> assignments;     // one per input row
    double inertia = 0.0;
    int iterations = 0;
    std::vector<double> inertia_trace;  // inertia after every centroid update
};

inline constexpr int kDefaultKMeansIterations = 100;

/// Lloyd's algorithm with k-means++ seeding. Rows of `points` are samples.
/// Empty clusters take the point currently farthest from its centroid.
KMeansResult kmeans(const Matrix& points, int k, int max_iter, std::uint64_t seed);

Vector stable_softmax(const Vector& v);

/// Throws ZeroNormError when either argument has zero norm.
double cosine_similarity(const Vector& u, const Vector& v);

inline double sigmoid(double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline Matrix relu(const Matrix& m) { return m.cwiseMax(0.0); }

}  // namespace hail

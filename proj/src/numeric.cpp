#include "hail/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace hail {

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::size_t Rng::index(std::size_t n) {
    require(n > 0, "Rng::index: empty range");
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
}

Matrix Rng::uniform_matrix(Eigen::Index rows, Eigen::Index cols, double scale) {
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = uniform(-scale, scale);
    return m;
}

Matrix Rng::normal_matrix(Eigen::Index rows, Eigen::Index cols, double stddev) {
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = stddev * normal();
    return m;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    // splitmix64 finalizer over the combined value
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) throw NumericalError(std::string(what) + ": non-finite entry");
}

void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) throw NumericalError(std::string(what) + ": non-finite entry");
}

Matrix ridge_solve(const Matrix& features, const Matrix& targets, const RidgeConfig& cfg) {
    require(features.rows() == targets.rows(), "ridge_solve: feature and target row counts differ");
    require(cfg.eta > 0.0, "ridge_solve: eta must be positive");
    require_finite(features, "ridge_solve features");
    require_finite(targets, "ridge_solve targets");

    const Eigen::Index d = features.cols();
    Matrix gram = features.transpose() * features;
    gram.diagonal().array() += cfg.eta;
    const Matrix rhs = features.transpose() * targets;

    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success)
        throw NumericalError("ridge_solve: Cholesky factorization failed for d=" + std::to_string(d));
    Matrix w = llt.solve(rhs);
    require_finite(w, "ridge_solve result");
    return w;
}

namespace {

double squared_distance(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
    return (a.row(i) - b.row(j)).squaredNorm();
}

Matrix plus_plus_seeding(const Matrix& points, int k, Rng& rng) {
    const Eigen::Index n = points.rows();
    Matrix centroids(k, points.cols());
    centroids.row(0) = points.row(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n))));

    std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            auto& d = nearest[static_cast<std::size_t>(i)];
            d = std::min(d, squared_distance(points, i, centroids, c - 1));
            total += d;
        }
        Eigen::Index pick = n - 1;
        if (total > 0.0) {
            double target = rng.uniform() * total;
            for (Eigen::Index i = 0; i < n; ++i) {
                target -= nearest[static_cast<std::size_t>(i)];
                if (target < 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
        }
        centroids.row(c) = points.row(pick);
    }
    return centroids;
}

// Lowest index wins ties.
int nearest_centroid(const Matrix& points, Eigen::Index i, const Matrix& centroids, double* dist) {
    int best = 0;
    double best_d = squared_distance(points, i, centroids, 0);
    for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
        const double d = squared_distance(points, i, centroids, c);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    if (dist) *dist = best_d;
    return best;
}

double inertia_of(const Matrix& points, const Matrix& centroids, const std::vector<int>& assign) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        total += squared_distance(points, i, centroids, assign[static_cast<std::size_t>(i)]);
    return total;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, int k, int max_iter, std::uint64_t seed) {
    const Eigen::Index n = points.rows();
    require(k >= 1, "kmeans: k must be at least 1");
    require(k <= n, "kmeans: k exceeds the number of points");
    require(max_iter >= 1, "kmeans: max_iter must be at least 1");
    require_finite(points, "kmeans points");

    Rng rng(seed);
    KMeansResult res;
    res.centroids = plus_plus_seeding(points, k, rng);
    res.assignments.assign(static_cast<std::size_t>(n), -1);

    std::vector<int> assign(static_cast<std::size_t>(n));
    std::vector<double> dist(static_cast<std::size_t>(n));
    for (int it = 1; it <= max_iter; ++it) {
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto u = static_cast<std::size_t>(i);
            assign[u] = nearest_centroid(points, i, res.centroids, &dist[u]);
            ++counts[static_cast<std::size_t>(assign[u])];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            // farthest point from its centroid, taken only from clusters that keep a member
            Eigen::Index far = -1;
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto u = static_cast<std::size_t>(i);
                if (counts[static_cast<std::size_t>(assign[u])] < 2) continue;
                if (far < 0 || dist[u] > dist[static_cast<std::size_t>(far)]) far = i;
            }
            const auto f = static_cast<std::size_t>(far);
            --counts[static_cast<std::size_t>(assign[f])];
            assign[f] = c;
            dist[f] = 0.0;
            counts[static_cast<std::size_t>(c)] = 1;
            res.centroids.row(c) = points.row(far);
        }
        res.iterations = it;
        if (assign == res.assignments) break;
        res.assignments = assign;

        Matrix sums = Matrix::Zero(k, points.cols());
        for (Eigen::Index i = 0; i < n; ++i) sums.row(assign[static_cast<std::size_t>(i)]) += points.row(i);
        for (int c = 0; c < k; ++c) res.centroids.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
        res.inertia_trace.push_back(inertia_of(points, res.centroids, res.assignments));
    }
    res.inertia = inertia_of(points, res.centroids, res.assignments);
    return res;
}

Vector stable_softmax(const Vector& v) {
    require(v.size() >= 1, "stable_softmax: empty vector");
    require_finite(v, "stable_softmax input");
    const Vector e = (v.array() - v.maxCoeff()).exp();
    return e / e.sum();
}

double cosine_similarity(const Vector& u, const Vector& v) {
    require(u.size() == v.size(), "cosine_similarity: length mismatch");
    const double nu = u.norm();
    const double nv = v.norm();
    if (nu == 0.0 || nv == 0.0) throw ZeroNormError("cosine_similarity: zero-norm vector");
    return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

}  // namespace hail

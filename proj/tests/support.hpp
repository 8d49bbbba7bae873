#pragma once

#include <algorithm>
#include <cmath>

#include "hail/fusion.hpp"
#include "hail/numeric.hpp"

namespace hail::testing {

/// Plain gradient descent on ||Y - F W||^2 + eta ||W||^2 with step 1/L, L the
/// largest eigenvalue of the Hessian found by power iteration. Stops when the
/// gradient is negligible.
inline Matrix ridge_gd_oracle(const Matrix& f, const Matrix& y, double eta, int max_iter = 400000) {
    const Matrix h = f.transpose() * f + eta * Matrix::Identity(f.cols(), f.cols());
    const Matrix fty = f.transpose() * y;
    Vector v = Vector::Ones(h.rows());
    double lmax = 1.0;
    for (int i = 0; i < 500; ++i) {
        Vector hv = h * v;
        lmax = hv.norm() / v.norm();
        v = hv / hv.norm();
    }
    const double step = 1.0 / (1.01 * lmax);
    Matrix w = Matrix::Zero(f.cols(), y.cols());
    for (int it = 0; it < max_iter; ++it) {
        const Matrix g = h * w - fty;
        if (g.cwiseAbs().maxCoeff() < 1e-13) break;
        w -= step * g;
    }
    return w;
}

inline double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

inline Matrix one_hot_random(Rng& rng, Eigen::Index n, int classes = 4) {
    Matrix y = Matrix::Zero(n, classes);
    for (Eigen::Index r = 0; r < n; ++r) y(r, static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(classes)))) = 1.0;
    return y;
}

inline FeaturePair random_pair(Rng& rng, int d, int frames, int locations, int label = 0, int species = 0) {
    FeaturePair p;
    p.audio = rng.normal_matrix(d, 1, 1.0).col(0);
    p.visual = VisualTensor(frames, locations, rng.normal_matrix(static_cast<Eigen::Index>(frames) * locations, d, 1.0));
    p.label = intensity_from_index(label);
    p.species_id = species;
    return p;
}

/// Largest entrywise relative error, with an absolute floor for tiny entries.
inline double rel_error(const Matrix& a, const Matrix& b, double floor = 1e-6) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double denom = std::max({std::abs(a.data()[i]), std::abs(b.data()[i]), floor});
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]) / denom);
    }
    return worst;
}

}  // namespace hail::testing

#pragma once

#include <map>

#include "hail/fusion.hpp"
#include "hail/numeric.hpp"

namespace hail {

/// Linear decay of the general-head weight across stages.
struct GammaSchedule {
    double gamma_max = 0.8;
    double gamma_min = 0.3;
    int total_stages = 1;

    void validate() const;
};

/// gamma_max - (gamma_max - gamma_min) * k / K, for 0 <= k <= K.
double gamma_at(const GammaSchedule& sched, int k);

/// Per-species, per-class logistic weights over the concatenated modality features.
struct ModalityBalancer {
    /// species -> 4 x (d_a + d_v); row i is the weight vector of class i.
    std::map<int, Matrix> weights;
    double default_beta = 0.5;
    bool strict = false;  // reject species without trained weights instead of using default_beta

    std::size_t value_count() const;
};

struct ModalityBetas {
    Vector audio;   // 4
    Vector visual;  // 4, equals 1 - audio
};

ModalityBetas beta_weights(const Vector& audio, const Vector& visual, const ModalityBalancer& balancer, int species);

}  // namespace hail

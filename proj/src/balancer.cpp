#include "hail/balancer.hpp"

#include <string>

namespace hail {

void GammaSchedule::validate() const {
    require(total_stages >= 1, "GammaSchedule: total_stages must be at least 1");
    require(0.0 <= gamma_min && gamma_min <= gamma_max && gamma_max <= 1.0,
            "GammaSchedule: need 0 <= gamma_min <= gamma_max <= 1");
}

double gamma_at(const GammaSchedule& sched, int k) {
    sched.validate();
    require(k >= 0 && k <= sched.total_stages, "gamma_at: stage " + std::to_string(k) + " outside [0, K]");
    if (k == 0) return sched.gamma_max;
    if (k == sched.total_stages) return sched.gamma_min;
    return sched.gamma_max - (sched.gamma_max - sched.gamma_min) * static_cast<double>(k) / sched.total_stages;
}

std::size_t ModalityBalancer::value_count() const {
    std::size_t n = 0;
    for (const auto& [id, w] : weights) n += static_cast<std::size_t>(w.size());
    return n;
}

ModalityBetas beta_weights(const Vector& audio, const Vector& visual, const ModalityBalancer& balancer, int species) {
    ModalityBetas b;
    const auto it = balancer.weights.find(species);
    if (it == balancer.weights.end()) {
        require(!balancer.strict, "beta_weights: no balancer weights for species " + std::to_string(species));
        b.audio = Vector::Constant(kNumIntensities, balancer.default_beta);
    } else {
        const Matrix& w = it->second;
        require(w.rows() == kNumIntensities && w.cols() == audio.size() + visual.size(),
                "beta_weights: weight shape does not match concatenated features");
        const Vector z = w.leftCols(audio.size()) * audio + w.rightCols(visual.size()) * visual;
        b.audio = z.unaryExpr([](double v) { return sigmoid(v); });
    }
    b.visual = (1.0 - b.audio.array()).matrix();
    return b;
}

}  // namespace hail

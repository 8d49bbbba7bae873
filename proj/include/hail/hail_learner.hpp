#pragma once

#include <cstdint>

#include "hail/baselines.hpp"
#include "hail/core.hpp"
#include "hail/inference.hpp"
#include "hail/prototypes.hpp"

namespace hail {

struct HailConfig {
    RidgeConfig ridge;                               // eta = 1.0
    int prototypes_per_intensity = kDefaultPrototypesPerIntensity;
    double alpha = kDefaultEmaAlpha;
    GammaSchedule gamma;                             // 0.8 -> 0.3
    Modality modality = Modality::audio_visual;
    bool use_prototypes = true;                      // false: refit the general head on new data only
    bool joint = false;                              // general head refit on every stage's rows (upper bound)
    Routing routing = Routing::prototype;
    BalancerTrainConfig balancer;
    std::uint64_t seed = 0;
};

/// Everything needed to reproduce HAIL predictions.
struct HailState {
    FusionParams fusion;
    HailModel model;
    PrototypeBank bank;
    int stages_learned = 0;
    Routing routing = Routing::prototype;
};

/// Stage-by-stage driver: closed-form general and species heads, prototype
/// bank maintenance, balancer fitting, and batch prediction.
class HailLearner : public IncrementalLearner {
public:
    HailLearner(const HailConfig& cfg, const FeaturePipeline& pipeline);
    explicit HailLearner(HailState state) : state_(std::move(state)) {}

    std::string_view name() const override;
    bool exemplar_free() const override { return !cfg_.joint; }
    void learn_species(const FeatureSet& train, const FeatureSet& val, int species_id) override;
    Matrix predict(const FeatureSet& features) const override;
    std::size_t storage_values() const override;

    /// Stage index used for gamma: species learned so far minus one.
    int current_stage() const;
    const HailState& state() const { return state_; }

private:
    HailConfig cfg_;
    HailState state_;
    std::vector<FeatureSet> seen_;  // joint mode only
};

}  // namespace hail

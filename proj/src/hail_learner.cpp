#include "hail/hail_learner.hpp"

#include <algorithm>

namespace hail {

HailLearner::HailLearner(const HailConfig& cfg, const FeaturePipeline& pipeline) : cfg_(cfg) {
    cfg.gamma.validate();
    require(cfg.prototypes_per_intensity >= 1, "HailLearner: m must be at least 1");
    require(cfg.alpha >= 0.0 && cfg.alpha <= 1.0, "HailLearner: alpha must lie in [0, 1]");
    require(!cfg.joint || cfg.modality == Modality::audio_visual, "HailLearner: joint mode is audio-visual only");
    state_.fusion = pipeline.fusion;
    state_.routing = cfg.routing;
    HailModel& m = state_.model;
    m.expansion_av = pipeline.av;
    m.expansion_a = pipeline.audio;
    m.expansion_v = pipeline.visual;
    m.gamma = cfg.gamma;
    m.ridge = cfg.ridge;
    m.modality = cfg.modality;
    state_.bank.m = cfg.prototypes_per_intensity;
    state_.bank.alpha = cfg.alpha;
}

std::string_view HailLearner::name() const {
    if (cfg_.joint) return "joint_upper";
    if (!cfg_.use_prototypes) return "hail_no_proto";
    if (state_.routing == Routing::oracle) return "hail_oracle";
    switch (state_.model.modality) {
        case Modality::audio: return "hail_audio_only";
        case Modality::visual: return "hail_visual_only";
        case Modality::audio_visual: break;
    }
    return "hail";
}

void HailLearner::learn_species(const FeatureSet& train, const FeatureSet& val, int species_id) {
    require(species_id >= 0, "HailLearner: species id must be non-negative");
    require(train.size() >= 1, "HailLearner: empty training split");
    HailModel& model = state_.model;
    PrototypeBank& bank = state_.bank;
    const Matrix& x = general_input(train, model.modality);
    const Matrix y = one_hot(train.labels);
    const std::uint64_t stage_seed = mix_seed(cfg_.seed, static_cast<std::uint64_t>(species_id));

    if (cfg_.joint) {
        seen_.push_back(train);
        model.w_general = joint_upper_bound(seen_, model.ridge);
    } else if (!model.initialized() || !cfg_.use_prototypes) {
        model.w_general = fit_general(x, y, model.ridge);
    } else {
        model.w_general = incremental_update(model, x, y, bank);
    }

    if (cfg_.use_prototypes && !cfg_.joint) {
        if (bank.has_general())
            bank.general = ema_update(bank, x, train.labels, mix_seed(stage_seed, 11));
        else
            bank.general = build_general(x, train.labels, bank.m, mix_seed(stage_seed, 11));
    }

    model.species_heads[species_id] = fit_species(train.audio, train.visual, y, model.ridge);
    bank.species[species_id] =
        build_species(train.audio, train.visual, train.labels, species_id, bank.m, mix_seed(stage_seed, 12));
    if (std::find(model.species_order.begin(), model.species_order.end(), species_id) == model.species_order.end())
        model.species_order.push_back(species_id);

    if (model.modality == Modality::audio_visual) {
        const FeatureSet& fit_on = val.size() > 0 ? val : train;
        model.balancer =
            train_balancer(model.balancer, species_id, fit_on.audio, fit_on.visual, fit_on.labels, model, cfg_.balancer);
    }
    ++state_.stages_learned;
}

int HailLearner::current_stage() const {
    return std::clamp(state_.stages_learned - 1, 0, state_.model.gamma.total_stages);
}

Matrix HailLearner::predict(const FeatureSet& features) const {
    Matrix probs(features.size(), kNumIntensities);
    const int stage = current_stage();
    for (Eigen::Index r = 0; r < features.size(); ++r) {
        std::optional<int> sp;
        if (state_.routing == Routing::oracle) sp = features.species[static_cast<std::size_t>(r)];
        probs.row(r) =
            predict_features(state_.model, state_.bank, features.row(r), stage, state_.routing, sp).probs.transpose();
    }
    return probs;
}

std::size_t HailLearner::storage_values() const {
    std::size_t n = state_.model.value_count() + state_.bank.value_count();
    for (const auto& s : seen_) n += static_cast<std::size_t>(s.general.size()) + s.labels.size();
    return n;
}

}  // namespace hail

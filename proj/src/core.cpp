#include "hail/core.hpp"

#include <algorithm>
#include <cmath>

namespace hail {

ExpansionMap ExpansionMap::create(int in_dim, int out_dim, std::uint64_t seed, double scale) {
    require(in_dim >= 1, "ExpansionMap: input dimension must be positive");
    require(out_dim >= in_dim, "ExpansionMap: output dimension must be at least the input dimension");
    if (scale <= 0.0) scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
    ExpansionMap m;
    m.in_dim = in_dim;
    m.out_dim = out_dim;
    m.seed = seed;
    m.scale = scale;
    Rng rng(seed);
    m.w_up = rng.uniform_matrix(in_dim, out_dim, scale);
    return m;
}

Vector expand(const Vector& f, const ExpansionMap& map) {
    require(f.size() == map.in_dim, "expand: input length does not match the expansion map");
    return (map.w_up.transpose() * f).cwiseMax(0.0);
}

Matrix expand_rows(const Matrix& rows, const ExpansionMap& map) {
    require(rows.cols() == map.in_dim, "expand_rows: column count does not match the expansion map");
    return relu(rows * map.w_up);
}

Matrix one_hot(std::span<const int> labels) {
    Matrix y = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), kNumIntensities);
    for (std::size_t r = 0; r < labels.size(); ++r) {
        require(labels[r] >= 0 && labels[r] < kNumIntensities, "one_hot: label out of range");
        y(static_cast<Eigen::Index>(r), labels[r]) = 1.0;
    }
    return y;
}

Matrix fit_general(const Matrix& features, const Matrix& targets, const RidgeConfig& cfg) {
    require(features.rows() >= 1, "fit_general: no samples");
    require(targets.cols() == kNumIntensities, "fit_general: targets must have 4 columns");
    return ridge_solve(features, targets, cfg);
}

SpeciesHead fit_species(const Matrix& audio, const Matrix& visual, const Matrix& targets, const RidgeConfig& cfg) {
    return {fit_general(audio, targets, cfg), fit_general(visual, targets, cfg)};
}

double prototype_weight(std::optional<double> similarity) {
    if (!similarity) return 1.0;
    return std::clamp(std::max(kPrototypeWeightFloor, *similarity), kPrototypeWeightFloor, 1.0);
}

AugmentedBatch build_augmented(const Matrix& features, const Matrix& targets, const PrototypeBank& bank) {
    require(features.rows() == targets.rows(), "build_augmented: feature and label row counts differ");
    require(features.rows() >= 1, "build_augmented: no samples");
    if (!bank.has_general()) return {features, targets, 1.0};

    std::vector<int> proto_labels;
    const Matrix protos = bank.general_rows(&proto_labels);
    require(protos.cols() == features.cols(), "build_augmented: prototype dimension differs from features");

    const Vector centroid = features.colwise().mean().transpose();
    AugmentedBatch out;
    out.lambda_p = prototype_weight(similarity_to_bank(centroid, bank));
    out.features.resize(features.rows() + protos.rows(), features.cols());
    out.features << features, out.lambda_p * protos;
    out.labels.resize(targets.rows() + protos.rows(), targets.cols());
    out.labels << targets, one_hot(proto_labels);
    return out;
}

Matrix incremental_update(const HailModel& model, const Matrix& features, const Matrix& targets,
                          const PrototypeBank& bank) {
    require(model.initialized(), "incremental_update: model has not been fitted on a first species");
    const AugmentedBatch batch = build_augmented(features, targets, bank);
    return ridge_solve(batch.features, batch.labels, model.ridge);
}

std::size_t HailModel::value_count() const {
    std::size_t n = static_cast<std::size_t>(w_general.size()) + balancer.value_count();
    for (const auto& [id, h] : species_heads) n += static_cast<std::size_t>(h.audio.size() + h.visual.size());
    return n;
}

}  // namespace hail

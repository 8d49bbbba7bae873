#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hail/core.hpp"
#include "hail/fusion.hpp"
#include "hail/prototypes.hpp"

namespace hail {

/// Expanded features of one sample: fused (general), audio and visual streams.
struct ExpandedFeatures {
    Vector general;
    Vector audio;
    Vector visual;
};

/// Row-stacked ExpandedFeatures for a batch, plus labels and species ids.
struct FeatureSet {
    Matrix general;
    Matrix audio;
    Matrix visual;
    std::vector<int> labels;
    std::vector<int> species;

    Eigen::Index size() const { return general.rows(); }
    ExpandedFeatures row(Eigen::Index r) const;
    FeatureSet subset(std::span<const Eigen::Index> rows) const;
    /// Vertical concatenation; column counts must agree.
    static FeatureSet concat(std::span<const FeatureSet> parts);
};

/// Frozen fusion block plus the three expansion maps.
struct FeaturePipeline {
    FusionParams fusion;
    ExpansionMap av;
    ExpansionMap audio;
    ExpansionMap visual;

    ExpandedFeatures extract(const FeaturePair& sample) const;
    FeatureSet extract(std::span<const FeaturePair> samples) const;
};

/// Inputs a model of the given modality reads for its general head.
const Vector& general_input(const ExpandedFeatures& f, Modality m);
const Matrix& general_input(const FeatureSet& f, Modality m);

/// Species whose prototypes best match the sample: per species, the largest
/// cosine against its audio prototypes and against its visual prototypes,
/// averaged. Lowest species id wins ties. Empty when the bank has no species.
std::optional<int> route_species(const Vector& audio, const Vector& visual, const PrototypeBank& bank,
                                 Modality modality = Modality::audio_visual);

enum class Routing { prototype, oracle };

struct Prediction {
    Vector probs;  // 4
    Intensity predicted = Intensity::None;
    int routed_species = -1;
    double gamma_used = 0.0;
    Vector beta_a;  // 4
};

/// softmax(gamma_k * W_av^T F_av + (1 - gamma_k) * (beta_a (.) W_a^T F_a + beta_v (.) W_v^T F_v)).
/// Oracle routing reads `species`; prototype routing ignores it.
Prediction predict_features(const HailModel& model, const PrototypeBank& bank, const ExpandedFeatures& features,
                            int stage, Routing routing, std::optional<int> species = std::nullopt);

/// Single-sample prediction from raw features through fusion and the model's expansion maps.
/// Oracle routing uses sample.species_id, which must be non-negative.
Prediction predict(const HailModel& model, const PrototypeBank& bank, const FeaturePair& sample,
                   const FusionParams& fusion, int stage, Routing routing);

struct BalancerTrainConfig {
    int steps = 200;
    double lr = 0.5;
};

/// Mean cross-entropy of softmax(beta_a (.) z_a + beta_v (.) z_v) for one species' samples.
double balancer_loss(const Matrix& weights, const SpeciesHead& head, const Matrix& audio, const Matrix& visual,
                     std::span<const int> labels);
Matrix balancer_gradient(const Matrix& weights, const SpeciesHead& head, const Matrix& audio, const Matrix& visual,
                         std::span<const int> labels);

/// Full-batch gradient descent on balancer_loss for `species`; weights start
/// at zero (beta = 0.5) unless already trained.
ModalityBalancer train_balancer(ModalityBalancer balancer, int species, const Matrix& audio, const Matrix& visual,
                                std::span<const int> labels, const HailModel& model, const BalancerTrainConfig& cfg);

}  // namespace hail

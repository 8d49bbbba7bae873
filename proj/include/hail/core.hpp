#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "hail/balancer.hpp"
#include "hail/numeric.hpp"
#include "hail/prototypes.hpp"

namespace hail {

inline constexpr int kDefaultExpansionRatio = 10;

/// Fixed random lift d -> d_up followed by ReLU. The matrix is a pure
/// function of (in_dim, out_dim, seed, scale).
struct ExpansionMap {
    int in_dim = 0;
    int out_dim = 0;
    std::uint64_t seed = 0;
    double scale = 0.0;
    Matrix w_up;  // in_dim x out_dim, entries uniform in [-scale, scale]

    /// scale <= 0 picks 1/sqrt(in_dim).
    static ExpansionMap create(int in_dim, int out_dim, std::uint64_t seed, double scale = 0.0);
};

Vector expand(const Vector& f, const ExpansionMap& map);
/// Row-wise expand of a sample matrix.
Matrix expand_rows(const Matrix& rows, const ExpansionMap& map);

/// n x 4 one-hot targets, column = intensity index.
Matrix one_hot(std::span<const int> labels);

Matrix fit_general(const Matrix& features, const Matrix& targets, const RidgeConfig& cfg = {});

struct SpeciesHead {
    Matrix audio;   // d_up_a x 4
    Matrix visual;  // d_up_v x 4
};

SpeciesHead fit_species(const Matrix& audio, const Matrix& visual, const Matrix& targets, const RidgeConfig& cfg = {});

inline constexpr double kPrototypeWeightFloor = 0.2;

/// New-species rows stacked over lambda_p-scaled general prototypes.
struct AugmentedBatch {
    Matrix features;
    Matrix labels;
    double lambda_p = 1.0;
};

/// lambda_p = clamp(max(0.2, similarity), ., 1); no similarity (empty bank) gives 1.
double prototype_weight(std::optional<double> similarity);

AugmentedBatch build_augmented(const Matrix& features, const Matrix& targets, const PrototypeBank& bank);

/// Which feature streams the model consumes.
enum class Modality { audio_visual, audio, visual };

struct HailModel {
    Matrix w_general;                          // d_up x 4
    std::map<int, SpeciesHead> species_heads;
    std::vector<int> species_order;            // learning order of species_heads keys
    ExpansionMap expansion_av;
    ExpansionMap expansion_a;
    ExpansionMap expansion_v;
    GammaSchedule gamma;
    ModalityBalancer balancer;
    RidgeConfig ridge;
    Modality modality = Modality::audio_visual;

    bool initialized() const { return w_general.size() > 0; }
    std::size_t value_count() const;
};

/// Ridge solve over the prototype-augmented batch; the caller installs the result.
Matrix incremental_update(const HailModel& model, const Matrix& features, const Matrix& targets,
                          const PrototypeBank& bank);

}  // namespace hail

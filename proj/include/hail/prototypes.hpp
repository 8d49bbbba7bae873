#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hail/fusion.hpp"
#include "hail/numeric.hpp"

namespace hail {

/// m prototypes per intensity; an intensity with no data has a 0-row matrix.
using IntensityPrototypes = std::array<Matrix, kNumIntensities>;

struct SpeciesPrototypes {
    IntensityPrototypes audio;
    IntensityPrototypes visual;
};

inline constexpr int kDefaultPrototypesPerIntensity = 5;
inline constexpr double kDefaultEmaAlpha = 0.7;

/// General intensity prototypes (shared across species, EMA-updated) and
/// per-species audio/visual prototypes (frozen once built).
struct PrototypeBank {
    int m = kDefaultPrototypesPerIntensity;
    double alpha = kDefaultEmaAlpha;
    IntensityPrototypes general;
    std::map<int, SpeciesPrototypes> species;

    bool has_general() const;
    /// All general prototypes stacked intensity-major, with their intensity indices.
    Matrix general_rows(std::vector<int>* intensities = nullptr) const;
    std::size_t value_count() const;
};

/// Per intensity, k-means with k = min(m, count) on that intensity's rows.
/// Short intensities are padded to m rows by repeating centroids cyclically.
/// Intensities with no rows stay empty and get a line in `warnings`.
IntensityPrototypes build_general(const Matrix& features, std::span<const int> labels, int m, std::uint64_t seed,
                                  std::vector<std::string>* warnings = nullptr);

SpeciesPrototypes build_species(const Matrix& audio, const Matrix& visual, std::span<const int> labels,
                                int species_id, int m, std::uint64_t seed);

/// Blend new-data cluster means into the general prototypes:
/// p <- alpha * p + (1 - alpha) * mean, for old prototypes greedily matched
/// (ascending Euclidean distance) to the new centroids of the same intensity.
IntensityPrototypes ema_update(const PrototypeBank& bank, const Matrix& features, std::span<const int> labels,
                               std::uint64_t seed);

/// Mean cosine similarity between `mean` and every general prototype.
/// Empty optional when the bank holds no general prototypes.
std::optional<double> similarity_to_bank(const Vector& mean, const PrototypeBank& bank);

}  // namespace hail

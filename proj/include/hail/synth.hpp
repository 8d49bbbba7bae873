#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hail/fusion.hpp"

namespace hail {

/// Knobs of the synthetic audio-visual feeding-intensity stream.
///
/// Every sample of species k, intensity i is built from
///   signal = e_i + rotation * B_k[:, i] + offset * B_k[:, 4] + mode
/// where e_i are four shared axes, B_k is a species-specific orthonormal
/// frame drawn in the remaining d - 4 dimensions, and `mode` is one of
/// `modes_per_class` fixed perturbations of norm `mode_spread`. Audio is
/// signal + audio noise; each visual tile (l, s) is a jittered copy
/// g * signal + visual noise, g uniform in [1 - jitter, 1 + jitter].
struct SynthConfig {
    int n_species = 6;
    int train_per_class = 200;
    int val_per_class = 30;
    int test_per_class = 60;
    int d = 16;
    int frames = 4;
    int locations = 4;
    /// Per-species noise standard deviations; a single value applies to all species.
    std::vector<double> audio_noise{0.8};
    std::vector<double> visual_noise{3.0};
    double species_rotation_strength = 2.0;
    double species_offset_strength = 3.0;
    int modes_per_class = 4;
    double mode_spread = 2.0;
    double tile_jitter = 0.5;
    std::uint64_t seed = 0;

    double audio_noise_for(int species) const;
    double visual_noise_for(int species) const;
    void validate() const;
    /// Smallest d hosting the four shared axes plus a five-column species frame.
    static constexpr int kMinDim = 9;
};

struct SpeciesStage {
    int species_id = 0;
    std::vector<FeaturePair> train;
    std::vector<FeaturePair> val;
    std::vector<FeaturePair> test;
};

/// Species stages in learning order (ids 0..n_species-1).
std::vector<SpeciesStage> generate(const SynthConfig& cfg);

/// Copy of `stage` with extra Gaussian noise: `turbidity` on every visual
/// entry, `acoustic_noise` on every audio entry.
SpeciesStage degrade(const SpeciesStage& stage, double turbidity, double acoustic_noise, std::uint64_t seed);

/// Between-class over within-class power of the pooled visual features.
double visual_snr(std::span<const FeaturePair> samples);

enum class Split { train, val, test };
std::string_view split_name(Split s);

/// Columnar dataset file, little-endian:
///   "AVC1" | u32 version=1 | u32 d | u32 L | u32 S | u32 n_species | u64 seed | u64 count
///   i32 species[count] | u8 label[count] | f64 audio[count*d] | f64 visual[count*L*S*d]
/// Visual entries run frame-major, then location, then channel.
struct DatasetHeader {
    std::uint32_t version = 1;
    std::uint32_t d = 0;
    std::uint32_t frames = 0;
    std::uint32_t locations = 0;
    std::uint32_t n_species = 0;
    std::uint64_t seed = 0;
    std::uint64_t count = 0;
};

inline constexpr std::uint32_t kDatasetVersion = 1;

std::string encode_dataset(std::span<const SpeciesStage> stages, Split split, std::uint64_t seed);
std::vector<FeaturePair> decode_dataset(std::string_view bytes, DatasetHeader* header = nullptr);

void write_dataset(const std::filesystem::path& path, std::span<const SpeciesStage> stages, Split split,
                   std::uint64_t seed);
std::vector<FeaturePair> read_dataset(const std::filesystem::path& path, DatasetHeader* header = nullptr);

}  // namespace hail

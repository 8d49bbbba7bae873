#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "hail/hail_learner.hpp"

namespace hail {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary HAIL state, little-endian:
///   "HAIL" | u32 version | u32 d | u32 d_up_av | u32 d_up_a | u32 d_up_v
///   fusion (4 matrices) | expansion maps as (in, out, seed, scale) triples
///   model: modality, routing, stages, gamma, eta, W_av, species heads
///   balancer | prototype bank
/// Matrices are u64 rows, u64 cols, then f64 entries row-major. Expansion
/// matrices are not stored; they are regenerated from their seeds.
std::string encode_checkpoint(const HailState& state);
HailState decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const HailState& state);
HailState load_checkpoint(const std::filesystem::path& path);

/// Header fields and section sizes, for inspection without a full decode.
struct CheckpointSummary {
    std::uint32_t version = 0;
    std::uint32_t d = 0;
    std::uint32_t d_up_av = 0;
    std::uint32_t d_up_a = 0;
    std::uint32_t d_up_v = 0;
    std::size_t total_bytes = 0;
    int stages_learned = 0;
    int species = 0;
    std::size_t general_prototypes = 0;
    std::size_t species_prototypes = 0;
    std::string modality;
    std::string routing;
};

CheckpointSummary summarize_checkpoint(std::string_view bytes);

}  // namespace hail

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hail/numeric.hpp"

namespace hail {

/// Feeding intensity. The integer values are the one-hot column order.
enum class Intensity : int { None = 0, Weak = 1, Medium = 2, Strong = 3 };

inline constexpr int kNumIntensities = 4;

std::string_view intensity_name(Intensity i);
Intensity intensity_from_index(int index);
inline int index_of(Intensity i) { return static_cast<int>(i); }

/// L x S x d visual feature map stored as an (L*S) x d matrix; row l*S + s
/// holds frame l, spatial location s.
struct VisualTensor {
    int frames = 0;
    int locations = 0;
    Matrix data;

    VisualTensor() = default;
    VisualTensor(int l, int s, Matrix m);

    int channels() const { return static_cast<int>(data.cols()); }
    auto frame(int l) const { return data.middleRows(static_cast<Eigen::Index>(l) * locations, locations); }
    auto frame(int l) { return data.middleRows(static_cast<Eigen::Index>(l) * locations, locations); }
    /// Mean over frames and locations.
    Vector pooled() const { return data.colwise().mean().transpose(); }
};

/// One synchronized audio/visual sample.
struct FeaturePair {
    Vector audio;          // d
    VisualTensor visual;   // L x S x d
    Intensity label = Intensity::None;
    int species_id = 0;    // negative means unknown
};

/// Learnable matrices of the cross-modal attention block, all d x d.
struct FusionParams {
    Matrix w_audio;   // audio score projection
    Matrix w_visual;  // visual score projection
    Matrix u_audio;   // audio branch of the fused output
    Matrix u_visual;  // visual branch of the fused output

    static FusionParams zeros(int d);
    /// Entries uniform in [-scale, scale]; scale <= 0 picks 1/sqrt(d).
    static FusionParams random(int d, std::uint64_t seed, double scale = 0.0);

    int dim() const { return static_cast<int>(w_audio.rows()); }
    void validate() const;

    std::array<Matrix*, 4> mats() { return {&w_audio, &w_visual, &u_audio, &u_visual}; }
    std::array<const Matrix*, 4> mats() const { return {&w_audio, &w_visual, &u_audio, &u_visual}; }
};

/// Every intermediate of the attention forward pass.
struct FusedOutput {
    Vector score_a;           // d
    Matrix score_v;           // (L*S) x d
    Matrix spatial_weights;   // (L*S) x d, softmax over locations per frame and channel
    Matrix frame_scores;      // L x d
    Matrix temporal_weights;  // L x d, softmax over frames per channel
    Vector audio_weights;     // d, softmax over channels
    Vector enhanced_visual;   // d
    Vector enhanced_audio;    // d
    Vector fused;             // d
    double sim_loss = 1.0;    // 1 - cos(enhanced_visual, enhanced_audio), 1 if either is zero
};

FusedOutput fuse_forward(const FeaturePair& input, const FusionParams& params);

inline constexpr double kDefaultLambdaSim = 0.1;

/// Cross-entropy of softmax(fused^T head) against `label`, plus lambda_sim * sim_loss.
double fusion_loss(const FusedOutput& out, const Matrix& head, Intensity label,
                   double lambda_sim = kDefaultLambdaSim);

/// Gradient of fusion_loss with respect to the parameters and the head.
struct FusionGradient {
    FusionParams params;
    Matrix head;
    double loss = 0.0;
};

FusionGradient fusion_gradient(const FeaturePair& input, const FusionParams& params, const Matrix& head,
                               double lambda_sim = kDefaultLambdaSim);

/// Central finite differences of the same loss, one coordinate at a time.
FusionGradient fusion_gradient_fd(const FeaturePair& input, const FusionParams& params, const Matrix& head,
                                  double lambda_sim = kDefaultLambdaSim, double step = 1e-5);

enum class GradMode { analytic, finite_difference };

struct FusionTrainConfig {
    int steps = 200;
    double lr = 0.1;
    GradMode grad_mode = GradMode::analytic;
    double lambda_sim = kDefaultLambdaSim;
    int batch_size = 0;   // 0 = full batch
    std::uint64_t seed = 0;
    double fd_step = 1e-5;
};

struct FusionTrainResult {
    FusionParams params;
    Matrix head;
    std::vector<double> loss_trace;  // mean loss of the batch used at each step, before the update
};

/// Mini-batch gradient descent on the mean fusion_loss.
FusionTrainResult train_fusion(std::span<const FeaturePair> samples, FusionParams params, Matrix head,
                               const FusionTrainConfig& cfg);

double mean_fusion_loss(std::span<const FeaturePair> samples, const FusionParams& params, const Matrix& head,
                        double lambda_sim = kDefaultLambdaSim);

}  // namespace hail

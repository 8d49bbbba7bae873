#include "hail/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace hail {

std::string_view intensity_name(Intensity i) {
    switch (i) {
        case Intensity::None: return "None";
        case Intensity::Weak: return "Weak";
        case Intensity::Medium: return "Medium";
        case Intensity::Strong: return "Strong";
    }
    return "?";
}

Intensity intensity_from_index(int index) {
    require(index >= 0 && index < kNumIntensities, "intensity index out of range: " + std::to_string(index));
    return static_cast<Intensity>(index);
}

VisualTensor::VisualTensor(int l, int s, Matrix m) : frames(l), locations(s), data(std::move(m)) {
    require(l >= 1 && s >= 1, "VisualTensor: frames and locations must be positive");
    require(data.rows() == static_cast<Eigen::Index>(l) * s, "VisualTensor: row count must equal frames*locations");
}

FusionParams FusionParams::zeros(int d) {
    require(d >= 1, "FusionParams: d must be positive");
    return {Matrix::Zero(d, d), Matrix::Zero(d, d), Matrix::Zero(d, d), Matrix::Zero(d, d)};
}

FusionParams FusionParams::random(int d, std::uint64_t seed, double scale) {
    require(d >= 1, "FusionParams: d must be positive");
    if (scale <= 0.0) scale = 1.0 / std::sqrt(static_cast<double>(d));
    Rng rng(seed);
    FusionParams p;
    for (Matrix* m : p.mats()) *m = rng.uniform_matrix(d, d, scale);
    return p;
}

void FusionParams::validate() const {
    const auto d = w_audio.rows();
    for (const Matrix* m : mats()) {
        require(m->rows() == d && m->cols() == d, "FusionParams: all matrices must be d x d");
        require_finite(*m, "FusionParams");
    }
}

namespace {

// Softmax down each column.
Matrix column_softmax(const Matrix& m) {
    Matrix e = (m.rowwise() - m.colwise().maxCoeff()).array().exp().matrix();
    return e.array().rowwise() / e.colwise().sum().array();
}

void check_input(const FeaturePair& input, const FusionParams& params) {
    params.validate();
    const auto d = params.w_audio.rows();
    require(input.audio.size() == d, "fuse_forward: audio length does not match parameter dimension");
    require(input.visual.frames >= 1 && input.visual.locations >= 1, "fuse_forward: empty visual tensor");
    require(input.visual.data.cols() == d, "fuse_forward: visual channel count does not match parameter dimension");
    require(input.visual.data.rows() == static_cast<Eigen::Index>(input.visual.frames) * input.visual.locations,
            "fuse_forward: visual tensor shape inconsistent");
}

struct ForwardCache {
    FusedOutput out;
    Matrix pooled_frames;  // L x d, sum over locations of f^v_l (.) w^Spa_l
    Vector visual_branch;  // tanh(f'^v U^v)
    Vector audio_branch;   // tanh(f'^a U^a)
};

ForwardCache forward(const FeaturePair& input, const FusionParams& p) {
    check_input(input, p);
    const int L = input.visual.frames;
    const int S = input.visual.locations;
    const auto d = p.w_audio.rows();
    const Matrix& x = input.visual.data;

    ForwardCache c;
    FusedOutput& o = c.out;
    o.score_a = (p.w_audio.transpose() * input.audio).array().tanh().matrix();
    o.score_v = (x * p.w_visual).array().tanh().matrix();

    o.spatial_weights.resize(x.rows(), d);
    o.frame_scores.resize(L, d);
    c.pooled_frames.resize(L, d);
    for (int l = 0; l < L; ++l) {
        const auto rows = o.score_v.middleRows(static_cast<Eigen::Index>(l) * S, S);
        const Matrix z = rows.array().rowwise() * o.score_a.transpose().array();
        const Matrix w = column_softmax(z);
        o.spatial_weights.middleRows(static_cast<Eigen::Index>(l) * S, S) = w;
        o.frame_scores.row(l) = (w.array() * rows.array()).colwise().sum();
        c.pooled_frames.row(l) = (w.array() * input.visual.frame(l).array()).colwise().sum();
    }
    o.temporal_weights = column_softmax(o.frame_scores);

    const Vector mean_visual_score = o.score_v.colwise().mean().transpose();
    o.audio_weights = stable_softmax(mean_visual_score.cwiseProduct(o.score_a));

    o.enhanced_visual = (o.temporal_weights.array() * c.pooled_frames.array()).colwise().sum().transpose();
    o.enhanced_audio = input.audio.cwiseProduct(o.audio_weights);

    const double nv = o.enhanced_visual.norm();
    const double na = o.enhanced_audio.norm();
    o.sim_loss = (nv == 0.0 || na == 0.0) ? 1.0 : 1.0 - cosine_similarity(o.enhanced_visual, o.enhanced_audio);

    c.visual_branch = (p.u_visual.transpose() * o.enhanced_visual).array().tanh().matrix();
    c.audio_branch = (p.u_audio.transpose() * o.enhanced_audio).array().tanh().matrix();
    o.fused = c.visual_branch + c.audio_branch;
    return c;
}

void check_head(const Matrix& head, Eigen::Index d) {
    require(head.rows() == d && head.cols() == kNumIntensities, "fusion head must be d x 4");
}

// Backprop through a column-wise softmax: dz = w (.) (dw - sum(dw (.) w)).
Matrix column_softmax_backward(const Matrix& w, const Matrix& dw) {
    const Eigen::RowVectorXd inner = (dw.array() * w.array()).colwise().sum();
    return w.array() * (dw.rowwise() - inner).array();
}

}  // namespace

FusedOutput fuse_forward(const FeaturePair& input, const FusionParams& params) {
    return forward(input, params).out;
}

double fusion_loss(const FusedOutput& out, const Matrix& head, Intensity label, double lambda_sim) {
    check_head(head, out.fused.size());
    const Vector logits = head.transpose() * out.fused;
    const Vector p = stable_softmax(logits);
    return -std::log(p(index_of(label))) + lambda_sim * out.sim_loss;
}

FusionGradient fusion_gradient(const FeaturePair& input, const FusionParams& params, const Matrix& head,
                               double lambda_sim) {
    const ForwardCache c = forward(input, params);
    const FusedOutput& o = c.out;
    const int L = input.visual.frames;
    const int S = input.visual.locations;
    const auto d = params.w_audio.rows();
    check_head(head, d);

    FusionGradient g;
    g.params = FusionParams::zeros(static_cast<int>(d));

    // classifier head
    const Vector logits = head.transpose() * o.fused;
    const Vector prob = stable_softmax(logits);
    const int y = index_of(input.label);
    g.loss = -std::log(prob(y)) + lambda_sim * o.sim_loss;
    Vector dlogits = prob;
    dlogits(y) -= 1.0;
    g.head = o.fused * dlogits.transpose();
    const Vector dfused = head * dlogits;

    // fused = tanh(U_v^T ev) + tanh(U_a^T ea)
    const Vector dpre_v = dfused.cwiseProduct((1.0 - c.visual_branch.array().square()).matrix());
    const Vector dpre_a = dfused.cwiseProduct((1.0 - c.audio_branch.array().square()).matrix());
    g.params.u_visual = o.enhanced_visual * dpre_v.transpose();
    g.params.u_audio = o.enhanced_audio * dpre_a.transpose();
    Vector d_ev = params.u_visual * dpre_v;
    Vector d_ea = params.u_audio * dpre_a;

    // similarity term
    const double nv = o.enhanced_visual.norm();
    const double na = o.enhanced_audio.norm();
    if (lambda_sim != 0.0 && nv > 0.0 && na > 0.0) {
        const double cos = o.enhanced_visual.dot(o.enhanced_audio) / (nv * na);
        d_ev -= lambda_sim * (o.enhanced_audio / (nv * na) - cos * o.enhanced_visual / (nv * nv));
        d_ea -= lambda_sim * (o.enhanced_visual / (nv * na) - cos * o.enhanced_audio / (na * na));
    }

    // audio path: ea = a (.) softmax(m (.) sa)
    const Vector d_wau = d_ea.cwiseProduct(input.audio);
    const Vector d_za = o.audio_weights.cwiseProduct((d_wau.array() - d_wau.dot(o.audio_weights)).matrix());
    const Vector mean_visual_score = o.score_v.colwise().mean().transpose();
    Vector d_sa = d_za.cwiseProduct(mean_visual_score);
    const Vector d_mean = d_za.cwiseProduct(o.score_a);
    Matrix d_sv = (d_mean / static_cast<double>(o.score_v.rows())).transpose().replicate(o.score_v.rows(), 1);

    // visual path: ev = sum_l w^Tem_l (.) g_l
    const Matrix d_wt = (c.pooled_frames.array().rowwise() * d_ev.transpose().array()).matrix();
    const Matrix d_g = (o.temporal_weights.array().rowwise() * d_ev.transpose().array()).matrix();
    const Matrix d_q = column_softmax_backward(o.temporal_weights, d_wt);

    for (int l = 0; l < L; ++l) {
        const Eigen::Index r0 = static_cast<Eigen::Index>(l) * S;
        const auto sv = o.score_v.middleRows(r0, S);
        const auto wsp = o.spatial_weights.middleRows(r0, S);
        const auto xl = input.visual.frame(l);
        // g_l = sum_s x_l (.) w_l ; q_l = sum_s w_l (.) sv_l
        Matrix d_wsp = xl.array().rowwise() * d_g.row(l).array();
        d_wsp.array() += sv.array().rowwise() * d_q.row(l).array();
        d_sv.middleRows(r0, S).array() += wsp.array().rowwise() * d_q.row(l).array();
        const Matrix d_z = column_softmax_backward(wsp, d_wsp);
        // z_l = sv_l (.) sa
        d_sv.middleRows(r0, S).array() += d_z.array().rowwise() * o.score_a.transpose().array();
        d_sa += (d_z.array() * sv.array()).colwise().sum().transpose().matrix();
    }

    const Matrix d_pv = d_sv.array() * (1.0 - o.score_v.array().square());
    g.params.w_visual = input.visual.data.transpose() * d_pv;
    const Vector d_pa = d_sa.cwiseProduct((1.0 - o.score_a.array().square()).matrix());
    g.params.w_audio = input.audio * d_pa.transpose();
    return g;
}

FusionGradient fusion_gradient_fd(const FeaturePair& input, const FusionParams& params, const Matrix& head,
                                  double lambda_sim, double step) {
    require(step > 0.0, "fusion_gradient_fd: step must be positive");
    FusionParams p = params;
    Matrix h = head;
    auto loss = [&] { return fusion_loss(fuse_forward(input, p), h, input.label, lambda_sim); };

    FusionGradient g;
    g.loss = loss();
    g.params = FusionParams::zeros(params.dim());
    g.head = Matrix::Zero(head.rows(), head.cols());

    auto differentiate = [&](Matrix& target, Matrix& out) {
        for (Eigen::Index i = 0; i < target.rows(); ++i) {
            for (Eigen::Index j = 0; j < target.cols(); ++j) {
                const double saved = target(i, j);
                target(i, j) = saved + step;
                const double up = loss();
                target(i, j) = saved - step;
                const double down = loss();
                target(i, j) = saved;
                out(i, j) = (up - down) / (2.0 * step);
            }
        }
    };
    auto src = p.mats();
    auto dst = g.params.mats();
    for (std::size_t k = 0; k < src.size(); ++k) differentiate(*src[k], *dst[k]);
    differentiate(h, g.head);
    return g;
}

double mean_fusion_loss(std::span<const FeaturePair> samples, const FusionParams& params, const Matrix& head,
                        double lambda_sim) {
    require(!samples.empty(), "mean_fusion_loss: no samples");
    double total = 0.0;
    for (const auto& s : samples) total += fusion_loss(fuse_forward(s, params), head, s.label, lambda_sim);
    return total / static_cast<double>(samples.size());
}

FusionTrainResult train_fusion(std::span<const FeaturePair> samples, FusionParams params, Matrix head,
                               const FusionTrainConfig& cfg) {
    require(cfg.steps >= 1, "train_fusion: steps must be at least 1");
    require(cfg.lr >= 0.0, "train_fusion: lr must be non-negative");
    require(!samples.empty(), "train_fusion: no samples");
    params.validate();
    check_head(head, params.w_audio.rows());

    const std::size_t n = samples.size();
    const std::size_t batch = (cfg.batch_size <= 0) ? n : std::min<std::size_t>(n, static_cast<std::size_t>(cfg.batch_size));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(cfg.seed);
    std::size_t cursor = n;  // forces a shuffle before the first mini-batch

    FusionTrainResult res;
    res.loss_trace.reserve(static_cast<std::size_t>(cfg.steps));
    for (int step = 0; step < cfg.steps; ++step) {
        if (batch < n && cursor + batch > n) {
            for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);
            cursor = 0;
        } else if (batch == n) {
            cursor = 0;
        }

        FusionParams grad = FusionParams::zeros(params.dim());
        Matrix grad_head = Matrix::Zero(head.rows(), head.cols());
        double loss = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
            const FeaturePair& s = samples[order[cursor + b]];
            const FusionGradient g = cfg.grad_mode == GradMode::analytic
                                         ? fusion_gradient(s, params, head, cfg.lambda_sim)
                                         : fusion_gradient_fd(s, params, head, cfg.lambda_sim, cfg.fd_step);
            auto dst = grad.mats();
            auto src = g.params.mats();
            for (std::size_t k = 0; k < dst.size(); ++k) *dst[k] += *src[k];
            grad_head += g.head;
            loss += g.loss;
        }
        cursor += batch;
        loss /= static_cast<double>(batch);
        if (!std::isfinite(loss))
            throw NumericalError("train_fusion: non-finite loss at step " + std::to_string(step));
        res.loss_trace.push_back(loss);

        const double scale = cfg.lr / static_cast<double>(batch);
        auto dst = params.mats();
        auto src = grad.mats();
        for (std::size_t k = 0; k < dst.size(); ++k) *dst[k] -= scale * *src[k];
        head -= scale * grad_head;
    }
    res.params = std::move(params);
    res.head = std::move(head);
    return res;
}

}  // namespace hail

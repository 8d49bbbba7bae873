#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hail/fusion.hpp"
#include "support.hpp"

using namespace hail;
using hail::testing::max_abs;

namespace {

void check_normalized(const FusedOutput& o, int L, int S) {
    for (int l = 0; l < L; ++l) {
        const Matrix w = o.spatial_weights.middleRows(static_cast<Eigen::Index>(l) * S, S);
        for (Eigen::Index c = 0; c < w.cols(); ++c) CHECK(std::abs(w.col(c).sum() - 1.0) <= 1e-9);
    }
    for (Eigen::Index c = 0; c < o.temporal_weights.cols(); ++c)
        CHECK(std::abs(o.temporal_weights.col(c).sum() - 1.0) <= 1e-9);
    CHECK(std::abs(o.audio_weights.sum() - 1.0) <= 1e-9);
    CHECK((o.spatial_weights.array() >= 0).all());
    CHECK((o.temporal_weights.array() >= 0).all());
    CHECK((o.audio_weights.array() >= 0).all());
}

}  // namespace

TEST_CASE("zero parameters: flat attention and a zero fused vector") {
    Rng rng(1);
    const FeaturePair s = testing::random_pair(rng, 5, 3, 4);
    const FusedOutput o = fuse_forward(s, FusionParams::zeros(5));
    CHECK(max_abs(o.score_a) == 0.0);
    CHECK(max_abs(o.score_v) == 0.0);
    CHECK(max_abs(o.spatial_weights.array() - 0.25) <= 1e-15);
    CHECK(max_abs(o.temporal_weights.array() - 1.0 / 3.0) <= 1e-15);
    CHECK(max_abs(o.fused) == 0.0);
    check_normalized(o, 3, 4);
}

TEST_CASE("single frame, single location: weights are exactly one") {
    Rng rng(2);
    const FeaturePair s = testing::random_pair(rng, 4, 1, 1);
    const FusedOutput o = fuse_forward(s, FusionParams::random(4, 9));
    CHECK((o.spatial_weights.array() == 1.0).all());
    CHECK((o.temporal_weights.array() == 1.0).all());
    CHECK(max_abs(o.enhanced_visual - s.visual.data.row(0).transpose()) == 0.0);
}

TEST_CASE("attention weights normalize on random inputs") {
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
        const FeaturePair s = testing::random_pair(rng, 6, 3, 5);
        check_normalized(fuse_forward(s, FusionParams::random(6, 100 + t, 1.5)), 3, 5);
    }
}

TEST_CASE("similarity loss: identical, opposite and scaled enhanced features") {
    // At zero parameters the enhanced visual feature is the pooled visual map
    // and the enhanced audio feature is audio / d.
    Rng rng(4);
    FeaturePair s = testing::random_pair(rng, 3, 2, 2);
    const Vector pooled = s.visual.pooled();
    s.audio = 3.0 * pooled;
    CHECK(fuse_forward(s, FusionParams::zeros(3)).sim_loss == doctest::Approx(0.0).epsilon(1e-12));
    s.audio = -3.0 * pooled;
    CHECK(fuse_forward(s, FusionParams::zeros(3)).sim_loss == doctest::Approx(2.0).epsilon(1e-12));

    FeaturePair t = testing::random_pair(rng, 3, 2, 2);
    const double base = fuse_forward(t, FusionParams::zeros(3)).sim_loss;
    t.audio *= 7.0;
    t.visual.data *= 7.0;
    CHECK(fuse_forward(t, FusionParams::zeros(3)).sim_loss == doctest::Approx(base).epsilon(1e-12));
    CHECK(base >= 0.0);
    CHECK(base <= 2.0);
}

TEST_CASE("zero enhanced feature gives the neutral similarity loss") {
    Rng rng(5);
    FeaturePair s = testing::random_pair(rng, 3, 2, 2);
    s.audio.setZero();
    CHECK(fuse_forward(s, FusionParams::random(3, 1)).sim_loss == 1.0);
}

TEST_CASE("fusion loss values") {
    FusedOutput o;
    o.fused = Vector::Zero(4);
    o.sim_loss = 0.0;
    CHECK(fusion_loss(o, Matrix::Zero(4, 4), Intensity::Weak) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
    o.sim_loss = 1.0;
    CHECK(fusion_loss(o, Matrix::Zero(4, 4), Intensity::Weak, 1.0) ==
          doctest::Approx(std::log(4.0) + 1.0).epsilon(1e-15));
    CHECK(fusion_loss(o, Matrix::Zero(4, 4), Intensity::Strong, 0.0) ==
          doctest::Approx(std::log(4.0)).epsilon(1e-15));
    CHECK_THROWS_AS(fusion_loss(o, Matrix::Zero(3, 4), Intensity::None), ContractError);
}

TEST_CASE("analytic gradient matches central differences") {
    Rng rng(6);
    for (int t = 0; t < 10; ++t) {
        const FeaturePair s = testing::random_pair(rng, 3, 2, 2, t % 4);
        const FusionParams p = FusionParams::random(3, 50 + t, 1.0);
        const Matrix head = rng.normal_matrix(3, 4, 1.0);
        const FusionGradient a = fusion_gradient(s, p, head, 0.5);
        const FusionGradient f = fusion_gradient_fd(s, p, head, 0.5, 1e-5);
        auto am = a.params.mats();
        auto fm = f.params.mats();
        for (std::size_t k = 0; k < am.size(); ++k) CHECK(testing::rel_error(*am[k], *fm[k]) <= 1e-4);
        CHECK(testing::rel_error(a.head, f.head) <= 1e-4);
        CHECK(a.loss == doctest::Approx(fusion_loss(fuse_forward(s, p), head, s.label, 0.5)).epsilon(1e-14));
    }
}

TEST_CASE("shape mismatch is rejected") {
    Rng rng(7);
    const FeaturePair s = testing::random_pair(rng, 3, 2, 2);
    CHECK_THROWS_AS(fuse_forward(s, FusionParams::zeros(4)), ContractError);
    FusionParams bad = FusionParams::zeros(3);
    bad.u_audio = Matrix::Zero(3, 2);
    CHECK_THROWS_AS(fuse_forward(s, bad), ContractError);
}

TEST_CASE("training: zero learning rate leaves parameters unchanged") {
    Rng rng(8);
    std::vector<FeaturePair> data;
    for (int i = 0; i < 6; ++i) data.push_back(testing::random_pair(rng, 3, 2, 2, i % 4));
    const FusionParams p = FusionParams::random(3, 2);
    const Matrix head = rng.normal_matrix(3, 4, 1.0);
    FusionTrainConfig cfg;
    cfg.steps = 1;
    cfg.lr = 0.0;
    const auto r = train_fusion(data, p, head, cfg);
    auto a = r.params.mats();
    auto b = p.mats();
    for (std::size_t k = 0; k < a.size(); ++k) CHECK((a[k]->array() == b[k]->array()).all());
    CHECK((r.head.array() == head.array()).all());
    cfg.steps = 0;
    CHECK_THROWS_AS(train_fusion(data, p, head, cfg), ContractError);
}

TEST_CASE("training lowers the loss on a separable two-class set") {
    Rng rng(9);
    const int d = 4;
    std::vector<FeaturePair> data;
    for (int i = 0; i < 40; ++i) {
        const int label = i % 2 == 0 ? 0 : 3;
        FeaturePair s = testing::random_pair(rng, d, 2, 2, label);
        s.audio *= 0.2;
        s.visual.data *= 0.2;
        const double sign = label == 0 ? 1.0 : -1.0;
        s.audio(0) += 2.0 * sign;
        s.visual.data.col(0).array() += 2.0 * sign;
        data.push_back(std::move(s));
    }
    FusionTrainConfig cfg;
    cfg.steps = 200;
    cfg.lr = 0.2;
    const auto r = train_fusion(data, FusionParams::random(d, 3), Matrix::Zero(d, 4), cfg);
    REQUIRE(r.loss_trace.size() == 200);
    CHECK(r.loss_trace.back() < r.loss_trace.front());
    CHECK(mean_fusion_loss(data, r.params, r.head) < r.loss_trace.front());

    cfg.batch_size = 8;
    cfg.seed = 5;
    const auto a = train_fusion(data, FusionParams::random(d, 3), Matrix::Zero(d, 4), cfg);
    const auto b = train_fusion(data, FusionParams::random(d, 3), Matrix::Zero(d, 4), cfg);
    CHECK(a.loss_trace == b.loss_trace);
}

TEST_CASE("finite-difference training mode agrees with the analytic mode") {
    Rng rng(10);
    std::vector<FeaturePair> data;
    for (int i = 0; i < 4; ++i) data.push_back(testing::random_pair(rng, 3, 2, 2, i));
    FusionTrainConfig cfg;
    cfg.steps = 3;
    cfg.lr = 0.1;
    const auto a = train_fusion(data, FusionParams::random(3, 1), Matrix::Zero(3, 4), cfg);
    cfg.grad_mode = GradMode::finite_difference;
    const auto f = train_fusion(data, FusionParams::random(3, 1), Matrix::Zero(3, 4), cfg);
    for (std::size_t i = 0; i < a.loss_trace.size(); ++i)
        CHECK(a.loss_trace[i] == doctest::Approx(f.loss_trace[i]).epsilon(1e-8));
}

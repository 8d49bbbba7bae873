#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hail/inference.hpp"
#include "support.hpp"

using namespace hail;
using hail::testing::max_abs;

namespace {

Vector basis(int d, int i) {
    Vector v = Vector::Zero(d);
    v(i) = 1.0;
    return v;
}

IntensityPrototypes single(const Vector& p) {
    IntensityPrototypes out;
    for (auto& m : out) m = p.transpose();
    return out;
}

HailModel small_model(int d, int stages) {
    HailModel m;
    Rng rng(11);
    m.w_general = rng.normal_matrix(d, 4, 1.0);
    m.gamma.total_stages = stages;
    for (int k = 0; k < 2; ++k) {
        m.species_heads[k] = SpeciesHead{rng.normal_matrix(d, 4, 1.0), rng.normal_matrix(d, 4, 1.0)};
        m.species_order.push_back(k);
    }
    return m;
}

ExpandedFeatures features(Rng& rng, int d) {
    return {rng.normal_matrix(d, 1, 1.0).col(0).cwiseAbs(), rng.normal_matrix(d, 1, 1.0).col(0).cwiseAbs(),
            rng.normal_matrix(d, 1, 1.0).col(0).cwiseAbs()};
}

}  // namespace

TEST_CASE("gamma schedule endpoints and midpoint") {
    GammaSchedule s{0.8, 0.3, 4};
    CHECK(gamma_at(s, 0) == 0.8);
    CHECK(gamma_at(s, 4) == 0.3);
    CHECK(gamma_at(s, 2) == doctest::Approx(0.55).epsilon(1e-15));
    for (int k = 0; k < 4; ++k) CHECK(gamma_at(s, k + 1) < gamma_at(s, k));
    GammaSchedule flat{0.5, 0.5, 3};
    for (int k = 0; k <= 3; ++k) CHECK(gamma_at(flat, k) == 0.5);
    CHECK_THROWS_AS(gamma_at(s, 5), ContractError);
    CHECK_THROWS_AS(gamma_at(s, -1), ContractError);
    CHECK_THROWS_AS(gamma_at(GammaSchedule{0.3, 0.8, 2}, 0), ContractError);
    CHECK_THROWS_AS(gamma_at(GammaSchedule{0.8, 0.3, 0}, 0), ContractError);
}

TEST_CASE("beta weights") {
    ModalityBalancer b;
    b.weights[0] = Matrix::Zero(4, 6);
    const Vector a = Vector::Ones(3), v = Vector::Ones(3);
    const ModalityBetas half = beta_weights(a, v, b, 0);
    CHECK((half.audio.array() == 0.5).all());
    CHECK((half.visual.array() == 0.5).all());

    Rng rng(1);
    b.weights[1] = rng.normal_matrix(4, 6, 3.0);
    const ModalityBetas r = beta_weights(rng.normal_matrix(3, 1, 1.0).col(0), rng.normal_matrix(3, 1, 1.0).col(0), b, 1);
    for (int i = 0; i < 4; ++i) {
        CHECK(r.audio(i) + r.visual(i) == 1.0);
        CHECK(r.audio(i) > 0.0);
        CHECK(r.audio(i) < 1.0);
    }

    // z = ln 3 gives 3/4
    b.weights[2] = Matrix::Zero(4, 6);
    b.weights[2](0, 0) = std::log(3.0);
    const ModalityBetas q = beta_weights(basis(3, 0), Vector::Zero(3), b, 2);
    CHECK(q.audio(0) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(q.audio(1) == 0.5);

    CHECK((beta_weights(a, v, b, 9).audio.array() == 0.5).all());
    b.strict = true;
    CHECK_THROWS_AS(beta_weights(a, v, b, 9), ContractError);
    CHECK_THROWS_AS(beta_weights(Vector::Ones(2), v, b, 0), ContractError);
}

TEST_CASE("species routing") {
    PrototypeBank bank;
    CHECK(!route_species(basis(3, 0), basis(3, 0), bank).has_value());

    bank.species[0] = {single(basis(3, 0)), single(basis(3, 0))};
    bank.species[1] = {single(basis(3, 1)), single(basis(3, 1))};
    CHECK(*route_species(basis(3, 0), basis(3, 0), bank) == 0);
    CHECK(*route_species(basis(3, 1), basis(3, 1), bank) == 1);
    Vector mixed = basis(3, 0) + 0.1 * basis(3, 1);
    CHECK(*route_species(mixed, mixed, bank) == 0);

    PrototypeBank lone;
    lone.species[3] = bank.species[1];
    Rng rng(8);
    for (int t = 0; t < 5; ++t)
        CHECK(*route_species(rng.normal_matrix(3, 1, 1.0).col(0), rng.normal_matrix(3, 1, 1.0).col(0), lone) == 3);

    // equidistant query goes to the lowest id
    CHECK(*route_species(basis(3, 2), basis(3, 2), bank) == 0);
    bank.species[2] = bank.species[1];
    CHECK(*route_species(basis(3, 1), basis(3, 1), bank) == 1);

    // single-modality routing ignores the other stream
    CHECK(*route_species(basis(3, 1), basis(3, 0), bank, Modality::audio) == 1);
    CHECK(*route_species(basis(3, 1), basis(3, 0), bank, Modality::visual) == 0);
}

TEST_CASE("prediction with gamma 1 reads only the general head") {
    HailModel m = small_model(5, 2);
    m.gamma = {1.0, 1.0, 2};
    Rng rng(2);
    const ExpandedFeatures f = features(rng, 5);
    const Prediction p = predict_features(m, PrototypeBank{}, f, 1, Routing::oracle, 1);
    const Vector want = stable_softmax(m.w_general.transpose() * f.general);
    CHECK(max_abs(p.probs - want) <= 1e-15);
    CHECK(p.probs.sum() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("prediction with zero species heads at the first stage") {
    HailModel m = small_model(5, 1);
    for (auto& [k, h] : m.species_heads) h = SpeciesHead{Matrix::Zero(5, 4), Matrix::Zero(5, 4)};
    Rng rng(3);
    const ExpandedFeatures f = features(rng, 5);
    const Prediction p = predict_features(m, PrototypeBank{}, f, 0, Routing::oracle, 0);
    CHECK(p.gamma_used == 0.8);
    CHECK(max_abs(p.probs - stable_softmax(0.8 * (m.w_general.transpose() * f.general))) <= 1e-15);
}

TEST_CASE("gamma 0 with even betas averages the two species heads") {
    HailModel m = small_model(4, 2);
    m.gamma = {0.0, 0.0, 2};
    Rng rng(9);
    const ExpandedFeatures f = features(rng, 4);
    const Prediction p = predict_features(m, PrototypeBank{}, f, 1, Routing::oracle, 0);
    const SpeciesHead& h = m.species_heads.at(0);
    const Vector mean = 0.5 * (h.audio.transpose() * f.audio) + 0.5 * (h.visual.transpose() * f.visual);
    CHECK(testing::max_abs(p.probs - stable_softmax(mean)) <= 1e-15);
    CHECK((p.beta_a.array() == 0.5).all());
}

TEST_CASE("prediction combines general and balanced species logits") {
    HailModel m = small_model(4, 3);
    Rng rng(4);
    m.balancer.weights[1] = rng.normal_matrix(4, 8, 0.5);
    for (int t = 0; t < 10; ++t) {
        const ExpandedFeatures f = features(rng, 4);
        const int stage = t % 4;
        const Prediction p = predict_features(m, PrototypeBank{}, f, stage, Routing::oracle, 1);
        const double g = gamma_at(m.gamma, stage);
        const ModalityBetas b = beta_weights(f.audio, f.visual, m.balancer, 1);
        const SpeciesHead& h = m.species_heads.at(1);
        const Vector ys = b.audio.cwiseProduct(h.audio.transpose() * f.audio) +
                          b.visual.cwiseProduct(h.visual.transpose() * f.visual);
        const Vector want = stable_softmax(g * (m.w_general.transpose() * f.general) + (1 - g) * ys);
        CHECK(max_abs(p.probs - want) <= 1e-14);
        CHECK(p.probs.sum() == doctest::Approx(1.0).epsilon(1e-14));
        Eigen::Index arg;
        p.probs.maxCoeff(&arg);
        CHECK(index_of(p.predicted) == arg);
    }
}

TEST_CASE("prediction routing and contract errors") {
    HailModel m = small_model(3, 2);
    PrototypeBank bank;
    bank.species[0] = {single(basis(3, 0)), single(basis(3, 0))};
    bank.species[1] = {single(basis(3, 1)), single(basis(3, 1))};
    ExpandedFeatures f{Vector::Ones(3), basis(3, 1), basis(3, 1)};
    CHECK(predict_features(m, bank, f, 1, Routing::prototype).routed_species == 1);
    CHECK(predict_features(m, PrototypeBank{}, f, 1, Routing::prototype).routed_species == 1);
    CHECK(predict_features(m, bank, f, 1, Routing::oracle, 0).routed_species == 0);
    CHECK_THROWS_AS(predict_features(m, bank, f, 1, Routing::oracle), ContractError);
    CHECK_THROWS_AS(predict_features(m, bank, f, 1, Routing::oracle, 7), ContractError);
    CHECK_THROWS_AS(predict_features(HailModel{}, bank, f, 0, Routing::prototype), ContractError);
    ExpandedFeatures bad{Vector::Ones(2), basis(3, 1), basis(3, 1)};
    CHECK_THROWS_AS(predict_features(m, bank, bad, 1, Routing::oracle, 0), ContractError);
}

TEST_CASE("balancer gradient matches finite differences") {
    Rng rng(5);
    const Matrix a = rng.normal_matrix(7, 3, 1.0), v = rng.normal_matrix(7, 2, 1.0);
    const SpeciesHead h{rng.normal_matrix(3, 4, 1.0), rng.normal_matrix(2, 4, 1.0)};
    std::vector<int> labels{0, 1, 2, 3, 0, 1, 2};
    Matrix w = rng.normal_matrix(4, 5, 0.5);
    const Matrix g = balancer_gradient(w, h, a, v, labels);
    const double eps = 1e-6;
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            Matrix wp = w, wm = w;
            wp(i, j) += eps;
            wm(i, j) -= eps;
            const double fd = (balancer_loss(wp, h, a, v, labels) - balancer_loss(wm, h, a, v, labels)) / (2 * eps);
            CHECK(std::abs(fd - g(i, j)) <= 1e-6);
        }
}

TEST_CASE("balancer training: zero rate and a noisy audio stream") {
    Rng rng(6);
    const int n = 200;
    std::vector<int> labels;
    Matrix visual(n, 6), audio = rng.normal_matrix(n, 6, 1.0).cwiseAbs();
    for (int r = 0; r < n; ++r) {
        labels.push_back(r % 4);
        visual.row(r) = (0.2 * rng.normal_matrix(1, 6, 1.0)).cwiseAbs();
        visual(r, r % 4) += 2.0;
    }
    HailModel m;
    m.species_heads[0] = fit_species(audio, visual, one_hot(labels));

    const ModalityBalancer frozen = train_balancer(ModalityBalancer{}, 0, audio, visual, labels, m, {5, 0.0});
    CHECK(max_abs(frozen.weights.at(0)) == 0.0);

    const ModalityBalancer trained = train_balancer(ModalityBalancer{}, 0, audio, visual, labels, m, {300, 0.5});
    double mean_bv = 0.0;
    for (int r = 0; r < n; ++r)
        mean_bv += beta_weights(audio.row(r).transpose(), visual.row(r).transpose(), trained, 0).visual.mean();
    CHECK(mean_bv / n > 0.5);
    CHECK(balancer_loss(trained.weights.at(0), m.species_heads.at(0), audio, visual, labels) <
          balancer_loss(Matrix::Zero(4, 12), m.species_heads.at(0), audio, visual, labels));

    CHECK_THROWS_AS(train_balancer(ModalityBalancer{}, 3, audio, visual, labels, m, {}), ContractError);
    CHECK_THROWS_AS(train_balancer(ModalityBalancer{}, 0, audio, visual, labels, m, {0, 0.5}), ContractError);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hail/baselines.hpp"
#include "support.hpp"

using namespace hail;
using hail::testing::max_abs;

namespace {

struct Toy {
    Matrix x;
    std::vector<int> labels;
};

// label i lights up column (i + shift) % 4
Toy separable(Rng& rng, int n, int dim, int shift, double noise = 0.3) {
    Toy t{noise * rng.normal_matrix(n, dim, 1.0), {}};
    for (int r = 0; r < n; ++r) {
        t.labels.push_back(r % 4);
        t.x(r, (r % 4 + shift) % 4) += 3.0;
    }
    return t;
}

double accuracy(const Matrix& probs, const std::vector<int>& labels) {
    int ok = 0;
    for (Eigen::Index r = 0; r < probs.rows(); ++r) {
        Eigen::Index c;
        probs.row(r).maxCoeff(&c);
        ok += c == labels[static_cast<std::size_t>(r)];
    }
    return static_cast<double>(ok) / static_cast<double>(probs.rows());
}

FeatureSet as_features(const Toy& t, int species) {
    FeatureSet f;
    f.general = f.audio = f.visual = t.x;
    f.labels = t.labels;
    f.species.assign(t.labels.size(), species);
    return f;
}

}  // namespace

TEST_CASE("finetune: zero rate, separable data, forgetting") {
    Rng rng(1);
    const Toy a = separable(rng, 80, 6, 0);
    const Matrix w0 = rng.normal_matrix(6, 4, 0.1);
    CHECK((finetune_learn(w0, a.x, a.labels, {10, 0.0}).array() == w0.array()).all());
    const Matrix w = finetune_learn(Matrix::Zero(6, 4), a.x, a.labels, {});
    CHECK(accuracy(softmax_rows(a.x * w), a.labels) > 0.95);
    CHECK(cross_entropy(w, a.x, a.labels) < cross_entropy(Matrix::Zero(6, 4), a.x, a.labels));

    auto learner = make_finetune(6, BaselineConfig{});
    learner->learn_species(as_features(a, 0), as_features(a, 0), 0);
    const double before = accuracy(learner->predict(as_features(a, 0)), a.labels);
    const Toy b = separable(rng, 80, 6, 1);
    learner->learn_species(as_features(b, 1), as_features(b, 1), 1);
    const double after = accuracy(learner->predict(as_features(a, 0)), a.labels);
    CHECK(before > 0.95);
    CHECK(after < before - 0.5);
    CHECK(learner->exemplar_free());
    CHECK(learner->storage_values() == 24);
    CHECK_THROWS_AS(finetune_learn(w0, a.x, a.labels, {0, 0.5}), ContractError);
}

TEST_CASE("lwf: limits, divergence sign and gradient") {
    Rng rng(2);
    const Toy a = separable(rng, 40, 5, 0);
    const Matrix prev = rng.normal_matrix(5, 4, 0.5);
    const Matrix w0 = rng.normal_matrix(5, 4, 0.1);
    const GdConfig gd{40, 0.3};

    CHECK(max_abs(lwf_learn(w0, &prev, a.x, a.labels, 1.0, 2.0, gd) - finetune_learn(w0, a.x, a.labels, gd)) <= 1e-12);
    CHECK(max_abs(lwf_learn(w0, nullptr, a.x, a.labels, 0.3, 2.0, gd) - finetune_learn(w0, a.x, a.labels, gd)) <= 1e-12);
    CHECK(max_abs(lwf_gradient(prev, &prev, a.x, a.labels, 0.0, 2.0)) <= 1e-15);
    CHECK(std::abs(lwf_loss(prev, &prev, a.x, a.labels, 0.0, 2.0)) <= 1e-15);
    for (int t = 0; t < 10; ++t)
        CHECK(lwf_loss(rng.normal_matrix(5, 4, 1.0), &prev, a.x, a.labels, 0.0, 2.0) >= 0.0);

    const double eps = 1e-6;
    const Matrix g = lwf_gradient(w0, &prev, a.x, a.labels, 0.4, 2.0);
    for (Eigen::Index i = 0; i < 5; ++i)
        for (Eigen::Index j = 0; j < 4; ++j) {
            Matrix wp = w0, wm = w0;
            wp(i, j) += eps;
            wm(i, j) -= eps;
            const double fd = (lwf_loss(wp, &prev, a.x, a.labels, 0.4, 2.0) -
                               lwf_loss(wm, &prev, a.x, a.labels, 0.4, 2.0)) / (2 * eps);
            CHECK(std::abs(fd - g(i, j)) <= 1e-7);
        }
    CHECK_THROWS_AS(lwf_loss(w0, &prev, a.x, a.labels, 1.5, 2.0), ContractError);
    CHECK_THROWS_AS(lwf_loss(w0, &prev, a.x, a.labels, 0.5, 0.0), ContractError);
}

TEST_CASE("ewc: zero penalty, huge penalty, zero Fisher") {
    Rng rng(3);
    const Toy a = separable(rng, 40, 5, 0);
    const Toy b = separable(rng, 40, 5, 1);
    const Matrix star = finetune_learn(Matrix::Zero(5, 4), a.x, a.labels, {});
    const GdConfig gd{100, 0.5};
    const Matrix plain = finetune_learn(star, b.x, b.labels, gd);

    EwcState off{star, empirical_fisher(star, a.x, a.labels), 0.0};
    CHECK((ewc_learn(star, off, b.x, b.labels, gd).array() == plain.array()).all());

    EwcState zero{star, Matrix::Zero(5, 4), 100.0};
    CHECK(max_abs(ewc_learn(star, zero, b.x, b.labels, gd) - plain) <= 1e-15);

    EwcState stiff{star, Matrix::Ones(5, 4), 1e9};
    CHECK((ewc_learn(star, stiff, b.x, b.labels, gd) - star).norm() < 1e-3);

    const Matrix f = empirical_fisher(star, a.x, a.labels);
    CHECK((f.array() >= 0.0).all());
    CHECK(f.rows() == 5);
    // one sample: the Fisher is the squared gradient of its log-likelihood
    const Matrix x1 = a.x.topRows(1);
    const std::vector<int> l1{a.labels[0]};
    Vector r = softmax_rows(x1 * star).row(0).transpose();
    r(l1[0]) -= 1.0;
    const Matrix g1 = x1.transpose() * r.transpose();
    CHECK(max_abs(empirical_fisher(star, x1, l1) - g1.array().square().matrix()) <= 1e-15);
}

TEST_CASE("herding selection") {
    Rng rng(4);
    const Matrix rows = rng.normal_matrix(12, 3, 1.0);
    const auto all = herding_select(rows, 50);
    CHECK(all.size() == 12);
    Matrix picked(12, 3);
    for (std::size_t i = 0; i < all.size(); ++i) picked.row(static_cast<Eigen::Index>(i)) = rows.row(all[i]);
    CHECK(max_abs(picked.colwise().mean() - rows.colwise().mean()) <= 1e-15);

    const auto one = herding_select(rows, 1);
    const Eigen::RowVectorXd mean = rows.colwise().mean();
    Eigen::Index nearest;
    (rows.rowwise() - mean).rowwise().squaredNorm().minCoeff(&nearest);
    CHECK(one[0] == nearest);

    // each pick is the best completion among the remaining rows
    const auto picks = herding_select(rows, 6);
    Eigen::RowVectorXd running = Eigen::RowVectorXd::Zero(3);
    std::vector<bool> used(12, false);
    for (std::size_t s = 0; s < picks.size(); ++s) {
        const double n = static_cast<double>(s + 1);
        const double chosen = (mean - (running + rows.row(picks[s])) / n).squaredNorm();
        for (Eigen::Index i = 0; i < 12; ++i)
            if (!used[static_cast<std::size_t>(i)]) CHECK(chosen <= (mean - (running + rows.row(i)) / n).squaredNorm());
        used[static_cast<std::size_t>(picks[s])] = true;
        running += rows.row(picks[s]);
    }
    CHECK_THROWS_AS(herding_select(rows, 0), ContractError);
}

TEST_CASE("icarl nearest-mean prediction") {
    IcarlState s;
    s.class_means[icarl_class_key(0, 0)] = Vector::Zero(2);
    s.class_means[icarl_class_key(0, 1)] = (Vector(2) << 2, 0).finished();
    s.class_means[icarl_class_key(1, 2)] = (Vector(2) << 0, 2).finished();
    Matrix q(3, 2);
    q << 2, 0, 0, 2.1, 1, 0;
    const Matrix p = icarl_predict(s, q);
    Eigen::Index c;
    p.row(0).maxCoeff(&c);
    CHECK(c == 1);
    p.row(1).maxCoeff(&c);
    CHECK(c == 2);
    p.row(2).maxCoeff(&c);  // halfway between intensities 0 and 1
    CHECK(c == 0);
    CHECK(p(2, 0) == p(2, 1));
    CHECK(p(0, 3) == 0.0);
    for (Eigen::Index r = 0; r < 3; ++r) CHECK(p.row(r).sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(icarl_predict(IcarlState{}, q), ContractError);
}

TEST_CASE("icarl learner on separated classes") {
    Rng rng(5);
    const Toy a = separable(rng, 120, 6, 0);
    IcarlState s;
    s.budget_per_class = 5;
    icarl_learn(s, a.x, a.labels, 0);
    CHECK(s.exemplars.size() == 4);
    for (const auto& [k, e] : s.exemplars) CHECK(e.rows() == 5);
    CHECK(s.value_count() == 4 * 5 * 6);
    const Toy test = separable(rng, 80, 6, 0);
    CHECK(accuracy(icarl_predict(s, test.x), test.labels) > 0.95);

    auto learner = make_icarl(BaselineConfig{});
    CHECK(!learner->exemplar_free());
}

TEST_CASE("joint fit over one stage is the general fit") {
    Rng rng(6);
    const Toy a = separable(rng, 30, 5, 0);
    const std::vector<FeatureSet> one{as_features(a, 0)};
    CHECK((joint_upper_bound(one).array() == fit_general(a.x, one_hot(a.labels)).array()).all());
    const Toy b = separable(rng, 30, 5, 2);
    const std::vector<FeatureSet> two{as_features(a, 0), as_features(b, 1)};
    Matrix x(60, 5);
    x << a.x, b.x;
    std::vector<int> l = a.labels;
    l.insert(l.end(), b.labels.begin(), b.labels.end());
    CHECK((joint_upper_bound(two).array() == fit_general(x, one_hot(l)).array()).all());
}

#include "hail/baselines.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace hail {

namespace {

void check_batch(const Matrix& w, const Matrix& x, std::span<const int> labels, const char* who) {
    require(x.cols() == w.rows() && w.cols() == kNumIntensities, std::string(who) + ": head shape mismatch");
    require(static_cast<std::size_t>(x.rows()) == labels.size(), std::string(who) + ": label count mismatch");
    require(x.rows() >= 1, std::string(who) + ": empty batch");
}

void check_gd(const GdConfig& cfg, const char* who) {
    require(cfg.steps >= 1, std::string(who) + ": steps must be at least 1");
    require(cfg.lr >= 0.0, std::string(who) + ": lr must be non-negative");
}

Matrix ce_gradient(const Matrix& w, const Matrix& x, std::span<const int> labels) {
    Matrix p = softmax_rows(x * w);
    for (std::size_t r = 0; r < labels.size(); ++r) p(static_cast<Eigen::Index>(r), labels[r]) -= 1.0;
    return x.transpose() * p / static_cast<double>(x.rows());
}

void check_finite_step(const Matrix& w, const char* who, int step) {
    if (!w.allFinite()) throw NumericalError(std::string(who) + ": non-finite weights at step " + std::to_string(step));
}

}  // namespace

Matrix softmax_rows(const Matrix& logits) {
    Matrix e = (logits.colwise() - logits.rowwise().maxCoeff()).array().exp().matrix();
    return e.array().colwise() / e.rowwise().sum().array();
}

double cross_entropy(const Matrix& w, const Matrix& x, std::span<const int> labels) {
    check_batch(w, x, labels, "cross_entropy");
    const Matrix p = softmax_rows(x * w);
    double total = 0.0;
    for (std::size_t r = 0; r < labels.size(); ++r) total -= std::log(p(static_cast<Eigen::Index>(r), labels[r]));
    return total / static_cast<double>(labels.size());
}

Matrix finetune_learn(Matrix w, const Matrix& x, std::span<const int> labels, const GdConfig& cfg) {
    check_batch(w, x, labels, "finetune_learn");
    check_gd(cfg, "finetune_learn");
    for (int step = 0; step < cfg.steps; ++step) {
        w -= cfg.lr * ce_gradient(w, x, labels);
        check_finite_step(w, "finetune_learn", step);
    }
    return w;
}

double lwf_loss(const Matrix& w, const Matrix* previous, const Matrix& x, std::span<const int> labels, double lambda,
                double temperature) {
    require(lambda >= 0.0 && lambda <= 1.0, "lwf: lambda must lie in [0, 1]");
    require(temperature > 0.0, "lwf: temperature must be positive");
    const double ce = cross_entropy(w, x, labels);
    if (!previous) return ce;
    const Matrix p_old = softmax_rows(x * *previous / temperature);
    const Matrix p_new = softmax_rows(x * w / temperature);
    const double kl = (p_old.array() * (p_old.array().log() - p_new.array().log())).sum() / static_cast<double>(x.rows());
    return lambda * ce + (1.0 - lambda) * kl;
}

Matrix lwf_gradient(const Matrix& w, const Matrix* previous, const Matrix& x, std::span<const int> labels,
                    double lambda, double temperature) {
    require(lambda >= 0.0 && lambda <= 1.0, "lwf: lambda must lie in [0, 1]");
    require(temperature > 0.0, "lwf: temperature must be positive");
    check_batch(w, x, labels, "lwf");
    if (!previous) return ce_gradient(w, x, labels);
    const Matrix p_old = softmax_rows(x * *previous / temperature);
    const Matrix p_new = softmax_rows(x * w / temperature);
    const Matrix kl_grad = x.transpose() * (p_new - p_old) / (temperature * static_cast<double>(x.rows()));
    return lambda * ce_gradient(w, x, labels) + (1.0 - lambda) * kl_grad;
}

Matrix lwf_learn(Matrix w, const Matrix* previous, const Matrix& x, std::span<const int> labels, double lambda,
                 double temperature, const GdConfig& cfg) {
    check_gd(cfg, "lwf_learn");
    if (previous) require(previous->rows() == w.rows() && previous->cols() == w.cols(), "lwf_learn: snapshot shape");
    for (int step = 0; step < cfg.steps; ++step) {
        w -= cfg.lr * lwf_gradient(w, previous, x, labels, lambda, temperature);
        check_finite_step(w, "lwf_learn", step);
    }
    return w;
}

Matrix empirical_fisher(const Matrix& w, const Matrix& x, std::span<const int> labels) {
    check_batch(w, x, labels, "empirical_fisher");
    Matrix r = softmax_rows(x * w);
    for (std::size_t i = 0; i < labels.size(); ++i) r(static_cast<Eigen::Index>(i), labels[i]) -= 1.0;
    // per-sample gradient is x_n r_n^T, so its square is (x_n^2)(r_n^2)^T
    return x.array().square().matrix().transpose() * r.array().square().matrix() / static_cast<double>(x.rows());
}

Matrix ewc_learn(Matrix w, const EwcState& state, const Matrix& x, std::span<const int> labels, const GdConfig& cfg) {
    check_batch(w, x, labels, "ewc_learn");
    check_gd(cfg, "ewc_learn");
    require(state.lambda >= 0.0, "ewc_learn: lambda must be non-negative");
    const bool penalize = state.active() && state.lambda > 0.0;
    if (penalize) {
        require(state.fisher.rows() == w.rows() && state.fisher.cols() == w.cols() &&
                    state.theta_star.rows() == w.rows() && state.theta_star.cols() == w.cols(),
                "ewc_learn: state shape mismatch");
        require((state.fisher.array() >= 0.0).all(), "ewc_learn: Fisher entries must be non-negative");
    }
    const Matrix stiffness = penalize ? Matrix(cfg.lr * state.lambda * state.fisher) : Matrix();
    for (int step = 0; step < cfg.steps; ++step) {
        w -= cfg.lr * ce_gradient(w, x, labels);
        if (penalize)
            w = ((w.array() + stiffness.array() * state.theta_star.array()) / (1.0 + stiffness.array())).matrix();
        check_finite_step(w, "ewc_learn", step);
    }
    return w;
}

std::vector<Eigen::Index> herding_select(const Matrix& rows, int budget) {
    require(budget >= 1, "herding_select: budget must be at least 1");
    require(rows.rows() >= 1, "herding_select: no rows");
    const Eigen::Index n = rows.rows();
    const auto k = std::min<Eigen::Index>(budget, n);
    const Eigen::RowVectorXd mean = rows.colwise().mean();
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    std::vector<Eigen::Index> picks;
    Eigen::RowVectorXd running = Eigen::RowVectorXd::Zero(rows.cols());
    for (Eigen::Index step = 1; step <= k; ++step) {
        Eigen::Index best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (taken[static_cast<std::size_t>(i)]) continue;
            const double d = (mean - (running + rows.row(i)) / static_cast<double>(step)).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        taken[static_cast<std::size_t>(best)] = true;
        running += rows.row(best);
        picks.push_back(best);
    }
    return picks;
}

std::size_t IcarlState::value_count() const {
    std::size_t n = 0;
    for (const auto& [k, e] : exemplars) n += static_cast<std::size_t>(e.size());
    return n;
}

void icarl_learn(IcarlState& state, const Matrix& x, std::span<const int> labels, int species_id) {
    require(state.budget_per_class >= 1, "icarl_learn: budget must be at least 1");
    require(species_id >= 0, "icarl_learn: species id must be non-negative");
    require(static_cast<std::size_t>(x.rows()) == labels.size(), "icarl_learn: label count mismatch");
    for (int i = 0; i < kNumIntensities; ++i) {
        std::vector<Eigen::Index> idx;
        for (std::size_t r = 0; r < labels.size(); ++r)
            if (labels[r] == i) idx.push_back(static_cast<Eigen::Index>(r));
        if (idx.empty()) continue;
        Matrix cls(static_cast<Eigen::Index>(idx.size()), x.cols());
        for (std::size_t r = 0; r < idx.size(); ++r) cls.row(static_cast<Eigen::Index>(r)) = x.row(idx[r]);
        const auto picks = herding_select(cls, state.budget_per_class);
        Matrix ex(static_cast<Eigen::Index>(picks.size()), x.cols());
        for (std::size_t r = 0; r < picks.size(); ++r) ex.row(static_cast<Eigen::Index>(r)) = cls.row(picks[r]);
        state.exemplars[icarl_class_key(species_id, i)] = std::move(ex);
    }
    state.class_means.clear();
    for (auto& [key, ex] : state.exemplars) {
        if (ex.rows() > state.budget_per_class) ex = Matrix(ex.topRows(state.budget_per_class));
        state.class_means[key] = ex.colwise().mean().transpose();
    }
}

Matrix icarl_predict(const IcarlState& state, const Matrix& x) {
    require(!state.class_means.empty(), "icarl_predict: no classes registered");
    Matrix probs(x.rows(), kNumIntensities);
    const double ninf = -std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        Vector score = Vector::Constant(kNumIntensities, ninf);
        for (const auto& [key, mean] : state.class_means) {
            require(mean.size() == x.cols(), "icarl_predict: feature dimension mismatch");
            const int i = key % kNumIntensities;
            score(i) = std::max(score(i), -(x.row(r).transpose() - mean).norm());
        }
        const double top = score.maxCoeff();
        const Vector e = score.unaryExpr([top](double v) { return std::exp(v - top); });
        probs.row(r) = (e / e.sum()).transpose();
    }
    return probs;
}

Matrix joint_upper_bound(std::span<const FeatureSet> stages, const RidgeConfig& cfg) {
    const FeatureSet all = FeatureSet::concat(stages);
    return ridge_solve(all.general, one_hot(all.labels), cfg);
}

namespace {

class FinetuneLearner : public IncrementalLearner {
public:
    FinetuneLearner(int dim, GdConfig gd) : w_(Matrix::Zero(dim, kNumIntensities)), gd_(gd) {}
    std::string_view name() const override { return "finetune"; }
    bool exemplar_free() const override { return true; }
    void learn_species(const FeatureSet& train, const FeatureSet&, int) override {
        w_ = finetune_learn(w_, train.general, train.labels, gd_);
    }
    Matrix predict(const FeatureSet& f) const override { return softmax_rows(f.general * w_); }
    std::size_t storage_values() const override { return static_cast<std::size_t>(w_.size()); }

private:
    Matrix w_;
    GdConfig gd_;
};

class LwfLearner : public IncrementalLearner {
public:
    LwfLearner(int dim, const BaselineConfig& cfg)
        : w_(Matrix::Zero(dim, kNumIntensities)), gd_(cfg.gd), lambda_(cfg.lwf_lambda), temp_(cfg.lwf_temperature) {
        require(lambda_ >= 0.0 && lambda_ <= 1.0, "lwf: lambda must lie in [0, 1]");
    }
    std::string_view name() const override { return "lwf"; }
    bool exemplar_free() const override { return true; }
    void learn_species(const FeatureSet& train, const FeatureSet&, int) override {
        w_ = lwf_learn(w_, previous_.size() ? &previous_ : nullptr, train.general, train.labels, lambda_, temp_, gd_);
        previous_ = w_;
    }
    Matrix predict(const FeatureSet& f) const override { return softmax_rows(f.general * w_); }
    std::size_t storage_values() const override { return static_cast<std::size_t>(w_.size() + previous_.size()); }

private:
    Matrix w_;
    Matrix previous_;
    GdConfig gd_;
    double lambda_;
    double temp_;
};

class EwcLearner : public IncrementalLearner {
public:
    EwcLearner(int dim, const BaselineConfig& cfg) : w_(Matrix::Zero(dim, kNumIntensities)), gd_(cfg.gd) {
        require(cfg.ewc_lambda >= 0.0, "ewc: lambda must be non-negative");
        state_.lambda = cfg.ewc_lambda;
    }
    std::string_view name() const override { return "ewc"; }
    bool exemplar_free() const override { return true; }
    void learn_species(const FeatureSet& train, const FeatureSet&, int) override {
        w_ = ewc_learn(w_, state_, train.general, train.labels, gd_);
        state_.theta_star = w_;
        state_.fisher = empirical_fisher(w_, train.general, train.labels);
    }
    Matrix predict(const FeatureSet& f) const override { return softmax_rows(f.general * w_); }
    std::size_t storage_values() const override {
        return static_cast<std::size_t>(w_.size() + state_.theta_star.size() + state_.fisher.size());
    }

private:
    Matrix w_;
    EwcState state_;
    GdConfig gd_;
};

class IcarlLearner : public IncrementalLearner {
public:
    explicit IcarlLearner(int budget) { state_.budget_per_class = budget; }
    std::string_view name() const override { return "icarl_nme"; }
    bool exemplar_free() const override { return false; }
    void learn_species(const FeatureSet& train, const FeatureSet&, int species_id) override {
        icarl_learn(state_, train.general, train.labels, species_id);
    }
    Matrix predict(const FeatureSet& f) const override { return icarl_predict(state_, f.general); }
    std::size_t storage_values() const override { return state_.value_count(); }

private:
    IcarlState state_;
};

}  // namespace

std::unique_ptr<IncrementalLearner> make_finetune(int dim, const BaselineConfig& cfg) {
    return std::make_unique<FinetuneLearner>(dim, cfg.gd);
}
std::unique_ptr<IncrementalLearner> make_lwf(int dim, const BaselineConfig& cfg) {
    return std::make_unique<LwfLearner>(dim, cfg);
}
std::unique_ptr<IncrementalLearner> make_ewc(int dim, const BaselineConfig& cfg) {
    return std::make_unique<EwcLearner>(dim, cfg);
}
std::unique_ptr<IncrementalLearner> make_icarl(const BaselineConfig& cfg) {
    return std::make_unique<IcarlLearner>(cfg.icarl_budget);
}

}  // namespace hail

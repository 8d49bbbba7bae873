#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hail/inference.hpp"
#include "hail/numeric.hpp"

namespace hail {

/// A method that learns species one at a time and predicts intensity
/// probabilities (n x 4) for any seen species.
class IncrementalLearner {
public:
    virtual ~IncrementalLearner() = default;

    virtual std::string_view name() const = 0;
    virtual bool exemplar_free() const = 0;
    virtual void learn_species(const FeatureSet& train, const FeatureSet& val, int species_id) = 0;
    virtual Matrix predict(const FeatureSet& features) const = 0;
    /// Number of scalar values retained between stages.
    virtual std::size_t storage_values() const = 0;
};

/// Full-batch gradient descent settings for the softmax heads.
struct GdConfig {
    int steps = 300;
    double lr = 0.5;
};

/// Row-wise softmax of X W.
Matrix softmax_rows(const Matrix& logits);
double cross_entropy(const Matrix& w, const Matrix& x, std::span<const int> labels);

/// Plain cross-entropy descent on the current batch, starting from `w`.
Matrix finetune_learn(Matrix w, const Matrix& x, std::span<const int> labels, const GdConfig& cfg);

/// lambda * CE + (1 - lambda) * KL(old_T || new_T), softmax at temperature T.
/// With no previous head the loss is CE alone.
double lwf_loss(const Matrix& w, const Matrix* previous, const Matrix& x, std::span<const int> labels, double lambda,
                double temperature);
Matrix lwf_gradient(const Matrix& w, const Matrix* previous, const Matrix& x, std::span<const int> labels,
                    double lambda, double temperature);
Matrix lwf_learn(Matrix w, const Matrix* previous, const Matrix& x, std::span<const int> labels, double lambda,
                 double temperature, const GdConfig& cfg);

struct EwcState {
    Matrix theta_star;  // head after the previous stage
    Matrix fisher;      // diagonal empirical Fisher, same shape as the head
    double lambda = 100.0;

    bool active() const { return fisher.size() > 0; }
};

/// Mean squared per-sample gradient of log p(label | x) with respect to each head weight.
Matrix empirical_fisher(const Matrix& w, const Matrix& x, std::span<const int> labels);

/// CE + sum_i lambda/2 F_i (w_i - w*_i)^2. The quadratic term is applied as an
/// exact proximal step after each gradient step on CE, which stays stable for
/// any lambda.
Matrix ewc_learn(Matrix w, const EwcState& state, const Matrix& x, std::span<const int> labels, const GdConfig& cfg);

/// Greedy herding: pick rows one at a time so the running mean of the picks
/// stays closest to the mean of all rows. Returns indices in pick order.
std::vector<Eigen::Index> herding_select(const Matrix& rows, int budget);

struct IcarlState {
    int budget_per_class = 20;
    /// class key (species * 4 + intensity) -> exemplar rows in herding rank order
    std::map<int, Matrix> exemplars;
    std::map<int, Vector> class_means;

    std::size_t value_count() const;
};

inline int icarl_class_key(int species, int intensity) { return species * kNumIntensities + intensity; }

/// Herds exemplars for each (species, intensity) class of the batch, merges them
/// with the stored exemplars and recomputes every class mean from exemplars.
void icarl_learn(IcarlState& state, const Matrix& x, std::span<const int> labels, int species_id);

/// Softmax over intensities of the best negative distance to any class mean
/// of that intensity; the argmax is the nearest mean (lowest key on ties).
Matrix icarl_predict(const IcarlState& state, const Matrix& x);

/// Ridge general head over all rows of all stages.
Matrix joint_upper_bound(std::span<const FeatureSet> stages, const RidgeConfig& cfg = {});

/// Names accepted by make_learner besides the HAIL family.
struct BaselineConfig {
    GdConfig gd;
    double lwf_lambda = 0.5;
    double lwf_temperature = 2.0;
    double ewc_lambda = 100.0;
    int icarl_budget = 20;
    RidgeConfig ridge;
};

std::unique_ptr<IncrementalLearner> make_finetune(int dim, const BaselineConfig& cfg);
std::unique_ptr<IncrementalLearner> make_lwf(int dim, const BaselineConfig& cfg);
std::unique_ptr<IncrementalLearner> make_ewc(int dim, const BaselineConfig& cfg);
std::unique_ptr<IncrementalLearner> make_icarl(const BaselineConfig& cfg);

}  // namespace hail

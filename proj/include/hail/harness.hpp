#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hail/baselines.hpp"
#include "hail/hail_learner.hpp"
#include "hail/metrics.hpp"
#include "hail/synth.hpp"

namespace hail {

/// Everything a benchmark run depends on. Defaults: eta 1.0, m 5, alpha 0.7,
/// gamma 0.8 -> 0.3, expansion ratio 10, lambda_sim 0.1.
struct ExperimentConfig {
    std::vector<std::string> methods{"finetune", "lwf", "ewc", "icarl_nme", "hail", "joint_upper"};
    std::vector<std::uint64_t> seeds{0, 1, 2};
    std::filesystem::path output_dir = "results";
    SynthConfig synth;

    double eta = 1.0;
    int prototypes_per_intensity = kDefaultPrototypesPerIntensity;
    double alpha = kDefaultEmaAlpha;
    double gamma_max = 0.8;
    double gamma_min = 0.3;
    int expansion_ratio = kDefaultExpansionRatio;
    Routing routing = Routing::prototype;
    BalancerTrainConfig balancer;

    FusionTrainConfig fusion{.steps = 60, .lr = 0.5};
    BaselineConfig baselines;
    bool write_checkpoints = true;

    void validate() const;
};

/// Accepted method names.
const std::vector<std::string>& known_methods();

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunRecord {
    std::string method;
    std::uint64_t seed = 0;
    AccuracyMatrix accuracy;
    std::vector<double> avg_acc;     // per stage 1..K
    std::vector<double> forgetting;  // per stage 2..K (index 0 is stage 2)
    std::vector<double> stage_seconds;
    std::size_t storage_bytes = 0;
    bool exemplar_free = true;
    int stages_done = 0;
};

/// Stage-by-stage features of one seed, shared by every method.
struct SeedData {
    std::vector<SpeciesStage> stages;
    FeaturePipeline pipeline;
    std::vector<FeatureSet> train, val, test;
};

SeedData prepare_seed(const ExperimentConfig& cfg, std::uint64_t seed);

HailConfig hail_config_for(const ExperimentConfig& cfg, const std::string& method, std::uint64_t seed);
std::unique_ptr<IncrementalLearner> make_learner(const ExperimentConfig& cfg, const std::string& method,
                                                 const SeedData& data, std::uint64_t seed);

/// Fraction of rows whose argmax (lowest index on ties) equals the label, as correct/total.
std::pair<std::int64_t, std::int64_t> count_correct(const Matrix& probs, std::span<const int> labels);

/// Runs every (seed, method) pair. When output_dir is non-empty, results.csv
/// and storage.csv are rewritten atomically after every stage, and HAIL-family
/// checkpoints land in output_dir/checkpoints.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg,
                                      const std::function<void(const std::string&)>& log = {});

/// method,seed,stage,task,accuracy
std::string results_csv(const std::vector<RunRecord>& records);
/// method,seed,storage_bytes,exemplar_free
std::string storage_csv(const std::vector<RunRecord>& records);

/// Rebuilds records from results.csv and storage.csv in `dir`.
std::vector<RunRecord> load_records(const std::filesystem::path& dir);
/// Fills avg_acc / forgetting from the accuracy matrix.
void finalize_metrics(RunRecord& rec);

struct MethodSummary {
    std::string method;
    int runs = 0;
    double avg_acc_mean = 0, avg_acc_sd = 0;
    double forgetting_mean = 0, forgetting_sd = 0;
    bool has_forgetting = false;
    std::vector<double> avg_acc_curve;  // mean A_k per stage
    double storage_bytes_mean = 0;
    bool exemplar_free = true;
};

/// Per-method statistics, methods in first-appearance order.
std::vector<MethodSummary> summarize(const std::vector<RunRecord>& records);
std::string summary_json(const std::vector<RunRecord>& records);
std::string accuracy_svg(const std::vector<RunRecord>& records);

/// results.csv, storage.csv, summary.json, accuracy_curve.svg.
void write_report(const std::vector<RunRecord>& records, const std::filesystem::path& dir);

}  // namespace hail

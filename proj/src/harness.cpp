#include "hail/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hail/binio.hpp"
#include "hail/checkpoint.hpp"

namespace hail {

namespace {

using nlohmann::json;

std::string num(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

bool is_hail_family(const std::string& m) { return m.rfind("hail", 0) == 0; }
bool uses_hail_model(const std::string& m) { return is_hail_family(m) || m == "joint_upper"; }

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
    require(obj.is_object(), "config: '" + where + "' must be an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : obj.items())
        if (!allowed.count(k)) throw ContractError("config: unknown key '" + k + "' in " + where);
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) {
        try {
            out = obj.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ContractError(std::string("config: bad value for '") + key + "': " + e.what());
        }
    }
}

std::vector<double> as_list(const json& v) {
    if (v.is_array()) return v.get<std::vector<double>>();
    return {v.get<double>()};
}

}  // namespace

const std::vector<std::string>& known_methods() {
    static const std::vector<std::string> names{"finetune",      "lwf",         "ewc",
                                                "icarl_nme",     "hail",        "joint_upper",
                                                "hail_no_proto", "hail_oracle", "hail_audio_only",
                                                "hail_visual_only"};
    return names;
}

void ExperimentConfig::validate() const {
    require(!methods.empty(), "config: no methods");
    for (const auto& m : methods) {
        const auto& k = known_methods();
        if (std::find(k.begin(), k.end(), m) == k.end()) {
            std::string list;
            for (const auto& n : k) list += (list.empty() ? "" : ", ") + n;
            throw ContractError("unknown method '" + m + "' (known: " + list + ")");
        }
    }
    require(std::set<std::string>(methods.begin(), methods.end()).size() == methods.size(),
            "config: duplicate method names");
    require(!seeds.empty(), "config: no seeds");
    synth.validate();
    require(eta > 0.0, "config: eta must be positive");
    require(prototypes_per_intensity >= 1, "config: m must be at least 1");
    require(alpha >= 0.0 && alpha <= 1.0, "config: alpha must lie in [0, 1]");
    require(expansion_ratio >= 1, "config: expansion_ratio must be at least 1");
    GammaSchedule{gamma_max, gamma_min, std::max(1, synth.n_species - 1)}.validate();
    require(fusion.steps >= 1 && fusion.lr >= 0.0, "config: fusion needs steps >= 1 and lr >= 0");
    require(balancer.steps >= 0 && balancer.lr >= 0.0, "config: balancer needs steps >= 0 and lr >= 0");
    require(baselines.gd.steps >= 0 && baselines.gd.lr >= 0.0, "config: baselines need steps >= 0 and lr >= 0");
    require(baselines.lwf_lambda >= 0.0 && baselines.lwf_lambda <= 1.0, "config: lwf_lambda must lie in [0, 1]");
    require(baselines.ewc_lambda >= 0.0, "config: ewc_lambda must be non-negative");
    require(baselines.icarl_budget >= 1, "config: icarl_budget must be at least 1");
}

ExperimentConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ContractError(std::string("config: invalid JSON: ") + e.what());
    }
    reject_unknown_keys(j, {"methods", "seeds", "output_dir", "synth", "hail", "fusion", "baselines", "checkpoints"},
                        "top level");
    ExperimentConfig c;
    read(j, "methods", c.methods);
    read(j, "seeds", c.seeds);
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    read(j, "checkpoints", c.write_checkpoints);

    if (j.contains("synth")) {
        const json& s = j.at("synth");
        reject_unknown_keys(s,
                            {"n_species", "train_per_class", "val_per_class", "test_per_class", "d", "frames",
                             "locations", "audio_noise", "visual_noise", "species_rotation_strength",
                             "species_offset_strength", "modes_per_class", "mode_spread", "tile_jitter"},
                            "synth");
        SynthConfig& y = c.synth;
        read(s, "n_species", y.n_species);
        read(s, "train_per_class", y.train_per_class);
        read(s, "val_per_class", y.val_per_class);
        read(s, "test_per_class", y.test_per_class);
        read(s, "d", y.d);
        read(s, "frames", y.frames);
        read(s, "locations", y.locations);
        if (s.contains("audio_noise")) y.audio_noise = as_list(s.at("audio_noise"));
        if (s.contains("visual_noise")) y.visual_noise = as_list(s.at("visual_noise"));
        read(s, "species_rotation_strength", y.species_rotation_strength);
        read(s, "species_offset_strength", y.species_offset_strength);
        read(s, "modes_per_class", y.modes_per_class);
        read(s, "mode_spread", y.mode_spread);
        read(s, "tile_jitter", y.tile_jitter);
    }
    if (j.contains("hail")) {
        const json& h = j.at("hail");
        reject_unknown_keys(h,
                            {"eta", "m", "alpha", "gamma_max", "gamma_min", "expansion_ratio", "routing",
                             "balancer_steps", "balancer_lr"},
                            "hail");
        read(h, "eta", c.eta);
        read(h, "m", c.prototypes_per_intensity);
        read(h, "alpha", c.alpha);
        read(h, "gamma_max", c.gamma_max);
        read(h, "gamma_min", c.gamma_min);
        read(h, "expansion_ratio", c.expansion_ratio);
        read(h, "balancer_steps", c.balancer.steps);
        read(h, "balancer_lr", c.balancer.lr);
        if (h.contains("routing")) {
            const auto r = h.at("routing").get<std::string>();
            require(r == "prototype" || r == "oracle", "config: routing must be 'prototype' or 'oracle'");
            c.routing = r == "oracle" ? Routing::oracle : Routing::prototype;
        }
    }
    if (j.contains("fusion")) {
        const json& f = j.at("fusion");
        reject_unknown_keys(f, {"steps", "lr", "lambda_sim", "batch_size", "grad_mode"}, "fusion");
        read(f, "steps", c.fusion.steps);
        read(f, "lr", c.fusion.lr);
        read(f, "lambda_sim", c.fusion.lambda_sim);
        read(f, "batch_size", c.fusion.batch_size);
        if (f.contains("grad_mode")) {
            const auto g = f.at("grad_mode").get<std::string>();
            require(g == "analytic" || g == "finite_difference",
                    "config: grad_mode must be 'analytic' or 'finite_difference'");
            c.fusion.grad_mode = g == "analytic" ? GradMode::analytic : GradMode::finite_difference;
        }
    }
    if (j.contains("baselines")) {
        const json& b = j.at("baselines");
        reject_unknown_keys(b, {"gd_steps", "gd_lr", "lwf_lambda", "lwf_temperature", "ewc_lambda", "icarl_budget"},
                            "baselines");
        read(b, "gd_steps", c.baselines.gd.steps);
        read(b, "gd_lr", c.baselines.gd.lr);
        read(b, "lwf_lambda", c.baselines.lwf_lambda);
        read(b, "lwf_temperature", c.baselines.lwf_temperature);
        read(b, "ewc_lambda", c.baselines.ewc_lambda);
        read(b, "icarl_budget", c.baselines.icarl_budget);
    }
    c.validate();
    return c;
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["methods"] = c.methods;
    j["seeds"] = c.seeds;
    j["output_dir"] = c.output_dir.string();
    j["checkpoints"] = c.write_checkpoints;
    const SynthConfig& y = c.synth;
    j["synth"] = {{"n_species", y.n_species},
                  {"train_per_class", y.train_per_class},
                  {"val_per_class", y.val_per_class},
                  {"test_per_class", y.test_per_class},
                  {"d", y.d},
                  {"frames", y.frames},
                  {"locations", y.locations},
                  {"audio_noise", y.audio_noise},
                  {"visual_noise", y.visual_noise},
                  {"species_rotation_strength", y.species_rotation_strength},
                  {"species_offset_strength", y.species_offset_strength},
                  {"modes_per_class", y.modes_per_class},
                  {"mode_spread", y.mode_spread},
                  {"tile_jitter", y.tile_jitter}};
    j["hail"] = {{"eta", c.eta},
                 {"m", c.prototypes_per_intensity},
                 {"alpha", c.alpha},
                 {"gamma_max", c.gamma_max},
                 {"gamma_min", c.gamma_min},
                 {"expansion_ratio", c.expansion_ratio},
                 {"routing", c.routing == Routing::oracle ? "oracle" : "prototype"},
                 {"balancer_steps", c.balancer.steps},
                 {"balancer_lr", c.balancer.lr}};
    j["fusion"] = {{"steps", c.fusion.steps},
                   {"lr", c.fusion.lr},
                   {"lambda_sim", c.fusion.lambda_sim},
                   {"batch_size", c.fusion.batch_size},
                   {"grad_mode", c.fusion.grad_mode == GradMode::analytic ? "analytic" : "finite_difference"}};
    j["baselines"] = {{"gd_steps", c.baselines.gd.steps},
                      {"gd_lr", c.baselines.gd.lr},
                      {"lwf_lambda", c.baselines.lwf_lambda},
                      {"lwf_temperature", c.baselines.lwf_temperature},
                      {"ewc_lambda", c.baselines.ewc_lambda},
                      {"icarl_budget", c.baselines.icarl_budget}};
    return j.dump(2) + "\n";
}

ExperimentConfig load_config(const std::filesystem::path& path) { return config_from_json(binio::read_file(path)); }

SeedData prepare_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
    SeedData out;
    SynthConfig synth = cfg.synth;
    synth.seed = seed;
    out.stages = generate(synth);

    const int d = synth.d;
    FusionTrainConfig ft = cfg.fusion;
    ft.seed = mix_seed(seed, 202);
    const FusionParams init = FusionParams::random(d, mix_seed(seed, 201));
    const auto trained = train_fusion(out.stages.front().train, init, Matrix::Zero(d, kNumIntensities), ft);

    const int up = cfg.expansion_ratio * d;
    out.pipeline.fusion = trained.params;
    out.pipeline.av = ExpansionMap::create(d, up, mix_seed(seed, 301));
    out.pipeline.audio = ExpansionMap::create(d, up, mix_seed(seed, 302));
    out.pipeline.visual = ExpansionMap::create(d, up, mix_seed(seed, 303));
    for (const auto& st : out.stages) {
        out.train.push_back(out.pipeline.extract(st.train));
        out.val.push_back(out.pipeline.extract(st.val));
        out.test.push_back(out.pipeline.extract(st.test));
    }
    return out;
}

HailConfig hail_config_for(const ExperimentConfig& cfg, const std::string& method, std::uint64_t seed) {
    HailConfig h;
    h.ridge.eta = cfg.eta;
    h.prototypes_per_intensity = cfg.prototypes_per_intensity;
    h.alpha = cfg.alpha;
    h.gamma = {cfg.gamma_max, cfg.gamma_min, std::max(1, cfg.synth.n_species - 1)};
    h.routing = cfg.routing;
    h.balancer = cfg.balancer;
    h.seed = mix_seed(seed, 401);
    if (method == "hail_no_proto") h.use_prototypes = false;
    if (method == "hail_oracle") h.routing = Routing::oracle;
    if (method == "hail_audio_only") h.modality = Modality::audio;
    if (method == "hail_visual_only") h.modality = Modality::visual;
    if (method == "joint_upper") h.joint = true;
    return h;
}

std::unique_ptr<IncrementalLearner> make_learner(const ExperimentConfig& cfg, const std::string& method,
                                                 const SeedData& data, std::uint64_t seed) {
    BaselineConfig b = cfg.baselines;
    b.ridge.eta = cfg.eta;
    const int dim = data.pipeline.av.out_dim;
    if (uses_hail_model(method)) return std::make_unique<HailLearner>(hail_config_for(cfg, method, seed), data.pipeline);
    if (method == "finetune") return make_finetune(dim, b);
    if (method == "lwf") return make_lwf(dim, b);
    if (method == "ewc") return make_ewc(dim, b);
    if (method == "icarl_nme") return make_icarl(b);
    throw ContractError("unknown method '" + method + "'");
}

std::pair<std::int64_t, std::int64_t> count_correct(const Matrix& probs, std::span<const int> labels) {
    require(static_cast<std::size_t>(probs.rows()) == labels.size(), "count_correct: row/label mismatch");
    std::int64_t correct = 0;
    for (Eigen::Index r = 0; r < probs.rows(); ++r) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < probs.cols(); ++c)
            if (probs(r, c) > probs(r, best)) best = c;
        if (best == labels[static_cast<std::size_t>(r)]) ++correct;
    }
    return {correct, static_cast<std::int64_t>(labels.size())};
}

void finalize_metrics(RunRecord& rec) {
    rec.avg_acc.clear();
    rec.forgetting.clear();
    for (int k = 1; k <= rec.accuracy.tasks() && rec.accuracy.row_complete(k); ++k) {
        rec.avg_acc.push_back(avg_accuracy(rec.accuracy, k));
        if (k >= 2) rec.forgetting.push_back(forgetting(rec.accuracy, k));
        rec.stages_done = k;
    }
}

std::string results_csv(const std::vector<RunRecord>& records) {
    std::string out = "method,seed,stage,task,accuracy\n";
    for (const auto& r : records)
        for (int k = 1; k <= r.accuracy.tasks(); ++k)
            for (int j = 1; j <= k; ++j)
                if (r.accuracy.has(k, j))
                    out += r.method + "," + std::to_string(r.seed) + "," + std::to_string(k) + "," +
                           std::to_string(j) + "," + num(r.accuracy.at(k, j)) + "\n";
    return out;
}

std::string storage_csv(const std::vector<RunRecord>& records) {
    std::string out = "method,seed,storage_bytes,exemplar_free\n";
    for (const auto& r : records)
        out += r.method + "," + std::to_string(r.seed) + "," + std::to_string(r.storage_bytes) + "," +
               (r.exemplar_free ? "1" : "0") + "\n";
    return out;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const std::function<void(const std::string&)>& log) {
    cfg.validate();
    const bool persist = !cfg.output_dir.empty();
    if (persist) {
        std::filesystem::create_directories(cfg.output_dir);
        if (cfg.write_checkpoints) std::filesystem::create_directories(cfg.output_dir / "checkpoints");
        binio::write_file_atomic(cfg.output_dir / "config.json", config_to_json(cfg));
    }
    const int K = cfg.synth.n_species;
    std::vector<RunRecord> records;
    auto flush = [&] {
        if (!persist) return;
        binio::write_file_atomic(cfg.output_dir / "results.csv", results_csv(records));
        binio::write_file_atomic(cfg.output_dir / "storage.csv", storage_csv(records));
    };

    for (std::uint64_t seed : cfg.seeds) {
        if (log) log("seed " + std::to_string(seed) + ": generating data and training fusion");
        const SeedData data = prepare_seed(cfg, seed);
        for (const auto& method : cfg.methods) {
            auto learner = make_learner(cfg, method, data, seed);
            records.push_back({});
            RunRecord& rec = records.back();
            rec.method = method;
            rec.seed = seed;
            rec.accuracy = AccuracyMatrix(K);
            rec.exemplar_free = learner->exemplar_free();
            for (int k = 0; k < K; ++k) {
                const auto t0 = std::chrono::steady_clock::now();
                learner->learn_species(data.train[k], data.val[k], data.stages[k].species_id);
                for (int j = 0; j <= k; ++j) {
                    const auto [c, n] = count_correct(learner->predict(data.test[j]), data.test[j].labels);
                    rec.accuracy.set(k + 1, j + 1, c, n);
                }
                rec.stage_seconds.push_back(
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
                rec.storage_bytes = learner->storage_values() * sizeof(double);
                finalize_metrics(rec);
                flush();
            }
            if (log)
                log("  " + method + ": final avg_acc " + num(rec.avg_acc.back()) +
                    (rec.forgetting.empty() ? "" : ", forgetting " + num(rec.forgetting.back())));
            if (persist && cfg.write_checkpoints && is_hail_family(method)) {
                const auto* h = dynamic_cast<const HailLearner*>(learner.get());
                save_checkpoint(cfg.output_dir / "checkpoints" / (method + "_seed" + std::to_string(seed) + ".hail"),
                                h->state());
            }
        }
    }
    return records;
}

std::vector<RunRecord> load_records(const std::filesystem::path& dir) {
    std::istringstream in(binio::read_file(dir / "results.csv"));
    std::string line;
    require(static_cast<bool>(std::getline(in, line)) && line == "method,seed,stage,task,accuracy",
            "results.csv: missing or unexpected header");
    struct Entry {
        int k, j;
        double acc;
    };
    std::vector<std::pair<std::string, std::uint64_t>> order;
    std::map<std::pair<std::string, std::uint64_t>, std::vector<Entry>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 5) throw FormatError("results.csv line " + std::to_string(line_no) + ": expected 5 fields");
        try {
            const auto key = std::make_pair(f[0], static_cast<std::uint64_t>(std::stoull(f[1])));
            if (!rows.count(key)) order.push_back(key);
            rows[key].push_back({std::stoi(f[2]), std::stoi(f[3]), std::stod(f[4])});
        } catch (const std::logic_error&) {
            throw FormatError("results.csv line " + std::to_string(line_no) + ": malformed number");
        }
    }
    require(!order.empty(), "results.csv: no records");

    std::map<std::pair<std::string, std::uint64_t>, std::pair<std::size_t, bool>> storage;
    if (std::filesystem::exists(dir / "storage.csv")) {
        std::istringstream s(binio::read_file(dir / "storage.csv"));
        std::getline(s, line);
        while (std::getline(s, line)) {
            if (line.empty()) continue;
            std::vector<std::string> f;
            std::stringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ',')) f.push_back(cell);
            if (f.size() != 4) throw FormatError("storage.csv: expected 4 fields");
            storage[{f[0], std::stoull(f[1])}] = {std::stoull(f[2]), f[3] == "1"};
        }
    }

    std::vector<RunRecord> out;
    for (const auto& key : order) {
        const auto& entries = rows[key];
        int K = 0;
        for (const auto& e : entries) K = std::max(K, e.k);
        RunRecord r;
        r.method = key.first;
        r.seed = key.second;
        r.accuracy = AccuracyMatrix(K);
        for (const auto& e : entries) r.accuracy.set(e.k, e.j, simplest_fraction(e.acc));
        if (auto it = storage.find(key); it != storage.end()) {
            r.storage_bytes = it->second.first;
            r.exemplar_free = it->second.second;
        }
        finalize_metrics(r);
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

std::pair<double, double> mean_sd(const std::vector<double>& v) {
    if (v.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace

std::vector<MethodSummary> summarize(const std::vector<RunRecord>& records) {
    require(!records.empty(), "report: no records");
    std::vector<MethodSummary> out;
    for (const auto& r : records) {
        require(!r.avg_acc.empty(), "report: record " + r.method + " has no complete stage");
        if (std::none_of(out.begin(), out.end(), [&](const MethodSummary& s) { return s.method == r.method; })) {
            MethodSummary s;
            s.method = r.method;
            out.push_back(std::move(s));
        }
    }
    for (auto& s : out) {
        std::vector<double> acc, fgt, storage;
        std::vector<std::vector<double>> curve;
        for (const auto& r : records) {
            if (r.method != s.method) continue;
            ++s.runs;
            acc.push_back(r.avg_acc.back());
            if (!r.forgetting.empty()) fgt.push_back(r.forgetting.back());
            storage.push_back(static_cast<double>(r.storage_bytes));
            s.exemplar_free = r.exemplar_free;
            if (curve.size() < r.avg_acc.size()) curve.resize(r.avg_acc.size());
            for (std::size_t k = 0; k < r.avg_acc.size(); ++k) curve[k].push_back(r.avg_acc[k]);
        }
        std::tie(s.avg_acc_mean, s.avg_acc_sd) = mean_sd(acc);
        s.has_forgetting = !fgt.empty();
        std::tie(s.forgetting_mean, s.forgetting_sd) = mean_sd(fgt);
        s.storage_bytes_mean = mean_sd(storage).first;
        for (const auto& c : curve) s.avg_acc_curve.push_back(mean_sd(c).first);
    }
    return out;
}

std::string summary_json(const std::vector<RunRecord>& records) {
    json methods = json::object();
    json order = json::array();
    for (const auto& s : summarize(records)) {
        json m;
        m["runs"] = s.runs;
        m["final_avg_acc"] = {{"mean", s.avg_acc_mean}, {"sd", s.avg_acc_sd}};
        if (s.has_forgetting)
            m["final_forgetting"] = {{"mean", s.forgetting_mean}, {"sd", s.forgetting_sd}};
        else
            m["final_forgetting"] = nullptr;
        m["avg_acc_by_stage"] = s.avg_acc_curve;
        m["storage_footprint_bytes"] = s.storage_bytes_mean;
        m["exemplar_free"] = s.exemplar_free;
        methods[s.method] = m;
        order.push_back(s.method);
    }
    json per_run = json::array();
    for (const auto& r : records)
        per_run.push_back({{"method", r.method},
                           {"seed", r.seed},
                           {"avg_acc", r.avg_acc},
                           {"forgetting", r.forgetting},
                           {"storage_footprint_bytes", r.storage_bytes}});
    json j;
    j["method_order"] = order;
    j["methods"] = methods;
    j["runs"] = per_run;
    return j.dump(2) + "\n";
}

std::string accuracy_svg(const std::vector<RunRecord>& records) {
    const auto sums = summarize(records);
    std::size_t stages = 1;
    for (const auto& s : sums) stages = std::max(stages, s.avg_acc_curve.size());
    const double W = 720, H = 440, left = 70, right = 180, top = 40, bottom = 60;
    const double pw = W - left - right, ph = H - top - bottom;
    auto sx = [&](std::size_t k) {
        return stages == 1 ? left + pw / 2 : left + pw * static_cast<double>(k) / static_cast<double>(stages - 1);
    };
    auto sy = [&](double v) { return top + ph * (1.0 - v); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#17becf"};
    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << " " << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << "Average accuracy after each incremental stage</text>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        const double v = t / 5.0;
        o << "<line x1=\"" << left - 4 << "\" y1=\"" << sy(v) << "\" x2=\"" << left << "\" y2=\"" << sy(v)
          << "\" stroke=\"black\"/><text x=\"" << left - 8 << "\" y=\"" << sy(v) + 4 << "\" text-anchor=\"end\">"
          << num(v) << "</text>\n";
    }
    for (std::size_t k = 0; k < stages; ++k)
        o << "<line x1=\"" << sx(k) << "\" y1=\"" << top + ph << "\" x2=\"" << sx(k) << "\" y2=\"" << top + ph + 4
          << "\" stroke=\"black\"/><text x=\"" << sx(k) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
          << k + 1 << "</text>\n";
    o << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">Stage (species learned)</text>\n"
      << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << top + ph / 2 << ")\">Average accuracy</text>\n";
    for (std::size_t m = 0; m < sums.size(); ++m) {
        const auto& s = sums[m];
        const char* color = colors[m % std::size(colors)];
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" data-method=\"" << s.method
          << "\" points=\"";
        for (std::size_t k = 0; k < s.avg_acc_curve.size(); ++k)
            o << (k ? " " : "") << sx(k) << "," << sy(s.avg_acc_curve[k]);
        o << "\"/>\n";
        const double ly = top + 10 + 18 * static_cast<double>(m);
        o << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 35 << "\" y2=\"" << ly
          << "\" stroke=\"" << color << "\" stroke-width=\"2\"/><text x=\"" << left + pw + 40 << "\" y=\"" << ly + 4
          << "\">" << s.method << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

void write_report(const std::vector<RunRecord>& records, const std::filesystem::path& dir) {
    require(!records.empty(), "report: no records");
    std::filesystem::create_directories(dir);
    binio::write_file_atomic(dir / "results.csv", results_csv(records));
    binio::write_file_atomic(dir / "storage.csv", storage_csv(records));
    binio::write_file_atomic(dir / "summary.json", summary_json(records));
    binio::write_file_atomic(dir / "accuracy_curve.svg", accuracy_svg(records));
}

}  // namespace hail

// hailbench: generate synthetic streams, run incremental-learning benchmarks,
// rebuild reports, and inspect HAIL checkpoints.

#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hail/binio.hpp"
#include "hail/checkpoint.hpp"
#include "hail/harness.hpp"

namespace {

std::vector<std::string> split_methods(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

hail::ExperimentConfig resolve(const std::string& config_path, const std::vector<std::uint64_t>& seeds,
                               const std::string& out, const std::string& methods) {
    hail::ExperimentConfig cfg = config_path.empty() ? hail::ExperimentConfig{} : hail::load_config(config_path);
    if (!seeds.empty()) cfg.seeds = seeds;
    if (!out.empty()) cfg.output_dir = out;
    if (!methods.empty()) cfg.methods = split_methods(methods);
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exemplar-free class-incremental benchmark on synthetic audio-visual feeding data"};
    app.require_subcommand(1);

    std::string config_path, out, methods;
    std::vector<std::uint64_t> seeds;

    auto* gen = app.add_subcommand("generate", "write train/val/test AVC1 dataset files");
    gen->add_option("--config", config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
    gen->add_option("--seed", seeds, "generator seed (first value used)");
    gen->add_option("--out", out, "output directory")->required();

    auto* run = app.add_subcommand("run", "run the stage-by-stage benchmark and write reports");
    run->add_option("--config", config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
    run->add_option("--seed", seeds, "seeds to run (repeatable); overrides the config");
    run->add_option("--out", out, "output directory; overrides the config");
    run->add_option("--methods", methods, "comma-separated method list; overrides the config");

    auto* rep = app.add_subcommand("report", "rebuild summary.json and accuracy_curve.svg from results.csv");
    rep->add_option("--out", out, "directory holding results.csv")->required();
    rep->add_option("--methods", methods, "restrict to these methods");

    std::string ckpt;
    auto* insp = app.add_subcommand("inspect-checkpoint", "print the header and contents of a HAIL checkpoint");
    insp->add_option("path", ckpt, "checkpoint file")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            hail::ExperimentConfig cfg = resolve(config_path, seeds, out, "");
            hail::SynthConfig synth = cfg.synth;
            synth.seed = cfg.seeds.front();
            const auto stages = hail::generate(synth);
            std::filesystem::create_directories(out);
            for (auto split : {hail::Split::train, hail::Split::val, hail::Split::test}) {
                const auto path = std::filesystem::path(out) / (std::string(hail::split_name(split)) + ".avc1");
                hail::write_dataset(path, stages, split, synth.seed);
                std::cout << "wrote " << path.string() << " (" << std::filesystem::file_size(path) << " bytes)\n";
            }
        } else if (run->parsed()) {
            const hail::ExperimentConfig cfg = resolve(config_path, seeds, out, methods);
            const auto records = hail::run_experiment(cfg, [](const std::string& msg) { std::cerr << msg << "\n"; });
            hail::write_report(records, cfg.output_dir);
            for (const auto& s : hail::summarize(records)) {
                std::printf("%-18s avg_acc %.4f +- %.4f", s.method.c_str(), s.avg_acc_mean, s.avg_acc_sd);
                if (s.has_forgetting) std::printf("  forgetting %.4f +- %.4f", s.forgetting_mean, s.forgetting_sd);
                std::printf("  storage %.0f B\n", s.storage_bytes_mean);
            }
            std::cout << "results in " << cfg.output_dir.string() << "\n";
        } else if (rep->parsed()) {
            auto records = hail::load_records(out);
            if (!methods.empty()) {
                const auto keep = split_methods(methods);
                std::erase_if(records, [&](const hail::RunRecord& r) {
                    return std::find(keep.begin(), keep.end(), r.method) == keep.end();
                });
            }
            hail::write_report(records, out);
            std::cout << "wrote summary.json and accuracy_curve.svg in " << out << "\n";
        } else if (insp->parsed()) {
            const std::string bytes = hail::binio::read_file(ckpt);
            const auto s = hail::summarize_checkpoint(bytes);
            std::cout << "format version     " << s.version << "\n"
                      << "size               " << s.total_bytes << " bytes\n"
                      << "fusion dim         " << s.d << "\n"
                      << "expanded dims      av " << s.d_up_av << ", audio " << s.d_up_a << ", visual " << s.d_up_v
                      << "\n"
                      << "modality           " << s.modality << "\n"
                      << "routing            " << s.routing << "\n"
                      << "stages learned     " << s.stages_learned << "\n"
                      << "species heads      " << s.species << "\n"
                      << "general prototypes " << s.general_prototypes << "\n"
                      << "species prototypes " << s.species_prototypes << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

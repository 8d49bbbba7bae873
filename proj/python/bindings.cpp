// Python bindings over the C++ core.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hail/binio.hpp"
#include "hail/checkpoint.hpp"
#include "hail/harness.hpp"

namespace py = pybind11;
using namespace hail;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

ExperimentConfig parse_config(const std::string& json) { return config_from_json(json.empty() ? "{}" : json); }

FeaturePair make_pair(const Vector& audio, const Matrix& visual, int frames) {
    if (frames < 1 || visual.rows() % frames != 0)
        throw ContractError("visual rows must be a multiple of frames");
    FeaturePair p;
    p.audio = audio;
    p.visual = VisualTensor(frames, static_cast<int>(visual.rows() / frames), visual);
    return p;
}

py::dict run_record(const RunRecord& r) {
    py::dict d;
    d["method"] = r.method;
    d["seed"] = r.seed;
    d["avg_acc"] = r.avg_acc;
    d["forgetting"] = r.forgetting;
    d["storage_bytes"] = r.storage_bytes;
    d["exemplar_free"] = r.exemplar_free;
    std::vector<std::vector<double>> grid;
    for (int k = 1; k <= r.accuracy.tasks(); ++k) {
        grid.emplace_back();
        for (int j = 1; j <= k; ++j) grid.back().push_back(r.accuracy.at(k, j));
    }
    d["accuracy"] = grid;
    return d;
}

AccuracyMatrix to_matrix(const std::vector<std::vector<double>>& rows) {
    AccuracyMatrix a(static_cast<int>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k].size() != k + 1) throw ContractError("accuracy row " + std::to_string(k + 1) + " needs " +
                                                         std::to_string(k + 1) + " entries");
        for (std::size_t j = 0; j <= k; ++j) a.set(static_cast<int>(k + 1), static_cast<int>(j + 1), rows[k][j]);
    }
    return a;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Analytic class-incremental learning for audio-visual feeding intensity";

    py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def("ridge_solve", [](const Matrix& f, const Matrix& y, double eta) { return ridge_solve(f, y, {eta}); },
          py::arg("features"), py::arg("targets"), py::arg("eta") = 1.0);

    m.def(
        "kmeans",
        [](const Matrix& points, int k, int max_iter, std::uint64_t seed) {
            const KMeansResult r = kmeans(points, k, max_iter, seed);
            py::dict d;
            d["centroids"] = r.centroids;
            d["assignments"] = r.assignments;
            d["inertia"] = r.inertia;
            d["iterations"] = r.iterations;
            d["inertia_trace"] = r.inertia_trace;
            return d;
        },
        py::arg("points"), py::arg("k"), py::arg("max_iter") = kDefaultKMeansIterations, py::arg("seed") = 0);

    m.def("softmax", &stable_softmax, py::arg("logits"));

    m.def(
        "expand",
        [](const Matrix& rows, int out_dim, std::uint64_t seed) {
            return expand_rows(rows, ExpansionMap::create(static_cast<int>(rows.cols()), out_dim, seed));
        },
        py::arg("rows"), py::arg("out_dim"), py::arg("seed"), "ReLU of a seeded random projection, row by row.");

    py::class_<FusionParams>(m, "FusionParams")
        .def_static("zeros", &FusionParams::zeros, py::arg("d"))
        .def_static("random", &FusionParams::random, py::arg("d"), py::arg("seed"), py::arg("scale") = 0.0)
        .def_readwrite("w_audio", &FusionParams::w_audio)
        .def_readwrite("w_visual", &FusionParams::w_visual)
        .def_readwrite("u_audio", &FusionParams::u_audio)
        .def_readwrite("u_visual", &FusionParams::u_visual);

    m.def(
        "fuse",
        [](const Vector& audio, const Matrix& visual, int frames, const FusionParams& params) {
            const FusedOutput o = fuse_forward(make_pair(audio, visual, frames), params);
            py::dict d;
            d["fused"] = o.fused;
            d["enhanced_audio"] = o.enhanced_audio;
            d["enhanced_visual"] = o.enhanced_visual;
            d["spatial_weights"] = o.spatial_weights;
            d["temporal_weights"] = o.temporal_weights;
            d["audio_weights"] = o.audio_weights;
            d["sim_loss"] = o.sim_loss;
            return d;
        },
        py::arg("audio"), py::arg("visual"), py::arg("frames"), py::arg("params"),
        "Visual rows run frame-major: row l * S + s is frame l, location s.");

    m.def(
        "gamma_at",
        [](int k, int total_stages, double gamma_max, double gamma_min) {
            return gamma_at(GammaSchedule{gamma_max, gamma_min, total_stages}, k);
        },
        py::arg("k"), py::arg("total_stages"), py::arg("gamma_max") = 0.8, py::arg("gamma_min") = 0.3);

    m.def(
        "avg_accuracy", [](const std::vector<std::vector<double>>& a) { return avg_accuracy(to_matrix(a), static_cast<int>(a.size())); },
        py::arg("accuracy"), "Average accuracy after the last row of a lower-triangular accuracy grid.");
    m.def(
        "forgetting", [](const std::vector<std::vector<double>>& a) { return forgetting(to_matrix(a), static_cast<int>(a.size())); },
        py::arg("accuracy"));

    m.def(
        "generate",
        [](const std::filesystem::path& out, std::uint64_t seed, const std::string& config_json) {
            SynthConfig synth = parse_config(config_json).synth;
            synth.seed = seed;
            const auto stages = generate(synth);
            std::filesystem::create_directories(out);
            std::vector<std::filesystem::path> written;
            for (Split s : {Split::train, Split::val, Split::test}) {
                written.push_back(out / (std::string(split_name(s)) + ".avc1"));
                write_dataset(written.back(), stages, s, seed);
            }
            return written;
        },
        py::arg("out"), py::arg("seed") = 0, py::arg("config_json") = "{}",
        "Write train/val/test AVC1 files; returns their paths.");

    m.def(
        "read_dataset",
        [](const std::filesystem::path& path) {
            DatasetHeader h;
            const auto samples = read_dataset(path, &h);
            const auto n = static_cast<Eigen::Index>(samples.size());
            const Eigen::Index cells = static_cast<Eigen::Index>(h.frames) * h.locations;
            RowMatrix audio(n, h.d), visual(n, cells * h.d);
            std::vector<int> labels, species;
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto& s = samples[static_cast<std::size_t>(i)];
                audio.row(i) = s.audio.transpose();
                const RowMatrix v = s.visual.data;
                visual.row(i) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), v.size());
                labels.push_back(index_of(s.label));
                species.push_back(s.species_id);
            }
            py::dict d;
            d["audio"] = audio;
            d["visual"] = visual;
            d["labels"] = labels;
            d["species"] = species;
            d["d"] = h.d;
            d["frames"] = h.frames;
            d["locations"] = h.locations;
            d["n_species"] = h.n_species;
            d["seed"] = h.seed;
            return d;
        },
        py::arg("path"), "Visual rows are flattened frame, location, channel.");

    m.def(
        "run_experiment",
        [](const std::string& config_json, const std::filesystem::path& out) {
            ExperimentConfig cfg = parse_config(config_json);
            cfg.output_dir = out;
            std::vector<RunRecord> recs;
            {
                py::gil_scoped_release release;
                recs = run_experiment(cfg);
                if (!out.empty()) write_report(recs, out);
            }
            py::list l;
            for (const auto& r : recs) l.append(run_record(r));
            return l;
        },
        py::arg("config_json") = "{}", py::arg("out") = std::filesystem::path{},
        "Run the benchmark; with `out`, also write results.csv, storage.csv, summary.json and accuracy_curve.svg.");

    m.def(
        "inspect_checkpoint",
        [](const std::filesystem::path& path) {
            const CheckpointSummary s = summarize_checkpoint(binio::read_file(path));
            py::dict d;
            d["version"] = s.version;
            d["d"] = s.d;
            d["d_up_av"] = s.d_up_av;
            d["d_up_a"] = s.d_up_a;
            d["d_up_v"] = s.d_up_v;
            d["total_bytes"] = s.total_bytes;
            d["stages_learned"] = s.stages_learned;
            d["species"] = s.species;
            d["general_prototypes"] = s.general_prototypes;
            d["species_prototypes"] = s.species_prototypes;
            d["modality"] = s.modality;
            d["routing"] = s.routing;
            return d;
        },
        py::arg("path"));

    m.def("known_methods", &known_methods);
}

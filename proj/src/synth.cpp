#include "hail/synth.hpp"

#include <string>

#include "hail/binio.hpp"

namespace hail {

namespace {

double per_species(const std::vector<double>& v, int species, const char* what) {
    require(!v.empty(), std::string("SynthConfig: ") + what + " is empty");
    if (v.size() == 1) return v[0];
    require(species >= 0 && static_cast<std::size_t>(species) < v.size(),
            std::string("SynthConfig: no ") + what + " entry for species " + std::to_string(species));
    return v[static_cast<std::size_t>(species)];
}

struct SpeciesLayout {
    Matrix frame;  // d x 5, orthonormal columns in dims 4..d-1
    std::vector<Matrix> modes;  // per intensity: modes_per_class x d
};

SpeciesLayout make_layout(const SynthConfig& cfg, int species) {
    Rng rng(mix_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(species)));
    const int free = cfg.d - kNumIntensities;
    const Matrix g = rng.normal_matrix(free, 5, 1.0);
    const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(free, 5);
    SpeciesLayout out;
    out.frame = Matrix::Zero(cfg.d, 5);
    out.frame.bottomRows(free) = q;
    for (int i = 0; i < kNumIntensities; ++i) {
        Matrix m = rng.normal_matrix(cfg.modes_per_class, cfg.d, 1.0);
        for (Eigen::Index r = 0; r < m.rows(); ++r) m.row(r) *= cfg.mode_spread / m.row(r).norm();
        out.modes.push_back(std::move(m));
    }
    return out;
}

std::vector<FeaturePair> make_split(const SynthConfig& cfg, const SpeciesLayout& layout, int species, int per_class,
                                    std::uint64_t stream) {
    Rng rng(stream);
    const double a_noise = cfg.audio_noise_for(species);
    const double v_noise = cfg.visual_noise_for(species);
    std::vector<FeaturePair> out;
    out.reserve(static_cast<std::size_t>(per_class) * kNumIntensities);
    for (int n = 0; n < per_class * kNumIntensities; ++n) {
        const int i = n % kNumIntensities;
        Vector signal = Vector::Zero(cfg.d);
        signal(i) = 1.0;
        signal += cfg.species_rotation_strength * layout.frame.col(i);
        signal += cfg.species_offset_strength * layout.frame.col(4);
        const Matrix& modes = layout.modes[static_cast<std::size_t>(i)];
        signal += modes.row(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(modes.rows())))).transpose();

        FeaturePair s;
        s.label = intensity_from_index(i);
        s.species_id = species;
        s.audio = signal;
        for (int c = 0; c < cfg.d; ++c) s.audio(c) += a_noise * rng.normal();
        Matrix vis(static_cast<Eigen::Index>(cfg.frames) * cfg.locations, cfg.d);
        for (Eigen::Index r = 0; r < vis.rows(); ++r) {
            const double gain = rng.uniform(1.0 - cfg.tile_jitter, 1.0 + cfg.tile_jitter);
            for (int c = 0; c < cfg.d; ++c) vis(r, c) = gain * signal(c) + v_noise * rng.normal();
        }
        s.visual = VisualTensor(cfg.frames, cfg.locations, std::move(vis));
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

double SynthConfig::audio_noise_for(int species) const { return per_species(audio_noise, species, "audio_noise"); }
double SynthConfig::visual_noise_for(int species) const { return per_species(visual_noise, species, "visual_noise"); }

void SynthConfig::validate() const {
    require(n_species >= 1, "SynthConfig: n_species must be at least 1");
    require(train_per_class >= 1 && val_per_class >= 0 && test_per_class >= 1,
            "SynthConfig: need train and test samples per class");
    require(d >= kMinDim, "SynthConfig: d = " + std::to_string(d) + " is too small; the generator needs d >= " +
                              std::to_string(kMinDim) + " (4 shared intensity axes + 4 species axes + 1 offset axis)");
    require(frames >= 1 && locations >= 1, "SynthConfig: frames and locations must be positive");
    require(modes_per_class >= 1, "SynthConfig: modes_per_class must be at least 1");
    require(species_rotation_strength >= 0 && species_offset_strength >= 0 && mode_spread >= 0 && tile_jitter >= 0 &&
                tile_jitter < 1,
            "SynthConfig: strengths must be non-negative and jitter below 1");
    for (const auto* v : {&audio_noise, &visual_noise}) {
        require(v->size() == 1 || v->size() == static_cast<std::size_t>(n_species),
                "SynthConfig: noise lists need one entry or one per species");
        for (double x : *v) require(x >= 0.0, "SynthConfig: noise must be non-negative");
    }
}

std::vector<SpeciesStage> generate(const SynthConfig& cfg) {
    cfg.validate();
    std::vector<SpeciesStage> stages;
    for (int k = 0; k < cfg.n_species; ++k) {
        const SpeciesLayout layout = make_layout(cfg, k);
        const std::uint64_t base = mix_seed(cfg.seed, 2000 + static_cast<std::uint64_t>(k));
        SpeciesStage st;
        st.species_id = k;
        st.train = make_split(cfg, layout, k, cfg.train_per_class, mix_seed(base, 0));
        st.val = make_split(cfg, layout, k, cfg.val_per_class, mix_seed(base, 1));
        st.test = make_split(cfg, layout, k, cfg.test_per_class, mix_seed(base, 2));
        stages.push_back(std::move(st));
    }
    return stages;
}

SpeciesStage degrade(const SpeciesStage& stage, double turbidity, double acoustic_noise, std::uint64_t seed) {
    require(turbidity >= 0.0 && acoustic_noise >= 0.0, "degrade: factors must be non-negative");
    SpeciesStage out = stage;
    Rng rng(seed);
    for (auto* split : {&out.train, &out.val, &out.test}) {
        for (FeaturePair& s : *split) {
            if (acoustic_noise > 0.0)
                for (Eigen::Index c = 0; c < s.audio.size(); ++c) s.audio(c) += acoustic_noise * rng.normal();
            if (turbidity > 0.0)
                for (Eigen::Index r = 0; r < s.visual.data.rows(); ++r)
                    for (Eigen::Index c = 0; c < s.visual.data.cols(); ++c)
                        s.visual.data(r, c) += turbidity * rng.normal();
        }
    }
    return out;
}

double visual_snr(std::span<const FeaturePair> samples) {
    require(!samples.empty(), "visual_snr: no samples");
    const auto d = samples[0].visual.data.cols();
    std::array<Vector, kNumIntensities> sums;
    std::array<int, kNumIntensities> counts{};
    for (auto& v : sums) v = Vector::Zero(d);
    std::vector<Vector> pooled;
    for (const auto& s : samples) {
        pooled.push_back(s.visual.pooled());
        sums[static_cast<std::size_t>(index_of(s.label))] += pooled.back();
        ++counts[static_cast<std::size_t>(index_of(s.label))];
    }
    Vector grand = Vector::Zero(d);
    for (const auto& v : pooled) grand += v;
    grand /= static_cast<double>(pooled.size());
    double between = 0.0;
    double within = 0.0;
    for (std::size_t n = 0; n < samples.size(); ++n) {
        const auto i = static_cast<std::size_t>(index_of(samples[n].label));
        const Vector mean = sums[i] / counts[i];
        between += (mean - grand).squaredNorm();
        within += (pooled[n] - mean).squaredNorm();
    }
    require(within > 0.0, "visual_snr: no within-class variation");
    return between / within;
}

std::string_view split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "?";
}

std::string encode_dataset(std::span<const SpeciesStage> stages, Split split, std::uint64_t seed) {
    require(!stages.empty(), "encode_dataset: no stages");
    std::vector<const FeaturePair*> rows;
    for (const auto& st : stages) {
        const auto& v = split == Split::train ? st.train : split == Split::val ? st.val : st.test;
        for (const auto& s : v) rows.push_back(&s);
    }
    require(!rows.empty(), "encode_dataset: split is empty");
    const FeaturePair& first = *rows.front();
    const auto d = static_cast<std::uint32_t>(first.audio.size());
    const auto L = static_cast<std::uint32_t>(first.visual.frames);
    const auto S = static_cast<std::uint32_t>(first.visual.locations);
    for (const auto* s : rows) {
        require(s->audio.size() == d && s->visual.frames == static_cast<int>(L) &&
                    s->visual.locations == static_cast<int>(S) && s->visual.data.cols() == d,
                "encode_dataset: samples disagree on shape");
        require(s->species_id >= 0, "encode_dataset: species id must be non-negative");
    }

    binio::Writer w;
    w.put_bytes("AVC1");
    w.put<std::uint32_t>(kDatasetVersion);
    w.put<std::uint32_t>(d);
    w.put<std::uint32_t>(L);
    w.put<std::uint32_t>(S);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(stages.size()));
    w.put<std::uint64_t>(seed);
    w.put<std::uint64_t>(rows.size());
    for (const auto* s : rows) w.put<std::int32_t>(s->species_id);
    for (const auto* s : rows) w.put<std::uint8_t>(static_cast<std::uint8_t>(index_of(s->label)));
    for (const auto* s : rows)
        for (Eigen::Index c = 0; c < s->audio.size(); ++c) w.put<double>(s->audio(c));
    for (const auto* s : rows)
        for (Eigen::Index r = 0; r < s->visual.data.rows(); ++r)
            for (Eigen::Index c = 0; c < s->visual.data.cols(); ++c) w.put<double>(s->visual.data(r, c));
    return w.bytes();
}

std::vector<FeaturePair> decode_dataset(std::string_view bytes, DatasetHeader* header) {
    binio::Reader r(bytes);
    if (r.remaining() < 4 || r.get_bytes(4) != "AVC1") throw FormatError("dataset: bad magic, expected AVC1");
    DatasetHeader h;
    h.version = r.get<std::uint32_t>();
    if (h.version != kDatasetVersion)
        throw FormatError("dataset: unsupported version " + std::to_string(h.version) + ", expected " +
                          std::to_string(kDatasetVersion));
    h.d = r.get<std::uint32_t>();
    h.frames = r.get<std::uint32_t>();
    h.locations = r.get<std::uint32_t>();
    h.n_species = r.get<std::uint32_t>();
    h.seed = r.get<std::uint64_t>();
    h.count = r.get<std::uint64_t>();
    const std::uint64_t per_row = 4 + 1 + 8ULL * h.d * (1 + static_cast<std::uint64_t>(h.frames) * h.locations);
    if (h.d == 0 || h.frames == 0 || h.locations == 0 || r.remaining() != h.count * per_row)
        throw FormatError("dataset: body size does not match header (truncated or corrupt)");

    std::vector<FeaturePair> out(h.count);
    for (auto& s : out) s.species_id = r.get<std::int32_t>();
    for (auto& s : out) s.label = intensity_from_index(r.get<std::uint8_t>());
    for (auto& s : out) {
        s.audio.resize(h.d);
        for (std::uint32_t c = 0; c < h.d; ++c) s.audio(c) = r.get<double>();
    }
    const auto tiles = static_cast<Eigen::Index>(h.frames) * h.locations;
    for (auto& s : out) {
        Matrix vis(tiles, h.d);
        for (Eigen::Index t = 0; t < tiles; ++t)
            for (Eigen::Index c = 0; c < h.d; ++c) vis(t, c) = r.get<double>();
        s.visual = VisualTensor(static_cast<int>(h.frames), static_cast<int>(h.locations), std::move(vis));
    }
    if (header) *header = h;
    return out;
}

void write_dataset(const std::filesystem::path& path, std::span<const SpeciesStage> stages, Split split,
                   std::uint64_t seed) {
    binio::write_file_atomic(path, encode_dataset(stages, split, seed));
}

std::vector<FeaturePair> read_dataset(const std::filesystem::path& path, DatasetHeader* header) {
    return decode_dataset(binio::read_file(path), header);
}

}  // namespace hail

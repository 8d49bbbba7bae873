#include "hail/checkpoint.hpp"

#include "hail/binio.hpp"

namespace hail {

namespace {

constexpr std::string_view kMagic = "HAIL";

void put_map(binio::Writer& w, const ExpansionMap& m) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m.in_dim));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m.out_dim));
    w.put<std::uint64_t>(m.seed);
    w.put<double>(m.scale);
}

ExpansionMap get_map(binio::Reader& r) {
    const auto in = r.get<std::uint32_t>();
    const auto out = r.get<std::uint32_t>();
    const auto seed = r.get<std::uint64_t>();
    const auto scale = r.get<double>();
    if (in == 0 || out == 0 || !(scale > 0.0)) throw FormatError("checkpoint: invalid expansion map");
    return ExpansionMap::create(static_cast<int>(in), static_cast<int>(out), seed, scale);
}

void put_protos(binio::Writer& w, const IntensityPrototypes& p) {
    for (const auto& m : p) w.put_matrix(m);
}

IntensityPrototypes get_protos(binio::Reader& r) {
    IntensityPrototypes p;
    for (auto& m : p) m = r.get_matrix();
    return p;
}

std::string_view modality_name(Modality m) {
    switch (m) {
        case Modality::audio_visual: return "audio_visual";
        case Modality::audio: return "audio";
        case Modality::visual: return "visual";
    }
    return "?";
}

struct Header {
    std::uint32_t version, d, up_av, up_a, up_v;
};

Header read_header(binio::Reader& r) {
    if (r.remaining() < kMagic.size() || r.get_bytes(kMagic.size()) != kMagic)
        throw FormatError("checkpoint: bad magic, not a HAIL checkpoint");
    Header h{};
    h.version = r.get<std::uint32_t>();
    if (h.version != kCheckpointVersion)
        throw FormatError("checkpoint: format version " + std::to_string(h.version) + " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
    h.d = r.get<std::uint32_t>();
    h.up_av = r.get<std::uint32_t>();
    h.up_a = r.get<std::uint32_t>();
    h.up_v = r.get<std::uint32_t>();
    return h;
}

}  // namespace

std::string encode_checkpoint(const HailState& s) {
    const HailModel& m = s.model;
    s.fusion.validate();
    binio::Writer w;
    w.put_bytes(kMagic);
    w.put<std::uint32_t>(kCheckpointVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(s.fusion.dim()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m.expansion_av.out_dim));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m.expansion_a.out_dim));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m.expansion_v.out_dim));

    for (const Matrix* p : s.fusion.mats()) w.put_matrix(*p);
    put_map(w, m.expansion_av);
    put_map(w, m.expansion_a);
    put_map(w, m.expansion_v);

    w.put<std::uint8_t>(static_cast<std::uint8_t>(m.modality));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(s.routing));
    w.put<std::int32_t>(s.stages_learned);
    w.put<double>(m.gamma.gamma_max);
    w.put<double>(m.gamma.gamma_min);
    w.put<std::int32_t>(m.gamma.total_stages);
    w.put<double>(m.ridge.eta);
    w.put_matrix(m.w_general);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m.species_order.size()));
    for (int id : m.species_order) {
        const SpeciesHead& h = m.species_heads.at(id);
        w.put<std::int32_t>(id);
        w.put_matrix(h.audio);
        w.put_matrix(h.visual);
    }

    w.put<double>(m.balancer.default_beta);
    w.put<std::uint8_t>(m.balancer.strict ? 1 : 0);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m.balancer.weights.size()));
    for (const auto& [id, wt] : m.balancer.weights) {
        w.put<std::int32_t>(id);
        w.put_matrix(wt);
    }

    w.put<std::int32_t>(s.bank.m);
    w.put<double>(s.bank.alpha);
    put_protos(w, s.bank.general);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(s.bank.species.size()));
    for (const auto& [id, sp] : s.bank.species) {
        w.put<std::int32_t>(id);
        put_protos(w, sp.audio);
        put_protos(w, sp.visual);
    }
    return w.bytes();
}

HailState decode_checkpoint(std::string_view bytes) {
    binio::Reader r(bytes);
    const Header h = read_header(r);
    HailState s;
    for (Matrix* p : s.fusion.mats()) *p = r.get_matrix();
    try {
        s.fusion.validate();
    } catch (const ContractError& e) {
        throw FormatError(std::string("checkpoint: fusion block: ") + e.what());
    }
    if (static_cast<std::uint32_t>(s.fusion.dim()) != h.d) throw FormatError("checkpoint: fusion dim disagrees with header");

    HailModel& m = s.model;
    m.expansion_av = get_map(r);
    m.expansion_a = get_map(r);
    m.expansion_v = get_map(r);
    if (static_cast<std::uint32_t>(m.expansion_av.out_dim) != h.up_av ||
        static_cast<std::uint32_t>(m.expansion_a.out_dim) != h.up_a ||
        static_cast<std::uint32_t>(m.expansion_v.out_dim) != h.up_v)
        throw FormatError("checkpoint: expansion dims disagree with header");

    const auto modality = r.get<std::uint8_t>();
    const auto routing = r.get<std::uint8_t>();
    if (modality > 2 || routing > 1) throw FormatError("checkpoint: invalid modality or routing tag");
    m.modality = static_cast<Modality>(modality);
    s.routing = static_cast<Routing>(routing);
    s.stages_learned = r.get<std::int32_t>();
    m.gamma.gamma_max = r.get<double>();
    m.gamma.gamma_min = r.get<double>();
    m.gamma.total_stages = r.get<std::int32_t>();
    m.ridge.eta = r.get<double>();
    m.w_general = r.get_matrix();
    const auto n_heads = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < n_heads; ++i) {
        const int id = r.get<std::int32_t>();
        SpeciesHead head;
        head.audio = r.get_matrix();
        head.visual = r.get_matrix();
        m.species_heads[id] = std::move(head);
        m.species_order.push_back(id);
    }

    m.balancer.default_beta = r.get<double>();
    m.balancer.strict = r.get<std::uint8_t>() != 0;
    const auto n_bal = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < n_bal; ++i) {
        const int id = r.get<std::int32_t>();
        m.balancer.weights[id] = r.get_matrix();
    }

    s.bank.m = r.get<std::int32_t>();
    s.bank.alpha = r.get<double>();
    s.bank.general = get_protos(r);
    const auto n_sp = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < n_sp; ++i) {
        const int id = r.get<std::int32_t>();
        SpeciesPrototypes sp;
        sp.audio = get_protos(r);
        sp.visual = get_protos(r);
        s.bank.species[id] = std::move(sp);
    }
    if (!r.at_end()) throw FormatError("checkpoint: trailing bytes after bank");
    return s;
}

void save_checkpoint(const std::filesystem::path& path, const HailState& state) {
    binio::write_file_atomic(path, encode_checkpoint(state));
}

HailState load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(binio::read_file(path)); }

CheckpointSummary summarize_checkpoint(std::string_view bytes) {
    const HailState s = decode_checkpoint(bytes);
    CheckpointSummary c;
    c.version = kCheckpointVersion;
    c.d = static_cast<std::uint32_t>(s.fusion.dim());
    c.d_up_av = static_cast<std::uint32_t>(s.model.expansion_av.out_dim);
    c.d_up_a = static_cast<std::uint32_t>(s.model.expansion_a.out_dim);
    c.d_up_v = static_cast<std::uint32_t>(s.model.expansion_v.out_dim);
    c.total_bytes = bytes.size();
    c.stages_learned = s.stages_learned;
    c.species = static_cast<int>(s.model.species_order.size());
    for (const auto& p : s.bank.general) c.general_prototypes += static_cast<std::size_t>(p.rows());
    for (const auto& [id, sp] : s.bank.species)
        for (int i = 0; i < kNumIntensities; ++i)
            c.species_prototypes += static_cast<std::size_t>(sp.audio[i].rows() + sp.visual[i].rows());
    c.modality = modality_name(s.model.modality);
    c.routing = s.routing == Routing::oracle ? "oracle" : "prototype";
    return c;
}

}  // namespace hail

#include "hail/prototypes.hpp"

#include <algorithm>
#include <tuple>

#include "hail/decimal.hpp"

namespace hail {

namespace {

void check_labels(const Matrix& features, std::span<const int> labels, const char* who) {
    require(static_cast<std::size_t>(features.rows()) == labels.size(),
            std::string(who) + ": label count does not match feature rows");
    for (int l : labels) require(l >= 0 && l < kNumIntensities, std::string(who) + ": label out of range");
    require_finite(features, who);
}

Matrix rows_with_label(const Matrix& features, std::span<const int> labels, int label) {
    std::vector<Eigen::Index> idx;
    for (std::size_t r = 0; r < labels.size(); ++r)
        if (labels[r] == label) idx.push_back(static_cast<Eigen::Index>(r));
    Matrix out(static_cast<Eigen::Index>(idx.size()), features.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = features.row(idx[r]);
    return out;
}

Matrix cluster_centroids(const Matrix& points, int m, std::uint64_t seed) {
    const int k = std::min<int>(m, static_cast<int>(points.rows()));
    return kmeans(points, k, kDefaultKMeansIterations, seed).centroids;
}

Matrix pad_cyclic(const Matrix& centroids, int m) {
    Matrix out(m, centroids.cols());
    for (int r = 0; r < m; ++r) out.row(r) = centroids.row(r % centroids.rows());
    return out;
}

}  // namespace

bool PrototypeBank::has_general() const {
    return std::any_of(general.begin(), general.end(), [](const Matrix& p) { return p.rows() > 0; });
}

Matrix PrototypeBank::general_rows(std::vector<int>* intensities) const {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    for (const auto& p : general) {
        rows += p.rows();
        if (p.rows() > 0) cols = p.cols();
    }
    Matrix out(rows, cols);
    if (intensities) intensities->clear();
    Eigen::Index r = 0;
    for (int i = 0; i < kNumIntensities; ++i) {
        const Matrix& p = general[static_cast<std::size_t>(i)];
        if (p.rows() == 0) continue;
        out.middleRows(r, p.rows()) = p;
        r += p.rows();
        if (intensities) intensities->insert(intensities->end(), static_cast<std::size_t>(p.rows()), i);
    }
    return out;
}

std::size_t PrototypeBank::value_count() const {
    std::size_t n = 0;
    for (const auto& p : general) n += static_cast<std::size_t>(p.size());
    for (const auto& [id, sp] : species) {
        for (const auto& p : sp.audio) n += static_cast<std::size_t>(p.size());
        for (const auto& p : sp.visual) n += static_cast<std::size_t>(p.size());
    }
    return n;
}

IntensityPrototypes build_general(const Matrix& features, std::span<const int> labels, int m, std::uint64_t seed,
                                  std::vector<std::string>* warnings) {
    require(m >= 1, "build_general: m must be at least 1");
    check_labels(features, labels, "build_general");
    IntensityPrototypes out;
    for (int i = 0; i < kNumIntensities; ++i) {
        const Matrix pts = rows_with_label(features, labels, i);
        if (pts.rows() == 0) {
            out[static_cast<std::size_t>(i)] = Matrix(0, features.cols());
            if (warnings)
                warnings->push_back("no samples for intensity " + std::string(intensity_name(intensity_from_index(i))) +
                                    "; prototypes omitted");
            continue;
        }
        out[static_cast<std::size_t>(i)] =
            pad_cyclic(cluster_centroids(pts, m, mix_seed(seed, static_cast<std::uint64_t>(i))), m);
    }
    return out;
}

SpeciesPrototypes build_species(const Matrix& audio, const Matrix& visual, std::span<const int> labels,
                                int species_id, int m, std::uint64_t seed) {
    require(species_id >= 0, "build_species: species id must be non-negative");
    const std::uint64_t base = mix_seed(seed, static_cast<std::uint64_t>(species_id));
    return {build_general(audio, labels, m, base), build_general(visual, labels, m, base)};
}

IntensityPrototypes ema_update(const PrototypeBank& bank, const Matrix& features, std::span<const int> labels,
                               std::uint64_t seed) {
    require(bank.has_general(), "ema_update: bank has no general prototypes");
    require(bank.alpha >= 0.0 && bank.alpha <= 1.0, "ema_update: alpha must lie in [0, 1]");
    check_labels(features, labels, "ema_update");

    IntensityPrototypes out = bank.general;
    const double a = bank.alpha;
    for (int i = 0; i < kNumIntensities; ++i) {
        Matrix& old = out[static_cast<std::size_t>(i)];
        const Matrix pts = rows_with_label(features, labels, i);
        if (pts.rows() == 0) continue;
        const std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(i));
        if (old.rows() == 0) {
            old = pad_cyclic(cluster_centroids(pts, bank.m, s), bank.m);
            continue;
        }
        require(old.cols() == features.cols(), "ema_update: feature dimension differs from the bank");
        const Matrix fresh = cluster_centroids(pts, bank.m, s);

        std::vector<std::tuple<double, Eigen::Index, Eigen::Index>> pairs;
        for (Eigen::Index j = 0; j < fresh.rows(); ++j)
            for (Eigen::Index p = 0; p < old.rows(); ++p)
                pairs.emplace_back((fresh.row(j) - old.row(p)).squaredNorm(), j, p);
        std::sort(pairs.begin(), pairs.end());
        std::vector<bool> used_new(static_cast<std::size_t>(fresh.rows()), false);
        std::vector<bool> used_old(static_cast<std::size_t>(old.rows()), false);
        const Matrix before = old;
        const double b = decimal_complement(a);
        for (const auto& [dist, j, p] : pairs) {
            if (used_new[static_cast<std::size_t>(j)] || used_old[static_cast<std::size_t>(p)]) continue;
            used_new[static_cast<std::size_t>(j)] = true;
            used_old[static_cast<std::size_t>(p)] = true;
            old.row(p) = a * before.row(p) + b * fresh.row(j);
        }
    }
    return out;
}

std::optional<double> similarity_to_bank(const Vector& mean, const PrototypeBank& bank) {
    if (!bank.has_general()) return std::nullopt;
    const Matrix rows = bank.general_rows();
    require(rows.cols() == mean.size(), "similarity_to_bank: dimension mismatch");
    const double nm = mean.norm();
    double total = 0.0;
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        const double np = rows.row(r).norm();
        // a zero vector has no direction; count it as dissimilar
        if (nm > 0.0 && np > 0.0) total += cosine_similarity(mean, rows.row(r).transpose());
    }
    return total / static_cast<double>(rows.rows());
}

}  // namespace hail

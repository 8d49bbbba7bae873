#include "hail/inference.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace hail {

ExpandedFeatures FeatureSet::row(Eigen::Index r) const {
    return {general.row(r).transpose(), audio.row(r).transpose(), visual.row(r).transpose()};
}

FeatureSet FeatureSet::subset(std::span<const Eigen::Index> rows) const {
    FeatureSet out;
    const auto n = static_cast<Eigen::Index>(rows.size());
    out.general.resize(n, general.cols());
    out.audio.resize(n, audio.cols());
    out.visual.resize(n, visual.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index r = rows[static_cast<std::size_t>(i)];
        out.general.row(i) = general.row(r);
        out.audio.row(i) = audio.row(r);
        out.visual.row(i) = visual.row(r);
        out.labels.push_back(labels[static_cast<std::size_t>(r)]);
        out.species.push_back(species[static_cast<std::size_t>(r)]);
    }
    return out;
}

FeatureSet FeatureSet::concat(std::span<const FeatureSet> parts) {
    require(!parts.empty(), "FeatureSet::concat: nothing to concatenate");
    FeatureSet out;
    Eigen::Index n = 0;
    for (const auto& p : parts) {
        require(p.general.cols() == parts[0].general.cols() && p.audio.cols() == parts[0].audio.cols() &&
                    p.visual.cols() == parts[0].visual.cols(),
                "FeatureSet::concat: column counts differ");
        n += p.size();
    }
    out.general.resize(n, parts[0].general.cols());
    out.audio.resize(n, parts[0].audio.cols());
    out.visual.resize(n, parts[0].visual.cols());
    Eigen::Index r = 0;
    for (const auto& p : parts) {
        out.general.middleRows(r, p.size()) = p.general;
        out.audio.middleRows(r, p.size()) = p.audio;
        out.visual.middleRows(r, p.size()) = p.visual;
        out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
        out.species.insert(out.species.end(), p.species.begin(), p.species.end());
        r += p.size();
    }
    return out;
}

ExpandedFeatures FeaturePipeline::extract(const FeaturePair& sample) const {
    return {expand(fuse_forward(sample, fusion).fused, av), expand(sample.audio, audio),
            expand(sample.visual.pooled(), visual)};
}

FeatureSet FeaturePipeline::extract(std::span<const FeaturePair> samples) const {
    FeatureSet out;
    const auto n = static_cast<Eigen::Index>(samples.size());
    out.general.resize(n, av.out_dim);
    out.audio.resize(n, audio.out_dim);
    out.visual.resize(n, visual.out_dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        const FeaturePair& s = samples[static_cast<std::size_t>(i)];
        const ExpandedFeatures f = extract(s);
        out.general.row(i) = f.general.transpose();
        out.audio.row(i) = f.audio.transpose();
        out.visual.row(i) = f.visual.transpose();
        out.labels.push_back(index_of(s.label));
        out.species.push_back(s.species_id);
    }
    return out;
}

const Vector& general_input(const ExpandedFeatures& f, Modality m) {
    switch (m) {
        case Modality::audio: return f.audio;
        case Modality::visual: return f.visual;
        case Modality::audio_visual: break;
    }
    return f.general;
}

const Matrix& general_input(const FeatureSet& f, Modality m) {
    switch (m) {
        case Modality::audio: return f.audio;
        case Modality::visual: return f.visual;
        case Modality::audio_visual: break;
    }
    return f.general;
}

namespace {

double best_cosine(const Vector& q, const IntensityPrototypes& protos) {
    const double nq = q.norm();
    double best = -1.0;
    for (const Matrix& p : protos) {
        for (Eigen::Index r = 0; r < p.rows(); ++r) {
            const double np = p.row(r).norm();
            const double c = (nq > 0.0 && np > 0.0) ? p.row(r).dot(q) / (nq * np) : 0.0;
            best = std::max(best, c);
        }
    }
    return best;
}

}  // namespace

std::optional<int> route_species(const Vector& audio, const Vector& visual, const PrototypeBank& bank,
                                 Modality modality) {
    if (bank.species.empty()) return std::nullopt;
    int best_id = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& [id, protos] : bank.species) {
        double score = 0.0;
        switch (modality) {
            case Modality::audio: score = best_cosine(audio, protos.audio); break;
            case Modality::visual: score = best_cosine(visual, protos.visual); break;
            case Modality::audio_visual:
                score = 0.5 * (best_cosine(audio, protos.audio) + best_cosine(visual, protos.visual));
                break;
        }
        if (score > best) {  // map iterates ascending ids, so ties keep the lowest
            best = score;
            best_id = id;
        }
    }
    return best_id;
}

Prediction predict_features(const HailModel& model, const PrototypeBank& bank, const ExpandedFeatures& features,
                            int stage, Routing routing, std::optional<int> species) {
    require(model.initialized() && !model.species_heads.empty(), "predict: model has no learned species");

    Prediction out;
    out.gamma_used = gamma_at(model.gamma, stage);
    if (routing == Routing::oracle) {
        require(species.has_value() && *species >= 0, "predict: oracle routing needs a species id");
        out.routed_species = *species;
    } else {
        const auto routed = route_species(features.audio, features.visual, bank, model.modality);
        // no species prototypes: fall back to the most recent head
        out.routed_species = routed ? *routed : model.species_order.back();
    }
    const auto head_it = model.species_heads.find(out.routed_species);
    require(head_it != model.species_heads.end(),
            "predict: no species head for species " + std::to_string(out.routed_species));
    const SpeciesHead& head = head_it->second;

    const Vector& g = general_input(features, model.modality);
    require(g.size() == model.w_general.rows(), "predict: general feature length does not match the model");
    const Vector y_general = model.w_general.transpose() * g;

    Vector y_species;
    switch (model.modality) {
        case Modality::audio:
            out.beta_a = Vector::Ones(kNumIntensities);
            y_species = head.audio.transpose() * features.audio;
            break;
        case Modality::visual:
            out.beta_a = Vector::Zero(kNumIntensities);
            y_species = head.visual.transpose() * features.visual;
            break;
        case Modality::audio_visual: {
            const ModalityBetas b = beta_weights(features.audio, features.visual, model.balancer, out.routed_species);
            out.beta_a = b.audio;
            y_species = b.audio.cwiseProduct(head.audio.transpose() * features.audio) +
                        b.visual.cwiseProduct(head.visual.transpose() * features.visual);
            break;
        }
    }
    out.probs = stable_softmax(out.gamma_used * y_general + (1.0 - out.gamma_used) * y_species);
    Eigen::Index arg = 0;
    out.probs.maxCoeff(&arg);
    out.predicted = intensity_from_index(static_cast<int>(arg));
    return out;
}

Prediction predict(const HailModel& model, const PrototypeBank& bank, const FeaturePair& sample,
                   const FusionParams& fusion, int stage, Routing routing) {
    require(routing != Routing::oracle || sample.species_id >= 0, "predict: oracle routing needs a species id");
    const FeaturePipeline pipe{fusion, model.expansion_av, model.expansion_a, model.expansion_v};
    std::optional<int> sp;
    if (routing == Routing::oracle) sp = sample.species_id;
    return predict_features(model, bank, pipe.extract(sample), stage, routing, sp);
}

namespace {

void check_balancer_inputs(const Matrix& weights, const SpeciesHead& head, const Matrix& audio, const Matrix& visual,
                           std::span<const int> labels) {
    require(audio.rows() == visual.rows() && static_cast<std::size_t>(audio.rows()) == labels.size(),
            "balancer: row counts differ");
    require(!labels.empty(), "balancer: no samples");
    require(weights.rows() == kNumIntensities && weights.cols() == audio.cols() + visual.cols(),
            "balancer: weight shape mismatch");
    require(head.audio.rows() == audio.cols() && head.visual.rows() == visual.cols(),
            "balancer: species head does not match feature dimensions");
}

}  // namespace

double balancer_loss(const Matrix& weights, const SpeciesHead& head, const Matrix& audio, const Matrix& visual,
                     std::span<const int> labels) {
    check_balancer_inputs(weights, head, audio, visual, labels);
    const Matrix za = audio * head.audio;    // n x 4
    const Matrix zv = visual * head.visual;  // n x 4
    const Matrix z = audio * weights.leftCols(audio.cols()).transpose() +
                     visual * weights.rightCols(visual.cols()).transpose();
    double total = 0.0;
    for (Eigen::Index r = 0; r < za.rows(); ++r) {
        const Vector beta = z.row(r).transpose().unaryExpr([](double v) { return sigmoid(v); });
        const Vector y = beta.cwiseProduct(za.row(r).transpose()) +
                         (1.0 - beta.array()).matrix().cwiseProduct(zv.row(r).transpose());
        const Vector p = stable_softmax(y);
        total -= std::log(p(labels[static_cast<std::size_t>(r)]));
    }
    return total / static_cast<double>(za.rows());
}

Matrix balancer_gradient(const Matrix& weights, const SpeciesHead& head, const Matrix& audio, const Matrix& visual,
                         std::span<const int> labels) {
    check_balancer_inputs(weights, head, audio, visual, labels);
    const Eigen::Index n = audio.rows();
    const Matrix za = audio * head.audio;
    const Matrix zv = visual * head.visual;
    const Matrix z = audio * weights.leftCols(audio.cols()).transpose() +
                     visual * weights.rightCols(visual.cols()).transpose();
    // dL/dz (n x 4), then chain through the concatenated input
    Matrix dz(n, kNumIntensities);
    for (Eigen::Index r = 0; r < n; ++r) {
        const Vector beta = z.row(r).transpose().unaryExpr([](double v) { return sigmoid(v); });
        const Vector diff = za.row(r).transpose() - zv.row(r).transpose();
        const Vector y = zv.row(r).transpose() + beta.cwiseProduct(diff);
        Vector dy = stable_softmax(y);
        dy(labels[static_cast<std::size_t>(r)]) -= 1.0;
        dz.row(r) = (dy.array() * diff.array() * beta.array() * (1.0 - beta.array())).transpose();
    }
    Matrix grad(kNumIntensities, audio.cols() + visual.cols());
    grad.leftCols(audio.cols()) = dz.transpose() * audio;
    grad.rightCols(visual.cols()) = dz.transpose() * visual;
    return grad / static_cast<double>(n);
}

ModalityBalancer train_balancer(ModalityBalancer balancer, int species, const Matrix& audio, const Matrix& visual,
                                std::span<const int> labels, const HailModel& model, const BalancerTrainConfig& cfg) {
    require(cfg.steps >= 1, "train_balancer: steps must be at least 1");
    require(cfg.lr >= 0.0, "train_balancer: lr must be non-negative");
    const auto head_it = model.species_heads.find(species);
    require(head_it != model.species_heads.end(),
            "train_balancer: species " + std::to_string(species) + " has not been fitted");

    auto [it, inserted] = balancer.weights.try_emplace(species);
    if (inserted) it->second = Matrix::Zero(kNumIntensities, audio.cols() + visual.cols());
    Matrix& w = it->second;
    for (int step = 0; step < cfg.steps; ++step) {
        const Matrix g = balancer_gradient(w, head_it->second, audio, visual, labels);
        if (!g.allFinite()) throw NumericalError("train_balancer: non-finite gradient at step " + std::to_string(step));
        w -= cfg.lr * g;
    }
    const double loss = balancer_loss(w, head_it->second, audio, visual, labels);
    if (!std::isfinite(loss)) throw NumericalError("train_balancer: non-finite loss");
    return balancer;
}

}  // namespace hail

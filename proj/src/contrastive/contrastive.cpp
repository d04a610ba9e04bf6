#include "slr/contrastive/contrastive.hpp"

#include <cmath>
#include <numeric>

#include "slr/error.hpp"
#include "slr/numerics/kernels.hpp"

namespace slr {

namespace {

void require_unit_rows(const Matrix& m, const char* what) {
    for (Index i = 0; i < m.rows(); ++i) {
        if (std::abs(m.row(i).norm() - 1.0) > 1e-9) {
            throw ParameterError(std::string(what) + ": row " + std::to_string(i) + " is not unit length");
        }
    }
}

} // namespace

void ContrastiveConfig::validate() const {
    if (!(temperature > 0.0)) throw ParameterError("contrastive: temperature must be positive");
    if (!(alpha >= 0.0)) throw ParameterError("contrastive: alpha must be nonnegative");
}

void BatchPairing::validate() const {
    const auto b = skeleton_features.rows();
    const auto m = text_features.rows();
    if (b == 0 || m == 0) throw DimensionError("pairing: empty side");
    if (skeleton_features.cols() != text_features.cols()) throw DimensionError("pairing: feature widths differ");
    if (static_cast<Index>(skeleton_labels.size()) != b) throw DimensionError("pairing: skeleton label count");
    if (static_cast<Index>(text_labels.size()) != m) throw DimensionError("pairing: text label count");
    if (!counts.empty()) {
        if (static_cast<Index>(counts.size()) != b) throw DimensionError("pairing: one count per skeleton");
        if (std::accumulate(counts.begin(), counts.end(), Index{0}) != m) {
            throw DimensionError("pairing: counts must sum to the number of texts");
        }
    }
    require_unit_rows(skeleton_features, "pairing skeleton features");
    require_unit_rows(text_features, "pairing text features");
}

Matrix similarity_matrix(const Matrix& skeletons, const Matrix& texts) {
    if (skeletons.cols() != texts.cols()) throw DimensionError("similarity_matrix: feature widths differ");
    return skeletons * texts.transpose();
}

Matrix q_s2t(const Matrix& sim, double temperature) { return softmax(sim, 1, temperature); }

Matrix q_t2s(const Matrix& sim, double temperature) { return softmax(sim, 0, temperature).transpose(); }

Matrix match_distribution(std::span<const int> anchor_labels, std::span<const int> target_labels) {
    const auto rows = static_cast<Index>(anchor_labels.size());
    const auto cols = static_cast<Index>(target_labels.size());
    Matrix p = Matrix::Zero(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        Index matches = 0;
        for (Index c = 0; c < cols; ++c) matches += target_labels[static_cast<std::size_t>(c)] == anchor_labels[static_cast<std::size_t>(i)];
        if (matches == 0) {
            throw DegeneratePairingError("match_distribution: label " +
                                         std::to_string(anchor_labels[static_cast<std::size_t>(i)]) +
                                         " has no matching entry on the other side");
        }
        const double w = 1.0 / static_cast<double>(matches);
        for (Index c = 0; c < cols; ++c) {
            if (target_labels[static_cast<std::size_t>(c)] == anchor_labels[static_cast<std::size_t>(i)]) p(i, c) = w;
        }
    }
    return p;
}

ad::Var contrastive_loss(ad::Var skeleton_features, const Matrix& text_features, std::span<const int> skeleton_labels,
                         std::span<const int> text_labels, const ContrastiveConfig& config) {
    config.validate();
    ad::Tape& tape = *skeleton_features.tape;
    if (skeleton_features.rows() != static_cast<Index>(skeleton_labels.size()) ||
        text_features.rows() != static_cast<Index>(text_labels.size())) {
        throw DimensionError("contrastive_loss: label counts do not match feature rows");
    }
    const Matrix p_s2t = match_distribution(skeleton_labels, text_labels);
    const Matrix p_t2s = match_distribution(text_labels, skeleton_labels);

    ad::Var sim = tape.matmul_transposed(skeleton_features, tape.constant(text_features));
    ad::Var q_st = tape.softmax(sim, 1, config.temperature);
    ad::Var q_ts = tape.transpose(tape.softmax(sim, 0, config.temperature));
    ad::Var kl_st = tape.kl_divergence(tape.constant(p_s2t), q_st, 1);
    ad::Var kl_ts = tape.kl_divergence(tape.constant(p_t2s), q_ts, 1);
    return 0.5 * (tape.mean(kl_st) + tape.mean(kl_ts));
}

double contrastive_loss(const BatchPairing& pairing, const ContrastiveConfig& config) {
    pairing.validate();
    ad::Tape tape;
    return contrastive_loss(tape.constant(pairing.skeleton_features), pairing.text_features, pairing.skeleton_labels,
                            pairing.text_labels, config)
        .scalar();
}

double multipart_loss(const std::optional<BatchPairing>& global, const std::optional<BatchPairing>& synonym,
                      const std::map<Part, BatchPairing>& parts, const ContrastiveConfig& config) {
    double sum = 0.0;
    int terms = 0;
    if (global) {
        sum += contrastive_loss(*global, config);
        ++terms;
    }
    if (synonym) {
        sum += contrastive_loss(*synonym, config);
        ++terms;
    }
    for (Part p : kAllParts) {
        const auto it = parts.find(p);
        if (it == parts.end()) continue;
        sum += contrastive_loss(it->second, config);
        ++terms;
    }
    if (terms == 0) throw ContractError("multipart_loss: no terms to average");
    return sum / terms;
}

ad::Var multipart_loss(std::span<const ad::Var> terms) {
    if (terms.empty()) throw ContractError("multipart_loss: no terms to average");
    ad::Var sum = terms.front();
    for (std::size_t i = 1; i < terms.size(); ++i) sum = sum + terms[i];
    return (1.0 / static_cast<double>(terms.size())) * sum;
}

double total_loss(double classification, double contrastive, const ContrastiveConfig& config) {
    config.validate();
    return classification + config.alpha * contrastive;
}

ad::Var total_loss(ad::Var classification, ad::Var contrastive, const ContrastiveConfig& config) {
    config.validate();
    return classification + config.alpha * contrastive;
}

} // namespace slr

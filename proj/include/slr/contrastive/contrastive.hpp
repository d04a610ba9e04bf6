#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "slr/numerics/tape.hpp"
#include "slr/skeleton/layout.hpp"

namespace slr {

struct ContrastiveConfig {
    double temperature = 0.1;
    double alpha = 0.5;

    void validate() const;
};

/// B skeleton features against M text features, with class labels on both sides.
struct BatchPairing {
    Matrix skeleton_features;        // B x d, unit rows
    Matrix text_features;            // M x d, unit rows
    std::vector<int> skeleton_labels;
    std::vector<int> text_labels;
    std::vector<int> counts;         // optional m_i per skeleton; sums to M when given

    void validate() const;
};

/// Dot products of unit rows, B x M.
Matrix similarity_matrix(const Matrix& skeletons, const Matrix& texts);

/// Row softmax of sim / tau: each skeleton's distribution over all M texts.
Matrix q_s2t(const Matrix& sim, double temperature);

/// Column softmax of sim / tau, returned M x B: each text's distribution over the B skeletons.
Matrix q_t2s(const Matrix& sim, double temperature);

/// p[i][c] = 1 / #{texts sharing anchor i's label} where labels match, else 0.
/// Throws DegeneratePairingError when an anchor has no matching text.
Matrix match_distribution(std::span<const int> anchor_labels, std::span<const int> target_labels);

/// 1/2 [ mean_i KL(p_i || q_s2t_i) + mean_j KL(p'_j || q_t2s_j) ], where p' is the
/// text-to-skeleton match distribution.
double contrastive_loss(const BatchPairing& pairing, const ContrastiveConfig& config);

/// Recorded version: skeleton features live on the tape, texts are frozen.
ad::Var contrastive_loss(ad::Var skeleton_features, const Matrix& text_features,
                         std::span<const int> skeleton_labels, std::span<const int> text_labels,
                         const ContrastiveConfig& config);

/// Mean of the terms actually evaluated: global, synonym, then one per part present.
double multipart_loss(const std::optional<BatchPairing>& global, const std::optional<BatchPairing>& synonym,
                      const std::map<Part, BatchPairing>& parts, const ContrastiveConfig& config);

/// Mean of already-recorded terms. Throws when `terms` is empty.
ad::Var multipart_loss(std::span<const ad::Var> terms);

/// L_cls + alpha * L_con_multi.
double total_loss(double classification, double contrastive, const ContrastiveConfig& config);
ad::Var total_loss(ad::Var classification, ad::Var contrastive, const ContrastiveConfig& config);

} // namespace slr

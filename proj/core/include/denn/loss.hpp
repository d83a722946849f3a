#pragma once

// Training objectives: classification BCE and the label-aware contrastive
// loss over a duplicated batch of 2N views, where views i and (i + N) mod 2N
// are two dropout passes of the same sample.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "denn/math.hpp"

namespace denn {

/// DCL: own view is the only positive, negatives weighted by 2 - l.
/// UCL: DCL with every weight 1.
/// SCL: positives are the own view plus every view with an identical label
///      vector; weights 1; loss is the mean over positives.
/// WSCL: SCL positives with DCL weights.
enum class ContrastiveVariant { dcl, ucl, scl, wscl };

std::string_view to_string(ContrastiveVariant v);
ContrastiveVariant variant_from_string(std::string_view name);

/// |y_i AND y_j| / max(|y_i|, |y_j|). Two all-zero vectors give 0 and a warning.
double label_similarity(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

/// 2 - l for l in [0, 1].
double contrastive_weight(double label_sim);

struct BceResult {
  double loss = 0.0;
  std::vector<double> grad_logits;  // y_hat - y
};

/// Sum over classes of the binary cross-entropy. Probabilities are clamped to
/// [1e-12, 1 - 1e-12] before taking logs.
BceResult bce_loss(std::span<const double> y_hat, std::span<const std::uint8_t> y);

/// Index of the other view of the same sample: (i + N) mod 2N.
inline std::size_t partner_view(std::size_t i, std::size_t two_n) {
  return (i + two_n / 2) % two_n;
}

/// Pairwise label similarity over 2N views. The diagonal and every
/// (i, partner) entry are 1.
Matrix label_similarity_matrix(std::span<const LabelVector> labels);

/// Elementwise 2 - l.
Matrix weight_matrix(const Matrix& label_sim);

Matrix cosine_similarity_matrix(std::span<const DenseVector> embeddings);

/// P_ij = w_ij exp(s_ij / tau) / sum_{k != anchor} w_ik exp(s_ik / tau).
/// Entry `anchor` of the result is 0.
std::vector<double> pij(std::span<const double> sims_row, std::span<const double> weights_row,
                        std::size_t anchor, double tau1);

struct ContrastiveResult {
  double loss = 0.0;          // summed over all 2N anchors
  Matrix grad_similarities;   // dL/ds_ij; row i holds anchor i's terms
};

/// Contrastive loss on a 2N x 2N similarity matrix. Label similarities are
/// computed from `labels`.
ContrastiveResult contrastive_loss(const Matrix& similarities, std::span<const LabelVector> labels,
                                   double tau1, ContrastiveVariant variant);

/// Same, with caller-supplied label similarities (used by the weighted
/// variants). `labels` still decides SCL/WSCL positives.
ContrastiveResult contrastive_loss(const Matrix& similarities, const Matrix& label_sim,
                                   std::span<const LabelVector> labels, double tau1,
                                   ContrastiveVariant variant);

/// Chains dL/ds through s_ij = cos(h_i, h_j). Both (i, j) and (j, i) entries
/// of `grad_similarities` contribute to h_i.
std::vector<DenseVector> similarity_grad_to_embeddings(std::span<const DenseVector> embeddings,
                                                       const Matrix& grad_similarities);

inline double total_loss(double bce, double con, double alpha) { return bce + alpha * con; }

}  // namespace denn

#include "denn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "denn/error.hpp"

namespace denn {

std::string_view to_string(ContrastiveVariant v) {
  switch (v) {
    case ContrastiveVariant::dcl: return "dcl";
    case ContrastiveVariant::ucl: return "ucl";
    case ContrastiveVariant::scl: return "scl";
    case ContrastiveVariant::wscl: return "wscl";
  }
  return "dcl";
}

ContrastiveVariant variant_from_string(std::string_view name) {
  if (name == "dcl") return ContrastiveVariant::dcl;
  if (name == "ucl") return ContrastiveVariant::ucl;
  if (name == "scl") return ContrastiveVariant::scl;
  if (name == "wscl") return ContrastiveVariant::wscl;
  fail(Errc::config_error, "unknown contrastive variant '" + std::string(name) + "'");
}

double label_similarity(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  require(a.size() == b.size(), Errc::dimension_mismatch,
          "label_similarity: label vectors differ in length");
  std::size_t common = 0;
  std::size_t na = 0;
  std::size_t nb = 0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    na += a[c] != 0;
    nb += b[c] != 0;
    common += (a[c] != 0 && b[c] != 0);
  }
  const std::size_t denom = std::max(na, nb);
  if (denom == 0) {
    warn("label_similarity: both label vectors are empty; similarity set to 0");
    return 0.0;
  }
  return static_cast<double>(common) / static_cast<double>(denom);
}

double contrastive_weight(double label_sim) {
  require(label_sim >= 0.0 && label_sim <= 1.0, Errc::invalid_argument,
          "contrastive_weight: label similarity outside [0, 1]");
  return 1.0 + (1.0 - label_sim);
}

BceResult bce_loss(std::span<const double> y_hat, std::span<const std::uint8_t> y) {
  require(y_hat.size() == y.size(), Errc::dimension_mismatch, "bce_loss: length mismatch");
  constexpr double eps = 1e-12;
  BceResult r;
  r.grad_logits.resize(y.size());
  for (std::size_t c = 0; c < y.size(); ++c) {
    const double p = std::clamp(y_hat[c], eps, 1.0 - eps);
    const double t = y[c] != 0 ? 1.0 : 0.0;
    r.loss -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    r.grad_logits[c] = y_hat[c] - t;
  }
  return r;
}

Matrix label_similarity_matrix(std::span<const LabelVector> labels) {
  const std::size_t n = labels.size();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    l(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = j == partner_view(i, n) ? 1.0 : label_similarity(labels[i], labels[j]);
      l(i, j) = v;
      l(j, i) = v;
    }
  }
  return l;
}

Matrix weight_matrix(const Matrix& label_sim) {
  Matrix w(label_sim.rows, label_sim.cols);
  for (std::size_t k = 0; k < w.data.size(); ++k) w.data[k] = contrastive_weight(label_sim.data[k]);
  return w;
}

Matrix cosine_similarity_matrix(std::span<const DenseVector> embeddings) {
  const std::size_t n = embeddings.size();
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    s(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = cosine_sim(embeddings[i], embeddings[j]);
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return s;
}

namespace {

// Denominator logits s_ij / tau + log w_ij over j != anchor, and their log-sum-exp.
double log_denominator(std::span<const double> sims_row, std::span<const double> weights_row,
                       std::size_t anchor, double tau1, std::vector<double>& logits) {
  logits.clear();
  for (std::size_t j = 0; j < sims_row.size(); ++j) {
    if (j == anchor) continue;
    logits.push_back(sims_row[j] / tau1 + std::log(weights_row[j]));
  }
  return log_sum_exp(logits);
}

}  // namespace

std::vector<double> pij(std::span<const double> sims_row, std::span<const double> weights_row,
                        std::size_t anchor, double tau1) {
  require(tau1 > 0.0, Errc::invalid_argument, "pij: tau1 must be positive");
  require(sims_row.size() == weights_row.size() && anchor < sims_row.size(),
          Errc::dimension_mismatch, "pij: row lengths disagree");
  std::vector<double> logits;
  const double log_z = log_denominator(sims_row, weights_row, anchor, tau1, logits);
  std::vector<double> p(sims_row.size(), 0.0);
  for (std::size_t j = 0, k = 0; j < sims_row.size(); ++j) {
    if (j == anchor) continue;
    p[j] = std::exp(logits[k++] - log_z);
  }
  return p;
}

ContrastiveResult contrastive_loss(const Matrix& similarities, std::span<const LabelVector> labels,
                                   double tau1, ContrastiveVariant variant) {
  require(labels.size() == similarities.rows, Errc::dimension_mismatch,
          "contrastive_loss: need one label vector per view");
  return contrastive_loss(similarities, label_similarity_matrix(labels), labels, tau1, variant);
}

ContrastiveResult contrastive_loss(const Matrix& similarities, const Matrix& label_sim,
                                   std::span<const LabelVector> labels, double tau1,
                                   ContrastiveVariant variant) {
  require(tau1 > 0.0, Errc::invalid_argument, "contrastive_loss: tau1 must be positive");
  const std::size_t n = similarities.rows;
  require(n >= 2 && n % 2 == 0, Errc::invalid_argument,
          "contrastive_loss: batch must hold 2N >= 2 views");
  require(similarities.cols == n && label_sim.rows == n && label_sim.cols == n &&
              labels.size() == n,
          Errc::dimension_mismatch, "contrastive_loss: matrix shapes disagree");

  const bool weighted = variant == ContrastiveVariant::dcl || variant == ContrastiveVariant::wscl;
  const bool supervised = variant == ContrastiveVariant::scl || variant == ContrastiveVariant::wscl;
  const Matrix weights = weighted ? weight_matrix(label_sim) : [&] {
    Matrix ones(n, n);
    std::fill(ones.data.begin(), ones.data.end(), 1.0);
    return ones;
  }();

  ContrastiveResult r;
  r.grad_similarities = Matrix(n, n);
  std::vector<double> logits;
  std::vector<std::size_t> positives;
  for (std::size_t i = 0; i < n; ++i) {
    const auto s_row = similarities.row(i);
    const auto w_row = weights.row(i);
    const std::size_t partner = partner_view(i, n);
    const double log_z = log_denominator(s_row, w_row, i, tau1, logits);
    auto g_row = r.grad_similarities.row(i);

    positives.assign(1, partner);
    if (supervised) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i && j != partner && labels[j] == labels[i]) positives.push_back(j);
      }
    }

    if (positives.size() == 1) {
      r.loss += log_z - s_row[partner] / tau1;
      double negative_sum = 0.0;
      for (std::size_t j = 0, k = 0; j < n; ++j) {
        if (j == i) continue;
        const double p = std::exp(logits[k++] - log_z);
        if (j == partner) continue;
        g_row[j] = p / tau1;
        negative_sum += g_row[j];
      }
      g_row[partner] = -negative_sum;
      continue;
    }

    const double inv_count = 1.0 / static_cast<double>(positives.size());
    double anchor_loss = 0.0;
    for (std::size_t q : positives) anchor_loss += log_z - s_row[q] / tau1;
    r.loss += anchor_loss * inv_count;
    for (std::size_t j = 0, k = 0; j < n; ++j) {
      if (j == i) continue;
      g_row[j] = std::exp(logits[k++] - log_z) / tau1;
    }
    for (std::size_t q : positives) g_row[q] -= inv_count / tau1;
  }
  return r;
}

std::vector<DenseVector> similarity_grad_to_embeddings(std::span<const DenseVector> embeddings,
                                                       const Matrix& grad_similarities) {
  const std::size_t n = embeddings.size();
  require(grad_similarities.rows == n && grad_similarities.cols == n, Errc::dimension_mismatch,
          "similarity_grad_to_embeddings: shape mismatch");
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    norms[i] = l2_norm(embeddings[i]);
    require(norms[i] > 0.0, Errc::invalid_argument,
            "similarity_grad_to_embeddings: zero-norm embedding");
  }
  std::vector<DenseVector> grads(n, DenseVector(n > 0 ? embeddings[0].size() : 0, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& hi = embeddings[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double g = grad_similarities(i, j) + grad_similarities(j, i);
      if (g == 0.0) continue;
      const auto& hj = embeddings[j];
      const double s = dot(hi, hj) / (norms[i] * norms[j]);
      const double a = g / (norms[i] * norms[j]);
      const double b = g * s / (norms[i] * norms[i]);
      for (std::size_t e = 0; e < hi.size(); ++e) grads[i][e] += a * hj[e] - b * hi[e];
    }
  }
  return grads;
}

}  // namespace denn

#include "denn/math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "denn/error.hpp"

namespace denn {

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), Errc::dimension_mismatch, "dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double l2_norm(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  return std::sqrt(acc);
}

double cosine_from_parts(double dot_ab, double norm_a, double norm_b) {
  const double c = dot_ab / (norm_a * norm_b);
  return std::clamp(c, -1.0, 1.0);
}

double cosine_sim(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), Errc::dimension_mismatch,
          "cosine_sim: vectors have different lengths");
  const double d = dot(a, b);
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  require(na > 0.0 && nb > 0.0, Errc::invalid_argument,
          "cosine_sim: zero-norm input");
  return cosine_from_parts(d, na, nb);
}

std::vector<double> softmax_temp(std::span<const double> scores, double tau) {
  require(!scores.empty(), Errc::invalid_argument, "softmax_temp: empty scores");
  require(tau > 0.0, Errc::invalid_argument, "softmax_temp: tau must be positive");
  const double top = *std::max_element(scores.begin(), scores.end());
  std::vector<double> out(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp((scores[i] - top) / tau);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(x.begin(), x.end());
  double acc = 0.0;
  for (double v : x) acc += std::exp(v - top);
  return top + std::log(acc);
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace denn

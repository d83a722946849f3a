#pragma once

// Shared numerics. All arithmetic is carried out in double precision.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace denn {

using DenseVector = std::vector<double>;
using ProbabilityVector = std::vector<double>;
/// Binary label vector of length C; entries are 0 or 1.
using LabelVector = std::vector<std::uint8_t>;

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> a);

/// dot / (norm_a * norm_b), clamped to [-1, 1]. Both norms must be nonzero.
/// cosine_sim() and the datastore scan go through this so that equal inputs
/// give bit-identical similarities on either path.
double cosine_from_parts(double dot_ab, double norm_a, double norm_b);

/// Cosine similarity. Throws on length mismatch or a zero-norm input.
double cosine_sim(std::span<const double> a, std::span<const double> b);

/// softmax(scores / tau), evaluated with max-subtraction.
std::vector<double> softmax_temp(std::span<const double> scores, double tau);

/// log(sum(exp(x))) with max-subtraction. Empty input gives -inf.
double log_sum_exp(std::span<const double> x);

double sigmoid(double x);

bool all_finite(std::span<const double> x);

}  // namespace denn

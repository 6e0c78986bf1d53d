#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "coopt/model.hpp"

namespace coopt {

using Vector = std::vector<double>;

// Row-major n x n real matrix.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}
  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const { return n_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * n_ + c];
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * n_, n_};
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

// Real symmetric operator: either diagonal or dense symmetric.
class HermitianOperator {
 public:
  static HermitianOperator diagonal(Vector entries);
  // Throws Error if the matrix is not square or |H[a][b] - H[b][a]| > 1e-12.
  static HermitianOperator dense(Matrix matrix);

  std::size_t dimension() const;
  bool is_diagonal() const { return std::holds_alternative<Vector>(data_); }
  const Vector& diagonal_entries() const { return std::get<Vector>(data_); }
  const Matrix& dense_matrix() const { return std::get<Matrix>(data_); }

  double entry(std::size_t r, std::size_t c) const;
  void apply(std::span<const double> x, std::span<double> y) const;
  Vector apply(std::span<const double> x) const;

  double max_abs_diagonal() const;
  // Gershgorin bound on the spectral radius.
  double spectral_radius_bound() const;
  double frobenius_norm() const;
  double trace() const;
  Matrix to_dense() const;

 private:
  explicit HermitianOperator(std::variant<Vector, Matrix> data)
      : data_(std::move(data)) {}
  std::variant<Vector, Matrix> data_;
  // Per row of a dense operator: [first, last] nonzero column.
  std::vector<std::pair<std::size_t, std::size_t>> row_span_;
};

struct EigenDecomposition {
  Vector eigenvalues;  // ascending
  Matrix eigenvectors;  // column k pairs with eigenvalues[k]
  int sweeps = 0;

  Vector eigenvector(std::size_t k) const;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// ln(sum(exp(values))). -inf entries are allowed; all -inf returns -inf.
// Throws Error on empty input.
double log_sum_exp(std::span<const double> values);

inline constexpr std::size_t kMaxJacobiDimension = 2048;
inline constexpr int kMaxJacobiSweeps = 100;

// Cyclic Jacobi rotations until the off-diagonal Frobenius norm is at most
// 1e-12 * ||H||_F. Throws ConvergenceError after kMaxJacobiSweeps sweeps.
EigenDecomposition jacobi_eigen(const HermitianOperator& h);

using Derivative = std::function<void(std::span<const double> state,
                                      std::span<double> out)>;

// One classical fourth-order Runge-Kutta step. Throws Error if the
// derivative produces a non-finite value.
Vector rk4_step(const Derivative& derivative, std::span<const double> state,
                double dt);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

}  // namespace coopt

#include "coopt/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace coopt {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.size()) {
      throw Error("matrix must be square: row " + std::to_string(r) + " has " +
                  std::to_string(rows[r].size()) + " entries, expected " +
                  std::to_string(rows.size()));
    }
    for (std::size_t c = 0; c < rows.size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

HermitianOperator HermitianOperator::diagonal(Vector entries) {
  if (entries.empty()) throw Error("operator dimension must be >= 1");
  for (double v : entries) {
    if (!std::isfinite(v)) throw Error("operator entries must be finite");
  }
  return HermitianOperator(std::move(entries));
}

HermitianOperator HermitianOperator::dense(Matrix matrix) {
  const std::size_t n = matrix.size();
  if (n == 0) throw Error("operator dimension must be >= 1");
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if (!std::isfinite(matrix(r, c))) {
        throw Error("operator entries must be finite");
      }
      if (std::abs(matrix(r, c) - matrix(c, r)) > 1e-12) {
        std::ostringstream msg;
        msg << "matrix is not symmetric at (" << r << ", " << c << ")";
        throw Error(msg.str());
      }
    }
  }
  HermitianOperator op(std::move(matrix));
  const auto& m = op.dense_matrix();
  op.row_span_.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t first = r;
    std::size_t last = r;
    for (std::size_t c = 0; c < n; ++c) {
      if (m(r, c) != 0.0) {
        first = std::min(first, c);
        last = std::max(last, c);
      }
    }
    op.row_span_[r] = {first, last};
  }
  return op;
}

std::size_t HermitianOperator::dimension() const {
  return is_diagonal() ? diagonal_entries().size() : dense_matrix().size();
}

double HermitianOperator::entry(std::size_t r, std::size_t c) const {
  if (is_diagonal()) return r == c ? diagonal_entries()[r] : 0.0;
  return dense_matrix()(r, c);
}

void HermitianOperator::apply(std::span<const double> x,
                              std::span<double> y) const {
  const std::size_t n = dimension();
  if (x.size() != n || y.size() != n) {
    throw Error("dimension mismatch: operator is " + std::to_string(n) +
                ", vector is " + std::to_string(x.size()));
  }
  if (is_diagonal()) {
    const auto& d = diagonal_entries();
    for (std::size_t i = 0; i < n; ++i) y[i] = d[i] * x[i];
    return;
  }
  const auto& m = dense_matrix();
  for (std::size_t r = 0; r < n; ++r) {
    const auto [first, last] = row_span_[r];
    const auto row = m.row(r);
    y[r] = std::inner_product(row.begin() + first, row.begin() + last + 1,
                              x.begin() + first, 0.0);
  }
}

Vector HermitianOperator::apply(std::span<const double> x) const {
  Vector y(dimension());
  apply(x, y);
  return y;
}

double HermitianOperator::max_abs_diagonal() const {
  double m = 0.0;
  for (std::size_t i = 0; i < dimension(); ++i) {
    m = std::max(m, std::abs(entry(i, i)));
  }
  return m;
}

double HermitianOperator::spectral_radius_bound() const {
  if (is_diagonal()) return max_abs_diagonal();
  double bound = 0.0;
  const auto& m = dense_matrix();
  for (std::size_t r = 0; r < m.size(); ++r) {
    double sum = 0.0;
    for (double v : m.row(r)) sum += std::abs(v);
    bound = std::max(bound, sum);
  }
  return bound;
}

double HermitianOperator::frobenius_norm() const {
  double sum = 0.0;
  const std::size_t n = dimension();
  if (is_diagonal()) {
    for (double v : diagonal_entries()) sum += v * v;
  } else {
    for (std::size_t r = 0; r < n; ++r) {
      for (double v : dense_matrix().row(r)) sum += v * v;
    }
  }
  return std::sqrt(sum);
}

double HermitianOperator::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dimension(); ++i) t += entry(i, i);
  return t;
}

Matrix HermitianOperator::to_dense() const {
  if (!is_diagonal()) return dense_matrix();
  const auto& d = diagonal_entries();
  Matrix m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Vector EigenDecomposition::eigenvector(std::size_t k) const {
  Vector v(eigenvectors.size());
  for (std::size_t r = 0; r < v.size(); ++r) v[r] = eigenvectors(r, k);
  return v;
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw Error("log_sum_exp of an empty vector");
  const double top = *std::max_element(values.begin(), values.end());
  if (top == -std::numeric_limits<double>::infinity()) return top;
  if (!std::isfinite(top)) return top;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - top);
  return top + std::log(sum);
}

EigenDecomposition jacobi_eigen(const HermitianOperator& h) {
  const std::size_t n = h.dimension();
  if (n > kMaxJacobiDimension) {
    throw Error("jacobi_eigen: dimension " + std::to_string(n) +
                " exceeds the oracle limit of " +
                std::to_string(kMaxJacobiDimension));
  }
  Matrix a = h.to_dense();
  Matrix v = Matrix::identity(n);
  const double target = 1e-12 * h.frobenius_norm();

  auto off_norm = [&] {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        if (r != c) sum += a(r, c) * a(r, c);
      }
    }
    return std::sqrt(sum);
  };

  EigenDecomposition out;
  double off = off_norm();
  int sweep = 0;
  while (off > target) {
    if (sweep == kMaxJacobiSweeps) {
      std::ostringstream msg;
      msg << "jacobi_eigen did not converge after " << sweep
          << " sweeps (off-diagonal norm " << off << ")";
      throw ConvergenceError(msg.str(), off);
    }
    ++sweep;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    off = off_norm();
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a(x, x) < a(y, y);
  });
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) {
      out.eigenvectors(r, k) = v(r, order[k]);
    }
  }
  out.sweeps = sweep;
  return out;
}

Vector rk4_step(const Derivative& derivative, std::span<const double> state,
                double dt) {
  if (!(dt > 0.0)) throw Error("rk4_step: dt must be > 0");
  const std::size_t n = state.size();
  Vector k1(n), k2(n), k3(n), k4(n), tmp(n);
  auto eval = [&](std::span<const double> y, Vector& k) {
    derivative(y, k);
    for (double v : k) {
      if (!std::isfinite(v)) throw Error("rk4_step: non-finite derivative");
    }
  };
  eval(state, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * dt * k1[i];
  eval(tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * dt * k2[i];
  eval(tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + dt * k3[i];
  eval(tmp, k4);
  Vector out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

}  // namespace coopt

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "qmaps/errors.hpp"

namespace qmaps {

using Complex = std::complex<double>;

/// Dense row-major complex matrix. This is the only matrix type in the
/// library; everything stays small (dimensions of a few dozen at most), so
/// the implementation favors clarity over blocking tricks.
class ComplexMatrix {
public:
  ComplexMatrix() = default;

  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {}

  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_)
      throw DimensionMismatch("matrix entry count " + std::to_string(data_.size()) +
                              " does not match " + std::to_string(rows_) + "x" +
                              std::to_string(cols_));
    check_finite();
  }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static ComplexMatrix from_rows(std::initializer_list<std::initializer_list<Complex>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    ComplexMatrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != c) throw DimensionMismatch("ragged row in matrix literal");
      std::size_t j = 0;
      for (const auto& z : row) m(i, j++) = z;
      ++i;
    }
    m.check_finite();
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const std::vector<Complex>& entries() const { return data_; }

  void check_finite() const {
    for (const auto& z : data_)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw InvalidArgument("matrix entry is not finite");
  }

  friend bool operator==(const ComplexMatrix& a, const ComplexMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

inline void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch(std::string(op) + ": shapes " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
                            std::to_string(b.cols()) + " differ");
}

inline ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "operator+");
  ComplexMatrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) + b(i, j);
  return out;
}

inline ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "operator-");
  ComplexMatrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) - b(i, j);
  return out;
}

inline ComplexMatrix operator-(const ComplexMatrix& a) {
  ComplexMatrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = -a(i, j);
  return out;
}

inline ComplexMatrix operator*(const Complex& s, const ComplexMatrix& a) {
  ComplexMatrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = s * a(i, j);
  return out;
}

inline ComplexMatrix operator*(const ComplexMatrix& a, const Complex& s) { return s * a; }

inline ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows())
    throw DimensionMismatch("matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                            std::to_string(b.rows()) + " differ");
  ComplexMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex(0.0)) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

inline ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  return matmul(a, b);
}

inline ComplexMatrix adjoint(const ComplexMatrix& a) {
  ComplexMatrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = std::conj(a(i, j));
  return out;
}

inline Complex trace(const ComplexMatrix& a) {
  if (!a.square()) throw DimensionNotSquare("trace: matrix is not square");
  Complex t = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
  return t;
}

inline double frob_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (const auto& z : a.entries()) s += std::norm(z);
  return std::sqrt(s);
}

struct HermEigResult {
  std::vector<double> values;  // descending
  ComplexMatrix vectors;       // column k pairs with values[k]
};

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
/// Input must satisfy ||M - M^dag|| <= tol_sym * max(1, ||M||); the working
/// copy is symmetrized so the iteration sees an exactly Hermitian matrix.
/// Converged when the off-diagonal Frobenius mass drops below 1e-14 * ||M||;
/// throws NoConvergence if that does not happen within 100 sweeps.
inline HermEigResult herm_eig(const ComplexMatrix& m, double tol_sym = 1e-10) {
  if (!m.square()) throw DimensionNotSquare("herm_eig: matrix is not square");
  const std::size_t n = m.rows();
  const double nrm = frob_norm(m);
  if (frob_norm(m - adjoint(m)) > tol_sym * std::max(1.0, nrm))
    throw NotHermitian("herm_eig: matrix is not Hermitian within tolerance");

  ComplexMatrix a = Complex(0.5) * (m + adjoint(m));
  for (std::size_t i = 0; i < n; ++i) a(i, i) = Complex(a(i, i).real(), 0.0);
  ComplexMatrix v = ComplexMatrix::identity(n);

  const double stop = 1e-14 * nrm;
  const int max_sweeps = 100;
  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    double off2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off2 += 2.0 * std::norm(a(i, j));
    if (std::sqrt(off2) <= stop) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex beta = a(p, q);
        const double ab = std::abs(beta);
        if (ab == 0.0) continue;
        const double alpha = a(p, p).real();
        const double gamma = a(q, q).real();
        // Plane rotation J = [[c, -conj(s)], [s, c]] on the (p,q) plane,
        // chosen so that (J^dag A J)(p,q) = 0. With beta = |beta| e^{i phi}
        // the zeroing condition reduces to |beta| t^2 + (alpha-gamma) t -
        // |beta| = 0; take the smaller root for stability.
        const double tau = (alpha - gamma) / (2.0 * ab);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const Complex s = std::conj(beta / ab) * (t * c);

        for (std::size_t i = 0; i < n; ++i) {  // A <- A J
          const Complex aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip + s * aiq;
          a(i, q) = -std::conj(s) * aip + c * aiq;
        }
        for (std::size_t j = 0; j < n; ++j) {  // A <- J^dag A
          const Complex apj = a(p, j), aqj = a(q, j);
          a(p, j) = c * apj + std::conj(s) * aqj;
          a(q, j) = -s * apj + c * aqj;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = Complex(a(p, p).real(), 0.0);
        a(q, q) = Complex(a(q, q).real(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {  // V <- V J
          const Complex vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip + s * viq;
          v(i, q) = -std::conj(s) * vip + c * viq;
        }
      }
    }
  }
  if (!converged) {
    double off2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off2 += 2.0 * std::norm(a(i, j));
    if (std::sqrt(off2) > stop)
      throw NoConvergence("herm_eig: Jacobi sweeps did not converge");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a(x, x).real() > a(y, y).real();
  });

  HermEigResult res;
  res.values.resize(n);
  res.vectors = ComplexMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    res.values[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < n; ++i) res.vectors(i, k) = v(i, order[k]);
  }
  return res;
}

/// Matrix exponential by scaling and squaring: scale so ||X/2^s||_F <= 0.5,
/// sum the truncated Taylor series there, then square s times.
inline ComplexMatrix mat_exp(const ComplexMatrix& x) {
  if (!x.square()) throw DimensionNotSquare("mat_exp: matrix is not square");
  x.check_finite();
  const std::size_t n = x.rows();
  const double nrm = frob_norm(x);
  int s = 0;
  if (nrm > 0.5) s = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));

  ComplexMatrix y = Complex(std::ldexp(1.0, -s)) * x;
  ComplexMatrix sum = ComplexMatrix::identity(n);
  ComplexMatrix term = ComplexMatrix::identity(n);
  const int taylor_order = 18;  // remainder < 0.5^19/19! at the scaled norm
  for (int k = 1; k <= taylor_order; ++k) {
    term = matmul(term, y) * Complex(1.0 / k);
    sum = sum + term;
  }
  for (int k = 0; k < s; ++k) sum = matmul(sum, sum);
  return sum;
}

/// Inverse by Gauss-Jordan elimination with partial pivoting. A pivot below
/// 1e-13 * ||M||_F reports Singular; afterwards the cheap condition estimate
/// ||M||_F * ||M^-1||_F is checked against cond_limit.
inline ComplexMatrix invert(const ComplexMatrix& m, double cond_limit = 1e12) {
  if (!m.square()) throw DimensionNotSquare("invert: matrix is not square");
  const std::size_t n = m.rows();
  const double pivot_floor = 1e-13 * frob_norm(m);
  ComplexMatrix a = m;
  ComplexMatrix inv = ComplexMatrix::identity(n);

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (std::abs(a(piv, k)) <= pivot_floor)
      throw Singular("invert: pivot " + std::to_string(std::abs(a(piv, k))) +
                     " below threshold at column " + std::to_string(k));
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a(k, j), a(piv, j));
        std::swap(inv(k, j), inv(piv, j));
      }
    }
    const Complex d = Complex(1.0) / a(k, k);
    for (std::size_t j = 0; j < n; ++j) {
      a(k, j) *= d;
      inv(k, j) *= d;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      const Complex f = a(i, k);
      if (f == Complex(0.0)) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a(i, j) -= f * a(k, j);
        inv(i, j) -= f * inv(k, j);
      }
    }
  }

  const double cond_est = frob_norm(m) * frob_norm(inv);
  if (cond_est > cond_limit)
    throw IllConditioned("invert: condition estimate " + std::to_string(cond_est) +
                         " exceeds limit");
  return inv;
}

}  // namespace qmaps

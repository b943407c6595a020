#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "qmaps/errors.hpp"
#include "qmaps/linalg.hpp"

// Representations of linear maps on d x d complex matrices and the
// conversions between them.
//
// Conventions, fixed project-wide:
//   vec is row-major: vec(C)[i*d + j] = C[i,j].
//   The superoperator acts on vectorized arguments, vec(out) = A vec(in);
//   for a single conjugation C . C^dag this gives A = C (x) conj(C).
//   The dynamical matrix ("Choi matrix") of a signed operator sum is
//   B = sum_k eta_k vec(C_k) vec(C_k)^dag, and B = reshuffle(A) with
//   reshuffle(M)[(i,j),(k,l)] = M[(i,k),(j,l)] (an involution).

namespace qmaps {

struct SignedTerm {
  int sign = 1;  // +1 or -1
  ComplexMatrix op;

  friend bool operator==(const SignedTerm& a, const SignedTerm& b) {
    return a.sign == b.sign && a.op == b.op;
  }
};

/// A map in signed operator-sum form: rho -> sum_k sign_k C_k rho C_k^dag.
class SignedOSR {
public:
  SignedOSR(std::size_t dim, std::vector<SignedTerm> terms)
      : dim_(dim), terms_(std::move(terms)) {
    if (dim_ == 0) throw InvalidArgument("SignedOSR: dimension must be positive");
    for (const auto& t : terms_) {
      if (t.sign != 1 && t.sign != -1)
        throw InvalidArgument("SignedOSR: term sign must be +1 or -1");
      if (t.op.rows() != dim_ || t.op.cols() != dim_)
        throw DimensionMismatch("SignedOSR: operator is not " + std::to_string(dim_) + "x" +
                                std::to_string(dim_));
    }
  }

  std::size_t dim() const { return dim_; }
  const std::vector<SignedTerm>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  std::size_t positive_count() const {
    std::size_t n = 0;
    for (const auto& t : terms_) n += (t.sign > 0);
    return n;
  }
  std::size_t negative_count() const { return terms_.size() - positive_count(); }

  /// True when every +1 term precedes every -1 term.
  bool sign_sorted() const {
    bool seen_negative = false;
    for (const auto& t : terms_) {
      if (t.sign < 0)
        seen_negative = true;
      else if (seen_negative)
        return false;
    }
    return true;
  }

  friend bool operator==(const SignedOSR& a, const SignedOSR& b) {
    return a.dim_ == b.dim_ && a.terms_ == b.terms_;
  }

private:
  std::size_t dim_;
  std::vector<SignedTerm> terms_;
};

/// Stable reordering with all +1 terms ahead of all -1 terms.
inline SignedOSR sign_sorted(const SignedOSR& osr) {
  std::vector<SignedTerm> terms;
  terms.reserve(osr.size());
  for (const auto& t : osr.terms())
    if (t.sign > 0) terms.push_back(t);
  for (const auto& t : osr.terms())
    if (t.sign < 0) terms.push_back(t);
  return SignedOSR(osr.dim(), std::move(terms));
}

/// The d^2 x d^2 matrix of the map acting on vectorized arguments.
class Superoperator {
public:
  Superoperator(std::size_t dim, ComplexMatrix matrix)
      : dim_(dim), matrix_(std::move(matrix)) {
    if (dim_ == 0) throw InvalidArgument("Superoperator: dimension must be positive");
    if (matrix_.rows() != dim_ * dim_ || matrix_.cols() != dim_ * dim_)
      throw DimensionMismatch("Superoperator: matrix is not " + std::to_string(dim_ * dim_) +
                              "x" + std::to_string(dim_ * dim_));
  }

  std::size_t dim() const { return dim_; }
  const ComplexMatrix& matrix() const { return matrix_; }

private:
  std::size_t dim_;
  ComplexMatrix matrix_;
};

/// The dynamical matrix of the map. Hermitian by construction for any signed
/// operator sum; the constructor enforces this within 1e-10 * max(1, ||B||).
class ChoiMatrix {
public:
  ChoiMatrix(std::size_t dim, ComplexMatrix matrix)
      : dim_(dim), matrix_(std::move(matrix)) {
    if (dim_ == 0) throw InvalidArgument("ChoiMatrix: dimension must be positive");
    if (matrix_.rows() != dim_ * dim_ || matrix_.cols() != dim_ * dim_)
      throw DimensionMismatch("ChoiMatrix: matrix is not " + std::to_string(dim_ * dim_) + "x" +
                              std::to_string(dim_ * dim_));
    if (frob_norm(matrix_ - adjoint(matrix_)) > 1e-10 * std::max(1.0, frob_norm(matrix_)))
      throw NotHermitian("ChoiMatrix: matrix is not Hermitian within tolerance");
  }

  std::size_t dim() const { return dim_; }
  const ComplexMatrix& matrix() const { return matrix_; }

private:
  std::size_t dim_;
  ComplexMatrix matrix_;
};

struct Signature {
  std::size_t p = 0;  // eigenvalues above the rank cut
  std::size_t q = 0;  // eigenvalues below the negative rank cut
  std::size_t z = 0;  // the rest

  friend bool operator==(const Signature& a, const Signature& b) {
    return a.p == b.p && a.q == b.q && a.z == b.z;
  }
};

inline std::vector<Complex> vec(const ComplexMatrix& c) {
  std::vector<Complex> out;
  out.reserve(c.rows() * c.cols());
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j) out.push_back(c(i, j));
  return out;
}

inline ComplexMatrix unvec(const std::vector<Complex>& v, std::size_t d) {
  if (v.size() != d * d)
    throw DimensionMismatch("unvec: vector length " + std::to_string(v.size()) +
                            " is not " + std::to_string(d) + "^2");
  ComplexMatrix out(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) out(i, j) = v[i * d + j];
  return out;
}

inline ComplexMatrix apply_osr(const SignedOSR& osr, const ComplexMatrix& rho) {
  if (rho.rows() != osr.dim() || rho.cols() != osr.dim())
    throw DimensionMismatch("apply_osr: argument is not " + std::to_string(osr.dim()) + "x" +
                            std::to_string(osr.dim()));
  ComplexMatrix out(osr.dim(), osr.dim());
  for (const auto& t : osr.terms()) {
    ComplexMatrix contrib = matmul(matmul(t.op, rho), adjoint(t.op));
    out = (t.sign > 0) ? out + contrib : out - contrib;
  }
  return out;
}

inline Superoperator superop_from_osr(const SignedOSR& osr) {
  const std::size_t d = osr.dim();
  ComplexMatrix a(d * d, d * d);
  for (const auto& t : osr.terms()) {
    const double sgn = t.sign;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < d; ++k) {
        const Complex cik = t.op(i, k);
        if (cik == Complex(0.0)) continue;
        for (std::size_t j = 0; j < d; ++j)
          for (std::size_t l = 0; l < d; ++l)
            a(i * d + j, k * d + l) += sgn * cik * std::conj(t.op(j, l));
      }
  }
  return Superoperator(d, std::move(a));
}

inline ChoiMatrix choi_from_osr(const SignedOSR& osr) {
  const std::size_t d = osr.dim();
  ComplexMatrix b(d * d, d * d);
  for (const auto& t : osr.terms()) {
    const auto x = vec(t.op);
    const double sgn = t.sign;
    for (std::size_t r = 0; r < d * d; ++r) {
      if (x[r] == Complex(0.0)) continue;
      for (std::size_t c = 0; c < d * d; ++c) b(r, c) += sgn * x[r] * std::conj(x[c]);
    }
  }
  return ChoiMatrix(d, std::move(b));
}

/// Index transposition between the superoperator and the dynamical matrix:
/// out[(i,j),(k,l)] = in[(i,k),(j,l)]. Applying it twice is the identity.
inline ComplexMatrix reshuffle(const ComplexMatrix& m) {
  if (!m.square()) throw DimensionNotSquare("reshuffle: matrix is not square");
  const std::size_t n = m.rows();
  std::size_t d = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(n))));
  if (d * d != n)
    throw DimensionNotSquare("reshuffle: side " + std::to_string(n) +
                             " is not a perfect square");
  ComplexMatrix out(n, n);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t k = 0; k < d; ++k)
        for (std::size_t l = 0; l < d; ++l)
          out(i * d + j, k * d + l) = m(i * d + k, j * d + l);
  return out;
}

/// Minimal signed operator sum from the spectral decomposition of the
/// dynamical matrix. Eigenpairs with |lambda| <= rank_tol * max|lambda| are
/// dropped; the terms are sqrt(|lambda_k|) * unvec(v_k) with sign(lambda_k),
/// ordered +1 terms first, each block by descending |lambda|.
inline SignedOSR osr_from_choi(const ChoiMatrix& choi, double rank_tol = 1e-10) {
  const std::size_t d = choi.dim();
  const auto eig = herm_eig(choi.matrix());
  double max_abs = 0.0;
  for (double lam : eig.values) max_abs = std::max(max_abs, std::abs(lam));
  const double cut = rank_tol * max_abs;

  std::vector<SignedTerm> terms;
  auto term_at = [&](std::size_t k) {
    std::vector<Complex> col(d * d);
    const double w = std::sqrt(std::abs(eig.values[k]));
    for (std::size_t i = 0; i < d * d; ++i) col[i] = w * eig.vectors(i, k);
    return SignedTerm{eig.values[k] > 0.0 ? 1 : -1, unvec(col, d)};
  };
  for (std::size_t k = 0; k < eig.values.size(); ++k)
    if (eig.values[k] > cut) terms.push_back(term_at(k));
  for (std::size_t k = eig.values.size(); k-- > 0;)
    if (eig.values[k] < -cut) terms.push_back(term_at(k));
  return SignedOSR(d, std::move(terms));
}

inline Signature signature(const ChoiMatrix& choi, double rank_tol = 1e-10) {
  const auto eig = herm_eig(choi.matrix());
  double max_abs = 0.0;
  for (double lam : eig.values) max_abs = std::max(max_abs, std::abs(lam));
  const double cut = rank_tol * std::max(1.0, max_abs);
  Signature sig;
  for (double lam : eig.values) {
    if (lam > cut)
      ++sig.p;
    else if (lam < -cut)
      ++sig.q;
    else
      ++sig.z;
  }
  return sig;
}

/// Complete positivity: the dynamical matrix has no eigenvalue below
/// -tol * max(1, ||B||_F).
inline bool is_cp(const ChoiMatrix& choi, double tol = 1e-8) {
  const auto eig = herm_eig(choi.matrix());
  const double floor = -tol * std::max(1.0, frob_norm(choi.matrix()));
  for (double lam : eig.values)
    if (lam < floor) return false;
  return true;
}

/// Hermiticity preservation of the map whose dynamical matrix candidate is
/// given: B = B^dag within tol * max(1, ||B||_F).
inline bool is_hp(const ComplexMatrix& choi_candidate, double tol = 1e-8) {
  if (!choi_candidate.square()) throw DimensionNotSquare("is_hp: matrix is not square");
  return frob_norm(choi_candidate - adjoint(choi_candidate)) <=
         tol * std::max(1.0, frob_norm(choi_candidate));
}

/// Trace preservation: || sum_k eta_k C_k^dag C_k - I ||_F <= tol.
inline bool is_tp(const SignedOSR& osr, double tol = 1e-8) {
  const std::size_t d = osr.dim();
  ComplexMatrix acc(d, d);
  for (const auto& t : osr.terms()) {
    ComplexMatrix g = matmul(adjoint(t.op), t.op);
    acc = (t.sign > 0) ? acc + g : acc - g;
  }
  return frob_norm(acc - ComplexMatrix::identity(d)) <= tol;
}

struct CpDifference {
  SignedOSR plus;
  SignedOSR minus;
};

/// Split a signed operator sum into the two completely positive halves,
/// Phi = Phi_plus - Phi_minus. Signs in `minus` are flipped to +1.
inline CpDifference cp_difference(const SignedOSR& osr) {
  std::vector<SignedTerm> plus, minus;
  for (const auto& t : osr.terms()) {
    if (t.sign > 0)
      plus.push_back(t);
    else
      minus.push_back(SignedTerm{1, t.op});
  }
  return CpDifference{SignedOSR(osr.dim(), std::move(plus)),
                      SignedOSR(osr.dim(), std::move(minus))};
}

struct MapReport {
  std::size_t dim = 0;
  bool hermiticity_preserving = false;
  bool completely_positive = false;
  bool trace_preserving = false;
  Signature signature;
  std::vector<double> choi_eigenvalues;  // of the Hermitian part, descending
};

/// Classification summary built from a dynamical-matrix candidate. The
/// spectral fields always describe the Hermitian part (B + B^dag)/2, which
/// is only a faithful description when hermiticity_preserving is true.
inline MapReport analyze_map(std::size_t dim, const ComplexMatrix& choi_candidate,
                             double tol = 1e-8, double rank_tol = 1e-10) {
  if (dim == 0) throw InvalidArgument("analyze_map: dimension must be positive");
  if (choi_candidate.rows() != dim * dim || choi_candidate.cols() != dim * dim)
    throw DimensionMismatch("analyze_map: matrix is not " + std::to_string(dim * dim) + "x" +
                            std::to_string(dim * dim));
  MapReport report;
  report.dim = dim;
  report.hermiticity_preserving = is_hp(choi_candidate, tol);

  const ComplexMatrix h = Complex(0.5) * (choi_candidate + adjoint(choi_candidate));
  const ChoiMatrix choi(dim, h);
  const auto eig = herm_eig(h);
  report.choi_eigenvalues = eig.values;
  report.signature = signature(choi, rank_tol);
  report.completely_positive = report.signature.q == 0 && is_cp(choi, tol);

  // Trace preservation read off the dynamical matrix: the partial trace
  // sum_i B[(i,j),(i,l)] must be the identity.
  ComplexMatrix pt(dim, dim);
  for (std::size_t j = 0; j < dim; ++j)
    for (std::size_t l = 0; l < dim; ++l) {
      Complex s = 0.0;
      for (std::size_t i = 0; i < dim; ++i) s += h(i * dim + j, i * dim + l);
      pt(j, l) = s;
    }
  report.trace_preserving = frob_norm(pt - ComplexMatrix::identity(dim)) <= tol;
  return report;
}

inline MapReport analyze_map(const SignedOSR& osr, double tol = 1e-8, double rank_tol = 1e-10) {
  return analyze_map(osr.dim(), choi_from_osr(osr).matrix(), tol, rank_tol);
}

}  // namespace qmaps

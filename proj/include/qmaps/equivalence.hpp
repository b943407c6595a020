#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qmaps/errors.hpp"
#include "qmaps/linalg.hpp"
#include "qmaps/maps.hpp"
#include "qmaps/random.hpp"

// Two signed operator sums describe the same map exactly when their operator
// lists, padded with zero operators to a common signature, are related by a
// pseudo-unitary mixing matrix: D_j = sum_i u[j,i] C_i with u^dag eta u = eta
// for the indefinite metric eta = diag(+1 x p, -1 x q). This header holds the
// metric plumbing and the witness search.

namespace qmaps {

/// Signature (p, q) of the indefinite inner product diag(+1 x p, -1 x q).
struct Metric {
  int p = 0;
  int q = 0;

  Metric(int p_, int q_) : p(p_), q(q_) {
    if (p < 0 || q < 0 || p + q < 1)
      throw InvalidArgument("Metric: need p, q >= 0 and p + q >= 1");
  }

  int size() const { return p + q; }
  double sign_at(std::size_t k) const { return k < static_cast<std::size_t>(p) ? 1.0 : -1.0; }

  friend bool operator==(const Metric& a, const Metric& b) { return a.p == b.p && a.q == b.q; }
};

inline ComplexMatrix metric_matrix(const Metric& m) {
  const std::size_t n = static_cast<std::size_t>(m.size());
  ComplexMatrix eta(n, n);
  for (std::size_t k = 0; k < n; ++k) eta(k, k) = m.sign_at(k);
  return eta;
}

namespace detail {

// || u^dag eta u - eta ||_F without materializing eta.
inline double pseudo_unitarity_residual(const ComplexMatrix& u, const Metric& m) {
  const std::size_t n = static_cast<std::size_t>(m.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l) {
      Complex g = 0.0;
      for (std::size_t i = 0; i < n; ++i) g += std::conj(u(i, k)) * m.sign_at(i) * u(i, l);
      if (k == l) g -= m.sign_at(k);
      acc += std::norm(g);
    }
  return std::sqrt(acc);
}

}  // namespace detail

inline bool is_pseudo_unitary(const ComplexMatrix& u, const Metric& m, double tol = 1e-8) {
  const std::size_t n = static_cast<std::size_t>(m.size());
  if (u.rows() != n || u.cols() != n)
    throw DimensionMismatch("is_pseudo_unitary: matrix is not " + std::to_string(n) + "x" +
                            std::to_string(n));
  return detail::pseudo_unitarity_residual(u, m) <= tol;
}

/// Deterministic pseudo-unitary sample: draw M with entries uniform in the
/// centered box of half-width `scale`, project onto the metric's Lie algebra
/// via X = (M - eta M^dag eta)/2, and exponentiate. scale = 0 gives the
/// identity; q = 0 gives an ordinary unitary.
inline ComplexMatrix random_pseudo_unitary(const Metric& m, std::uint64_t seed, double scale) {
  if (!(scale >= 0.0) || scale > 2.0)
    throw InvalidArgument("random_pseudo_unitary: scale must be in [0, 2]");
  const std::size_t n = static_cast<std::size_t>(m.size());
  std::mt19937_64 rng(seed);
  ComplexMatrix mm(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) mm(i, j) = detail::uniform_complex(rng, scale);

  ComplexMatrix x(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      x(i, j) = 0.5 * (mm(i, j) - m.sign_at(i) * std::conj(mm(j, i)) * m.sign_at(j));
  return mat_exp(x);
}

/// Append zero operators so the counts become exactly (target_p, target_q).
/// The result is sign-sorted; the map action is unchanged.
inline SignedOSR pad_osr(const SignedOSR& osr, int target_p, int target_q) {
  const std::size_t p0 = osr.positive_count();
  const std::size_t q0 = osr.negative_count();
  if (target_p < 0 || target_q < 0 || static_cast<std::size_t>(target_p) < p0 ||
      static_cast<std::size_t>(target_q) < q0)
    throw TargetTooSmall("pad_osr: target signature (" + std::to_string(target_p) + ", " +
                         std::to_string(target_q) + ") cannot hold (" + std::to_string(p0) +
                         ", " + std::to_string(q0) + ")");
  const ComplexMatrix zero(osr.dim(), osr.dim());
  std::vector<SignedTerm> terms;
  terms.reserve(static_cast<std::size_t>(target_p + target_q));
  for (const auto& t : osr.terms())
    if (t.sign > 0) terms.push_back(t);
  for (std::size_t k = p0; k < static_cast<std::size_t>(target_p); ++k)
    terms.push_back(SignedTerm{1, zero});
  for (const auto& t : osr.terms())
    if (t.sign < 0) terms.push_back(t);
  for (std::size_t k = q0; k < static_cast<std::size_t>(target_q); ++k)
    terms.push_back(SignedTerm{-1, zero});
  return SignedOSR(osr.dim(), std::move(terms));
}

/// Mix the operator list by u: term j of the result is
/// (sign_j, sum_i u[j,i] C_i). The input must be sign-sorted so its pattern
/// matches the metric implied by the counts.
inline SignedOSR transform_osr(const SignedOSR& osr, const ComplexMatrix& u) {
  if (!osr.sign_sorted())
    throw SignPatternMismatch("transform_osr: operator list is not sign-sorted");
  const std::size_t n = osr.size();
  if (u.rows() != n || u.cols() != n)
    throw DimensionMismatch("transform_osr: mixing matrix is not " + std::to_string(n) + "x" +
                            std::to_string(n));
  const std::size_t d = osr.dim();
  std::vector<SignedTerm> terms;
  terms.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    ComplexMatrix op(d, d);
    for (std::size_t i = 0; i < n; ++i) {
      const Complex uji = u(j, i);
      if (uji == Complex(0.0)) continue;
      op = op + uji * osr.terms()[i].op;
    }
    terms.push_back(SignedTerm{osr.terms()[j].sign, std::move(op)});
  }
  return SignedOSR(d, std::move(terms));
}

namespace detail {

// Fill the columns of w not marked in `known` with vectors that are
// eta-orthogonal to every accepted column and carry the eta-norm sign their
// slot requires. Candidates are the standard basis vectors, orthogonalized
// against the accepted set (twice, for stability) and picked greedily by the
// best matching-sign eta-norm.
inline void complete_columns(ComplexMatrix& w, std::vector<bool>& known, const Metric& metric) {
  const std::size_t n = static_cast<std::size_t>(metric.size());
  auto gdot_col = [&](std::size_t col, const std::vector<Complex>& x) {
    Complex g = 0.0;
    for (std::size_t i = 0; i < n; ++i) g += std::conj(w(i, col)) * metric.sign_at(i) * x[i];
    return g;
  };

  for (std::size_t slot = 0; slot < n; ++slot) {
    if (known[slot]) continue;
    const double want = metric.sign_at(slot);

    std::vector<Complex> best;
    double best_signed_norm = 0.0;
    for (std::size_t e = 0; e < n; ++e) {
      std::vector<Complex> x(n, Complex(0.0));
      x[e] = 1.0;
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t a = 0; a < n; ++a) {
          if (!known[a]) continue;
          const Complex coef = gdot_col(a, x) * metric.sign_at(a);
          if (coef == Complex(0.0)) continue;
          for (std::size_t i = 0; i < n; ++i) x[i] -= coef * w(i, a);
        }
      double gn = 0.0;
      for (std::size_t i = 0; i < n; ++i) gn += metric.sign_at(i) * std::norm(x[i]);
      if (want * gn > best_signed_norm) {
        best_signed_norm = want * gn;
        best = std::move(x);
      }
    }
    if (best_signed_norm < 1e-8)
      throw NumericalBreakdown(
          "completion: no candidate with the required metric sign at column " +
          std::to_string(slot));
    const double inv = 1.0 / std::sqrt(best_signed_norm);
    for (std::size_t i = 0; i < n; ++i) w(i, slot) = inv * best[i];
    known[slot] = true;
  }
}

}  // namespace detail

/// Extend a gamma-orthonormal set of columns (gamma-norms matching the
/// leading metric entries) to a full pseudo-unitary matrix whose first
/// columns are the given ones.
inline ComplexMatrix complete_to_pseudo_unitary(const ComplexMatrix& w_partial,
                                                const Metric& gamma) {
  const std::size_t n = static_cast<std::size_t>(gamma.size());
  const std::size_t r = w_partial.cols();
  if (w_partial.rows() != n || r > n)
    throw DimensionMismatch("complete_to_pseudo_unitary: partial matrix must be " +
                            std::to_string(n) + " x r with r <= " + std::to_string(n));
  for (std::size_t k = 0; k < r; ++k)
    for (std::size_t l = 0; l < r; ++l) {
      Complex g = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        g += std::conj(w_partial(i, k)) * gamma.sign_at(i) * w_partial(i, l);
      const Complex expected = (k == l) ? Complex(gamma.sign_at(k)) : Complex(0.0);
      if (std::abs(g - expected) > 1e-8)
        throw InvalidArgument(
            "complete_to_pseudo_unitary: columns are not gamma-orthonormal with the "
            "leading metric signs");
    }

  ComplexMatrix w(n, n);
  std::vector<bool> known(n, false);
  for (std::size_t k = 0; k < r; ++k) {
    for (std::size_t i = 0; i < n; ++i) w(i, k) = w_partial(i, k);
    known[k] = true;
  }
  detail::complete_columns(w, known, gamma);
  return w;
}

enum class Verdict { not_equivalent, equivalent_with_witness, equivalent_no_witness };

enum class NoWitnessReason { support_violation, verification_failed, singular, numerical_breakdown };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::not_equivalent: return "not_equivalent";
    case Verdict::equivalent_with_witness: return "equivalent_with_witness";
    default: return "equivalent_no_witness";
  }
}

inline const char* to_string(NoWitnessReason r) {
  switch (r) {
    case NoWitnessReason::support_violation: return "support_violation";
    case NoWitnessReason::verification_failed: return "verification_failed";
    case NoWitnessReason::singular: return "singular";
    default: return "numerical_breakdown";
  }
}

struct EquivalenceDiagnostics {
  double choi_distance = 0.0;
  double expansion_residual = 0.0;  // worst projection residual over both lists
  double metric_residual = 0.0;     // || u^dag eta u - eta ||_F
  double operator_residual = 0.0;   // max_j || D_j - sum_i u[j,i] C_i ||_F
};

struct EquivalenceResult {
  Verdict verdict = Verdict::not_equivalent;
  double choi_distance = 0.0;
  std::optional<ComplexMatrix> witness;
  std::optional<Metric> metric;
  std::size_t padded_size = 0;
  std::optional<NoWitnessReason> reason;
  EquivalenceDiagnostics diagnostics;
};

/// Check a proposed witness against the contract: u pseudo-unitary for m and
/// every operator of d reproduced from the operators of c. Both lists must be
/// sign-sorted with counts exactly (m.p, m.q).
inline bool verify_equivalence(const SignedOSR& c, const SignedOSR& d, const ComplexMatrix& u,
                               const Metric& m, double tol) {
  if (c.dim() != d.dim())
    throw DimensionMismatch("verify_equivalence: operator dimensions differ");
  const std::size_t n = static_cast<std::size_t>(m.size());
  if (c.size() != n || d.size() != n || !c.sign_sorted() || !d.sign_sorted() ||
      c.positive_count() != static_cast<std::size_t>(m.p) ||
      d.positive_count() != static_cast<std::size_t>(m.p))
    throw SignPatternMismatch("verify_equivalence: lists do not match the metric pattern");
  if (u.rows() != n || u.cols() != n)
    throw DimensionMismatch("verify_equivalence: witness is not " + std::to_string(n) + "x" +
                            std::to_string(n));
  if (!is_pseudo_unitary(u, m, tol)) return false;
  for (std::size_t j = 0; j < n; ++j) {
    ComplexMatrix acc(c.dim(), c.dim());
    for (std::size_t i = 0; i < n; ++i) acc = acc + u(j, i) * c.terms()[i].op;
    if (frob_norm(d.terms()[j].op - acc) > tol) return false;
  }
  return true;
}

/// Decide whether two signed operator sums describe the same map, and if so
/// produce a pseudo-unitary witness relating their padded operator lists.
///
/// Steps: compare dynamical matrices; rebuild the canonical operator sum of
/// the shared map; expand both input lists over the canonical operators
/// (rejecting support mismatches); pad everything to a common signature and
/// complete the coefficient matrices to square pseudo-unitaries; form
/// u = v w^-1 and verify it against the contract before reporting it.
inline EquivalenceResult find_equivalence(const SignedOSR& osr_c, const SignedOSR& osr_d,
                                          double tol = 1e-8) {
  if (osr_c.dim() != osr_d.dim())
    throw DimensionMismatch("find_equivalence: operator dimensions differ");
  const std::size_t dd = osr_c.dim() * osr_c.dim();

  const ChoiMatrix b_c = choi_from_osr(osr_c);
  const ChoiMatrix b_d = choi_from_osr(osr_d);

  EquivalenceResult res;
  const double dist = frob_norm(b_c.matrix() - b_d.matrix());
  res.choi_distance = dist;
  res.diagnostics.choi_distance = dist;
  if (dist > tol * std::max(1.0, frob_norm(b_c.matrix()))) {
    res.verdict = Verdict::not_equivalent;
    return res;
  }

  const SignedOSR canonical = osr_from_choi(b_c);
  const SignedOSR c = sign_sorted(osr_c);
  const SignedOSR d = sign_sorted(osr_d);

  const std::size_t pk = canonical.positive_count();
  const std::size_t qk = canonical.negative_count();
  std::size_t target_p = std::max({c.positive_count(), d.positive_count(), pk});
  std::size_t target_q = std::max({c.negative_count(), d.negative_count(), qk});
  if (target_p + target_q == 0) target_p = 1;  // all-zero maps: 1x1 witness
  const Metric eta(static_cast<int>(target_p), static_cast<int>(target_q));
  const std::size_t n = static_cast<std::size_t>(eta.size());
  res.metric = eta;
  res.padded_size = n;

  const SignedOSR cp = pad_osr(c, static_cast<int>(target_p), static_cast<int>(target_q));
  const SignedOSR dp = pad_osr(d, static_cast<int>(target_p), static_cast<int>(target_q));

  // Canonical term k occupies column slot k for the +1 block and
  // target_p + (k - pk) for the -1 block; the remaining slots pair with the
  // zero padding of the canonical list.
  std::vector<std::vector<Complex>> kvecs;
  std::vector<double> kweight;  // squared vec norms, i.e. |lambda_k|
  std::vector<std::size_t> kslot;
  for (std::size_t k = 0; k < canonical.size(); ++k) {
    kvecs.push_back(vec(canonical.terms()[k].op));
    double wsq = 0.0;
    for (const auto& z : kvecs.back()) wsq += std::norm(z);
    kweight.push_back(wsq);
    kslot.push_back(k < pk ? k : target_p + (k - pk));
  }

  auto expand = [&](const SignedOSR& list, ComplexMatrix& coeffs) {
    double worst = 0.0;
    for (std::size_t i = 0; i < list.size(); ++i) {
      std::vector<Complex> x = vec(list.terms()[i].op);
      for (std::size_t k = 0; k < kvecs.size(); ++k) {
        Complex dot = 0.0;
        for (std::size_t a = 0; a < dd; ++a) dot += std::conj(kvecs[k][a]) * x[a];
        const Complex coef = dot / kweight[k];
        coeffs(i, kslot[k]) = coef;
        for (std::size_t a = 0; a < dd; ++a) x[a] -= coef * kvecs[k][a];
      }
      double rsq = 0.0;
      for (const auto& z : x) rsq += std::norm(z);
      worst = std::max(worst, std::sqrt(rsq));
    }
    return worst;
  };

  ComplexMatrix w(n, n), v(n, n);
  const double resid_c = expand(cp, w);
  const double resid_d = expand(dp, v);
  res.diagnostics.expansion_residual = std::max(resid_c, resid_d);
  if (res.diagnostics.expansion_residual > tol) {
    res.verdict = Verdict::equivalent_no_witness;
    res.reason = NoWitnessReason::support_violation;
    return res;
  }

  std::vector<bool> known(n, false);
  for (std::size_t k = 0; k < canonical.size(); ++k) known[kslot[k]] = true;

  ComplexMatrix u(n, n);
  try {
    std::vector<bool> known_w = known;
    detail::complete_columns(w, known_w, eta);
    std::vector<bool> known_v = known;
    detail::complete_columns(v, known_v, eta);
    u = matmul(v, invert(w));
  } catch (const Singular&) {
    res.verdict = Verdict::equivalent_no_witness;
    res.reason = NoWitnessReason::singular;
    return res;
  } catch (const NumericalBreakdown&) {
    res.verdict = Verdict::equivalent_no_witness;
    res.reason = NoWitnessReason::numerical_breakdown;
    return res;
  } catch (const IllConditioned&) {
    res.verdict = Verdict::equivalent_no_witness;
    res.reason = NoWitnessReason::numerical_breakdown;
    return res;
  }

  res.diagnostics.metric_residual = detail::pseudo_unitarity_residual(u, eta);
  double op_resid = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    ComplexMatrix acc(osr_c.dim(), osr_c.dim());
    for (std::size_t i = 0; i < n; ++i) acc = acc + u(j, i) * cp.terms()[i].op;
    op_resid = std::max(op_resid, frob_norm(dp.terms()[j].op - acc));
  }
  res.diagnostics.operator_residual = op_resid;

  if (res.diagnostics.metric_residual <= tol && op_resid <= tol) {
    res.verdict = Verdict::equivalent_with_witness;
    res.witness = std::move(u);
  } else {
    res.verdict = Verdict::equivalent_no_witness;
    res.reason = NoWitnessReason::verification_failed;
  }
  return res;
}

}  // namespace qmaps

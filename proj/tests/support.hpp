#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "qmaps/linalg.hpp"
#include "qmaps/maps.hpp"
#include "qmaps/random.hpp"

// Shared deterministic generators for the test binaries. Every draw is seeded
// explicitly so a failing case reproduces.

namespace support {

using qmaps::Complex;
using qmaps::ComplexMatrix;

inline ComplexMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                                   double halfwidth = 1.0) {
  ComplexMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      m(i, j) = qmaps::detail::uniform_complex(rng, halfwidth);
  return m;
}

inline ComplexMatrix random_hermitian(std::mt19937_64& rng, std::size_t n,
                                      double halfwidth = 1.0) {
  const ComplexMatrix m = random_matrix(rng, n, n, halfwidth);
  return Complex(0.5) * (m + qmaps::adjoint(m));
}

inline ComplexMatrix random_density(std::mt19937_64& rng, std::size_t d) {
  const ComplexMatrix g = random_matrix(rng, d, d);
  ComplexMatrix m = qmaps::matmul(g, qmaps::adjoint(g));
  for (std::size_t i = 0; i < d; ++i) m(i, i) += 1e-3;  // keep the trace well away from zero
  return m * Complex(1.0 / qmaps::trace(m).real());
}

inline qmaps::SignedOSR random_osr(std::mt19937_64& rng, std::size_t d, std::size_t n_plus,
                                   std::size_t n_minus, double halfwidth = 1.0) {
  std::vector<qmaps::SignedTerm> terms;
  terms.reserve(n_plus + n_minus);
  for (std::size_t k = 0; k < n_plus; ++k)
    terms.push_back(qmaps::SignedTerm{1, random_matrix(rng, d, d, halfwidth)});
  for (std::size_t k = 0; k < n_minus; ++k)
    terms.push_back(qmaps::SignedTerm{-1, random_matrix(rng, d, d, halfwidth)});
  return qmaps::SignedOSR(d, std::move(terms));
}

// Operator list with mutually orthogonal vectorizations and spread-out term
// weights: the well-conditioned end of the input space, handy for trials
// that must recover a mixing matrix.
inline qmaps::SignedOSR random_orthogonal_osr(std::mt19937_64& rng, std::size_t d,
                                              std::size_t n_plus, std::size_t n_minus) {
  const std::size_t dd = d * d;
  std::vector<std::vector<Complex>> basis;
  while (basis.size() < n_plus + n_minus) {
    std::vector<Complex> x(dd);
    for (auto& z : x) z = qmaps::detail::uniform_complex(rng, 1.0);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        Complex dot = 0.0;
        for (std::size_t a = 0; a < dd; ++a) dot += std::conj(b[a]) * x[a];
        for (std::size_t a = 0; a < dd; ++a) x[a] -= dot * b[a];
      }
    double nsq = 0.0;
    for (const auto& z : x) nsq += std::norm(z);
    if (nsq < 1e-12) continue;
    const double inv = 1.0 / std::sqrt(nsq);
    for (auto& z : x) z *= inv;
    basis.push_back(std::move(x));
  }
  std::vector<qmaps::SignedTerm> terms;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const double weight = 0.7 + 0.7 * qmaps::detail::uniform01(rng);
    std::vector<Complex> scaled = basis[k];
    for (auto& z : scaled) z *= weight;
    terms.push_back(qmaps::SignedTerm{k < n_plus ? 1 : -1, qmaps::unvec(scaled, d)});
  }
  return qmaps::SignedOSR(d, std::move(terms));
}

}  // namespace support

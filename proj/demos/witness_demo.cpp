// Round trip: take the qubit transpose map, scramble its operator list with
// a random metric-preserving mixing matrix, then recover a witness relating
// the scrambled list back to the original.

#include <cstdio>

#include "qmaps/equivalence.hpp"
#include "qmaps/mapio.hpp"
#include "qmaps/maps.hpp"

using namespace qmaps;

static void print_matrix(const char* label, const ComplexMatrix& m) {
  std::printf("%s (%zux%zu):\n", label, m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j)
      std::printf("  (%+.4f%+.4fi)", m(i, j).real(), m(i, j).imag());
    std::printf("\n");
  }
}

int main() {
  const SignedOSR transpose = to_signed_osr(gen_fixture("transpose"));
  const Metric metric(static_cast<int>(transpose.positive_count()),
                      static_cast<int>(transpose.negative_count()));
  std::printf("transpose map: %zu terms, metric (%d, %d)\n", transpose.size(), metric.p,
              metric.q);

  const ComplexMatrix u = random_pseudo_unitary(metric, 7, 1.0);
  print_matrix("mixing matrix", u);
  std::printf("pseudo-unitarity residual: %.3e\n",
              detail::pseudo_unitarity_residual(u, metric));

  const SignedOSR scrambled = transform_osr(sign_sorted(transpose), u);
  const EquivalenceResult res = find_equivalence(transpose, scrambled);
  std::printf("verdict: %s\n", to_string(res.verdict));
  std::printf("choi distance: %.3e\n", res.choi_distance);
  if (!res.witness) return 1;

  print_matrix("recovered witness", *res.witness);
  std::printf("metric residual: %.3e, operator residual: %.3e\n",
              res.diagnostics.metric_residual, res.diagnostics.operator_residual);
  return 0;
}

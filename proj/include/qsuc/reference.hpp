#ifndef QSUC_REFERENCE_HPP
#define QSUC_REFERENCE_HPP

// Six-variable linear binary optimization benchmark with three inequality
// constraints, used by verify-paper and the test suite.

#include <string>
#include <vector>

#include "qsuc/admm.hpp"
#include "qsuc/phr.hpp"
#include "qsuc/qubo.hpp"

namespace qsuc::reference {

inline Qubo lbo_objective() {
  Qubo q(6);
  const double c[] = {6, 3, -5, -6, 4, -7};
  for (std::size_t i = 0; i < 6; ++i) q.add_linear(i, c[i]);
  return q;
}

/// -2x2 - 2x5 - x6 + 3 <= 0
inline LinearConstraint lbo_cut_b() { return LinearConstraint::dense(std::vector<double>{0, -2, 0, 0, -2, -1}, 3.0); }
/// -x1 + x3 - x4 + 2x6 <= 0
inline LinearConstraint lbo_cut_c() { return LinearConstraint::dense(std::vector<double>{-1, 0, 1, -1, 0, 2}, 0.0); }
/// -x1 + x3 + x4 <= 0
inline LinearConstraint lbo_cut_d() { return LinearConstraint::dense(std::vector<double>{-1, 0, 1, 1, 0, 0}, 0.0); }

/// Three blocks of two variables.
inline BlockPartition lbo_partition() { return partition_contiguous(6, 2); }

struct LboCase {
  std::string label;
  std::vector<LinearConstraint> constraints;
  double sigma0 = 0.3;
  std::string target;
};

/// The four progressively constrained cases and their expected bitstrings.
inline std::vector<LboCase> lbo_cases() {
  return {
      {"unconstrained", {}, 0.3, "001101"},
      {"b", {lbo_cut_b()}, 0.3, "011101"},
      {"b+c", {lbo_cut_b(), lbo_cut_c()}, 0.5, "011110"},
      {"b+c+d", {lbo_cut_b(), lbo_cut_c(), lbo_cut_d()}, 0.5, "110101"},
  };
}

}  // namespace qsuc::reference

#endif  // QSUC_REFERENCE_HPP

// Dense Smith normal form over the integers, for small cores and cross-checks.
#pragma once

#include <vector>

#include "surfdiff/tower.hpp"

namespace surfdiff {

using IntMatrix = std::vector<std::vector<BigInt>>;

struct SmithForm {
  IntMatrix U, D, V;  // U * A * V = D, U and V unimodular
  int rank = 0;
  std::vector<BigInt> invariants;  // d_1 | d_2 | ... (positive)
};

SmithForm smith_normal_form(const IntMatrix& A);
// Basis of {x : A x = 0} (columns of V past the rank), one vector per entry.
std::vector<std::vector<BigInt>> integer_kernel(const IntMatrix& A);

IntMatrix matmul(const IntMatrix& X, const IntMatrix& Y);

}  // namespace surfdiff

#include "surfdiff/smith.hpp"

#include <utility>

namespace surfdiff {

namespace {

IntMatrix identity(std::size_t n) {
  IntMatrix I(n, std::vector<BigInt>(n, BigInt(0)));
  for (std::size_t i = 0; i < n; ++i) I[i][i] = 1;
  return I;
}

void swap_rows(IntMatrix& M, std::size_t a, std::size_t b) { std::swap(M[a], M[b]); }
void swap_cols(IntMatrix& M, std::size_t a, std::size_t b) {
  for (auto& row : M) std::swap(row[a], row[b]);
}
// row_a -= q * row_b
void row_axpy(IntMatrix& M, std::size_t a, std::size_t b, const BigInt& q) {
  for (std::size_t j = 0; j < M[a].size(); ++j) M[a][j] -= q * M[b][j];
}
// col_a -= q * col_b
void col_axpy(IntMatrix& M, std::size_t a, std::size_t b, const BigInt& q) {
  for (auto& row : M) row[a] -= q * row[b];
}

}  // namespace

IntMatrix matmul(const IntMatrix& X, const IntMatrix& Y) {
  const std::size_t n = X.size(), k = Y.size(), m = k ? Y[0].size() : 0;
  IntMatrix Z(n, std::vector<BigInt>(m, BigInt(0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < k; ++l) {
      if (X[i][l] == 0) continue;
      for (std::size_t j = 0; j < m; ++j) Z[i][j] += X[i][l] * Y[l][j];
    }
  return Z;
}

SmithForm smith_normal_form(const IntMatrix& A) {
  SmithForm s;
  const std::size_t m = A.size(), n = m ? A[0].size() : 0;
  s.D = A;
  s.U = identity(m);
  s.V = identity(n);
  auto& D = s.D;

  for (std::size_t t = 0; t < std::min(m, n); ++t) {
    // smallest nonzero entry of the trailing block as pivot
    bool found = false;
    std::size_t pi = t, pj = t;
    for (std::size_t i = t; i < m; ++i)
      for (std::size_t j = t; j < n; ++j)
        if (D[i][j] != 0 && (!found || abs(D[i][j]) < abs(D[pi][pj]))) {
          found = true;
          pi = i;
          pj = j;
        }
    if (!found) break;
    swap_rows(D, t, pi);
    swap_rows(s.U, t, pi);
    swap_cols(D, t, pj);
    swap_cols(s.V, t, pj);

    for (;;) {
      bool dirty = false;
      for (std::size_t i = t + 1; i < m; ++i) {
        if (D[i][t] == 0) continue;
        BigInt q = D[i][t] / D[t][t];
        row_axpy(D, i, t, q);
        row_axpy(s.U, i, t, q);
        if (D[i][t] != 0) {
          swap_rows(D, t, i);
          swap_rows(s.U, t, i);
          dirty = true;
        }
      }
      for (std::size_t j = t + 1; j < n; ++j) {
        if (D[t][j] == 0) continue;
        BigInt q = D[t][j] / D[t][t];
        col_axpy(D, j, t, q);
        col_axpy(s.V, j, t, q);
        if (D[t][j] != 0) {
          swap_cols(D, t, j);
          swap_cols(s.V, t, j);
          dirty = true;
        }
      }
      if (dirty) continue;
      // divisibility of the remaining block
      bool fixed = false;
      for (std::size_t i = t + 1; i < m && !fixed; ++i)
        for (std::size_t j = t + 1; j < n && !fixed; ++j)
          if (D[i][j] % D[t][t] != 0) {
            row_axpy(D, t, i, BigInt(-1));
            row_axpy(s.U, t, i, BigInt(-1));
            fixed = true;
          }
      if (!fixed) break;
    }
    if (D[t][t] < 0) {
      for (auto& x : D[t]) x = -x;
      for (auto& x : s.U[t]) x = -x;
    }
    s.invariants.push_back(D[t][t]);
    ++s.rank;
  }
  return s;
}

std::vector<std::vector<BigInt>> integer_kernel(const IntMatrix& A) {
  if (A.empty()) return {};
  SmithForm s = smith_normal_form(A);
  const std::size_t n = A[0].size();
  std::vector<std::vector<BigInt>> basis;
  for (std::size_t j = static_cast<std::size_t>(s.rank); j < n; ++j) {
    std::vector<BigInt> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = s.V[i][j];
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace surfdiff

#include "surfdiff/taylor.hpp"

#include <stdexcept>

namespace surfdiff {

Series Series::variable(const Real& x0, int order) {
  std::vector<Real> c(static_cast<std::size_t>(order + 1), Real(0));
  c[0] = x0;
  if (order >= 1) c[1] = 1;
  return Series(std::move(c));
}

Series Series::constant(const Real& x0, int order) {
  std::vector<Real> c(static_cast<std::size_t>(order + 1), Real(0));
  c[0] = x0;
  return Series(std::move(c));
}

Real Series::derivative(int k) const {
  Real f = 1;
  for (int j = 2; j <= k; ++j) f *= j;
  return c_[static_cast<std::size_t>(k)] * f;
}

Series Series::operator+(const Series& o) const {
  Series r = *this;
  for (std::size_t k = 0; k < c_.size(); ++k) r.c_[k] += o.c_[k];
  return r;
}

Series Series::operator-(const Series& o) const {
  Series r = *this;
  for (std::size_t k = 0; k < c_.size(); ++k) r.c_[k] -= o.c_[k];
  return r;
}

Series Series::operator*(const Series& o) const {
  const std::size_t n = c_.size();
  std::vector<Real> r(n, Real(0));
  for (std::size_t i = 0; i < n; ++i) {
    if (c_[i] == 0) continue;
    for (std::size_t j = 0; i + j < n; ++j) r[i + j] += c_[i] * o.c_[j];
  }
  return Series(std::move(r));
}

Series Series::operator/(const Series& o) const { return *this * reciprocal(o); }

Series Series::operator*(const Real& s) const {
  Series r = *this;
  for (auto& x : r.c_) x *= s;
  return r;
}

Series Series::shifted_constant(const Real& c0) const {
  Series r = *this;
  r.c_[0] = c0;
  return r;
}

Series exp(const Series& a) {
  const int n = a.order();
  std::vector<Real> b(static_cast<std::size_t>(n + 1), Real(0));
  b[0] = exp(a[0]);
  for (int k = 1; k <= n; ++k) {
    Real s = 0;
    for (int j = 1; j <= k; ++j) s += j * a[j] * b[static_cast<std::size_t>(k - j)];
    b[static_cast<std::size_t>(k)] = s / k;
  }
  return Series(std::move(b));
}

Series reciprocal(const Series& a) {
  if (a[0] == 0) throw std::domain_error("reciprocal of a series with zero constant term");
  const int n = a.order();
  std::vector<Real> b(static_cast<std::size_t>(n + 1), Real(0));
  b[0] = 1 / a[0];
  for (int k = 1; k <= n; ++k) {
    Real s = 0;
    for (int j = 1; j <= k; ++j) s += a[j] * b[static_cast<std::size_t>(k - j)];
    b[static_cast<std::size_t>(k)] = -s * b[0];
  }
  return Series(std::move(b));
}

Series compose(const Series& outer, const Series& inner) {
  const int n = outer.order();
  Series acc = Series::constant(outer[n], n);
  for (int j = n - 1; j >= 0; --j) {
    acc = acc * inner;
    acc[0] += outer[j];
  }
  return acc;
}

Series reversion(const Series& a) {
  const int n = a.order();
  if (n >= 1 && a[1] == 0) throw std::domain_error("reversion of a series with zero linear term");
  std::vector<Real> b(static_cast<std::size_t>(n + 1), Real(0));
  if (n == 0) return Series(std::move(b));
  b[1] = 1 / a[1];
  for (int m = 2; m <= n; ++m) {
    // coefficient m of a(b(x)) must vanish; b_m enters only through a_1 b_m
    Series partial(b);
    Series power = partial;
    Real s = 0;
    for (int k = 2; k <= m; ++k) {
      power = power * partial;
      s += a[k] * power[m];
    }
    b[static_cast<std::size_t>(m)] = -s / a[1];
  }
  return Series(std::move(b));
}

}  // namespace surfdiff

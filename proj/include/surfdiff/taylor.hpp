// Truncated power series in one variable, for derivatives of compositions of
// closed-form maps.
#pragma once

#include <vector>

#include "surfdiff/real.hpp"

namespace surfdiff {

class Series {
 public:
  Series() = default;
  explicit Series(std::vector<Real> c) : c_(std::move(c)) {}
  // x0 + h, truncated at the given order
  static Series variable(const Real& x0, int order);
  static Series constant(const Real& x0, int order);

  int order() const { return static_cast<int>(c_.size()) - 1; }
  const Real& operator[](int k) const { return c_[static_cast<std::size_t>(k)]; }
  Real& operator[](int k) { return c_[static_cast<std::size_t>(k)]; }
  const std::vector<Real>& coefficients() const { return c_; }
  // k-th derivative at the expansion point
  Real derivative(int k) const;

  Series operator+(const Series& o) const;
  Series operator-(const Series& o) const;
  Series operator*(const Series& o) const;
  Series operator/(const Series& o) const;
  Series operator*(const Real& s) const;
  Series shifted_constant(const Real& c0) const;

 private:
  std::vector<Real> c_;
};

Series exp(const Series& a);
Series reciprocal(const Series& a);
// outer(inner(h)) where inner has zero constant term.
Series compose(const Series& outer, const Series& inner);
// The compositional inverse of a series with zero constant term and nonzero
// linear term.
Series reversion(const Series& a);

}  // namespace surfdiff

#include "surfdiff/real.hpp"

#include <algorithm>
#include <cmath>
#include <mpfr.h>
#include <sstream>

namespace surfdiff {

namespace {

// Smallest decimal setting whose binary precision reaches `bits`, so that a
// scope opened with working_bits() reproduces the same precision.
unsigned digits10_for(unsigned bits) {
  unsigned d = std::max(1u, static_cast<unsigned>(bits * 0.30102999566398120) - 2);
  while (true) {
    Real::default_precision(d);
    if (working_bits() >= bits) return d;
    ++d;
  }
}

// The flat charts reach exp(1/u) for tiny u; the default exponent range would
// overflow long before the working precision runs out.
void widen_exponents() {
  mpfr_set_emax(mpfr_get_emax_max());
  mpfr_set_emin(mpfr_get_emin_min());
}

}  // namespace

PrecisionScope::PrecisionScope(unsigned bits) : saved_digits10_(Real::default_precision()) {
  widen_exponents();
  const unsigned d = digits10_for(bits);
  Real::default_precision(d);
}

PrecisionScope::~PrecisionScope() { Real::default_precision(saved_digits10_); }

unsigned working_bits() {
  Real probe = 0;
  return static_cast<unsigned>(mpfr_get_prec(probe.backend().data()));
}

Real to_real(const BigInt& n) {
  Real r;
  mpfr_set_z(r.backend().data(), n.backend().data(), MPFR_RNDN);
  return r;
}

Real to_real(double x) {
  Real r;
  mpfr_set_d(r.backend().data(), x, MPFR_RNDN);
  return r;
}

BigInt floor_int(const Real& x) {
  BigInt n;
  mpfr_get_z(n.backend().data(), x.backend().data(), MPFR_RNDD);
  return n;
}

Real rounded(const Real& x) {
  Real r;
  mpfr_set(r.backend().data(), x.backend().data(), MPFR_RNDN);
  return r;
}

long binary_exponent(const Real& x) {
  if (x == 0 || !isfinite(x)) return 0;
  return mpfr_get_exp(x.backend().data());
}

std::string to_string(const Real& x, int digits) {
  std::ostringstream out;
  if (digits <= 0) {
    const unsigned saved = Real::default_precision();
    digits = static_cast<int>(digits10_for(static_cast<unsigned>(mpfr_get_prec(x.backend().data()))));
    Real::default_precision(saved);
  }
  out.precision(digits);
  out << std::scientific << x;
  return out.str();
}

Real parse_real(const std::string& s) { return Real(s); }

}  // namespace surfdiff

// Multiprecision reals. Precision is a per-thread setting: values created
// under a PrecisionScope carry its precision, and arithmetic keeps the larger
// of its operands'. Anything cached across scopes must be rebuilt.
#pragma once

#include <boost/multiprecision/mpfr.hpp>
#include <string>

#include "surfdiff/tower.hpp"

namespace surfdiff {

using Real = boost::multiprecision::mpfr_float;

class PrecisionScope {
 public:
  explicit PrecisionScope(unsigned bits);
  ~PrecisionScope();
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned saved_digits10_;
};

// Current working precision in bits.
unsigned working_bits();

// Exact conversions.
Real to_real(const BigInt& n);
Real to_real(double x);
// x rounded to the working precision
Real rounded(const Real& x);
// e with 2^{e-1} <= |x| < 2^e; 0 for zero or non-finite x
long binary_exponent(const Real& x);
// floor(x) as an integer; x must be finite.
BigInt floor_int(const Real& x);

// Decimal text with enough digits to round-trip at the value's precision.
std::string to_string(const Real& x, int digits = 0);
Real parse_real(const std::string& s);

}  // namespace surfdiff

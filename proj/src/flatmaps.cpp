#include "surfdiff/flatmaps.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <type_traits>

namespace surfdiff {

namespace {

Real pow2(long e) { return ldexp(Real(1), static_cast<int>(e)); }

// v in (0, 1/2] with exp(1/v) − exp(1/(1 − v)) = c >= 0: the distance from
// the upper end in units of the width. Newton on asinh of the chart, which is
// close to linear in 1/v for large c and in v near the middle.
// Solve in s = 1/v ∈ [2, ∞), where asinh(χ) is close to linear. A double
// solve seeds a few Newton steps at full precision.
template <class T>
T newton_s(const T& target, T s, const T& tol, int max_it) {
  using std::abs, std::asinh, std::exp, std::isfinite, std::log, std::log1p, std::sqrt;
  T lo = 2, hi = -1;  // hi < lo: no upper bracket yet
  for (int it = 0; it < max_it; ++it) {
    T h = 0, d = 0;
    if constexpr (std::is_same_v<T, double>) {
      if (s > 30) {
        // asinh(x) = log 2x to double precision; keep exp(s) from overflowing
        const double g = s / (s - 1) - s, eg = exp(g);
        h = std::log(2.0) + s + log1p(-eg) - target;
        d = 1 + eg * (1 / ((s - 1) * (s - 1)) + 1) / (1 - eg);
      }
    }
    if (d == 0) {
      const T es = exp(s), eu = exp(s / (s - 1));
      const T x = es - eu;
      h = asinh(x) - target;
      d = (es + eu / ((s - 1) * (s - 1))) / sqrt(1 + x * x);
    }
    if (h == 0) return s;
    if (h > 0)
      hi = s;
    else
      lo = s;
    T next = s - h / d;
    const bool bracketed = hi >= lo;
    const bool newton = isfinite(next) && next > lo && !(bracketed && next >= hi);
    if (!newton) next = bracketed ? T((lo + hi) / 2) : T(2 * s);
    // convergence is quadratic, so a Newton step this small leaves next fully
    // accurate; a bisection step does not
    if (newton && abs(next - s) <= s * tol) return next;
    s = next;
  }
  return s;
}

Real solve_upper(const Real& c) {
  if (c == 0) return Real(0.5);
  const long bits = static_cast<long>(working_bits());
  const Real target = asinh(c);
  const double td = static_cast<double>(target);
  double s0 = td < 1 ? 2 + td : td + 1;
  if (std::isfinite(td)) s0 = newton_s<double>(td, s0, 1e-12, 200);
  const Real s = newton_s<Real>(target, Real(s0), pow2(-(bits / 2 + 8)), 400);
  return 1 / s;
}

}  // namespace

FlatChart::FlatChart(Real alpha, Real beta) : alpha_(std::move(alpha)), beta_(std::move(beta)) {
  if (!(alpha_ < beta_)) throw std::invalid_argument("flat chart needs alpha < beta");
}

Real FlatChart::chi(const Real& y) const {
  if (y <= alpha_) return Real(-std::numeric_limits<double>::infinity());
  if (y >= beta_) return Real(std::numeric_limits<double>::infinity());
  const Real w = width();
  return exp(w / (beta_ - y)) - exp(w / (y - alpha_));
}

Real FlatChart::dchi(const Real& y) const {
  const Real w = width();
  const Real u = (y - alpha_) / w, v = (beta_ - y) / w;
  return (exp(1 / v) / (v * v) + exp(1 / u) / (u * u)) / w;
}

Series FlatChart::series(const Real& y, int order) const {
  const Real w = width();
  Series u = Series::constant((y - alpha_) / w, order), v = Series::constant((beta_ - y) / w, order);
  if (order >= 1) {
    u[1] = 1 / w;
    v[1] = -1 / w;
  }
  return exp(reciprocal(v)) - exp(reciprocal(u));
}

Real FlatChart::inverse(const Real& c) const {
  if (isinf(c)) return c > 0 ? beta_ : alpha_;
  if (c == 0) return (alpha_ + beta_) / 2;
  const Real w = width();
  if (c > 0) return beta_ - solve_upper(c) * w;
  return alpha_ + solve_upper(-c) * w;
}

StepMap::StepMap(FlatChart chart, double epsilon) : chart_(std::move(chart)), epsilon_(epsilon) {
  if (!(epsilon > 0)) throw std::invalid_argument("step must be positive");
}

Real StepMap::anchor() const { return (chart_.alpha() + chart_.beta()) / 2; }

Real StepMap::eval_pow(const BigInt& k, const Real& y, bool* outside) const {
  const bool out = !chart_.inside(y);
  if (outside) *outside = out;
  if (out || k == 0) return y;
  const Real c = chart_.chi(y);
  if (isinf(c)) return y;
  const Real c2 = c + to_real(k) * to_real(epsilon_);
  if (c2 == c) return y;
  return chart_.inverse(c2);
}

Series StepMap::apply_pow(const BigInt& k, const Series& s) const {
  const Real& z0 = s[0];
  if (k == 0 || !chart_.inside(z0)) return s;
  const int n = s.order();
  Series C = chart_.series(z0, n);
  if (isinf(C[0])) return s;
  const Real c1 = C[0] + to_real(k) * to_real(epsilon_);
  if (c1 == C[0]) return s;
  const Real z1 = chart_.inverse(c1);
  if (!chart_.inside(z1)) return s;
  Series E = chart_.series(z1, n);
  E[0] = 0;
  E = reversion(E);
  C[0] = 0;
  const Series delta = s.shifted_constant(Real(0));
  Series out = compose(E, compose(C, delta));
  out[0] = z1;
  return out;
}

Real StepMap::derivative(int m, const Real& y, const BigInt& k) const {
  if (m < 1) throw std::invalid_argument("derivative order must be positive");
  if (!chart_.inside(y)) return Real(m == 1 ? 1 : 0);
  return apply_pow(k, Series::variable(y, m)).derivative(m);
}

std::pair<Real, Real> StepMap::fundamental_interval() const {
  return {anchor(), chart_.inverse(to_real(epsilon_))};
}

TileIndex StepMap::tile_index(const Real& t) const {
  if (!chart_.inside(t)) throw std::domain_error("tile index outside the interval");
  const Real c = chart_.chi(t);
  if (isinf(c)) throw std::domain_error("tile index in the flat zone");
  const long bits = static_cast<long>(working_bits());
  const auto [s, fs] = fundamental_interval();
  TileIndex out;
  const auto reduce = [&] {
    const Real c = chart_.chi(t);
    const Real eps = to_real(epsilon_);
    out.k = floor_int(c / eps);
    Real r = c - to_real(out.k) * eps;
    if (r < 0) {
      out.k -= 1;
      r += eps;
    } else if (r >= eps) {
      out.k += 1;
      r -= eps;
    }
    out.tail = chart_.inverse(r);
  };
  // c carries about log2|c/ε| fewer good bits after the reduction; t itself
  // is exact, so redo it wider and round the tail back
  const long lost = binary_exponent(c / to_real(epsilon_));
  if (lost > bits / 8) {
    if (bits + lost > kMaxTileBits) {
      out.k = floor_int(c / to_real(epsilon_));
      out.tail = (s + fs) / 2;
      out.status = TileStatus::Undecided;
      return out;
    }
    {
      PrecisionScope wider(static_cast<unsigned>(bits + lost + 64));
      reduce();
    }
    out.tail = rounded(out.tail);
  } else {
    reduce();
  }
  const Real terminal = pow2(-(7 * bits / 8)), undecided = pow2(-(3 * bits / 4));
  const Real lo = out.tail - s, hi = fs - out.tail;
  if (lo <= terminal) {
    out.status = TileStatus::Terminal;
    out.tail = s;
  } else if (hi <= terminal) {
    out.status = TileStatus::Terminal;
    out.k += 1;
    out.tail = s;
  } else if (lo <= undecided || hi <= undecided) {
    out.status = TileStatus::Undecided;
  }
  return out;
}

std::string StepMap::serialize() const {
  std::ostringstream out;
  out << to_string(chart_.alpha()) << ' ' << to_string(chart_.beta()) << ' ';
  out.precision(17);
  out << epsilon_ << ' ' << working_bits();
  return out.str();
}

StepMap StepMap::parse(const std::string& line) {
  std::istringstream in(line);
  std::string a, b;
  double eps = 0;
  unsigned bits = 0;
  if (!(in >> a >> b >> eps >> bits)) throw std::invalid_argument("bad step map line: " + line);
  PrecisionScope scope(bits);
  return StepMap(parse_real(a), parse_real(b), eps);
}

CkDistance ck_distance_to_id(const StepMap& f, int k, int grid) {
  CkDistance best;
  best.value = 0;
  best.grid = grid;
  const Real w = f.chart().width();
  for (int i = 1; i <= grid; ++i) {
    const Real y = f.chart().alpha() + w * i / (grid + 1);
    const Series s = f.apply_pow(BigInt(1), Series::variable(y, k));
    for (int j = 0; j <= k; ++j) {
      const Real d = j == 0 ? Real(abs(s[0] - y)) : Real(abs(s.derivative(j) - (j == 1 ? 1 : 0)));
      if (d > best.value) {
        best.value = d;
        best.where = y;
        best.order = j;
      }
    }
  }
  return best;
}

Real TransitionFn::operator()(const Real& x) const {
  if (x <= -0.5) return Real(0);
  if (x >= 0.5) return Real(1);
  // double precision is plenty for plot data
  auto bump = [](double t) {
    const double d = 0.25 - t * t;
    return d <= 0 ? 0.0 : std::exp(-1 / d);
  };
  static const double total = boost::math::quadrature::tanh_sinh<double>().integrate(bump, -0.5, 0.5);
  const double xd = x.convert_to<double>();
  boost::math::quadrature::tanh_sinh<double> integrator;
  if (xd <= 0) return to_real(integrator.integrate(bump, -0.5, xd) / total);
  return to_real(1 - integrator.integrate(bump, xd, 0.5) / total);
}

Real leaf_value(const TransitionFn& g, const StepMap& f, const Real& x, const Real& y) {
  const Real gx = g(x);
  return (1 - gx) * y + gx * f.eval(y);
}

void write_grid_csv(std::ostream& out, const StepMap& f, int points, int orders) {
  out << "y,f";
  for (int j = 1; j <= orders; ++j) out << ",d" << j;
  out << '\n';
  const Real w = f.chart().width();
  for (int i = 1; i <= points; ++i) {
    const Real y = f.chart().alpha() + w * i / (points + 1);
    const Series s = f.apply_pow(BigInt(1), Series::variable(y, std::max(orders, 0)));
    out << to_string(y, 30) << ',' << to_string(s[0], 30);
    for (int j = 1; j <= orders; ++j) out << ',' << to_string(s.derivative(j), 30);
    out << '\n';
  }
}

}  // namespace surfdiff

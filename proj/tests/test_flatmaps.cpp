#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <sstream>

#include "flat_oracles.hpp"
#include "surfdiff/flatmaps.hpp"

using namespace surfdiff;

namespace {

constexpr unsigned kBits = 128;

Real R(const char* s) { return parse_real(s); }

Real tol(int slack = 16) { return ldexp(Real(1), -static_cast<int>(working_bits()) + slack); }

bool close(const Real& x, const Real& y, const Real& eps) { return abs(x - y) <= eps; }

Real grid_point(const StepMap& f, int i, int n) {
  return f.chart().alpha() + f.chart().width() * i / (n + 1);
}

}  // namespace

TEST_CASE("chart values and monotonicity") {
  PrecisionScope p(kBits);
  FlatChart c(Real(0), Real(1));
  CHECK(c.chi(Real(0.5)) == 0);
  CHECK(close(c.chi(Real(0.6)), oracle::chart(Real(0), Real(1), Real(0.6)), tol()));
  CHECK(abs(c.chi(Real(0.6)) - R("6.888003910233444")) < 1e-14);
  FlatChart d(R("0.3"), R("0.45"));
  Real prev = d.chi(R("0.3") + R("1e-3"));
  for (int i = 2; i < 150; ++i) {
    const Real y = R("0.3") + R("1e-3") * i;
    CHECK(d.dchi(y) > 0);
    const Real now = d.chi(y);
    CHECK(now > prev);
    CHECK(close(now, oracle::chart(R("0.3"), R("0.45"), y), abs(now) * tol()));
    prev = now;
  }
  CHECK(isinf(d.chi(R("0.3"))));
  CHECK(d.chi(R("0.3")) < 0);
  CHECK(isinf(d.chi(R("0.5"))));
  CHECK_THROWS_AS(FlatChart(Real(1), Real(1)), std::invalid_argument);
}

TEST_CASE("inverse agrees with bisection") {
  PrecisionScope p(kBits);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> logc(-30, 30);
  for (auto [a, b] : {std::pair{"0", "1"}, std::pair{"0.3", "0.45"}, std::pair{"0.49", "0.5"}}) {
    FlatChart c(R(a), R(b));
    for (int i = 0; i < 60; ++i) {
      const double e = logc(rng);
      const Real x = (e < 0 ? -1 : 1) * exp(Real(std::abs(e)));
      const Real y = c.inverse(x);
      CHECK(close(y, oracle::chart_inverse(R(a), R(b), x, kBits), c.width() * tol(24)));
      CHECK(close(c.chi(y), x, abs(x) * tol(24) + tol(24)));
    }
  }
}

TEST_CASE("powers") {
  PrecisionScope p(kBits);
  StepMap f(Real(0), Real(1), 0.1);
  CHECK(f.anchor() == Real(0.5));
  const Real y("0.6");
  CHECK(f.eval_pow(BigInt(0), y) == y);
  CHECK(close(f.eval_pow(BigInt(-1), f.eval(y)), y, tol()));
  CHECK(close(f.eval(y), oracle::step(Real(0), Real(1), 0.1, y, kBits), tol()));
  CHECK(abs(f.eval(y) - R("0.60109564685317910858")) < 1e-19);

  bool outside = false;
  CHECK(f.eval_pow(BigInt(5), Real(1.5), &outside) == Real(1.5));
  CHECK(outside);
  CHECK(f.eval_pow(BigInt(5), Real(0), &outside) == 0);
  CHECK(outside);
  f.eval_pow(BigInt(5), y, &outside);
  CHECK_FALSE(outside);

  // group law, including powers far beyond any composition chain
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> kd(-2000, 2000);
  std::uniform_real_distribution<double> yd(0.05, 0.95);
  StepMap g(R("0.3"), R("0.45"), 0.03);
  for (int i = 0; i < 100; ++i) {
    const BigInt k1(kd(rng)), k2(kd(rng));
    const Real t = R("0.3") + R("0.15") * Real(yd(rng));
    for (const StepMap* m : {&f, &g}) {
      const Real lhs = m->eval_pow(k1 + k2, t);
      const Real rhs = m->eval_pow(k1, m->eval_pow(k2, t));
      CHECK(close(lhs, rhs, tol(24)));
    }
  }
  const BigInt huge = BigInt(1) << 90;
  const Real far = f.eval_pow(huge, y);
  CHECK(far > y);
  CHECK(far <= 1);
  CHECK(close(f.eval_pow(-huge, f.eval_pow(huge, Real("0.55"))), Real("0.55"), Real("1e-6")));
}

TEST_CASE("strict displacement") {
  PrecisionScope p(kBits);
  for (double eps : {0.1, 0.01}) {
    StepMap f(Real(0), Real(1), eps);
    for (int i = 20; i <= 980; ++i) {
      const Real y = Real(i) / 1000;
      CHECK(f.eval(y) > y);
    }
  }
  StepMap g(R("0.3"), R("0.45"), 0.5);
  for (int i = 1; i < 100; ++i) {
    const Real y = grid_point(g, i, 100);
    if (i >= 5 && i <= 95) CHECK(g.eval(y) > y);
    CHECK(g.eval(y) >= y);
  }
}

TEST_CASE("fundamental interval and tiles") {
  PrecisionScope p(kBits);
  StepMap f(Real(0), Real(1), 0.1);
  const auto [s, fs] = f.fundamental_interval();
  CHECK(s == Real(0.5));
  CHECK(close(fs, oracle::chart_inverse(Real(0), Real(1), Real(0.1), kBits), tol()));
  // wandering: f(I) = (f(s), f²(s)) starts where I ends
  CHECK(close(f.eval(s), fs, tol()));
  CHECK(f.eval(fs) > fs);

  // half-open tiles [f^k(s), f^{k+1}(s)) are ordered and cover [0.25, 0.75]
  const int K = 600;
  std::vector<Real> ends;
  for (int k = -K; k <= K; ++k) ends.push_back(f.eval_pow(BigInt(k), s));
  for (std::size_t i = 1; i < ends.size(); ++i) CHECK(ends[i] > ends[i - 1]);
  CHECK(ends.front() < Real("0.25"));
  CHECK(ends.back() > Real("0.75"));
  for (int i = 250; i <= 750; i += 3) {
    const Real t = Real(i) / 1000;
    const TileIndex ti = f.tile_index(t);
    const long k = ti.k.convert_to<long>();
    REQUIRE(std::abs(k) < K);
    CHECK(ends[static_cast<std::size_t>(k + K)] <= t + tol());
    CHECK(t < ends[static_cast<std::size_t>(k + K + 1)] + tol());
  }
  // farther out the indices are huge but still reproduce the point
  for (int i = 20; i <= 980; i += 7) {
    const Real t = Real(i) / 1000;
    const TileIndex ti = f.tile_index(t);
    CHECK(ti.tail >= s);
    CHECK(ti.tail < fs);
    CHECK(close(f.eval_pow(ti.k, ti.tail), t, tol(24)));
    CHECK(f.eval_pow(ti.k, s) <= t + tol());
    CHECK(t < f.eval_pow(ti.k + 1, s) + tol());
  }
}

TEST_CASE("tile index") {
  PrecisionScope p(kBits);
  StepMap f(Real(0), Real(1), 0.1);
  TileIndex a = f.tile_index(Real(0.5));
  CHECK(a.k == 0);
  CHECK(a.tail == Real(0.5));
  CHECK(a.status == TileStatus::Terminal);

  TileIndex b = f.tile_index(Real("0.6"));
  CHECK(b.k == 68);
  CHECK(b.status == TileStatus::Interior);

  // points of the orbit of s are terminal with the right power
  for (int k : {-40, -3, 1, 7, 55}) {
    TileIndex t = f.tile_index(f.eval_pow(BigInt(k), f.anchor()));
    CHECK(t.k == k);
    CHECK(t.status == TileStatus::Terminal);
    CHECK(t.tail == f.anchor());
  }

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> yd(0.05, 0.95);
  for (int i = 0; i < 100; ++i) {
    const Real t(yd(rng));
    const TileIndex x = f.tile_index(t), y = f.tile_index(f.eval(t));
    CHECK(y.k == x.k + 1);
    CHECK(close(x.tail, y.tail, tol(24)));
  }

  // near s, but not near enough to call
  const int bits = static_cast<int>(working_bits());
  const Real near = Real(0.5) + ldexp(Real(1), -(13 * bits / 16));
  CHECK(f.tile_index(near).status == TileStatus::Undecided);
  CHECK_THROWS_AS(f.tile_index(Real(1)), std::domain_error);
}

TEST_CASE("derivatives") {
  PrecisionScope p(kBits);
  StepMap f(Real(0), Real(1), 0.1);
  for (int i = 5; i <= 95; i += 10) {
    const Real y = Real(i) / 100;
    const Real d1 = f.derivative(1, y);
    CHECK(close(d1, f.chart().dchi(y) / f.chart().dchi(f.eval(y)), tol(24)));

    auto step = [&](const Real& x) { return oracle::step(Real(0), Real(1), 0.1, x, kBits); };
    const Real h = R("1e-4");
    const Real e1 = abs(oracle::central(step, y, h) - d1);
    const Real e2 = abs(oracle::central(step, y, h / 2) - d1);
    // O(h²): halving h quarters the error
    CHECK(e1 < R("1e-6"));
    if (e1 > R("1e-25")) CHECK(e2 < e1 / 3);
    CHECK(abs(oracle::richardson(step, y, h) - d1) < R("1e-12"));

    auto deriv = [&](const Real& x) { return f.derivative(1, x); };
    CHECK(abs(oracle::richardson(deriv, y, h) - f.derivative(2, y)) < R("1e-10"));
    // powers: (f^k)' at y
    auto step3 = [&](const Real& x) { return f.eval_pow(BigInt(3), x); };
    CHECK(abs(oracle::richardson(step3, y, h) - f.derivative(1, y, BigInt(3))) < R("1e-10"));
  }
  CHECK(f.derivative(1, Real(1)) == 1);
  CHECK(f.derivative(3, Real(0)) == 0);
  CHECK(f.derivative(2, Real(2)) == 0);
  CHECK(isfinite(f.derivative(13, Real("0.37"))));
  CHECK_THROWS_AS(f.derivative(0, Real("0.5")), std::invalid_argument);

  // smaller steps are closer to the identity
  auto worst = [](double eps) {
    StepMap g(Real(0), Real(1), eps);
    Real m = 0;
    for (int i = 1; i < 100; ++i) m = max(m, Real(abs(g.derivative(1, Real(i) / 100) - 1)));
    return m;
  };
  const Real big = worst(0.1), small = worst(0.01);
  CHECK(small < big);
  CHECK(small < big / 5);
}

TEST_CASE("flat at the ends") {
  PrecisionScope p(kBits);
  StepMap f(Real(0), Real(1), 0.1);
  // |f^(m) − id^(m)| ≤ C·exp(−1/2δ) on a log grid, with the ratio shrinking
  for (const bool left : {true, false}) {
    std::vector<Real> last(5, Real(1e30));
    for (int j = 0; j < 8; ++j) {
      const double delta = 0.1 / (1 << j);
      const Real y = left ? Real(delta) : Real(1 - delta);
      const Real bound = exp(Real(-1 / (2 * delta)));
      const Series s = f.apply_pow(BigInt(1), Series::variable(y, 4));
      for (int m = 0; m <= 4; ++m) {
        const Real dev = abs(m == 0 ? Real(s[0] - y) : Real(s.derivative(m) - (m == 1 ? 1 : 0)));
        const Real ratio = dev / bound;
        CHECK(ratio <= 1000);
        CHECK(ratio <= last[static_cast<std::size_t>(m)]);
        last[static_cast<std::size_t>(m)] = ratio;
      }
    }
  }
}

TEST_CASE("distance to the identity") {
  PrecisionScope p(kBits);
  StepMap f(Real(0), Real(1), 0.1), h(Real(0), Real(1), 0.05);
  const CkDistance zero = ck_distance_to_id(f, 0, 200);
  CHECK(zero.value <= 1);
  CHECK(zero.order == 0);
  CHECK(zero.grid == 200);
  const CkDistance c3 = ck_distance_to_id(f, 3, 200);
  CHECK(c3.value >= zero.value);
  CHECK(ck_distance_to_id(h, 3, 200).value < c3.value);
  const CkDistance fine = ck_distance_to_id(f, 3, 400);
  CHECK(abs(fine.value - c3.value) <= c3.value / 10);
  // attained where claimed
  const Series s = f.apply_pow(BigInt(1), Series::variable(c3.where, 3));
  CHECK(close(abs(s.derivative(c3.order) - (c3.order == 1 ? 1 : 0)), c3.value, tol()));
}

TEST_CASE("transition function and leaves") {
  PrecisionScope p(kBits);
  TransitionFn g;
  CHECK(g(Real(-1)) == 0);
  CHECK(g(Real(-0.5)) == 0);
  CHECK(g(Real(0.5)) == 1);
  CHECK(abs(g(Real(0)) - 0.5) < 1e-12);
  Real prev = -1;
  for (int i = -100; i <= 100; ++i) {
    const Real x = Real(i) / 100, gx = g(x);
    CHECK(gx >= prev);
    CHECK(abs(gx + g(-x) - 1) < 1e-12);
    prev = gx;
  }

  StepMap f(Real(0), Real(1), 0.1);
  const Real y("0.6");
  CHECK(leaf_value(g, f, Real(-1), y) == y);
  CHECK(leaf_value(g, f, Real(-0.75), y) == y);
  CHECK(leaf_value(g, f, Real(1), y) == f.eval(y));
  for (double x : {-0.3, 0.0, 0.2, 0.45}) {
    Real last = 0;
    for (int i = 1; i < 100; ++i) {
      const Real v = leaf_value(g, f, Real(x), Real(i) / 100);
      CHECK(v > last);
      last = v;
    }
  }
}

TEST_CASE("precision scopes reproduce themselves") {
  for (unsigned b = 40; b <= 600; b += 7) {
    PrecisionScope p(b);
    const unsigned w = working_bits();
    CHECK(w >= b);
    PrecisionScope q(w);
    CHECK(working_bits() == w);
  }
}

TEST_CASE("serialization and grid reports") {
  StepMap f = [] {
    PrecisionScope p(200);
    return StepMap(R("0.3"), R("0.45"), 0.07);
  }();
  std::string line;
  {
    PrecisionScope p(200);
    line = f.serialize();
  }
  StepMap g = StepMap::parse(line);
  CHECK(g.epsilon() == 0.07);
  {
    PrecisionScope p(200);
    CHECK(g.chart().alpha() == f.chart().alpha());
    CHECK(g.chart().beta() == f.chart().beta());
    CHECK(g.serialize() == line);
    CHECK(g.eval(R("0.4")) == f.eval(R("0.4")));
  }
  CHECK_THROWS_AS(StepMap::parse("0.1 0.2"), std::invalid_argument);
  CHECK_THROWS_AS(StepMap::parse("0.2 0.1 0.5 64"), std::invalid_argument);

  PrecisionScope p(kBits);
  StepMap h(Real(0), Real(1), 0.1);
  std::ostringstream out;
  write_grid_csv(out, h, 9, 2);
  std::istringstream in(out.str());
  std::string row;
  std::getline(in, row);
  CHECK(row == "y,f,d1,d2");
  int rows = 0;
  while (std::getline(in, row)) {
    ++rows;
    std::istringstream cells(row);
    std::string y, fy, d1;
    std::getline(cells, y, ',');
    std::getline(cells, fy, ',');
    std::getline(cells, d1, ',');
    CHECK(abs(parse_real(fy) - h.eval(parse_real(y))) < 1e-25);
    CHECK(abs(parse_real(d1) - h.derivative(1, parse_real(y))) < 1e-25);
  }
  CHECK(rows == 9);
}

TEST_CASE("series arithmetic") {
  PrecisionScope p(kBits);
  const int n = 10;
  // exp(h) − 1 reverts to log(1 + h)
  Series e = exp(Series::variable(Real(0), n));
  e[0] = 0;
  const Series lg = reversion(e);
  for (int k = 1; k <= n; ++k) CHECK(close(lg[k], Real(k % 2 ? 1 : -1) / k, tol()));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> cd(-2, 2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Real> c(n + 1);
    for (auto& x : c) x = cd(rng);
    c[0] = 0;
    c[1] = 1 + std::abs(cd(rng));
    const Series a(c);
    const Series id = compose(reversion(a), a);
    CHECK(close(id[1], Real(1), tol(40)));
    for (int k = 2; k <= n; ++k) CHECK(abs(id[k]) < tol(60));
    Series b = a;
    b[0] = 3;
    const Series one = b * reciprocal(b);
    CHECK(close(one[0], Real(1), tol()));
    for (int k = 1; k <= n; ++k) CHECK(abs(one[k]) < tol(40));
    // exp(a + b) = exp(a)·exp(b)
    const Series lhs = exp(a + b), rhs = exp(a) * exp(b);
    for (int k = 0; k <= n; ++k) CHECK(close(lhs[k], rhs[k], (abs(rhs[k]) + 1) * tol(40)));
  }
  const Series x = Series::variable(Real(2), 4);
  CHECK((x * x * x).derivative(3) == 6);
  CHECK((x * x).derivative(1) == 4);
}

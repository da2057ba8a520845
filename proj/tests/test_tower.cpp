#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "surfdiff/core.hpp"
#include "surfdiff/smith.hpp"
#include "surfdiff/tower.hpp"
#include "surfdiff/unscrew.hpp"

using namespace surfdiff;

namespace {

Word W(const char* s) { return Word::parse(s); }

// A schedule tower deep enough to make every level nontrivial.
const Tower& deep() {
  static const Tower t = extend_schedule(Tower{}, 4).first;
  return t;
}

// Random insertions of relator conjugates and backtracks.
std::vector<Letter> disguise(std::vector<Letter> w, std::mt19937_64& rng, int inserts) {
  for (int k = 0; k < inserts; ++k) {
    std::uniform_int_distribution<std::size_t> pos(0, w.size());
    const std::size_t at = pos(rng);
    std::vector<Letter> piece;
    if (rng() % 2) {
      Letter x{static_cast<std::uint8_t>(rng() % 8)};
      piece = {x, x.inv()};
    } else {
      auto conj = oracle::random_letters(rng, 4);
      std::vector<Letter> r(relator().begin(), relator().end());
      const std::size_t rot = rng() % 8;
      std::rotate(r.begin(), r.begin() + static_cast<long>(rot), r.end());
      if (rng() % 2) {
        std::reverse(r.begin(), r.end());
        for (auto& x : r) x = x.inv();
      }
      piece = conj;
      piece.insert(piece.end(), r.begin(), r.end());
      for (auto it = conj.rbegin(); it != conj.rend(); ++it) piece.push_back(it->inv());
    }
    w.insert(w.begin() + static_cast<long>(at), piece.begin(), piece.end());
  }
  return w;
}

Heights lift_raw(const Tower& t, const std::vector<Letter>& w, int n) {
  Heights h(static_cast<std::size_t>(n), 0);
  for (Letter x : w) step(t, x, h);
  return h;
}

}  // namespace

TEST_CASE("trace basics") {
  const Tower t = Tower::standard_base();
  CHECK(trace(W("ab"), t, 1) == Heights{1});
  CHECK(trace(Word{}, Heights{5}, t, 1) == Heights{5});
  CHECK(trace(W("AAbq"), t, 1) == Heights{-2});
  CHECK_THROWS_AS(trace(W("a"), t, 2), TowerError);
}

TEST_CASE("step agrees with the lifting oracle") {
  const Tower& t = deep();
  std::mt19937_64 rng(5);
  for (int k = 0; k < 400; ++k) {
    auto w = oracle::random_letters(rng, 30);
    Heights start(static_cast<std::size_t>(t.depth()), 0);
    for (auto& v : start) v = static_cast<std::int64_t>(rng() % 5) - 2;
    Heights h = start;
    for (Letter x : w) step(t, x, h);
    REQUIRE(h == oracle::lift(t, w, start));
  }
}

TEST_CASE("trace composes") {
  const Tower& t = deep();
  std::mt19937_64 rng(7);
  for (int k = 0; k < 300; ++k) {
    auto u = oracle::random_letters(rng, 12), v = oracle::random_letters(rng, 12);
    auto uv = u;
    uv.insert(uv.end(), v.begin(), v.end());
    Heights mid(static_cast<std::size_t>(t.depth()), 0);
    for (Letter x : u) step(t, x, mid);
    Heights h = mid;
    for (Letter x : v) step(t, x, h);
    CHECK(h == lift_raw(t, uv, t.depth()));
  }
}

TEST_CASE("representative independence") {
  const Tower& t = deep();
  std::mt19937_64 rng(11);
  for (int k = 0; k < 2000; ++k) {
    auto w = oracle::random_letters(rng, 10);
    auto dressed = disguise(w, rng, 1 + static_cast<int>(rng() % 3));
    Heights start(static_cast<std::size_t>(t.depth()), 0);
    for (auto& v : start) v = static_cast<std::int64_t>(rng() % 7) - 3;
    Heights a = start, b = start;
    for (Letter x : w) step(t, x, a);
    for (Letter x : dressed) step(t, x, b);
    REQUIRE(a == b);
    // reduced words too
    CHECK(trace(Word::from_letters(w), start, t, t.depth()) == a);
  }
}

TEST_CASE("closedness examples") {
  const Tower t = Tower::standard_base();
  CHECK(verify_cocycle(Cocycle::base({1, 0, 0, 0}), Tower{}));
  CHECK(verify_cocycle(Cocycle::base({3, -1, 2, 7}), Tower{}));
  Cocycle c(1);
  c.set(Edge{1, {0}}, 1);
  CHECK_FALSE(verify_cocycle(c, t));
  REQUIRE(closedness_witness(c, t).has_value());
  CHECK(cochain_sum(relator_word(), *closedness_witness(c, t), t, c) != 0);
  CHECK(verify_cocycle(Cocycle(1), t));
  CHECK(verify_cocycle(Cocycle(3), deep()));
}

TEST_CASE("closedness against brute force") {
  std::mt19937_64 rng(13);
  const Tower t1 = Tower::standard_base();
  const Tower& t = deep();
  int closed_seen = 0;
  for (int k = 0; k < 600; ++k) {
    const int level = 1 + static_cast<int>(rng() % 2);
    const Tower& tw = level == 1 ? t1 : t;
    Cocycle c(level);
    const int entries = 1 + static_cast<int>(rng() % 4);
    for (int e = 0; e < entries; ++e) {
      Heights h(static_cast<std::size_t>(level));
      for (auto& v : h) v = static_cast<std::int64_t>(rng() % 3) - 1;
      c.set(Edge{static_cast<int>(rng() % 4), h}, static_cast<std::int64_t>(rng() % 3) - 1);
    }
    if (k % 3 == 0) {
      Cocycle d(level);
      Heights h(static_cast<std::size_t>(level), 0);
      h[0] = static_cast<std::int64_t>(rng() % 3) - 1;
      // δ of a vertex indicator is closed
      for (int g = 0; g < 4; ++g) {
        d.add(Edge{g, h}, -1);
        Heights back = h;
        step(tw, Letter::make(g, true), back);
        d.add(Edge{g, back}, 1);
      }
      c = d;
    }
    const bool want = oracle::closed_on_box(c, tw, -4, 4);
    closed_seen += want;
    REQUIRE(verify_cocycle(c, tw) == want);
  }
  CHECK(closed_seen > 50);
}

TEST_CASE("pairing and membership") {
  const Tower t = Tower::standard_base();
  CHECK(pairing(W("a"), 0, t) == 1);
  CHECK(pairing(W("abAB"), 0, t) == 0);
  CHECK(membership(W("b"), 1, t));
  CHECK_FALSE(membership(W("a"), 1, t));
  CHECK(membership(Word{}, 1, t));
  CHECK(membership(Word{}, deep().depth(), deep()));
  CHECK_THROWS_AS(pairing(W("a"), 1, deep()), NotInSubgroup);

  // the commutator dies somewhere in the default tower
  const Tower& d = deep();
  CHECK(membership(W("abAB"), 1, d));
  auto k = killing_level(W("abAB"), d.depth(), d);
  REQUIRE(k.has_value());
  CHECK(*k > 1);
  CHECK(membership(W("abAB"), *k - 1, d));
  CHECK_FALSE(membership(W("abAB"), *k, d));
}

TEST_CASE("level one is the a-exponent") {
  const Tower t = Tower::standard_base();
  enumerate_ball(5, [&](const Word& w) {
    REQUIRE(pairing(w, 0, t) == abelianize(w)[0]);
    return true;
  });
}

TEST_CASE("homomorphism and normality") {
  const Tower& t = deep();
  std::mt19937_64 rng(17);
  // elements of Γ_i by sampling products and stripping digits
  for (int k = 0; k < 300; ++k) {
    const int i = 1 + static_cast<int>(rng() % (t.depth() - 1));
    Word u = digits(oracle::random_word(rng, 8), i, t).residual;
    Word v = digits(oracle::random_word(rng, 8), i, t).residual;
    REQUIRE(membership(u, i, t));
    CHECK(pairing(mul(u, v), i, t) == pairing(u, i, t) + pairing(v, i, t));
    CHECK(pairing(inv(u), i, t) == -pairing(u, i, t));
    Word eta = digits(u, i + 1, t).residual;
    Word g = oracle::random_word(rng, 6);
    Word gi = digits(g, i, t).residual;
    CHECK(membership(mul({gi, eta, inv(gi)}), i + 1, t));
  }
}

TEST_CASE("digits") {
  const Tower t = Tower::standard_base();
  auto d = digits(W("aab"), 1, t);
  CHECK(d.d == std::vector<std::int64_t>{2});
  CHECK(d.residual == W("b"));
  auto z = digits(Word{}, deep().depth(), deep());
  CHECK(z.d == std::vector<std::int64_t>(static_cast<std::size_t>(deep().depth()), 0));
  CHECK(z.residual.empty());
}

TEST_CASE("digit reconstruction and right invariance") {
  const Tower& t = deep();
  const int N = t.depth();
  std::mt19937_64 rng(19);
  for (int k = 0; k < 200; ++k) {
    Word u = oracle::random_word(rng, 9);
    auto d = digits(u, N, t);
    REQUIRE(membership(d.residual, N, t));
    Word back;
    for (int j = 0; j < N; ++j) back = mul(back, power(t.shift(j), d.d[static_cast<std::size_t>(j)]));
    back = mul(back, d.residual);
    CHECK(equal_in_group(back, u));

    Word r = digits(oracle::random_word(rng, 6), N, t).residual;
    CHECK(digits(mul(u, r), N, t).d == d.d);
  }
}

TEST_CASE("text round trip") {
  const Tower& t = deep();
  const std::string text = t.to_text();
  const Tower back = Tower::from_text(text);
  CHECK(back == t);
  CHECK(back.to_text() == text);
  for (int i = 0; i < t.depth(); ++i) CHECK(back.shift(i) == t.shift(i));

  const Tower small = Tower::from_text("# base\nlevel 0\nshift a\na 1\n");
  CHECK(small == Tower::standard_base());
  CHECK_THROWS_AS(Tower::from_text("level 1\nshift b\nb 0 1\n"), TowerError);
  CHECK_THROWS_AS(Tower::from_text("level 0\nshift a\nx 1\n"), TowerError);
  CHECK_THROWS_AS(Tower::from_text("level 0\nshift a\na 1 2\n"), TowerError);
}

TEST_CASE("vertices and digit vectors") {
  const Tower& t = deep();
  const int m = t.depth();
  std::mt19937_64 rng(23);
  for (int k = 0; k < 150; ++k) {
    std::vector<BigInt> d(static_cast<std::size_t>(m));
    for (auto& x : d) x = static_cast<long>(rng() % 7) - 3;
    BigHeights v = vertex_of_digits(d, t);
    // naive: lift the word w_{m-1}^{-d_m} ... w_0^{-d_1}
    Word w;
    for (int j = m - 1; j >= 0; --j) w = mul(w, power(t.shift(j), -static_cast<long>(d[static_cast<std::size_t>(j)])));
    Heights naive = trace(w, t, m);
    for (int j = 0; j < m; ++j) REQUIRE(v[static_cast<std::size_t>(j)] == naive[static_cast<std::size_t>(j)]);
    CHECK(digits_of_vertex(v, t) == d);
  }
}

TEST_CASE("bulk shift powers") {
  const Tower& t = deep();
  const int m = t.depth();
  std::mt19937_64 rng(29);
  for (int k = 0; k < m; ++k) {
    for (long n : {1L, -1L, 37L, -250L, 613L}) {
      BigHeights h(static_cast<std::size_t>(m), BigInt(0));
      for (int j = k; j < m; ++j) h[static_cast<std::size_t>(j)] = static_cast<long>(rng() % 5) - 2;
      BigHeights fast = h;
      trace_shift_power(k, BigInt(n), fast, t);
      Heights slow(static_cast<std::size_t>(m));
      for (int j = 0; j < m; ++j) slow[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(h[static_cast<std::size_t>(j)]);
      const Word pass = n > 0 ? t.shift(k) : inv(t.shift(k));
      for (long r = 0; r < std::abs(n); ++r)
        for (Letter x : pass.letters()) step(t, x, slow);
      for (int j = 0; j < m; ++j) REQUIRE(fast[static_cast<std::size_t>(j)] == slow[static_cast<std::size_t>(j)]);
    }
  }
  // huge digits survive the round trip
  std::vector<BigInt> d(static_cast<std::size_t>(m), BigInt(0));
  d[0] = BigInt("123456789012345678901234567890");
  d[static_cast<std::size_t>(m - 1)] = -BigInt("98765432109876543210");
  if (m > 2) d[1] = 4;
  CHECK(digits_of_vertex(vertex_of_digits(d, t), t) == d);
}

TEST_CASE("cores") {
  const Tower t = Tower::standard_base();
  auto c0 = build_core(Tower{}, 0, 3);
  CHECK(c0.faces.size() == 1);
  CHECK(c0.edges.size() == 4);
  auto c1 = build_core(t, 1, 1);
  std::set<std::int64_t> bases;
  for (const auto& f : c1.faces) bases.insert(f[0]);
  CHECK(bases == std::set<std::int64_t>{-1, 0, 1});
  for (const auto& e : c1.edges) CHECK(std::abs(e.h[0]) <= 1);
  // grows with the radius
  auto c2 = build_core(t, 1, 2);
  for (const auto& f : c1.faces) CHECK(c2.face_index.count(f) == 1);
}

TEST_CASE("coboundaries compose to zero on complete faces") {
  const Tower& t = deep();
  for (int level : {1, 2, 3}) {
    auto core = build_core(t, level, 2);
    // vertex -> edge coboundary: (δv)(e) = v(end) - v(start)
    std::map<Heights, int> vid;
    auto id = [&](const Heights& h) { return vid.emplace(h, static_cast<int>(vid.size())).first->second; };
    std::vector<std::pair<int, int>> ends;
    for (const Edge& e : core.edges) {
      Heights end = e.h;
      step(t, Letter::make(e.gen, false), end);
      ends.emplace_back(id(e.h), id(end));
    }
    IntMatrix d1 = core.coboundary();
    for (std::size_t f = 0; f < core.faces.size(); ++f) {
      int incident = 0;
      for (const auto& v : d1[f]) incident += v != 0;
      std::vector<BigInt> row(vid.size(), BigInt(0));
      for (std::size_t e = 0; e < core.edges.size(); ++e) {
        if (d1[f][e] == 0) continue;
        row[static_cast<std::size_t>(ends[e].second)] += d1[f][e];
        row[static_cast<std::size_t>(ends[e].first)] -= d1[f][e];
      }
      // faces with all 8 sides interior
      std::int64_t total = 0;
      for (const auto& v : d1[f]) total += static_cast<std::int64_t>(abs(v));
      if (total < 8) continue;
      for (const auto& v : row) CHECK(v == 0);
    }
  }
}

TEST_CASE("cycle basis spans the integer kernel") {
  const Tower& t = deep();
  for (int level : {0, 1, 2}) {
    auto core = build_core(t, level, level == 2 ? 1 : 2);
    auto basis = dual_cycle_basis(core);
    IntMatrix M = core.coboundary();
    auto kernel = integer_kernel(M);
    CHECK(kernel.size() == basis.cycles.size());
    for (const auto& cyc : basis.cycles) {
      std::vector<BigInt> x(core.edges.size(), BigInt(0));
      for (const auto& [e, v] : cyc) x[static_cast<std::size_t>(e)] = v;
      for (const auto& row : M) {
        BigInt s = 0;
        for (std::size_t e = 0; e < x.size(); ++e) s += row[e] * x[e];
        REQUIRE(s == 0);
      }
      CHECK(verify_cocycle(to_cocycle(core, cyc), t));
    }
    // SNF identity
    auto s = smith_normal_form(M);
    CHECK(matmul(matmul(s.U, M), s.V) == s.D);
    for (const auto& v : s.invariants) CHECK(v == 1);
  }
}

TEST_CASE("pairing by potentials matches the direct sum") {
  const Tower& t = deep();
  auto core = build_core(t, 2, 2);
  auto basis = dual_cycle_basis(core);
  std::mt19937_64 rng(31);
  for (int k = 0; k < 50; ++k) {
    std::vector<std::pair<int, std::int64_t>> x;
    for (int j = 0; j < 6; ++j)
      x.emplace_back(static_cast<int>(rng() % core.edges.size()), static_cast<std::int64_t>(rng() % 5) - 2);
    std::sort(x.begin(), x.end());
    auto fast = pair_with_cycles(core, basis, x);
    for (std::size_t c = 0; c < basis.cycles.size(); c += 7) {
      std::int64_t direct = 0;
      for (const auto& [e, v] : basis.cycles[c])
        for (const auto& [f, w] : x)
          if (e == f) direct += v * w;
      REQUIRE(fast[c] == direct);
    }
  }
}

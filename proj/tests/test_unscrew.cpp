#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "json.hpp"
#include "surfdiff/unscrew.hpp"

using namespace surfdiff;

namespace {

Word W(const char* s) { return Word::parse(s); }

const std::pair<Tower, ScheduleReport>& run(int L) {
  static std::map<int, std::pair<Tower, ScheduleReport>> cache;
  auto it = cache.find(L);
  if (it == cache.end()) it = cache.emplace(L, extend_schedule(Tower{}, L)).first;
  return it->second;
}

}  // namespace

TEST_CASE("shortest survivor") {
  CHECK(shortest_nontrivial(0, Tower{}, 3) == W("a"));
  CHECK(shortest_nontrivial(1, Tower::standard_base(), 3) == W("b"));
  const Tower& t = run(2).first;
  try {
    shortest_nontrivial(t.depth(), t, 2);
    FAIL("expected exhaustion");
  } catch (const UnscrewError& e) {
    CHECK(e.kind() == UnscrewError::Kind::BallExhausted);
  }
}

TEST_CASE("killing cocycles at level zero") {
  auto a = find_killing_cocycle(W("a"), 0, Tower{}, 1);
  REQUIRE(a.has_value());
  CHECK(a->eta_pairing == 1);
  CHECK(verify_cocycle(a->cocycle, Tower{}));
  Tower t;
  t.push(a->cocycle);
  CHECK(pairing(W("a"), 0, t) == 1);
  // a commutator is invisible to every level-0 cochain
  for (int r = 1; r <= 4; ++r) CHECK_FALSE(find_killing_cocycle(W("abAB"), 0, Tower{}, r).has_value());
  CHECK_THROWS_AS(find_killing_cocycle(W("a"), 1, Tower::standard_base(), 2), NotInSubgroup);
}

TEST_CASE("b separates the first cover") {
  const Tower t = Tower::standard_base();
  for (int r = 1; r <= 4; ++r) CHECK_FALSE(find_killing_cocycle(W("b"), 1, t, r).has_value());
  // but p does not
  auto p = find_killing_cocycle(W("p"), 1, t, 2);
  REQUIRE(p.has_value());
  CHECK(verify_cocycle(p->cocycle, t));
  Tower tp = t;
  tp.push(p->cocycle);
  CHECK(pairing(W("p"), 1, tp) == p->eta_pairing);
  CHECK(p->eta_pairing == 1);
}

TEST_CASE("two-level kill") {
  const Tower t = Tower::standard_base();
  UnscrewConfig cfg;
  auto [psi, phi] = separating_fallback(W("b"), 1, t, cfg.budget, cfg);
  CHECK(verify_cocycle(psi, t));
  Tower t2 = t;
  t2.push(psi);
  CHECK(verify_cocycle(phi, t2));
  CHECK(pairing(W("b"), 1, t2) == 0);
  t2.push(phi);
  CHECK(pairing(W("b"), 2, t2) != 0);

  try {
    separating_fallback(W("b"), 1, t, 0, cfg);
    FAIL("expected stuck");
  } catch (const UnscrewError& e) {
    CHECK(e.kind() == UnscrewError::Kind::Stuck);
  }
}

TEST_CASE("shift words") {
  Tower t;
  t.push(Cocycle::base({1, 0, 0, 0}));
  CHECK(choose_shift_word(0, t, 3) == W("a"));
  CHECK(t.shift(0) == W("a"));

  auto p = find_killing_cocycle(W("p"), 1, t, 2);
  REQUIRE(p.has_value());
  t.push(p->cocycle);
  std::int64_t factor = 0;
  Word w = choose_shift_word(1, t, 6, &factor);
  CHECK(factor == 1);
  CHECK(membership(w, 1, t));
  CHECK(pairing(w, 1, t) == 1);
  // nothing shortlex-earlier works
  enumerate_ball(static_cast<int>(w.size()), [&](const Word& u) {
    if (!(u < w)) return false;
    if (membership(u, 1, t)) CHECK(pairing(u, 1, t) != 1);
    return true;
  });

  // a doubled cocycle is renormalized first
  Tower t2 = t.truncated(1);
  t2.push(p->cocycle.scaled(2));
  Word w2 = choose_shift_word(1, t2, 6, &factor);
  CHECK(factor == 2);
  CHECK(t2.cocycle(1) == p->cocycle);
  CHECK(pairing(w2, 1, t2) == 1);
}

TEST_CASE("loop search finds the shortlex-least loop") {
  Tower t = Tower::standard_base();
  auto p = find_killing_cocycle(W("p"), 1, t, 2);
  REQUIRE(p.has_value());
  t.push(p->cocycle);
  std::int64_t g = 0;
  auto w = loop_search(t, 1, 6, &g);
  REQUIRE(w.has_value());
  CHECK(g == 1);
  std::optional<Word> brute;
  enumerate_ball(6, [&](const Word& u) {
    if (membership(u, 1, t) && pairing(u, 1, t) == 1) {
      brute = u;
      return false;
    }
    return true;
  });
  REQUIRE(brute.has_value());
  CHECK(*w == *brute);
}

TEST_CASE("schedule edge cases") {
  auto [t0, r0] = extend_schedule(Tower{}, 0);
  CHECK(t0.depth() == 0);
  CHECK(r0.levels.empty());

  UnscrewConfig tight;
  tight.depth_cap = 2;
  try {
    extend_schedule(Tower{}, 3, tight);
    FAIL("expected depth cap");
  } catch (const UnscrewError& e) {
    CHECK(e.kind() == UnscrewError::Kind::DepthCap);
  }

  Tower partial = Tower::standard_base();
  partial.push(Cocycle(1));
  CHECK_THROWS_AS(extend_schedule(partial, 2), TowerError);
}

TEST_CASE("schedule kills every letter at L=1") {
  const auto& [t, report] = run(1);
  for (int c = 0; c < kLetters; ++c) {
    Word x = Word::unchecked({Letter{static_cast<std::uint8_t>(c)}});
    CHECK_FALSE(membership(x, t.depth(), t));
  }
  CHECK(report.ball_size == 8);
}

TEST_CASE("schedule soundness and kill guarantee") {
  for (int L : {2, 3, 4}) {
    CAPTURE(L);
    const auto& [t, report] = run(L);
    REQUIRE(t.complete());
    CHECK(static_cast<int>(report.levels.size()) == t.depth());
    for (int i = 0; i < t.depth(); ++i) {
      CHECK(verify_cocycle(t.cocycle(i), t));
      CHECK(membership(t.shift(i), i, t));
      CHECK(pairing(t.shift(i), i, t) == 1);
    }
    std::size_t last = 0;
    for (const auto& lr : report.levels) {
      CHECK(membership(lr.eta, lr.eta_level, t));
      CHECK(lr.eta.size() >= last);
      last = lr.eta.size();
      CHECK(lr.level - lr.eta_level + 1 <= 2);
      if (lr.level == lr.eta_level + lr.kill_levels - 1) CHECK(pairing(lr.eta, lr.level, t) != 0);
    }
    CHECK_FALSE(report.two_step_warning);
    std::size_t seen = 0;
    enumerate_ball(L, [&](const Word& w) {
      if (!w.empty()) {
        ++seen;
        REQUIRE_FALSE(membership(w, t.depth(), t));
      }
      return true;
    });
    CHECK(seen == report.ball_size);
  }
}

TEST_CASE("schedules extend and repeat") {
  const Tower& t3 = run(3).first;
  auto [t4, rep] = extend_schedule(t3, 4);
  for (int i = 0; i < t3.depth(); ++i) {
    CHECK(t4.cocycle(i) == t3.cocycle(i));
    CHECK(t4.shift(i) == t3.shift(i));
  }
  enumerate_ball(4, [&](const Word& w) {
    if (!w.empty()) REQUIRE_FALSE(membership(w, t4.depth(), t4));
    return true;
  });
  // deterministic
  CHECK(extend_schedule(Tower{}, 3).first.to_text() == t3.to_text());
  CHECK(extend_schedule(Tower{}, 3).second.to_json() == run(3).second.to_json());
}

TEST_CASE("report json") {
  const auto& [t, report] = run(3);
  auto j = nlohmann::json::parse(report.to_json());
  CHECK(j["ball"] == 3);
  CHECK(j["depth"] == t.depth());
  REQUIRE(j["levels"].size() == static_cast<std::size_t>(t.depth()));
  CHECK(j["levels"][0]["eta"] == "a");
  CHECK(j["levels"][0]["shift"] == "a");
  for (const auto& lv : j["levels"]) {
    CHECK(lv.contains("radius"));
    CHECK(lv.contains("kill_levels"));
  }
}

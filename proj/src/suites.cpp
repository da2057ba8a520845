#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <random>
#include <set>
#include <thread>

#include "surfdiff/harness.hpp"

namespace surfdiff {

namespace {

std::string fmt(const Real& x) { return to_string(x, 12); }

std::string letters_str(const std::vector<Letter>& v) {
  if (v.empty()) return "1";
  std::string s;
  for (Letter x : v) s += x.to_char();
  return s;
}

json digits_json(const std::vector<BigInt>& d) {
  json out = json::array();
  for (const BigInt& k : d) out.push_back(k.str());
  return out;
}

// freely reduced, not group-reduced
std::vector<Letter> random_letters(std::mt19937_64& rng, int len) {
  std::uniform_int_distribution<int> pick(0, kLetters - 1);
  std::vector<Letter> v;
  while (static_cast<int>(v.size()) < len) {
    const Letter x{static_cast<std::uint8_t>(pick(rng))};
    if (!v.empty() && v.back().inv() == x) continue;
    v.push_back(x);
  }
  return v;
}

Word random_word(std::mt19937_64& rng, int max_len) {
  std::uniform_int_distribution<int> len(1, max_len);
  return Word::from_letters(random_letters(rng, len(rng)));
}

Word coset_word(const Tower& t, const std::vector<BigInt>& d) {
  Word u;
  for (std::size_t i = 0; i < d.size(); ++i)
    u = mul(u, power(t.shift(static_cast<int>(i)), static_cast<std::int64_t>(d[i])));
  return u;
}

std::vector<BigInt> random_digits(std::mt19937_64& rng, int m, std::int64_t first, std::int64_t deeper) {
  std::uniform_int_distribution<std::int64_t> d1(-first, first), dk(-deeper, deeper);
  std::vector<BigInt> d{BigInt(d1(rng))};
  for (int j = 1; j < m; ++j) d.emplace_back(dk(rng));
  return d;
}

// an exception inside a suite is a failure like any other
SuiteResult guarded(const std::string& name, const std::function<SuiteResult()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    SuiteResult r{name};
    r.pass = false;
    r.witness = {{"exception", e.what()}};
    return r;
  }
}

SuiteResult fail(SuiteResult r, json witness) {
  r.pass = false;
  if (r.witness.is_null()) r.witness = std::move(witness);
  return r;
}

}  // namespace

SuiteResult suite_cocycles(const Tower& t) {
  SuiteResult r{"cocycles"};
  json levels = json::array();
  for (int i = 0; i < t.depth(); ++i) {
    const Cocycle& c = t.cocycle(i);
    levels.push_back({{"level", i}, {"support", c.support_size()}, {"shift", t.level(i).shift ? t.shift(i).str() : ""}});
    if (auto h = closedness_witness(c, t)) {
      r = fail(std::move(r), {{"level", i}, {"face", *h}, {"problem", "not closed"}});
      continue;
    }
    if (!t.level(i).shift) continue;
    const Word& w = t.shift(i);
    if (!membership(w, i, t) || pairing(w, i, t) != 1)
      r = fail(std::move(r), {{"level", i}, {"word", w.str()}, {"problem", "shift word does not pair to 1"}});
  }
  r.details["levels"] = std::move(levels);
  return r;
}

SuiteResult suite_faithfulness(const Tower& t, int L, std::vector<std::pair<Word, int>>* table) {
  SuiteResult r{"faithfulness"};
  std::map<int, std::size_t> hist;
  std::size_t words = 0;
  enumerate_ball(L, [&](const Word& w) {
    if (w.size() == 0) return true;
    ++words;
    const std::optional<int> k = killing_level(w, t.depth(), t);
    if (table) table->emplace_back(w, k.value_or(0));
    if (!k) {
      r = fail(std::move(r), {{"word", w.str()}, {"level", t.depth()}, {"problem", "survives every level"}});
      return true;
    }
    ++hist[*k];
    return true;
  });
  r.details["ball"] = L;
  r.details["words"] = words;
  r.details["depth"] = t.depth();
  json h = json::object();
  for (const auto& [k, n] : hist) h[std::to_string(k)] = n;
  r.details["first_killing_level"] = std::move(h);
  return r;
}

SuiteResult suite_level_one(const Tower& t, int L) {
  SuiteResult r{"level_one_oracle"};
  std::size_t words = 0;
  enumerate_ball(L, [&](const Word& w) {
    ++words;
    const std::int64_t phi = pairing(w, 0, t), a = abelianize(w)[0];
    if (phi != a) r = fail(std::move(r), {{"word", w.str()}, {"pairing", phi}, {"a_exponent", a}});
    return r.pass;
  });
  r.details["words"] = words;
  return r;
}

SuiteResult suite_representatives(const Tower& t, int count, std::uint64_t seed) {
  SuiteResult r{"representative_independence"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> len(0, 12), conj(0, 3), coin(0, 1), rot(0, 7), gen(0, kLetters - 1);
  const auto end_state = [&](const std::vector<Letter>& v) {
    Heights h(static_cast<std::size_t>(t.depth()), 0);
    for (Letter x : v) step(t, x, h);
    return h;
  };
  std::size_t relators = 0;
  for (int i = 0; i < count; ++i) {
    const std::vector<Letter> w = random_letters(rng, len(rng));
    std::uniform_int_distribution<std::size_t> where(0, w.size());
    const std::size_t pos = where(rng);
    std::vector<Letter> ins;
    if (coin(rng)) {
      const Letter x{static_cast<std::uint8_t>(gen(rng))};
      ins = {x, x.inv()};
    } else {
      ++relators;
      const std::vector<Letter> u = random_letters(rng, conj(rng));
      std::vector<Letter> rel(relator().begin(), relator().end());
      std::rotate(rel.begin(), rel.begin() + rot(rng), rel.end());
      if (coin(rng)) {
        std::reverse(rel.begin(), rel.end());
        for (Letter& x : rel) x = x.inv();
      }
      ins = u;
      ins.insert(ins.end(), rel.begin(), rel.end());
      for (auto it = u.rbegin(); it != u.rend(); ++it) ins.push_back(it->inv());
    }
    std::vector<Letter> v = w;
    v.insert(v.begin() + static_cast<std::ptrdiff_t>(pos), ins.begin(), ins.end());
    const Heights before = end_state(w), after = end_state(v);
    if (before != after)
      r = fail(std::move(r), {{"word", letters_str(w)}, {"inserted", letters_str(ins)}, {"position", pos},
                              {"level", std::mismatch(before.begin(), before.end(), after.begin()).first - before.begin() + 1},
                              {"before", before}, {"after", after}});
  }
  r.details["insertions"] = count;
  r.details["relator_insertions"] = relators;
  r.details["depth"] = t.depth();
  return r;
}

SuiteResult suite_group_law(const TowerAction& act, int N, int count, std::uint64_t seed) {
  SuiteResult r{"group_law"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> depth(1, std::max(1, N));
  for (int i = 0; i < count && r.pass; ++i) {
    const Word g1 = random_word(rng, 8), g2 = random_word(rng, 8);
    const std::vector<BigInt> d = random_digits(rng, depth(rng), 1000000000, 20);
    if (act.act_digits(mul(g1, g2), d) != act.act_digits(g1, act.act_digits(g2, d)))
      r = fail(std::move(r), {{"g1", g1.str()}, {"g2", g2.str()}, {"digits", digits_json(d)}, {"stage", N}});
  }
  r.details["triples"] = count;
  r.details["stage"] = N;
  return r;
}

SuiteResult suite_nesting(const TowerAction& act, int N) {
  SuiteResult r{"nesting"};
  const NestingCheck c = check_nesting(act, N);
  json iv = json::array();
  for (int n = 0; n <= N; ++n) {
    const auto [lo, hi] = act.interval(n);
    iv.push_back({{"level", n}, {"lo", fmt(lo)}, {"hi", fmt(hi)}, {"width", fmt(hi - lo)}});
  }
  r.details["intervals"] = std::move(iv);
  if (!c.pass) r = fail(std::move(r), {{"level", c.failed_level}});
  return r;
}

SuiteResult suite_stage_distance(const TowerAction& act, int N, double eps, int grid) {
  SuiteResult r{"stage_distance"};
  json rows = json::array();
  for (int n = 1; n <= N; ++n) {
    const Real bound = Real(eps) * pow(Real(10), -n);
    for (const Word& g : generators()) {
      const StageDistance d = stage_distance(act, g, n, grid);
      rows.push_back({{"level", n}, {"generator", g.str()}, {"distance", fmt(d.value)}, {"bound", fmt(bound)},
                      {"order", d.order}, {"tiles", d.tiles}, {"points", d.points}});
      if (d.value > bound)
        r = fail(std::move(r), {{"word", g.str()}, {"point", fmt(d.where)}, {"stage", n}, {"order", d.order},
                                {"distance", fmt(d.value)}});
    }
  }
  r.details["grid"] = grid;
  r.details["table"] = std::move(rows);
  return r;
}

SuiteResult suite_disjointness(const TowerAction& act, int N, int L) {
  SuiteResult r{"disjointness"};
  json rows = json::array();
  for (int n = 1; n <= N; ++n) {
    const DisjointnessCheck c = check_disjointness(act, n, L);
    rows.push_back({{"level", n}, {"cosets", c.cosets}});
    if (!c.pass) r = fail(std::move(r), {{"level", n}, {"digits", digits_json(c.witness)}});
  }
  r.details["radius"] = L;
  r.details["levels"] = std::move(rows);
  return r;
}

SuiteResult suite_agreement(const TowerAction& act, int N, std::uint64_t seed) {
  SuiteResult r{"stage_agreement"};
  std::mt19937_64 rng(seed);
  const Real tol = ldexp(Real(1), -60);
  json rows = json::array();
  for (int n = 2; n <= N; ++n) {
    const AgreementCheck c = check_stage_agreement(act, n, Real("0.2"), Real("0.8"), 2, 40, tol, rng);
    rows.push_back({{"stage", n}, {"points", c.points}, {"words", c.words}, {"worst", fmt(c.worst)}});
    if (!c.pass)
      r = fail(std::move(r), {{"word", c.witness_word}, {"point", fmt(c.witness_point)}, {"stage", n},
                              {"difference", fmt(c.worst)}});
  }
  r.details["tolerance"] = "2^-60";
  r.details["stages"] = std::move(rows);
  return r;
}

SuiteResult suite_stabilizers(const TowerAction& act, int N, int points, int words, std::uint64_t seed,
                              std::vector<PointAddress>* sampled) {
  SuiteResult r{"stabilizers"};
  const Tower& t = act.tower();
  std::mt19937_64 rng(seed);
  std::size_t fixed = 0, moved = 0;
  for (int i = 0; i < points; ++i) {
    const int m = 1 + i % std::max(1, N);
    const PointAddress x{random_digits(rng, m, 20, 3), act.map(m).anchor(), true};
    if (sampled) sampled->push_back(x);
    const Word u = coset_word(t, x.digits);
    for (int j = 0; j < words; ++j) {
      const Word g = j % 2 ? random_word(rng, 8) : mul({u, digits(random_word(rng, 10), m, t).residual, inv(u)});
      const bool fixes = act.act(g, x).digits == x.digits;
      const bool member = membership(mul({inv(u), g, u}), m, t);
      (fixes ? fixed : moved) += 1;
      if (fixes != member)
        r = fail(std::move(r), {{"word", g.str()}, {"digits", digits_json(x.digits)}, {"level", m},
                                {"fixes", fixes}, {"member", member}});
    }
  }
  r.details["points"] = points;
  r.details["words_per_point"] = words;
  r.details["fixed"] = fixed;
  r.details["moved"] = moved;
  return r;
}

SuiteResult suite_free_points(const Tower& t, int N, int points, int L, std::uint64_t seed) {
  SuiteResult r{"free_points"};
  const int D = t.depth();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> tri(-1, 1);
  std::size_t walks = 0;
  for (int i = 0; i < points; ++i) {
    // inside I_N: far-out vertices never meet the cocycles' supports
    std::vector<BigInt> d(static_cast<std::size_t>(std::min(N, D)), BigInt(0));
    while (static_cast<int>(d.size()) < D) d.emplace_back(tri(rng));
    const BigHeights big = vertex_of_digits(d, t);
    Heights v;
    for (const BigInt& h : big) {
      if (abs(h) > (BigInt(1) << 40)) throw std::overflow_error("vertex too far out for a free-point walk");
      v.push_back(static_cast<std::int64_t>(h));
    }
    // a word fixes the point iff its lift from v closes up
    std::vector<Heights> stack{v};
    std::vector<Letter> path;
    std::function<void()> walk = [&] {
      for (std::uint8_t c = 0; c < kLetters; ++c) {
        const Letter x{c};
        if (!path.empty() && path.back().inv() == x) continue;
        Heights w = stack.back();
        step(t, x, w);
        ++walks;
        path.push_back(x);
        if (w == v)
          r = fail(std::move(r), {{"word", letters_str(path)}, {"digits", digits_json(d)}, {"stage", D}});
        if (static_cast<int>(path.size()) < L) {
          stack.push_back(std::move(w));
          walk();
          stack.pop_back();
        }
        path.pop_back();
      }
    };
    walk();
  }
  r.details["points"] = points;
  r.details["radius"] = L;
  r.details["stage"] = D;
  r.details["lifts"] = walks;
  return r;
}

SuiteResult suite_no_fixed_point(const TowerAction& act, int N, const std::vector<PointAddress>& extra, int points,
                                 std::uint64_t seed) {
  SuiteResult r{"no_global_fixed_point"};
  std::vector<PointAddress> xs = extra;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int i = 0; i < points; ++i) xs.push_back(act.address_of(Real(u(rng)), N));
  const Real floor = ldexp(Real(1), -static_cast<int>(working_bits()) + 32);
  Real weakest = -1;
  for (const PointAddress& x : xs) {
    const Real y = act.numeric_of(x);
    Real best = 0;
    for (const Word& g : generators()) best = max(best, Real(abs(act.numeric_of(act.act(g, x)) - y)));
    if (weakest < 0 || best < weakest) weakest = best;
    if (!(best > floor)) r = fail(std::move(r), {{"point", fmt(y)}, {"digits", digits_json(x.digits)}, {"stage", N}});
  }
  r.details["points"] = xs.size();
  r.details["floor"] = fmt(floor);
  r.details["smallest_displacement"] = fmt(weakest);
  return r;
}

SuiteResult suite_orbit(const TowerAction& act, const Real& t, int L, int N, int tiles) {
  SuiteResult r{"orbit_coverage"};
  const std::vector<OrbitPoint> orbit = orbit_sample(act, t, L, N);
  const BigInt k0 = act.address_of(t, N).digits.at(0);
  std::set<BigInt> seen;
  for (const OrbitPoint& o : orbit) seen.insert(o.address.digits.at(0));
  std::vector<std::string> missing;
  for (int j = -tiles; j <= tiles; ++j)
    if (const BigInt k = k0 + j; !seen.count(k)) missing.push_back(k.str());
  r.details["points"] = orbit.size();
  r.details["tile_of_t"] = k0.str();
  r.details["tiles_seen"] = seen.size();
  if (!missing.empty()) r = fail(std::move(r), {{"point", fmt(t)}, {"stage", N}, {"missing_tiles", missing}});
  return r;
}

SuiteResult suite_diameters(const TowerAction& act, int N, const Real& lo, const Real& hi) {
  SuiteResult r{"tile_diameters"};
  json rows = json::array();
  Real last = -1;
  for (int n = 1; n <= N; ++n) {
    const TileDiameter d = max_tile_diameter(act, n, lo, hi, 64);
    rows.push_back({{"level", n}, {"diameter", fmt(d.value)}, {"digits", digits_json(d.digits)}});
    if (last >= 0 && !(d.value < last)) r = fail(std::move(r), {{"level", n}, {"digits", digits_json(d.digits)}});
    last = d.value;
  }
  r.details["window"] = {fmt(lo), fmt(hi)};
  r.details["levels"] = std::move(rows);
  return r;
}

SuiteResult suite_gluing(const TowerAction& act, int points, unsigned bits) {
  PrecisionScope p(bits);
  SuiteResult r{"one_sided_derivatives"};
  const Real tol("1e-20");
  Real worst = 0;
  for (int i = 0; i < points; ++i) {
    const PointAddress x{{BigInt(i - points / 2)}, act.map(1).anchor(), true};
    for (const Word& g : generators()) {
      const Series right = act.act_series(g, x, 3, Side::Right), left = act.act_series(g, x, 3, Side::Left);
      for (int m = 0; m <= 3; ++m) {
        const Real diff = abs(right.derivative(m) - left.derivative(m));
        worst = max(worst, diff);
        if (diff > tol)
          r = fail(std::move(r), {{"word", g.str()}, {"point", fmt(act.numeric_of(x))}, {"order", m}, {"stage", 1},
                                  {"difference", fmt(diff)}});
      }
    }
  }
  r.details["points"] = points;
  r.details["bits"] = bits;
  r.details["worst"] = fmt(worst);
  return r;
}

SuiteResult suite_flatness(double eps, unsigned bits) {
  PrecisionScope p(bits);
  SuiteResult r{"flatness"};
  const StepMap f(Real(0), Real(1), eps);
  const Real tol("1e-20"), edge("0.02");
  Real worst = 0;
  const auto probe = [&](const Real& y) {
    const Real d = abs(f.eval(y) - y);
    worst = max(worst, d);
    if (d > tol) r = fail(std::move(r), {{"point", fmt(y)}, {"displacement", fmt(d)}});
  };
  for (int i = 1; i <= 64; ++i) {
    probe(edge * i / 64);
    probe(1 - edge * i / 64);
  }
  for (int j = 1; j <= 40; ++j) {
    probe(ldexp(edge, -j));
    probe(1 - ldexp(edge, -j));
  }
  r.details["epsilon"] = eps;
  r.details["bits"] = bits;
  r.details["worst"] = fmt(worst);
  return r;
}

VerificationReport verify(const RunConfig& cfg, const BuildResult& b) {
  using clock = std::chrono::steady_clock;
  PrecisionScope p(cfg.bits);
  VerificationReport rep;
  const Tower& t = b.tower;
  const int N = b.stages();
  const TowerAction act = b.action();

  // integer-only suites on the pool; mpfr's default precision is process-wide,
  // so everything touching Real stays on this thread
  const std::vector<std::pair<std::string, std::function<SuiteResult()>>> jobs = {
      {"faithfulness", [&] { return suite_faithfulness(t, cfg.ball); }},
      {"level_one_oracle", [&] { return suite_level_one(t, cfg.ball); }},
      {"representative_independence", [&] { return suite_representatives(t, cfg.fuzz, cfg.seed + 1); }},
      {"group_law", [&] { return suite_group_law(act, N, cfg.fuzz, cfg.seed + 2); }},
      {"free_points",
       [&] { return suite_free_points(t, N, cfg.stabilizer_points, std::min(cfg.fixed_ball, cfg.ball), cfg.seed + 3); }},
  };
  std::vector<SuiteResult> pooled(jobs.size());
  std::vector<double> pooled_secs(jobs.size());
  std::atomic<std::size_t> next{0};
  const unsigned workers =
      std::max(1u, std::min<unsigned>(cfg.threads > 0 ? cfg.threads : std::thread::hardware_concurrency(),
                                      static_cast<unsigned>(jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < jobs.size();) {
        const auto t0 = clock::now();
        pooled[i] = guarded(jobs[i].first, jobs[i].second);
        pooled_secs[i] = std::chrono::duration<double>(clock::now() - t0).count();
      }
    });

  std::vector<SuiteResult> local;
  const auto timed = [&](const std::string& name, const std::function<SuiteResult()>& f) {
    const auto t0 = clock::now();
    local.push_back(guarded(name, f));
    rep.seconds[local.back().name] = std::chrono::duration<double>(clock::now() - t0).count();
  };
  std::vector<PointAddress> kpoints;
  timed("cocycles", [&] { return suite_cocycles(t); });
  if (N > 0) {
    timed("nesting", [&] { return suite_nesting(act, N); });
    timed("stage_distance", [&] { return suite_stage_distance(act, N, cfg.eps, cfg.grid); });
    timed("disjointness", [&] { return suite_disjointness(act, N, cfg.disjoint_radius); });
    timed("stage_agreement", [&] { return suite_agreement(act, N, cfg.seed + 4); });
    timed("stabilizers", [&] { return suite_stabilizers(act, N, cfg.stabilizer_points, cfg.stabilizer_words, cfg.seed + 5, &kpoints); });
    timed("no_global_fixed_point", [&] { return suite_no_fixed_point(act, N, kpoints, cfg.stabilizer_points, cfg.seed + 6); });
    timed("orbit_coverage", [&] { return suite_orbit(act, Real(cfg.orbit_t), cfg.orbit_radius, N, cfg.orbit_tiles); });
    timed("tile_diameters", [&] { return suite_diameters(act, N, Real("0.2"), Real("0.8")); });
    timed("one_sided_derivatives", [&] { return suite_gluing(act, cfg.gluing_points, cfg.gluing_bits); });
  }
  timed("flatness", [&] { return suite_flatness(cfg.eps, cfg.gluing_bits); });
  for (std::thread& th : pool) th.join();

  for (std::size_t i = 0; i < pooled.size(); ++i) {
    rep.seconds[pooled[i].name] = pooled_secs[i];
    rep.suites.push_back(std::move(pooled[i]));
  }
  for (SuiteResult& s : local) rep.suites.push_back(std::move(s));
  std::sort(rep.suites.begin(), rep.suites.end(),
            [](const SuiteResult& x, const SuiteResult& y) { return x.name < y.name; });
  return rep;
}

}  // namespace surfdiff

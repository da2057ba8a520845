#include "surfdiff/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>

namespace surfdiff {

const std::vector<Word>& generators() {
  static const std::vector<Word> g = {Word::parse("a"), Word::parse("b"), Word::parse("p"), Word::parse("q")};
  return g;
}

NestingCheck check_nesting(const TowerAction& act, int N) {
  NestingCheck out;
  for (int n = 1; n <= N; ++n) {
    const auto [lo0, hi0] = act.interval(n - 1);
    const auto [lo1, hi1] = act.interval(n);
    if (!(lo0 < lo1 && lo1 < hi1 && hi1 < hi0)) {
      out.pass = false;
      out.failed_level = n;
      return out;
    }
  }
  return out;
}

std::vector<ActivePrefix> active_prefixes(const TowerAction& act, const Word& g, int n, std::int64_t bound,
                                          std::int64_t max_bound) {
  if (n < 1) throw std::invalid_argument("stage must be positive");
  while (true) {
    std::vector<ActivePrefix> out;
    bool touches = false;
    std::vector<BigInt> d(static_cast<std::size_t>(n), BigInt(0));
    std::function<void(int)> walk = [&](int j) {
      if (j == n - 1) {
        std::vector<BigInt> image = act.act_digits(g, d);
        BigInt delta = image.back();
        if (delta == 0) return;
        image.pop_back();
        for (int i = 0; i < n - 1; ++i)
          if (abs(d[static_cast<std::size_t>(i)]) == bound) touches = true;
        out.push_back(ActivePrefix{std::vector<BigInt>(d.begin(), d.end() - 1), std::move(image), std::move(delta)});
        return;
      }
      for (std::int64_t k = -bound; k <= bound; ++k) {
        d[static_cast<std::size_t>(j)] = k;
        walk(j + 1);
      }
      d[static_cast<std::size_t>(j)] = 0;
    };
    walk(0);
    if (!touches) return out;
    if (2 * bound > max_bound) throw std::runtime_error("active prefixes reach the search bound");
    bound *= 2;
  }
}

StageDistance stage_distance(const TowerAction& act, const Word& g, int n, int grid) {
  StageDistance out;
  const std::vector<ActivePrefix> active = active_prefixes(act, g, n);
  out.tiles = active.size();
  if (active.empty()) return out;
  const int per_tile = std::max(8, grid / static_cast<int>(active.size()));
  const auto [lo, hi] = act.interval(n - 1);
  const StepMap& fn = act.map(n);
  for (const ActivePrefix& a : active) {
    for (int j = 1; j <= per_tile; ++j) {
      const Real tail = lo + (hi - lo) * j / (per_tile + 1);
      const Real x = act.push(a.prefix, Series::constant(tail, 0))[0];
      const Series back = act.pull(a.prefix, Series::variable(x, n));
      const Series before = act.push(a.image, back);
      const Series after = act.push(a.image, fn.apply_pow(a.delta, back));
      ++out.points;
      for (int k = 0; k <= n; ++k) {
        const Real diff = abs(k == 0 ? Real(after[0] - before[0]) : Real(after.derivative(k) - before.derivative(k)));
        if (diff > out.value) {
          out.value = diff;
          out.where = x;
          out.order = k;
        }
      }
    }
  }
  return out;
}

std::pair<TowerAction, std::vector<TuneStep>> tune_epsilons(const Tower& tower, int N, double eps, int grid,
                                                           double safety) {
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  std::vector<double> steps;
  std::vector<TuneStep> report;
  for (int n = 1; n <= N; ++n) {
    TuneStep st;
    st.level = n;
    st.eps = eps * std::pow(10.0, -n);
    st.target = Real(eps) * pow(Real(10), -n) / Real(safety);
    for (int round = 0; round < 64; ++round) {
      std::vector<double> trial = steps;
      trial.push_back(st.eps);
      TowerAction act(tower, trial);
      Real worst = 0;
      std::size_t tiles = 0;
      for (const Word& g : generators()) {
        const StageDistance d = stage_distance(act, g, n, grid);
        worst = max(worst, d.value);
        tiles += d.tiles;
      }
      st.distance = worst;
      st.tiles = tiles;
      if (worst <= st.target) break;
      const double ratio = static_cast<double>(worst / st.target);
      const int h = std::max(1, static_cast<int>(std::ceil(std::log2(ratio))));
      st.halvings += h;
      st.eps = std::ldexp(st.eps, -h);
    }
    if (!(st.distance <= st.target)) throw std::runtime_error("step tuning did not converge at level " + std::to_string(n));
    steps.push_back(st.eps);
    report.push_back(st);
  }
  return {TowerAction(tower, steps), report};
}

DisjointnessCheck check_disjointness(const TowerAction& act, int n, int L) {
  DisjointnessCheck out;
  const Tower& t = act.tower();
  const auto [s, fs] = act.interval(n);
  const Real slack = ldexp(Real(1), -static_cast<int>(working_bits()) + 16);
  std::map<BigHeights, int> seen;
  std::deque<BigHeights> queue;
  seen.emplace(BigHeights(static_cast<std::size_t>(n), BigInt(0)), 0);
  queue.push_back(BigHeights(static_cast<std::size_t>(n), BigInt(0)));
  while (!queue.empty()) {
    BigHeights v = std::move(queue.front());
    queue.pop_front();
    const int dist = seen.at(v);
    if (dist == L) continue;
    for (std::uint8_t c = 0; c < kLetters; ++c) {
      BigHeights w = v;
      step(t, Letter{c}, w);
      if (seen.emplace(w, dist + 1).second) queue.push_back(std::move(w));
    }
  }
  for (const auto& [v, dist] : seen) {
    if (std::all_of(v.begin(), v.end(), [](const BigInt& h) { return h == 0; })) continue;
    ++out.cosets;
    const std::vector<BigInt> d = digits_of_vertex(v, t);
    const Real lo = act.numeric_of(PointAddress{d, s, true});
    const Real hi = act.numeric_of(PointAddress{d, fs, false});
    // open intervals; neighbours share an endpoint, up to rounding
    const bool apart = hi <= s + slack || lo >= fs - slack;
    const bool zero = std::all_of(d.begin(), d.end(), [](const BigInt& k) { return k == 0; });
    if (!apart || zero) {
      out.pass = false;
      if (out.witness.empty()) out.witness = d;
    }
  }
  return out;
}

std::vector<PointAddress> sample_k_points(const TowerAction& act, int n, const Real& lo, const Real& hi,
                                          std::int64_t deep_bound, std::size_t count, std::mt19937_64& rng) {
  std::vector<PointAddress> out;
  if (n < 1 || !(lo < hi)) return out;
  if (lo <= 0 || hi >= 1) throw std::domain_error("K-point window must be compact in (0, 1)");
  const StepMap& f1 = act.map(1);
  const BigInt k_lo = f1.tile_index(lo).k, k_hi = f1.tile_index(hi).k;
  const BigInt span = k_hi - k_lo + 1;
  std::uniform_int_distribution<int> depth(1, n);
  std::uniform_int_distribution<std::int64_t> deep(-deep_bound, deep_bound);
  std::uniform_int_distribution<std::uint64_t> any;
  for (std::size_t tries = 0; out.size() < count && tries < 100 * count; ++tries) {
    const int m = depth(rng);
    PointAddress x;
    x.digits.push_back(k_lo + BigInt(any(rng)) % span);
    for (int j = 2; j <= m; ++j) x.digits.emplace_back(deep(rng));
    x.tail = act.map(m).anchor();
    x.terminal = true;
    const Real y = act.numeric_of(x);
    if (y >= lo && y <= hi) out.push_back(std::move(x));
  }
  return out;
}

AgreementCheck check_stage_agreement(const TowerAction& act, int n, const Real& lo, const Real& hi, int L,
                                     std::size_t count, const Real& tol, std::mt19937_64& rng) {
  AgreementCheck out;
  if (n < 2) return out;  // K_0 ∩ (0, 1) is empty
  const std::vector<Word> words = enumerate_ball(L);
  out.words = words.size();
  for (const PointAddress& k : sample_k_points(act, n - 1, lo, hi, 3, count, rng)) {
    const Real x = act.numeric_of(k);
    ++out.points;
    for (const Word& g : words) {
      const Real diff = abs(act.act_numeric(g, x, n) - act.act_numeric(g, x, n - 1));
      if (diff > out.worst) {
        out.worst = diff;
        out.witness_word = g.str();
        out.witness_point = x;
      }
    }
  }
  out.pass = out.worst <= tol;
  return out;
}

TileDiameter max_tile_diameter(const TowerAction& act, int n, const Real& lo, const Real& hi, std::int64_t d1_bound) {
  TileDiameter out;
  const auto [s, fs] = act.interval(n);
  std::vector<BigInt> d(static_cast<std::size_t>(n), BigInt(0));
  std::function<void(int)> walk = [&](int j) {
    if (j == n) {
      const Real a = act.numeric_of(PointAddress{d, s, true});
      const Real b = act.numeric_of(PointAddress{d, fs, false});
      if (b < lo || a > hi) return;
      if (b - a > out.value) {
        out.value = b - a;
        out.digits = d;
      }
      return;
    }
    const std::int64_t from = j == 0 ? -d1_bound : -2, to = j == 0 ? d1_bound : 1;
    for (std::int64_t k = from; k <= to; ++k) {
      d[static_cast<std::size_t>(j)] = k;
      walk(j + 1);
    }
  };
  walk(0);
  return out;
}

}  // namespace surfdiff

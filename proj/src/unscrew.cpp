#include "surfdiff/unscrew.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "json.hpp"

namespace surfdiff {

namespace {

using Sparse = std::vector<std::pair<int, std::int64_t>>;

std::vector<Heights> eta_seeds(const Word& eta, int i, const Tower& t) {
  std::vector<Heights> seeds;
  std::set<Heights> seen;
  auto add = [&](const Heights& h) {
    if (seen.insert(h).second) seeds.push_back(h);
  };
  Heights h(static_cast<std::size_t>(i), 0);
  add(h);
  for (Letter x : eta.letters()) {
    Heights before = h;
    step(t, x, h);
    Edge e{x.generator(), x.inverse() ? h : before};
    auto [fwd, bwd] = faces_of_edge(t, e);
    add(fwd);
    add(bwd);
  }
  return seeds;
}

// Survivor crossings of the core's edges, inverted: edge -> (survivor, count).
struct SurvivorIndex {
  std::size_t count = 0;
  std::vector<std::vector<std::pair<int, std::int64_t>>> by_edge;

  SurvivorIndex(const CoreComplex& core, const Tower& t, const std::vector<Word>& survivors) {
    count = survivors.size();
    by_edge.resize(core.edges.size());
    const Heights zero(static_cast<std::size_t>(core.level), 0);
    for (std::size_t s = 0; s < survivors.size(); ++s)
      for (const auto& [e, v] : edge_vector(core, t, survivors[s], zero))
        by_edge[e].emplace_back(static_cast<int>(s), v);
  }
};

// Pairings of every survivor with a sparse cochain, accumulated into a dense
// scratch vector; `touched` lists the survivors reached.
struct Column {
  std::vector<std::int64_t> value;
  std::vector<int> touched;

  explicit Column(std::size_t n) : value(n, 0) {}
  void clear() {
    for (int s : touched) value[s] = 0;
    touched.clear();
  }
  void accumulate(const SurvivorIndex& idx, const Sparse& cochain, std::int64_t scale) {
    for (const auto& [e, c] : cochain)
      for (const auto& [s, v] : idx.by_edge[e]) {
        if (value[s] == 0) touched.push_back(s);
        value[s] += scale * c * v;
      }
  }
};

std::size_t count_nonzero(const Column& col) {
  std::set<int> uniq(col.touched.begin(), col.touched.end());
  return static_cast<std::size_t>(std::count_if(uniq.begin(), uniq.end(), [&](int s) { return col.value[s] != 0; }));
}

void add_scaled(std::map<int, std::int64_t>& acc, const Sparse& cyc, std::int64_t c) {
  for (const auto& [e, v] : cyc) {
    auto& slot = acc[e];
    slot += c * v;
    if (slot == 0) acc.erase(e);
  }
}

Sparse to_sparse(const std::map<int, std::int64_t>& m) { return Sparse(m.begin(), m.end()); }

// Extended Euclid over the cycle pairings: a combination with pairing equal
// to the gcd of all pairings.
std::map<int, std::int64_t> gcd_combination(const CycleBasis& basis, const std::vector<std::int64_t>& p,
                                            std::int64_t* value) {
  std::map<int, std::int64_t> acc;
  std::int64_t g = 0;
  for (std::size_t k = 0; k < p.size() && std::abs(g) != 1; ++k) {
    if (p[k] == 0) continue;
    if (g == 0) {
      add_scaled(acc, basis.cycles[k], 1);
      g = p[k];
      continue;
    }
    // x*g + y*p[k] = gcd
    std::int64_t old_r = g, r = p[k], old_s = 1, s = 0, old_t = 0, tt = 1;
    while (r != 0) {
      std::int64_t q = old_r / r;
      std::tie(old_r, r) = std::make_pair(r, old_r - q * r);
      std::tie(old_s, s) = std::make_pair(s, old_s - q * s);
      std::tie(old_t, tt) = std::make_pair(tt, old_t - q * tt);
    }
    if (std::abs(old_r) == std::abs(g)) continue;
    std::map<int, std::int64_t> next;
    for (const auto& [e, v] : acc) next[e] = v * old_s;
    std::erase_if(next, [](const auto& kv) { return kv.second == 0; });
    add_scaled(next, basis.cycles[k], old_t);
    acc = std::move(next);
    g = old_r;
  }
  if (g < 0) {
    for (auto& [e, v] : acc) v = -v;
    g = -g;
  }
  *value = g;
  return acc;
}

}  // namespace

Word shortest_nontrivial(int n, const Tower& t, int max_length) {
  std::optional<Word> found;
  enumerate_ball(max_length, [&](const Word& w) {
    if (!w.empty() && membership(w, n, t)) {
      found = w;
      return false;
    }
    return true;
  });
  if (!found)
    throw UnscrewError(UnscrewError::Kind::BallExhausted,
                       "ball exhausted: no nontrivial element of length <= " + std::to_string(max_length) +
                           " in level " + std::to_string(n) + " subgroup");
  return *found;
}

std::optional<KillResult> find_killing_cocycle(const Word& eta, int i, const Tower& t, int radius,
                                               const KillContext& ctx) {
  if (!membership(eta, i, t))
    throw NotInSubgroup(eta.str() + " is not in level " + std::to_string(i) + " subgroup");
  const auto seeds = eta_seeds(eta, i, t);
  const Heights zero(static_cast<std::size_t>(i), 0);
  CoreComplex core = build_core(t, i, radius, seeds);
  CycleBasis basis = dual_cycle_basis(core);
  std::vector<std::int64_t> pe = pair_with_cycles(core, basis, edge_vector(core, t, eta, zero));
  if (std::all_of(pe.begin(), pe.end(), [](std::int64_t v) { return v == 0; })) return std::nullopt;
  if (ctx.survivors && ctx.harvest_radius > radius) {
    core = build_core(t, i, ctx.harvest_radius, seeds);
    basis = dual_cycle_basis(core);
    pe = pair_with_cycles(core, basis, edge_vector(core, t, eta, zero));
  }

  std::vector<int> unit;
  for (std::size_t k = 0; k < pe.size(); ++k)
    if (std::abs(pe[k]) == 1) unit.push_back(static_cast<int>(k));

  std::map<int, std::int64_t> combo;  // edge -> value
  KillResult result;
  result.radius = radius;

  if (!ctx.survivors) {
    if (!unit.empty()) {
      int best = *std::min_element(unit.begin(), unit.end(), [&](int x, int y) {
        return basis.cycles[x].size() < basis.cycles[y].size();
      });
      add_scaled(combo, basis.cycles[best], pe[best]);
      result.eta_pairing = 1;
    } else {
      combo = gcd_combination(basis, pe, &result.eta_pairing);
    }
    result.cocycle = to_cocycle(core, to_sparse(combo));
    return result;
  }

  const SurvivorIndex idx(core, t, *ctx.survivors);
  Column col(idx.count);
  if (!unit.empty()) {
    std::size_t best_kills = 0;
    int best = -1;
    for (int k : unit) {
      col.clear();
      col.accumulate(idx, basis.cycles[k], 1);
      std::size_t kills = count_nonzero(col);
      if (best < 0 || kills > best_kills ||
          (kills == best_kills && basis.cycles[k].size() < basis.cycles[best].size())) {
        best = k;
        best_kills = kills;
      }
    }
    add_scaled(combo, basis.cycles[best], pe[best]);
    result.eta_pairing = 1;
  } else {
    combo = gcd_combination(basis, pe, &result.eta_pairing);
  }

  // current pairing of every survivor
  std::vector<std::int64_t> current(idx.count, 0);
  col.clear();
  col.accumulate(idx, to_sparse(combo), 1);
  for (int s : col.touched) current[s] = col.value[s];

  if (ctx.improve) {
    // Add cycles invisible to η whenever that kills more survivors.
    for (int pass = 0; pass < 2; ++pass) {
      bool improved = false;
      for (std::size_t k = 0; k < basis.cycles.size(); ++k) {
        if (pe[k] != 0) continue;
        col.clear();
        col.accumulate(idx, basis.cycles[k], 1);
        std::set<int> uniq(col.touched.begin(), col.touched.end());
        std::int64_t best_c = 0;
        long best_gain = 0;
        for (std::int64_t c : {1, -1, 2, -2}) {
          long gain = 0;
          for (int s : uniq) {
            if (col.value[s] == 0) continue;
            gain += (current[s] + c * col.value[s] != 0) - (current[s] != 0);
          }
          if (gain > best_gain) {
            best_gain = gain;
            best_c = c;
          }
        }
        if (best_c == 0) continue;
        improved = true;
        add_scaled(combo, basis.cycles[k], best_c);
        for (int s : uniq) current[s] += best_c * col.value[s];
      }
      if (!improved) break;
    }
  }
  result.kills = static_cast<std::size_t>(std::count_if(current.begin(), current.end(), [](std::int64_t v) { return v != 0; }));
  result.cocycle = to_cocycle(core, to_sparse(combo));
  return result;
}

namespace {

std::vector<Word> filter_survivors(const std::vector<Word>& words, int level, const Tower& t) {
  std::vector<Word> out;
  for (const Word& w : words)
    if (trace(w, t, level + 1)[level] == 0) out.push_back(w);
  return out;
}

// Shift word among candidates (shortlex-sorted elements of Γ_i).
std::optional<Word> shift_among(int i, const Tower& t, const std::vector<Word>& candidates) {
  for (const Word& w : candidates)
    if (trace(w, t, i + 1)[i] == 1) return w;
  return std::nullopt;
}

void divide_top(Tower& t, int i, std::int64_t factor) {
  Cocycle c(i);
  for (const auto& [e, v] : t.cocycle(i).entries()) c.set(e, v / factor);
  t.set_cocycle(i, std::move(c));
}

}  // namespace

std::optional<Word> loop_search(const Tower& t, int i, int max_length, std::int64_t* image_gcd,
                                std::size_t max_states) {
  // Breadth-first over the level-(i+1) cover: a path from the zero state to
  // (0,...,0,1) is a loop of Γ_i with Φ_{i+1} = 1. Ordered expansion makes the
  // first path found the shortlex-least word.
  const std::size_t n = static_cast<std::size_t>(i + 1);
  Heights target(n, 0);
  target[i] = 1;
  std::vector<Heights> states{Heights(n, 0)};
  std::vector<std::pair<int, Letter>> parent{{-1, Letter{}}};
  std::vector<int> dist{0};
  std::unordered_map<Heights, int, HeightsHash> index{{states[0], 0}};
  std::int64_t g = 0;
  std::optional<int> hit;
  for (std::size_t head = 0; head < states.size() && !hit; ++head) {
    if (dist[head] == max_length) break;
    for (int c = 0; c < kLetters && !hit; ++c) {
      const Letter x{static_cast<std::uint8_t>(c)};
      if (parent[head].first >= 0 && parent[head].second == x.inv()) continue;
      Heights h = states[head];
      step(t, x, h);
      auto [it, fresh] = index.try_emplace(h, static_cast<int>(states.size()));
      if (!fresh) continue;
      if (std::all_of(h.begin(), h.end() - 1, [](std::int64_t v) { return v == 0; })) g = std::gcd(g, h[i]);
      states.push_back(h);
      parent.emplace_back(static_cast<int>(head), x);
      dist.push_back(dist[head] + 1);
      if (h == target) hit = it->second;
      if (states.size() >= max_states) break;
    }
    if (states.size() >= max_states) break;
  }
  if (image_gcd) *image_gcd = g;
  if (!hit) return std::nullopt;
  std::vector<Letter> letters;
  for (int k = *hit; parent[k].first >= 0; k = parent[k].first) letters.push_back(parent[k].second);
  std::reverse(letters.begin(), letters.end());
  return Word::from_letters(std::move(letters));
}

Word choose_shift_word(int i, Tower& t, int max_length, std::int64_t* renormalized) {
  if (renormalized) *renormalized = 1;
  std::int64_t g = 0;
  auto w = loop_search(t, i, max_length, &g);
  if (!w) {
    const std::int64_t factor = std::gcd(g, t.cocycle(i).content());
    if (factor > 1) {
      divide_top(t, i, factor);
      if (renormalized) *renormalized = factor;
      w = loop_search(t, i, max_length, nullptr);
    }
  }
  if (!w)
    throw UnscrewError(UnscrewError::Kind::BallExhausted,
                       "ball exhausted: no shift word of length <= " + std::to_string(max_length) + " at level " +
                           std::to_string(i));
  t.set_shift(i, *w);
  return *w;
}

namespace {

std::vector<Heights> union_seeds(const std::vector<Word>& words, int i, const Tower& t) {
  std::vector<Heights> seeds;
  std::set<Heights> seen;
  for (const Word& w : words)
    for (Heights& h : eta_seeds(w, i, t))
      if (seen.insert(h).second) seeds.push_back(std::move(h));
  return seeds;
}

// Which of `words` pair nontrivially with some closed cochain on the level-i
// core around their lifts.
std::vector<char> visible(const std::vector<Word>& words, int i, const Tower& t, int radius) {
  const CoreComplex core = build_core(t, i, radius, union_seeds(words, i, t));
  const CycleBasis basis = dual_cycle_basis(core);
  const Heights zero(static_cast<std::size_t>(i), 0);
  std::vector<char> out;
  for (const Word& w : words) {
    auto p = pair_with_cycles(core, basis, edge_vector(core, t, w, zero));
    out.push_back(std::any_of(p.begin(), p.end(), [](std::int64_t v) { return v != 0; }));
  }
  return out;
}

}  // namespace

std::pair<Cocycle, Cocycle> separating_fallback(const Word& eta, int i, const Tower& t, int budget,
                                                const UnscrewConfig& cfg, const KillContext& ctx) {
  if (budget <= 0)
    throw UnscrewError(UnscrewError::Kind::Stuck, "unscrewing stuck: fallback budget exhausted for " + eta.str());

  // Targets: η and the other short survivors no level-i cochain sees. One ψ
  // should open up as many of them as it can.
  std::vector<Word> targets{eta};
  if (ctx.survivors) {
    std::vector<Word> pool;
    for (const Word& w : *ctx.survivors) {
      if (pool.size() >= 48) break;
      if (w != eta) pool.push_back(w);
    }
    const auto vis = visible(pool, i, t, cfg.radius_cap);
    for (std::size_t k = 0; k < pool.size(); ++k)
      if (!vis[k]) targets.push_back(pool[k]);
  }

  const CoreComplex core = build_core(t, i, cfg.radius_cap + 2, union_seeds(targets, i, t));
  const CycleBasis basis = dual_cycle_basis(core);
  const Heights zero(static_cast<std::size_t>(i), 0);

  auto opened = [&](const std::map<int, std::int64_t>& m, Tower& trial) -> std::vector<char> {
    Cocycle psi = to_cocycle(core, to_sparse(m));
    if (psi.empty() || !verify_cocycle(psi, t)) return {};
    trial = t;
    trial.push(std::move(psi));
    return visible(targets, i + 1, trial, cfg.radius_cap);
  };

  // A separating loop opens up in the next cover only if ψ is nonzero on both
  // of its sides, so candidates are pairs of cycles taken from the two sides
  // of the target's lift inside the core.
  const std::size_t per_side = static_cast<std::size_t>(4 * budget);
  auto side_pairs = [&](const Word& target) {
    std::vector<char> cut(core.edges.size(), 0);
    {
      Heights h = zero;
      for (Letter x : target.letters()) {
        Heights before = h;
        step(t, x, h);
        int e = core.find_edge(Edge{x.generator(), x.inverse() ? h : before});
        if (e >= 0) cut[e] = 1;
      }
    }
    std::vector<std::vector<int>> adj(core.faces.size());
    for (std::size_t e = 0; e < core.edges.size(); ++e) {
      if (cut[e]) continue;
      auto [u, v] = core.edge_faces[e];
      adj[u].push_back(v);
      adj[v].push_back(u);
    }
    std::vector<int> comp(core.faces.size(), -1);
    std::vector<std::size_t> sizes;
    for (std::size_t f = 0; f < core.faces.size(); ++f) {
      if (comp[f] >= 0) continue;
      const int id = static_cast<int>(sizes.size());
      std::vector<int> stack{static_cast<int>(f)};
      comp[f] = id;
      std::size_t n = 0;
      while (!stack.empty()) {
        int g = stack.back();
        stack.pop_back();
        ++n;
        for (int h : adj[g])
          if (comp[h] < 0) {
            comp[h] = id;
            stack.push_back(h);
          }
      }
      sizes.push_back(n);
    }
    std::map<int, std::vector<int>> by_comp;
    for (std::size_t k = 0; k < basis.cycles.size(); ++k) {
      int c = -2;
      for (const auto& [e, v] : basis.cycles[k]) {
        if (cut[e]) {
          c = -1;
          break;
        }
        for (int f : {core.edge_faces[e].first, core.edge_faces[e].second}) {
          if (c == -2) c = comp[f];
          else if (c != comp[f]) c = -1;
        }
        if (c == -1) break;
      }
      if (c >= 0 && by_comp[c].size() < per_side) by_comp[c].push_back(static_cast<int>(k));
    }
    std::vector<int> comps;
    for (const auto& [c, ks] : by_comp) comps.push_back(c);
    std::sort(comps.begin(), comps.end(), [&](int x, int y) { return sizes[x] > sizes[y]; });
    std::vector<std::map<int, std::int64_t>> out;
    if (comps.size() < 2) return out;
    for (std::int64_t c = 1; c <= budget; ++c)
      for (int ka : by_comp[comps[0]])
        for (int kb : by_comp[comps[1]])
          for (std::int64_t sb : {c, -c}) {
            std::map<int, std::int64_t> m;
            add_scaled(m, basis.cycles[ka], 1);
            add_scaled(m, basis.cycles[kb], sb);
            out.push_back(std::move(m));
          }
    return out;
  };

  auto count = [](const std::vector<char>& v) { return std::count(v.begin(), v.end(), 1); };
  auto merged = [](std::map<int, std::int64_t> m, const std::map<int, std::int64_t>& d) {
    for (const auto& [e, v] : d) {
      auto& slot = m[e];
      slot += v;
      if (slot == 0) m.erase(e);
    }
    return m;
  };

  // η first, then every other target still closed, each by the first side
  // pair that opens it without closing what is already open.
  const auto eta_pairs = side_pairs(eta);
  for (const auto& start : eta_pairs) {
    Tower trial;
    std::vector<char> open = opened(start, trial);
    if (open.empty() || !open[0]) continue;
    std::map<int, std::int64_t> m = start;
    for (std::size_t s = 1; s < targets.size(); ++s) {
      if (open[s]) continue;
      for (const auto& cand : side_pairs(targets[s])) {
        auto next = merged(m, cand);
        Tower t2;
        auto o2 = opened(next, t2);
        if (o2.empty() || !o2[s]) continue;
        bool keeps = true;
        for (std::size_t q = 0; q < open.size(); ++q) keeps = keeps && (!open[q] || o2[q]);
        if (!keeps || count(o2) <= count(open)) continue;
        m = std::move(next);
        open = std::move(o2);
        trial = std::move(t2);
        break;
      }
    }

    // the provisional level must admit a shift word
    if (!shift_among(i, trial, ctx.survivors ? *ctx.survivors : std::vector<Word>{}) &&
        !loop_search(trial, i, cfg.shift_length, nullptr))
      continue;
    std::vector<Word> next;
    if (ctx.survivors) next = filter_survivors(*ctx.survivors, i, trial);
    KillContext inner{ctx.survivors ? &next : nullptr, ctx.improve, ctx.harvest_radius};
    for (int r = cfg.radius_start; r <= cfg.radius_cap; ++r) {
      auto res = find_killing_cocycle(eta, i + 1, trial, r, inner);
      if (res) return {trial.cocycle(i), res->cocycle};
    }
  }
  throw UnscrewError(UnscrewError::Kind::Stuck, "unscrewing stuck: no two-level kill for " + eta.str() +
                                                    " at level " + std::to_string(i));
}

std::pair<Tower, ScheduleReport> extend_schedule(Tower t, int L, const UnscrewConfig& cfg) {
  ScheduleReport report;
  report.ball = L;
  if (cfg.depth_cap <= 0) throw UnscrewError(UnscrewError::Kind::DepthCap, "depth cap must be positive");
  if (L <= 0) return {t, report};
  if (!t.complete()) throw TowerError("cannot extend a tower with provisional levels");

  std::vector<Word> survivors = enumerate_ball(L);
  survivors.erase(survivors.begin());  // identity
  report.ball_size = survivors.size();
  for (int j = 0; j < t.depth(); ++j) survivors = filter_survivors(survivors, j, t);

  auto install = [&](Cocycle c, const Word& eta, int eta_level, int kill_levels, int radius) {
    const int i = t.depth();
    LevelReport lr;
    lr.level = i;
    lr.eta = eta;
    lr.eta_level = eta_level;
    lr.kill_levels = kill_levels;
    lr.radius = radius;
    lr.survivors_before = survivors.size();
    t.push(std::move(c));
    auto w = shift_among(i, t, survivors);
    if (!w) w = choose_shift_word(i, t, L + cfg.shift_slack, &lr.renormalized);
    t.set_shift(i, *w);
    lr.shift = *w;
    lr.support = t.cocycle(i).support_size();
    survivors = filter_survivors(survivors, i, t);
    lr.survivors_after = survivors.size();
    if (cfg.on_level) cfg.on_level(lr);
    report.levels.push_back(std::move(lr));
  };

  if (t.depth() == 0) {
    // the first level is pinned: Φ_1 is the a-exponent
    install(Cocycle::base({1, 0, 0, 0}), Word::parse("a"), 0, 1, 0);
  }

  while (!survivors.empty()) {
    if (t.depth() >= cfg.depth_cap)
      throw UnscrewError(UnscrewError::Kind::DepthCap,
                         "depth cap " + std::to_string(cfg.depth_cap) + " reached with " +
                             std::to_string(survivors.size()) + " survivors, shortest " + survivors.front().str());
    const int i = t.depth();
    const Word eta = survivors.front();
    KillContext ctx{&survivors, cfg.improve, cfg.harvest_radius};
    std::optional<KillResult> found;
    for (int r = cfg.radius_start; r <= cfg.radius_cap && !found; ++r) found = find_killing_cocycle(eta, i, t, r, ctx);
    if (found) {
      install(std::move(found->cocycle), eta, i, 1, found->radius);
      continue;
    }
    if (t.depth() + 2 > cfg.depth_cap)
      throw UnscrewError(UnscrewError::Kind::DepthCap, "depth cap reached before a two-level kill of " + eta.str());
    auto [psi, phi] = separating_fallback(eta, i, t, cfg.budget, cfg, ctx);
    install(std::move(psi), eta, i, 2, cfg.radius_cap);
    install(std::move(phi), eta, i, 2, cfg.radius_cap);
  }
  for (const auto& lr : report.levels)
    if (lr.level - lr.eta_level + 1 > 2) report.two_step_warning = true;
  return {t, report};
}

std::string ScheduleReport::to_json() const {
  nlohmann::json j;
  j["ball"] = ball;
  j["ball_size"] = ball_size;
  j["depth"] = levels.size();
  j["two_step_warning"] = two_step_warning;
  auto& arr = j["levels"] = nlohmann::json::array();
  for (const auto& lr : levels) {
    arr.push_back({{"level", lr.level},
                   {"eta", lr.eta.str()},
                   {"eta_level", lr.eta_level},
                   {"kill_levels", lr.kill_levels},
                   {"radius", lr.radius},
                   {"shift", lr.shift.str()},
                   {"support", lr.support},
                   {"renormalized", lr.renormalized},
                   {"survivors_before", lr.survivors_before},
                   {"survivors_after", lr.survivors_after}});
  }
  return j.dump(2);
}

}  // namespace surfdiff

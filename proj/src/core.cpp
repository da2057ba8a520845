#include "surfdiff/core.hpp"

#include <algorithm>
#include <deque>

namespace surfdiff {

namespace {

int relator_position(Letter x) {
  const auto& r = relator();
  for (int k = 0; k < 8; ++k)
    if (r[k] == x) return k;
  return -1;
}

Heights walk_back(const Tower& t, Heights h, int k) {
  const auto& r = relator();
  for (int j = k - 1; j >= 0; --j) step(t, r[j].inv(), h);
  return h;
}

}  // namespace

std::pair<Heights, Heights> faces_of_edge(const Tower& t, const Edge& e) {
  const Letter pos = Letter::make(e.gen, false);
  Heights end = e.h;
  step(t, pos, end);
  return {walk_back(t, e.h, relator_position(pos)), walk_back(t, end, relator_position(pos.inv()))};
}

CoreComplex build_core(const Tower& t, int level, int radius, const std::vector<Heights>& seeds) {
  if (level > t.depth()) throw TowerError("core level exceeds tower depth");
  CoreComplex core;
  core.level = level;
  core.radius = radius;

  // BFS over vertices
  std::deque<std::pair<Heights, int>> queue;
  auto visit = [&](const Heights& v, int dist) {
    if (core.face_index.emplace(v, static_cast<int>(core.faces.size())).second) {
      core.faces.push_back(v);
      queue.emplace_back(v, dist);
    }
  };
  for (const Heights& s : seeds) {
    if (static_cast<int>(s.size()) != level) throw TowerError("seed has wrong level");
    visit(s, 0);
  }
  while (!queue.empty()) {
    auto [v, dist] = queue.front();
    queue.pop_front();
    if (dist == radius) continue;
    for (int c = 0; c < kLetters; ++c) {
      Heights w = v;
      step(t, Letter{static_cast<std::uint8_t>(c)}, w);
      visit(w, dist + 1);
    }
  }

  // Walk each face boundary and record which side of each edge it is on.
  std::vector<Edge> seen;
  std::unordered_map<Edge, std::pair<int, int>, EdgeHash> sides;
  for (int f = 0; f < static_cast<int>(core.faces.size()); ++f) {
    Heights h = core.faces[f];
    for (Letter x : relator()) {
      if (!x.inverse()) {
        Edge e{x.generator(), h};
        auto [it, fresh] = sides.try_emplace(e, -1, -1);
        if (fresh) seen.push_back(e);
        it->second.first = f;
        step(t, x, h);
      } else {
        step(t, x, h);
        Edge e{x.generator(), h};
        auto [it, fresh] = sides.try_emplace(e, -1, -1);
        if (fresh) seen.push_back(e);
        it->second.second = f;
      }
    }
  }
  for (const Edge& e : seen) {
    const auto& [fwd, bwd] = sides.at(e);
    if (fwd < 0 || bwd < 0) continue;
    core.edge_index.emplace(e, static_cast<int>(core.edges.size()));
    core.edges.push_back(e);
    core.edge_faces.emplace_back(fwd, bwd);
  }
  return core;
}

CoreComplex build_core(const Tower& t, int level, int radius) {
  return build_core(t, level, radius, {Heights(static_cast<std::size_t>(level), 0)});
}

IntMatrix CoreComplex::coboundary() const {
  IntMatrix M(faces.size(), std::vector<BigInt>(edges.size(), BigInt(0)));
  for (std::size_t e = 0; e < edges.size(); ++e) {
    M[edge_faces[e].first][e] += 1;
    M[edge_faces[e].second][e] -= 1;
  }
  return M;
}

std::vector<std::pair<int, std::int64_t>> edge_vector(const CoreComplex& core, const Tower& t,
                                                      const Word& u, const Heights& start) {
  std::vector<std::pair<int, std::int64_t>> raw;
  Heights h = start;
  for (Letter x : u.letters()) {
    if (!x.inverse()) {
      int idx = core.find_edge(Edge{x.generator(), h});
      if (idx >= 0) raw.emplace_back(idx, 1);
      step(t, x, h);
    } else {
      step(t, x, h);
      int idx = core.find_edge(Edge{x.generator(), h});
      if (idx >= 0) raw.emplace_back(idx, -1);
    }
  }
  std::sort(raw.begin(), raw.end());
  std::vector<std::pair<int, std::int64_t>> out;
  for (const auto& [i, v] : raw) {
    if (!out.empty() && out.back().first == i)
      out.back().second += v;
    else
      out.emplace_back(i, v);
  }
  std::erase_if(out, [](const auto& p) { return p.second == 0; });
  return out;
}

CycleBasis dual_cycle_basis(const CoreComplex& core) {
  const int F = static_cast<int>(core.faces.size());
  const int E = static_cast<int>(core.edges.size());
  CycleBasis b;
  b.parent_edge.assign(static_cast<std::size_t>(F), -1);
  b.parent_face.assign(static_cast<std::size_t>(F), -1);
  std::vector<int> depth(static_cast<std::size_t>(F), -1);
  std::vector<std::vector<int>> incident(static_cast<std::size_t>(F));
  for (int e = 0; e < E; ++e) {
    auto [u, v] = core.edge_faces[e];
    if (u == v) continue;
    incident[u].push_back(e);
    incident[v].push_back(e);
  }
  std::vector<char> is_tree(static_cast<std::size_t>(E), 0);
  for (int root = 0; root < F; ++root) {
    if (depth[root] >= 0) continue;
    depth[root] = 0;
    std::deque<int> queue{root};
    while (!queue.empty()) {
      int f = queue.front();
      queue.pop_front();
      b.order.push_back(f);
      for (int e : incident[f]) {
        auto [u, v] = core.edge_faces[e];
        int g = u == f ? v : u;
        if (depth[g] >= 0) continue;
        depth[g] = depth[f] + 1;
        b.parent_face[g] = f;
        b.parent_edge[g] = e;
        is_tree[e] = 1;
        queue.push_back(g);
      }
    }
  }
  // coefficient of tree edge t when moving from face `from` across it
  auto along = [&](int t, int from) -> std::int64_t { return core.edge_faces[t].first == from ? 1 : -1; };

  for (int e = 0; e < E; ++e) {
    if (is_tree[e]) continue;
    std::vector<std::pair<int, std::int64_t>> cyc{{e, 1}};
    // return path from the backward face to the forward face
    int a = core.edge_faces[e].second, c = core.edge_faces[e].first;
    std::vector<std::pair<int, std::int64_t>> down;
    while (a != c) {
      if (depth[a] >= depth[c]) {
        cyc.emplace_back(b.parent_edge[a], along(b.parent_edge[a], a));
        a = b.parent_face[a];
      } else {
        down.emplace_back(b.parent_edge[c], along(b.parent_edge[c], b.parent_face[c]));
        c = b.parent_face[c];
      }
    }
    cyc.insert(cyc.end(), down.rbegin(), down.rend());
    std::sort(cyc.begin(), cyc.end());
    b.cycles.push_back(std::move(cyc));
    b.generator_edge.push_back(e);
  }
  return b;
}

std::vector<std::int64_t> pair_with_cycles(const CoreComplex& core, const CycleBasis& basis,
                                           const std::vector<std::pair<int, std::int64_t>>& x) {
  std::vector<std::int64_t> dense(core.edges.size(), 0);
  for (const auto& [i, v] : x) dense[i] += v;
  // potential: sum of x along the tree path from the root
  std::vector<std::int64_t> P(core.faces.size(), 0);
  for (int f : basis.order) {
    int t = basis.parent_edge[f];
    if (t < 0) continue;
    int p = basis.parent_face[f];
    std::int64_t c = core.edge_faces[t].first == p ? 1 : -1;
    P[f] = P[p] + c * dense[t];
  }
  std::vector<std::int64_t> out(basis.cycles.size());
  for (std::size_t k = 0; k < basis.cycles.size(); ++k) {
    int e = basis.generator_edge[k];
    out[k] = dense[e] + P[core.edge_faces[e].first] - P[core.edge_faces[e].second];
  }
  return out;
}

Cocycle to_cocycle(const CoreComplex& core, const std::vector<std::pair<int, std::int64_t>>& x) {
  Cocycle c(core.level);
  for (const auto& [i, v] : x)
    if (v != 0) c.add(core.edges[i], v);
  return c;
}

}  // namespace surfdiff

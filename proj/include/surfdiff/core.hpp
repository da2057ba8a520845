// Finite pieces of a level-i cover and their closed cochains.
//
// Every edge of a cover lies on exactly two relator faces: one reading the
// generator forwards, one backwards. A cochain on the interior edges of a
// core is closed exactly when, viewed as a flow on the dual graph (faces as
// nodes, each edge oriented from its forward face to its backward face), it
// is a circulation. Fundamental cycles of a spanning forest therefore give an
// integral kernel basis directly.
#pragma once

#include <unordered_map>
#include <vector>

#include "surfdiff/smith.hpp"
#include "surfdiff/tower.hpp"

namespace surfdiff {

struct CoreComplex {
  int level = 0;
  int radius = 0;
  std::vector<Heights> faces;  // base vertex of each face
  std::unordered_map<Heights, int, HeightsHash> face_index;
  std::vector<Edge> edges;  // interior edges only
  std::unordered_map<Edge, int, EdgeHash> edge_index;
  std::vector<std::pair<int, int>> edge_faces;  // (forward face, backward face)

  int find_edge(const Edge& e) const {
    auto it = edge_index.find(e);
    return it == edge_index.end() ? -1 : it->second;
  }
  // faces x edges incidence; closed cochains are its kernel
  IntMatrix coboundary() const;
};

// Faces whose base lies within `radius` steps of a seed vertex; the unknowns
// are edges with both faces inside.
CoreComplex build_core(const Tower& t, int level, int radius, const std::vector<Heights>& seeds);
CoreComplex build_core(const Tower& t, int level, int radius);  // seeded at zero

// The two faces containing an edge, as base vertices.
std::pair<Heights, Heights> faces_of_edge(const Tower& t, const Edge& e);

// Signed edge crossings of the lift of u from `start` (level = start.size()),
// restricted to the core's edges: (edge index, count), sorted, nonzero.
std::vector<std::pair<int, std::int64_t>> edge_vector(const CoreComplex& core, const Tower& t,
                                                      const Word& u, const Heights& start);

struct CycleBasis {
  // One entry per non-tree edge: sparse (edge index, coefficient).
  std::vector<std::vector<std::pair<int, std::int64_t>>> cycles;
  std::vector<int> generator_edge;  // the non-tree edge of each cycle
  // spanning forest data
  std::vector<int> parent_edge;  // -1 at roots
  std::vector<int> parent_face;
  std::vector<int> order;  // BFS order of faces
};

CycleBasis dual_cycle_basis(const CoreComplex& core);

// <x, cycle> for every basis cycle in O(faces + cycles), x a sparse edge vector.
std::vector<std::int64_t> pair_with_cycles(const CoreComplex& core, const CycleBasis& basis,
                                           const std::vector<std::pair<int, std::int64_t>>& x);

Cocycle to_cocycle(const CoreComplex& core, const std::vector<std::pair<int, std::int64_t>>& x);

}  // namespace surfdiff

// Numerical checks of the stage-by-stage construction: nesting of the
// fundamental intervals, closeness of consecutive stages, disjointness of the
// translates of I_n, and agreement of consecutive stages on K_{n-1}.
#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "surfdiff/action.hpp"

namespace surfdiff {

// Generators a, b, p, q.
const std::vector<Word>& generators();

struct NestingCheck {
  bool pass = true;
  int failed_level = 0;
};
// closure(I_n) ⊂ I_{n-1} for n = 1..N
NestingCheck check_nesting(const TowerAction& act, int N);

// Depth-(n-1) prefixes where the stage-n action of g differs from the
// stage-(n-1) one: the level-n digit of g·w_0^{d_1}...w_{n-2}^{d_{n-1}}, Δ, is
// nonzero. Searched in a box |d_j| <= bound that grows until no hit touches it.
struct ActivePrefix {
  std::vector<BigInt> prefix;
  std::vector<BigInt> image;  // digits of g·prefix at depth n-1
  BigInt delta;
};
std::vector<ActivePrefix> active_prefixes(const TowerAction& act, const Word& g, int n, std::int64_t bound = 8,
                                          std::int64_t max_bound = 512);

// max over sample points and orders 0..n of |D^j(ρ_n(g) − ρ_{n-1}(g))|. On the
// tile of an active prefix the difference is A∘F_n^Δ∘B − A∘B with B the pull
// back to I_{n-1}, so the samples are uniform tails in I_{n-1} pushed into
// each active tile; everywhere else it vanishes identically.
struct StageDistance {
  Real value = 0;
  Real where = 0;
  int order = 0;
  std::size_t tiles = 0;
  std::size_t points = 0;
};
StageDistance stage_distance(const TowerAction& act, const Word& g, int n, int grid);

struct TuneStep {
  int level = 0;
  double eps = 0;
  Real distance;  // max over generators
  Real target;    // 10^{-n}·ε / safety
  int halvings = 0;
  std::size_t tiles = 0;
};
// Chooses ε_1..ε_N in turn: start at ε·10^{-n}, then halve until the stage
// distance is within 10^{-n}·ε / safety. The halvings are taken in bulk from
// the measured ratio, as the distance is close to linear in ε_n.
std::pair<TowerAction, std::vector<TuneStep>> tune_epsilons(const Tower& tower, int N, double eps, int grid,
                                                           double safety = 10);

// Translates of I_n by every coset within distance L of Γ_n other than Γ_n
// itself miss I_n. Endpoints may touch within 2^-(bits-16).
struct DisjointnessCheck {
  bool pass = true;
  std::size_t cosets = 0;
  std::vector<BigInt> witness;  // digits of an offending coset
};
DisjointnessCheck check_disjointness(const TowerAction& act, int n, int L);

// Terminal addresses of depth 1..n (chosen uniformly) with level-1 digit in the
// window's range and deeper digits in [-deep_bound, deep_bound], kept if they
// land in [lo, hi].
std::vector<PointAddress> sample_k_points(const TowerAction& act, int n, const Real& lo, const Real& hi,
                                          std::int64_t deep_bound, std::size_t count, std::mt19937_64& rng);

// Stage n and stage n-1 agree on K_{n-1}: points from sample_k_points(n-1),
// words of length <= L, read back from their numeric values.
struct AgreementCheck {
  bool pass = true;
  Real worst = 0;
  std::size_t points = 0, words = 0;
  std::string witness_word;
  Real witness_point = 0;
};
AgreementCheck check_stage_agreement(const TowerAction& act, int n, const Real& lo, const Real& hi, int L,
                                     std::size_t count, const Real& tol, std::mt19937_64& rng);

// Largest level-n tile meeting [lo, hi], over level-1 digits |d_1| <= d1_bound
// and deeper digits in {-2, -1, 0, 1}. Tile widths are unimodal in each digit
// with their peak at 0, so this family contains the widest tiles.
struct TileDiameter {
  Real value = 0;
  std::vector<BigInt> digits;
};
TileDiameter max_tile_diameter(const TowerAction& act, int n, const Real& lo, const Real& hi, std::int64_t d1_bound);

}  // namespace surfdiff

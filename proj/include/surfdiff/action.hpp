// The stage-N actions on (0,1). A point is addressed by its tile digits
// (d_1..d_m) and a tail in the level-m fundamental interval; words act on
// digits exactly, through the vertex of the level-m cover attached to the
// coset w_0^{d_1}...w_{m-1}^{d_m}·Γ_m.
#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "surfdiff/flatmaps.hpp"
#include "surfdiff/tower.hpp"

namespace surfdiff {

struct PointAddress {
  std::vector<BigInt> digits;
  Real tail;
  bool terminal = false;  // tail is exactly s_m, m = digits.size()
  int depth() const { return static_cast<int>(digits.size()); }
};

class UndecidedTile : public std::runtime_error {
 public:
  UndecidedTile(int level, unsigned bits);
  int level() const { return level_; }

 private:
  int level_;
};

enum class Side { Right, Left };

class TowerAction {
 public:
  // eps[i] is the step of f_{i+1}; the tower needs at least eps.size() levels
  // with shift words.
  TowerAction(Tower tower, std::vector<double> eps);

  const Tower& tower() const { return tower_; }
  // number of levels with maps
  int depth() const { return static_cast<int>(eps_.size()); }
  const std::vector<double>& epsilons() const { return eps_; }
  TowerAction with_epsilon(int level, double eps) const;  // level is 1-based

  // f_n on I_{n-1} (n >= 1) at the current precision
  const StepMap& map(int n) const;
  // I_n; I_0 = (0, 1)
  std::pair<Real, Real> interval(int n) const;

  // Digits through levels 1..N, stopping at a terminal tail. Retries at
  // doubled precision up to max_bits before giving up.
  PointAddress address_of(const Real& t, int N, unsigned max_bits = 4096) const;
  Real numeric_of(const PointAddress& x) const;

  // Digits of γ·w_0^{d_1}...w_{m-1}^{d_m}; the tail is kept. Works at any
  // depth the tower has shift words for.
  PointAddress act(const Word& g, const PointAddress& x) const;
  std::vector<BigInt> act_digits(const Word& g, const std::vector<BigInt>& d) const;
  Real act_numeric(const Word& g, const Real& t, int N) const;

  // Taylor expansion of the stage action of g at x through the branch that
  // x's digits select. At a terminal address `side` picks the tile on the
  // left (digits ending d_m − 1, tail f_m(s_m)) or the right of the point.
  Series act_series(const Word& g, const PointAddress& x, int order, Side side = Side::Right) const;
  Real act_derivative(const Word& g, const PointAddress& x, int m, Side side = Side::Right) const;

  // m for a terminal address (stabilizer conjugate to Γ_m), nothing otherwise.
  static std::optional<int> stabilizer_level(const PointAddress& x);

  // F_1^{d_1}...F_n^{d_n} applied to a series (n = d.size()).
  Series push(const std::vector<BigInt>& d, Series s) const;
  // its inverse
  Series pull(const std::vector<BigInt>& d, Series s) const;

 private:
  const std::vector<StepMap>& maps() const;

  struct Cache {
    std::mutex mutex;
    std::map<unsigned, std::vector<StepMap>> maps;  // by working bits
  };

  Tower tower_;
  std::vector<double> eps_;
  std::shared_ptr<Cache> cache_;
};

// K_n ∩ [lo, hi]: terminal addresses of depth m <= n whose deeper digits
// (levels >= 2) are bounded by deep_bound, sorted by position. Level-1 digits
// range over every tile meeting the window. Stops after `limit` points.
std::vector<PointAddress> k_points(const TowerAction& act, int n, const Real& lo, const Real& hi,
                                   std::int64_t deep_bound, std::size_t limit = 100000);

// Orbit of t under words of length <= L at stage N, one point per coset of
// Γ_N (Schreier breadth-first search). Sorted by position.
struct OrbitPoint {
  Real value;
  PointAddress address;
  int distance = 0;  // word length reaching it
};
std::vector<OrbitPoint> orbit_sample(const TowerAction& act, const Real& t, int L, int N,
                                     std::size_t max_points = 200000);

}  // namespace surfdiff

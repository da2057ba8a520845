// Interval diffeomorphisms that are translations in a flat chart, so every
// integer power costs one chart round trip.
//
// On (α, β) with u = (y − α)/(β − α) and v = 1 − u the chart is
// χ(y) = exp(1/v) − exp(1/u), an increasing bijection onto ℝ whose inverse
// decays faster than any power at both ends. f = χ⁻¹(χ + ε) is then the
// identity to all orders at α and β.
#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "surfdiff/real.hpp"
#include "surfdiff/taylor.hpp"

namespace surfdiff {

class FlatChart {
 public:
  FlatChart(Real alpha, Real beta);

  const Real& alpha() const { return alpha_; }
  const Real& beta() const { return beta_; }
  Real width() const { return beta_ - alpha_; }
  bool inside(const Real& y) const { return y > alpha_ && y < beta_; }

  // ±inf where exp overflows (only within 1e-18 of an end).
  Real chi(const Real& y) const;
  Real dchi(const Real& y) const;
  // Taylor expansion of χ(y + h) in h; y must be inside.
  Series series(const Real& y, int order) const;
  Real inverse(const Real& c) const;

 private:
  Real alpha_, beta_;
};

inline constexpr long kMaxTileBits = 1L << 17;

enum class TileStatus { Interior, Terminal, Undecided };

struct TileIndex {
  BigInt k;
  Real tail;  // in [s, f(s)); equal to s when terminal
  TileStatus status = TileStatus::Interior;
};

class StepMap {
 public:
  StepMap(FlatChart chart, double epsilon);
  StepMap(const Real& alpha, const Real& beta, double epsilon) : StepMap(FlatChart(alpha, beta), epsilon) {}

  const FlatChart& chart() const { return chart_; }
  double epsilon() const { return epsilon_; }
  // χ⁻¹(0), the midpoint by symmetry of the chart
  Real anchor() const;

  Real eval(const Real& y) const { return eval_pow(BigInt(1), y); }
  // f^k(y); the identity off the open interval, flagged through `outside`.
  Real eval_pow(const BigInt& k, const Real& y, bool* outside = nullptr) const;
  Series apply_pow(const BigInt& k, const Series& s) const;
  // m-th derivative of f^k at y
  Real derivative(int m, const Real& y, const BigInt& k = BigInt(1)) const;

  // (s, f(s)); its translates tile (α, β)
  std::pair<Real, Real> fundamental_interval() const;
  // Terminal tails are decided within 2^-(7/8 bits) of s; an undecided band
  // above that asks the caller for more precision. Huge tile indices are
  // reduced at extra precision, up to kMaxTileBits.
  TileIndex tile_index(const Real& t) const;

  // "alpha beta epsilon bits"
  std::string serialize() const;
  static StepMap parse(const std::string& line);

 private:
  FlatChart chart_;
  double epsilon_;
};

struct CkDistance {
  Real value;
  Real where;  // grid point attaining it
  int order = 0;
  int grid = 0;
};

// max over the grid (interior points) and orders 0..k of |f^(i) − id^(i)|; a
// sampled lower bound for the C^k distance.
CkDistance ck_distance_to_id(const StepMap& f, int k, int grid);

// Smooth step: 0 on [−1, −1/2], 1 on [1/2, 1], the normalized integral of
// exp(−1/(1/4 − x²)) in between.
class TransitionFn {
 public:
  Real operator()(const Real& x) const;
};

// (1 − g(x))·y + g(x)·f(y)
Real leaf_value(const TransitionFn& g, const StepMap& f, const Real& x, const Real& y);

// CSV grid report: y, f(y), then the first `orders` derivatives.
void write_grid_csv(std::ostream& out, const StepMap& f, int points, int orders);

}  // namespace surfdiff

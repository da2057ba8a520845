// Iterated Z-covers of the one-vertex genus-2 complex, encoded by height
// states, and the cocycles that define them.
#pragma once

#include <array>
#include <boost/multiprecision/gmp.hpp>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "surfdiff/word.hpp"

namespace surfdiff {

using BigInt = boost::multiprecision::mpz_int;
using Heights = std::vector<std::int64_t>;
using BigHeights = std::vector<BigInt>;

class TowerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when Φ_{i+1} is asked of a word outside Γ_i.
class NotInSubgroup : public TowerError {
 public:
  using TowerError::TowerError;
};

// An edge of the level-i cover: the lift of generator `gen` starting at the
// vertex with the given heights.
struct Edge {
  int gen = 0;
  Heights h;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct EdgeHash {
  std::size_t operator()(const Edge& e) const;
};

struct HeightsHash {
  std::size_t operator()(const Heights& h) const;
};

// Finitely supported integer 1-cochain on the level-`level` cover.
class Cocycle {
 public:
  explicit Cocycle(int level = 0) : level_(level) {}

  int level() const { return level_; }
  std::int64_t at(const Edge& e) const;
  std::int64_t at(int gen, const std::int64_t* h) const;
  std::int64_t at(int gen, const BigInt* h) const;
  void set(const Edge& e, std::int64_t value);
  void add(const Edge& e, std::int64_t value);

  std::size_t support_size() const { return values_.size(); }
  // Entries sorted by edge.
  std::vector<std::pair<Edge, std::int64_t>> entries() const;
  // Per-coordinate bounds of the support; empty when the support is empty.
  const std::vector<std::pair<std::int64_t, std::int64_t>>& box() const { return box_; }
  bool empty() const { return values_.empty(); }

  Cocycle scaled(std::int64_t k) const;
  // gcd of all values (0 for the zero cochain).
  std::int64_t content() const;

  // Indicator-style level-0 cocycle from values on a, b, p, q.
  static Cocycle base(std::array<std::int64_t, 4> values);

  friend bool operator==(const Cocycle& x, const Cocycle& y) {
    return x.level_ == y.level_ && x.values_ == y.values_;
  }

 private:
  void rebuild_box();
  bool in_box(const std::int64_t* h) const;

  int level_;
  std::unordered_map<Edge, std::int64_t, EdgeHash> values_;
  std::vector<std::pair<std::int64_t, std::int64_t>> box_;
};

struct Level {
  Cocycle cocycle;
  std::optional<Word> shift;  // w_i, unset while a level is provisional
};

class Tower {
 public:
  Tower() = default;

  // Number of installed cocycles; states on the top cover have this many heights.
  int depth() const { return static_cast<int>(levels_.size()); }
  const Level& level(int i) const { return levels_.at(static_cast<std::size_t>(i)); }
  const Cocycle& cocycle(int i) const { return level(i).cocycle; }
  const Word& shift(int i) const;
  bool complete() const;

  // Appends a cocycle of level depth(); throws if the level does not match.
  void push(Cocycle c, std::optional<Word> shift = std::nullopt);
  void set_shift(int i, Word w);
  void set_cocycle(int i, Cocycle c);
  void pop();
  Tower truncated(int depth) const;

  // Text format: "level i", "shift w", then lines "g h_1 .. h_i value".
  void write(std::ostream& out) const;
  static Tower read(std::istream& in);
  std::string to_text() const;
  static Tower from_text(const std::string& text);

  friend bool operator==(const Tower& x, const Tower& y);

  // The default first level: φ_0 = indicator of a, w_0 = a.
  static Tower standard_base();

 private:
  std::vector<Level> levels_;
};

// One letter of path lifting on the first h.size() levels.
void step(const Tower& t, Letter x, Heights& h);
void step(const Tower& t, Letter x, BigHeights& h);

// Lifts u starting at `start`, padded with zeros to n heights (n <= depth).
Heights trace(const Word& u, const Heights& start, const Tower& t, int n);
Heights trace(const Word& u, const Tower& t, int n);  // from the zero state
BigHeights trace(const Word& u, const BigHeights& start, const Tower& t);
// Height increments produced by each letter.
std::vector<Heights> trace_increments(const Word& u, const Heights& start, const Tower& t, int n);

// Sum of c over the lift of u from `start` (c lives on the cover with
// start.size() heights, built from the first start.size() levels of t).
std::int64_t cochain_sum(const Word& u, const Heights& start, const Tower& t, const Cocycle& c);

// Closedness of c against the first c.level() levels of t.
bool verify_cocycle(const Cocycle& c, const Tower& t);
// The first face (base vertex) where c fails, if any.
std::optional<Heights> closedness_witness(const Cocycle& c, const Tower& t);

// Φ_{i+1}(u); throws NotInSubgroup unless u ∈ Γ_i.
std::int64_t pairing(const Word& u, int i, const Tower& t);
bool membership(const Word& u, int n, const Tower& t);
// First level k (1-based) with Φ_k(u) != 0, or nullopt if u ∈ Γ_n.
std::optional<int> killing_level(const Word& u, int n, const Tower& t);

struct Digits {
  std::vector<std::int64_t> d;
  Word residual;
};
// Word-level digit extraction: d_1 = Φ_1(u), u <- w_0^{-d_1} u, ...
Digits digits(const Word& u, int n, const Tower& t);

// Vertex of the level-m cover attached to a digit vector, and back. The vertex
// of d is the lift of w_{m-1}^{-d_m} ... w_0^{-d_1} from the zero state.
BigHeights vertex_of_digits(const std::vector<BigInt>& d, const Tower& t);
std::vector<BigInt> digits_of_vertex(const BigHeights& v, const Tower& t);
// Lift of w_k^n from `h`, which must have zeros in coordinates < k. Passes far
// from every higher support are skipped in bulk.
void trace_shift_power(int k, const BigInt& n, BigHeights& h, const Tower& t);

// Range of each height coordinate along the lift of u from the zero state.
std::vector<std::pair<std::int64_t, std::int64_t>> excursion(const Word& u, const Tower& t, int n);

}  // namespace surfdiff

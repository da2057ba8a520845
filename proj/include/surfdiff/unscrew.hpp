// Building the filtration: kill the shortest surviving element with a closed
// cochain on the current top cover, one or two levels at a time.
#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "surfdiff/core.hpp"
#include "surfdiff/tower.hpp"

namespace surfdiff {

class UnscrewError : public std::runtime_error {
 public:
  enum class Kind { BallExhausted, Stuck, DepthCap };
  UnscrewError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct UnscrewConfig {
  int radius_start = 1;
  int radius_cap = 4;
  int budget = 2;      // coefficient bound for the two-level fallback
  int depth_cap = 16;  // total levels
  int shift_slack = 4;  // shift words may be this much longer than the target ball
  int shift_length = 10;  // shift search bound for provisional fallback levels
  bool improve = true;  // hill-climb on survivor kills
  int harvest_radius = 8;  // core radius used to pick among killing cocycles
  std::function<void(const struct LevelReport&)> on_level;  // progress hook
};

// Survivors the cocycle search should try to kill besides η.
struct KillContext {
  const std::vector<Word>* survivors = nullptr;
  bool improve = false;
  int harvest_radius = 0;  // rebuild the core this large once η is known killable
};

struct KillResult {
  Cocycle cocycle;
  std::int64_t eta_pairing = 0;
  std::size_t kills = 0;  // among the context's survivors
  int radius = 0;
};

Word shortest_nontrivial(int n, const Tower& t, int max_length);

// Closed cochain on the level-i cover pairing nontrivially with η, searched on
// the core of the given radius around η's lift.
std::optional<KillResult> find_killing_cocycle(const Word& eta, int i, const Tower& t, int radius,
                                               const KillContext& ctx = {});

// Two-level kill when no level-i cochain sees η. Returns (φ_i, φ_{i+1}).
std::pair<Cocycle, Cocycle> separating_fallback(const Word& eta, int i, const Tower& t, int budget,
                                                const UnscrewConfig& cfg, const KillContext& ctx = {});

// Shortlex-first w ∈ Γ_i of length <= max_length with Φ_{i+1}(w) = 1. The
// level-i cocycle may be divided by a common factor first; the factor used is
// returned through `renormalized` (1 if untouched).
Word choose_shift_word(int i, Tower& t, int max_length, std::int64_t* renormalized = nullptr);

// Shortlex-least loop of Γ_i with Φ_{i+1} = 1, by breadth-first search on the
// level-(i+1) cover (t must carry the level-i cocycle). Also reports the gcd
// of the pairings of the loops met.
std::optional<Word> loop_search(const Tower& t, int i, int max_length, std::int64_t* image_gcd = nullptr,
                                std::size_t max_states = 2000000);

struct LevelReport {
  int level = 0;           // index of the installed cocycle
  Word eta;                // target
  int eta_level = 0;       // level at which η was the shortest survivor
  int kill_levels = 1;     // 1, or 2 via the fallback
  int radius = 0;          // core radius used
  Word shift;
  std::size_t support = 0;
  std::int64_t renormalized = 1;
  std::size_t survivors_before = 0;
  std::size_t survivors_after = 0;
};

struct ScheduleReport {
  int ball = 0;
  std::vector<LevelReport> levels;
  std::size_t ball_size = 0;  // nontrivial elements of the ball
  bool two_step_warning = false;
  std::string to_json() const;
};

std::pair<Tower, ScheduleReport> extend_schedule(Tower t, int L, const UnscrewConfig& cfg = {});

}  // namespace surfdiff

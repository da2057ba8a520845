// Batch orchestration: build a tower and its step sizes, run the verification
// suites, dump orbit and foliation-slice data. Everything lands under
// config.outdir next to a manifest.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "surfdiff/conditions.hpp"
#include "surfdiff/unscrew.hpp"

namespace surfdiff {

using json = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kUsage = 1, kBuildFailed = 2, kVerifyFailed = 3, kMissingInput = 4 };

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class BuildError : public std::runtime_error {
 public:
  BuildError(const std::string& stage, int level, const std::string& what);
  const std::string& stage() const { return stage_; }
  int level() const { return level_; }

 private:
  std::string stage_;
  int level_;
};

struct RunConfig {
  int ball = 6;          // kill every nontrivial element of length <= ball
  int depth_cap = 16;
  double eps = 0.1;      // ε_global
  int stages = 3;        // N: levels that get step maps
  int grid = 4096;       // sample points per stage distance
  int csv_points = 257;  // rows of the per-level grid reports
  unsigned bits = 256;
  int radius_cap = 4;
  int budget = 2;
  std::uint64_t seed = 1;
  std::string outdir = "surfdiff-out";

  // suite sizes
  int fuzz = 10000;
  int disjoint_radius = 8;
  int stabilizer_points = 100;
  int stabilizer_words = 200;
  int fixed_ball = 6;
  int orbit_radius = 12;
  double orbit_t = 0.6;
  int orbit_tiles = 10;
  int gluing_points = 50;
  unsigned gluing_bits = 200;
  int threads = 0;  // 0: hardware concurrency

  void validate() const;  // throws ConfigError
  json to_json() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static RunConfig from_json(const json& j);
  static RunConfig load(const std::filesystem::path& file);
  UnscrewConfig unscrew() const;
};

struct BuildResult {
  Tower tower;
  ScheduleReport schedule;
  std::vector<TuneStep> steps;
  std::vector<double> eps() const;
  int stages() const { return static_cast<int>(steps.size()); }
  TowerAction action() const { return TowerAction(tower, eps()); }
};

BuildResult build(const RunConfig& cfg);  // throws BuildError
void write_build(const RunConfig& cfg, const BuildResult& b);
BuildResult load_build(const RunConfig& cfg);  // throws std::runtime_error if absent

// One suite's outcome. The witness names what failed (word, point, stage,
// level) and is null on success.
struct SuiteResult {
  std::string name;
  bool pass = true;
  json details = json::object();
  json witness = nullptr;
};

struct VerificationReport {
  std::vector<SuiteResult> suites;
  std::map<std::string, double> seconds;  // kept out of to_json
  bool pass() const;
  const SuiteResult& at(const std::string& name) const;
  json to_json() const;
};

// Individual suites. Numeric ones read the working precision.
SuiteResult suite_cocycles(const Tower& t);
SuiteResult suite_faithfulness(const Tower& t, int L, std::vector<std::pair<Word, int>>* table = nullptr);
SuiteResult suite_level_one(const Tower& t, int L);
SuiteResult suite_representatives(const Tower& t, int count, std::uint64_t seed);
SuiteResult suite_group_law(const TowerAction& act, int N, int count, std::uint64_t seed);
SuiteResult suite_nesting(const TowerAction& act, int N);
SuiteResult suite_stage_distance(const TowerAction& act, int N, double eps, int grid);
SuiteResult suite_disjointness(const TowerAction& act, int N, int L);
SuiteResult suite_agreement(const TowerAction& act, int N, std::uint64_t seed);
// fix ⟺ conjugated membership at sampled K-points; the points are returned
SuiteResult suite_stabilizers(const TowerAction& act, int N, int points, int words, std::uint64_t seed,
                              std::vector<PointAddress>* sampled = nullptr);
// no nontrivial word of length <= L fixes sampled points of I_N (digits below
// level N in {-1, 0, 1}), read at the full tower depth
SuiteResult suite_free_points(const Tower& t, int N, int points, int L, std::uint64_t seed);
SuiteResult suite_no_fixed_point(const TowerAction& act, int N, const std::vector<PointAddress>& extra,
                                 int points, std::uint64_t seed);
SuiteResult suite_orbit(const TowerAction& act, const Real& t, int L, int N, int tiles);
SuiteResult suite_diameters(const TowerAction& act, int N, const Real& lo, const Real& hi);
SuiteResult suite_gluing(const TowerAction& act, int points, unsigned bits);
SuiteResult suite_flatness(double eps, unsigned bits);

// All suites; combinatorial ones run on a worker pool.
VerificationReport verify(const RunConfig& cfg, const BuildResult& b);
void write_verification(const RunConfig& cfg, const BuildResult& b, const VerificationReport& r);

// Adds `delta` to φ_level on the first generator edge at the zero state where
// that breaks closedness. Level 0 has no such edge: every base cochain closes.
Tower corrupt_cocycle(const Tower& t, int level, std::int64_t delta = 1);

// Orbit of t at stage N under the radius-L ball, restricted to [lo, hi]:
// value, distance, digits. The summary holds tile coverage and per-level max
// tile diameter in the window.
json write_orbit_csv(std::ostream& out, const TowerAction& act, const Real& t, int L, int N, const Real& lo,
                     const Real& hi);
// Leaf graphs (1 − g(x))·y + g(x)·f_n(y) over x ∈ [−1, 1], y ∈ I_{n-1}.
void write_slice_csv(std::ostream& out, const TowerAction& act, int n, int columns, int rows);

// Human-readable digest of verification.json.
std::string render_report(const json& verification);

// manifest.json: every artifact with its size and FNV-1a hash; timing.json is
// listed but unhashed.
void write_manifest(const std::filesystem::path& outdir);

}  // namespace surfdiff

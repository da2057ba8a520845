#include "surfdiff/harness.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace surfdiff {

namespace fs = std::filesystem;

namespace {

std::string fmt(const Real& x) { return to_string(x, 12); }

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << text;
}

std::string read_text(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("missing " + file.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

BuildError::BuildError(const std::string& stage, int level, const std::string& what)
    : std::runtime_error(what), stage_(stage), level_(level) {}

void RunConfig::validate() const {
  const auto need = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  need(ball >= 0, "ball must be nonnegative");
  need(depth_cap > 0, "depth cap must be positive");
  need(eps > 0 && eps < 1, "epsilon must lie in (0, 1)");
  need(stages >= 0, "stages must be nonnegative");
  need(grid > 0 && csv_points > 1, "grids must be positive");
  need(bits >= 64 && gluing_bits >= 64, "precision must be at least 64 bits");
  need(radius_cap > 0 && budget > 0, "unscrew caps must be positive");
  need(fuzz >= 0 && disjoint_radius >= 0 && stabilizer_points >= 0 && stabilizer_words >= 0, "suite sizes");
  need(fixed_ball >= 0 && orbit_radius >= 0 && orbit_tiles >= 0 && gluing_points >= 0, "suite sizes");
  need(orbit_t > 0 && orbit_t < 1, "orbit point must lie in (0, 1)");
  need(threads >= 0, "threads must be nonnegative");
  need(!outdir.empty(), "output directory must be set");
}

json RunConfig::to_json() const {
  return {{"ball", ball},
          {"depth_cap", depth_cap},
          {"eps", eps},
          {"stages", stages},
          {"grid", grid},
          {"csv_points", csv_points},
          {"bits", bits},
          {"radius_cap", radius_cap},
          {"budget", budget},
          {"seed", seed},
          {"outdir", outdir},
          {"fuzz", fuzz},
          {"disjoint_radius", disjoint_radius},
          {"stabilizer_points", stabilizer_points},
          {"stabilizer_words", stabilizer_words},
          {"fixed_ball", fixed_ball},
          {"orbit_radius", orbit_radius},
          {"orbit_t", orbit_t},
          {"orbit_tiles", orbit_tiles},
          {"gluing_points", gluing_points},
          {"gluing_bits", gluing_bits},
          {"threads", threads}};
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const json defaults = c.to_json();
  for (const auto& [key, value] : j.items())
    if (!defaults.contains(key)) throw ConfigError("unknown config key: " + key);
  const auto get = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("bad value for ") + key + ": " + e.what());
    }
  };
  get("ball", c.ball);
  get("depth_cap", c.depth_cap);
  get("eps", c.eps);
  get("stages", c.stages);
  get("grid", c.grid);
  get("csv_points", c.csv_points);
  get("bits", c.bits);
  get("radius_cap", c.radius_cap);
  get("budget", c.budget);
  get("seed", c.seed);
  get("outdir", c.outdir);
  get("fuzz", c.fuzz);
  get("disjoint_radius", c.disjoint_radius);
  get("stabilizer_points", c.stabilizer_points);
  get("stabilizer_words", c.stabilizer_words);
  get("fixed_ball", c.fixed_ball);
  get("orbit_radius", c.orbit_radius);
  get("orbit_t", c.orbit_t);
  get("orbit_tiles", c.orbit_tiles);
  get("gluing_points", c.gluing_points);
  get("gluing_bits", c.gluing_bits);
  get("threads", c.threads);
  c.validate();
  return c;
}

RunConfig RunConfig::load(const fs::path& file) {
  json j;
  try {
    j = json::parse(read_text(file));
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return from_json(j);
}

UnscrewConfig RunConfig::unscrew() const {
  UnscrewConfig u;
  u.depth_cap = depth_cap;
  u.radius_cap = radius_cap;
  u.budget = budget;
  return u;
}

std::vector<double> BuildResult::eps() const {
  std::vector<double> e;
  for (const TuneStep& s : steps) e.push_back(s.eps);
  return e;
}

BuildResult build(const RunConfig& cfg) {
  cfg.validate();
  BuildResult b;
  int level = 0;
  UnscrewConfig u = cfg.unscrew();
  u.on_level = [&](const LevelReport& r) { level = r.level + r.kill_levels; };
  try {
    std::tie(b.tower, b.schedule) = extend_schedule(Tower{}, cfg.ball, u);
  } catch (const UnscrewError& e) {
    const char* kind = e.kind() == UnscrewError::Kind::BallExhausted ? "ball exhausted"
                       : e.kind() == UnscrewError::Kind::Stuck       ? "unscrewing stuck"
                                                                      : "depth cap";
    throw BuildError(kind, level, e.what());
  }
  int stages = 0;
  while (stages < std::min(cfg.stages, b.tower.depth()) && b.tower.level(stages).shift) ++stages;
  if (stages == 0) return b;
  PrecisionScope p(cfg.bits);
  try {
    b.steps = tune_epsilons(b.tower, stages, cfg.eps, cfg.grid).second;
  } catch (const std::runtime_error& e) {
    throw BuildError("step tuning", static_cast<int>(b.steps.size()) + 1, e.what());
  }
  return b;
}

void write_build(const RunConfig& cfg, const BuildResult& b) {
  const fs::path dir(cfg.outdir);
  fs::create_directories(dir);
  write_text(dir / "config.json", cfg.to_json().dump(2) + "\n");
  write_text(dir / "tower.txt", b.tower.to_text());
  write_text(dir / "schedule.json", b.schedule.to_json() + "\n");
  json steps = json::array();
  for (const TuneStep& s : b.steps)
    steps.push_back({{"level", s.level}, {"eps", s.eps}, {"distance", fmt(s.distance)}, {"target", fmt(s.target)},
                     {"halvings", s.halvings}, {"tiles", s.tiles}});
  write_text(dir / "steps.json",
             json{{"eps_global", cfg.eps}, {"grid", cfg.grid}, {"bits", cfg.bits}, {"steps", steps}}.dump(2) + "\n");
  if (!b.steps.empty()) {
    PrecisionScope p(cfg.bits);
    const TowerAction act = b.action();
    std::string maps;
    for (int n = 1; n <= act.depth(); ++n) {
      maps += act.map(n).serialize() + "\n";
      std::ostringstream csv;
      write_grid_csv(csv, act.map(n), cfg.csv_points, n);
      write_text(dir / ("grid_level_" + std::to_string(n) + ".csv"), csv.str());
    }
    write_text(dir / "maps.txt", maps);
  }
  write_manifest(dir);
}

BuildResult load_build(const RunConfig& cfg) {
  const fs::path dir(cfg.outdir);
  BuildResult b;
  b.tower = Tower::from_text(read_text(dir / "tower.txt"));
  const json steps = json::parse(read_text(dir / "steps.json"));
  PrecisionScope p(cfg.bits);
  for (const json& s : steps.at("steps")) {
    TuneStep t;
    t.level = s.at("level");
    t.eps = s.at("eps");
    t.distance = parse_real(s.at("distance").get<std::string>());
    t.target = parse_real(s.at("target").get<std::string>());
    t.halvings = s.at("halvings");
    t.tiles = s.at("tiles");
    b.steps.push_back(std::move(t));
  }
  return b;
}

bool VerificationReport::pass() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.pass; });
}

const SuiteResult& VerificationReport::at(const std::string& name) const {
  for (const SuiteResult& s : suites)
    if (s.name == name) return s;
  throw std::out_of_range("no suite " + name);
}

json VerificationReport::to_json() const {
  json out{{"pass", pass()}, {"suites", json::array()}};
  for (const SuiteResult& s : suites)
    out["suites"].push_back({{"name", s.name}, {"pass", s.pass}, {"details", s.details}, {"witness", s.witness}});
  return out;
}

void write_verification(const RunConfig& cfg, const BuildResult& b, const VerificationReport& r) {
  const fs::path dir(cfg.outdir);
  fs::create_directories(dir);
  json report = r.to_json();
  report["seed"] = cfg.seed;
  report["bits"] = cfg.bits;
  report["depth"] = b.tower.depth();
  report["eps"] = b.eps();
  write_text(dir / "verification.json", report.dump(2) + "\n");

  std::vector<std::pair<Word, int>> table;
  suite_faithfulness(b.tower, cfg.ball, &table);
  std::string csv = "word,first_killing_level\n";
  for (const auto& [w, k] : table) csv += w.str() + "," + std::to_string(k) + "\n";
  write_text(dir / "faithfulness.csv", csv);

  std::string dist = "level,generator,distance,bound,order\n";
  for (const SuiteResult& s : r.suites) {
    if (s.name != "stage_distance") continue;
    for (const json& row : s.details.at("table"))
      dist += std::to_string(row.at("level").get<int>()) + "," + row.at("generator").get<std::string>() + "," +
              row.at("distance").get<std::string>() + "," + row.at("bound").get<std::string>() + "," +
              std::to_string(row.at("order").get<int>()) + "\n";
  }
  write_text(dir / "stage_distance.csv", dist);

  json timing = json::object();
  for (const auto& [name, secs] : r.seconds) timing[name] = secs;
  write_text(dir / "timing.json", timing.dump(2) + "\n");
  write_manifest(dir);
}

Tower corrupt_cocycle(const Tower& t, int level, std::int64_t delta) {
  if (level < 1 || level >= t.depth()) throw std::invalid_argument("no corruptible level " + std::to_string(level));
  for (int gen = 0; gen < 4; ++gen) {
    Cocycle c = t.cocycle(level);
    c.add(Edge{gen, Heights(static_cast<std::size_t>(level), 0)}, delta);
    if (verify_cocycle(c, t)) continue;
    Tower out = t;
    out.set_cocycle(level, std::move(c));
    return out;
  }
  throw std::invalid_argument("every zero-state perturbation at level " + std::to_string(level) + " stays closed");
}

json write_orbit_csv(std::ostream& out, const TowerAction& act, const Real& t, int L, int N, const Real& lo,
                     const Real& hi) {
  json summary{{"t", fmt(t)}, {"radius", L}, {"stage", N}, {"window", {fmt(lo), fmt(hi)}}};
  out << "value,distance,digits\n";
  if (!(lo < hi)) {
    summary["points"] = 0;
    return summary;
  }
  const std::vector<OrbitPoint> orbit = orbit_sample(act, t, L, N);
  std::set<BigInt> tiles;
  std::size_t kept = 0;
  for (const OrbitPoint& o : orbit) {
    if (o.value < lo || o.value > hi) continue;
    ++kept;
    out << to_string(o.value, 20) << ',' << o.distance << ',';
    for (std::size_t i = 0; i < o.address.digits.size(); ++i) out << (i ? " " : "") << o.address.digits[i];
    out << '\n';
    if (!o.address.digits.empty()) tiles.insert(o.address.digits[0]);
  }
  summary["points"] = kept;
  summary["orbit_size"] = orbit.size();
  if (t > 0 && t < 1 && N > 0) {
    const BigInt k0 = act.address_of(t, N).digits.at(0);
    int reach = 0;
    while (tiles.count(k0 - reach - 1) && tiles.count(k0 + reach + 1)) ++reach;
    summary["tile_of_t"] = k0.str();
    summary["level1_tiles"] = tiles.size();
    summary["contiguous_radius"] = reach;
  }
  const Real wlo = max(lo, Real("1e-6")), whi = min(hi, Real(1) - Real("1e-6"));
  if (wlo < whi) {
    json d = json::array();
    for (int n = 1; n <= N; ++n) d.push_back(fmt(max_tile_diameter(act, n, wlo, whi, 64).value));
    summary["max_tile_diameter"] = std::move(d);
  }
  return summary;
}

void write_slice_csv(std::ostream& out, const TowerAction& act, int n, int columns, int rows) {
  const StepMap& f = act.map(n);
  const auto [lo, hi] = act.interval(n - 1);
  const TransitionFn g;
  out << "x,y,value\n";
  for (int i = 0; i < columns; ++i) {
    const Real x = Real(-1) + Real(2) * i / (columns - 1);
    for (int j = 0; j < rows; ++j) {
      const Real y = lo + (hi - lo) * j / (rows - 1);
      out << to_string(x, 20) << ',' << to_string(y, 20) << ',' << to_string(leaf_value(g, f, x, y), 20) << '\n';
    }
  }
}

std::string render_report(const json& v) {
  std::ostringstream out;
  out << "verification: " << (v.at("pass").get<bool>() ? "PASS" : "FAIL");
  if (v.contains("depth")) out << "  depth " << v.at("depth");
  if (v.contains("eps")) out << "  eps " << v.at("eps").dump();
  out << "\n";
  for (const json& s : v.at("suites")) {
    out << (s.at("pass").get<bool>() ? "  PASS  " : "  FAIL  ") << s.at("name").get<std::string>();
    std::string brief;
    for (const auto& [k, x] : s.at("details").items())
      if (x.is_primitive()) brief += " " + k + "=" + (x.is_string() ? x.get<std::string>() : x.dump());
    out << brief << "\n";
    if (!s.at("witness").is_null()) out << "        witness " << s.at("witness").dump() << "\n";
  }
  return out.str();
}

void write_manifest(const fs::path& outdir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(outdir))
    if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  json list = json::array();
  for (const fs::path& f : files) {
    const std::string bytes = read_text(f);
    json entry{{"file", f.filename().string()}};
    if (f.filename() == "timing.json") {
      entry["volatile"] = true;
    } else {
      entry["bytes"] = bytes.size();
      char hex[17];
      std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
      entry["fnv1a64"] = hex;
    }
    list.push_back(std::move(entry));
  }
  write_text(outdir / "manifest.json", json{{"files", list}}.dump(2) + "\n");
}

}  // namespace surfdiff

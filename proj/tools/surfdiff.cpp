#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "surfdiff/harness.hpp"

using namespace surfdiff;

namespace {

int error(int code, const std::string& kind, const std::string& what, int level = -1) {
  json e{{"error", kind}, {"message", what}};
  if (level >= 0) e["level"] = level;
  std::cerr << e.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smooth surface-group actions on the interval, built from a tower of cyclic covers"};
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cfg;
  std::string config_file;
  app.add_option("--config", config_file, "JSON run config; flags override it")->check(CLI::ExistingFile);
  std::map<std::string, CLI::Option*> flags;
  flags["ball"] = app.add_option("--ball", cfg.ball, "kill the ball of this radius");
  flags["depth_cap"] = app.add_option("--depth-cap", cfg.depth_cap);
  flags["eps"] = app.add_option("--eps", cfg.eps, "global epsilon in (0, 1)");
  flags["stages"] = app.add_option("--stages", cfg.stages, "levels that get step maps");
  flags["grid"] = app.add_option("--grid", cfg.grid, "sample points per stage distance");
  flags["csv_points"] = app.add_option("--csv-points", cfg.csv_points);
  flags["bits"] = app.add_option("--bits", cfg.bits, "working precision");
  flags["radius_cap"] = app.add_option("--radius-cap", cfg.radius_cap);
  flags["budget"] = app.add_option("--budget", cfg.budget);
  flags["seed"] = app.add_option("--seed", cfg.seed);
  flags["outdir"] = app.add_option("--outdir,-o", cfg.outdir);
  flags["fuzz"] = app.add_option("--fuzz", cfg.fuzz, "fuzz cases per suite");
  flags["threads"] = app.add_option("--threads", cfg.threads);

  auto* build_cmd = app.add_subcommand("build", "build the tower and tune the step sizes");
  auto* verify_cmd = app.add_subcommand("verify", "run every verification suite on a built tower");
  int corrupt_level = -1;
  verify_cmd->add_option("--corrupt-level", corrupt_level, "perturb one cocycle entry first (fault injection)");

  auto* orbit_cmd = app.add_subcommand("orbit", "dump an orbit sample as CSV");
  double t = 0.6, lo = 0.2, hi = 0.8;
  int radius = 10;
  orbit_cmd->add_option("--t", t);
  orbit_cmd->add_option("--radius", radius);
  orbit_cmd->add_option("--lo", lo);
  orbit_cmd->add_option("--hi", hi);

  auto* slice_cmd = app.add_subcommand("slice", "leaf graphs of one level as CSV");
  int level = 1, columns = 21, rows = 101;
  slice_cmd->add_option("--level", level);
  slice_cmd->add_option("--columns", columns)->check(CLI::Range(2, 100000));
  slice_cmd->add_option("--rows", rows)->check(CLI::Range(2, 100000));

  auto* report_cmd = app.add_subcommand("report", "summarize verification.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (!config_file.empty()) {
      // flags given on the command line win over the file
      json j = RunConfig::load(config_file).to_json();
      const json given = cfg.to_json();
      for (const auto& [key, opt] : flags)
        if (opt->count()) j[key] = given[key];
      cfg = RunConfig::from_json(j);
    }
    cfg.validate();
  } catch (const ConfigError& e) {
    return error(kUsage, "config", e.what());
  }
  const std::filesystem::path dir(cfg.outdir);

  if (build_cmd->parsed()) {
    try {
      const BuildResult b = build(cfg);
      write_build(cfg, b);
      std::cout << "built depth " << b.tower.depth() << ", " << b.stages() << " stages under " << dir << "\n";
      return kOk;
    } catch (const BuildError& e) {
      std::filesystem::create_directories(dir);
      std::ofstream(dir / "build_error.json")
          << json{{"error", e.stage()}, {"level", e.level()}, {"message", e.what()}}.dump(2) << "\n";
      return error(kBuildFailed, e.stage(), e.what(), e.level());
    }
  }

  if (report_cmd->parsed()) {
    std::ifstream in(dir / "verification.json");
    if (!in) return error(kMissingInput, "missing input", "no verification.json under " + dir.string());
    const json v = json::parse(in);
    const std::string text = render_report(v);
    std::ofstream(dir / "report.txt") << text;
    write_manifest(dir);
    std::cout << text;
    return v.at("pass").get<bool>() ? kOk : kVerifyFailed;
  }

  BuildResult b;
  try {
    b = load_build(cfg);
  } catch (const std::exception& e) {
    return error(kMissingInput, "missing input", e.what());
  }

  if (verify_cmd->parsed()) {
    if (corrupt_level >= 0) {
      try {
        b.tower = corrupt_cocycle(b.tower, corrupt_level);
      } catch (const std::invalid_argument& e) {
        return error(kUsage, "config", e.what());
      }
    }
    const VerificationReport r = verify(cfg, b);
    write_verification(cfg, b, r);
    std::ifstream in(dir / "verification.json");
    std::cout << render_report(json::parse(in));
    return r.pass() ? kOk : kVerifyFailed;
  }

  PrecisionScope p(cfg.bits);
  const TowerAction act = b.action();
  if (orbit_cmd->parsed()) {
    if (act.depth() == 0) return error(kMissingInput, "missing input", "the tower has no step maps");
    std::ofstream csv(dir / "orbit.csv");
    const json summary = write_orbit_csv(csv, act, Real(t), radius, act.depth(), Real(lo), Real(hi));
    csv.close();
    std::ofstream(dir / "orbit_summary.json") << summary.dump(2) << "\n";
    write_manifest(dir);
    std::cout << summary.dump(2) << "\n";
    return kOk;
  }
  if (slice_cmd->parsed()) {
    if (level < 1 || level > act.depth()) return error(kUsage, "config", "no step map at that level");
    const std::string name = "slice_level_" + std::to_string(level) + ".csv";
    std::ofstream csv(dir / name);
    write_slice_csv(csv, act, level, columns, rows);
    csv.close();
    write_manifest(dir);
    std::cout << "wrote " << (dir / name).string() << "\n";
    return kOk;
  }
  return kUsage;
}

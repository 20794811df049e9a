#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rssl/lab.hpp"

namespace {

using nlohmann::ordered_json;

int cmd_run(const std::string& config_path, const rssl::RunOptions& opts) {
  const rssl::ScenarioConfig cfg = rssl::load_scenario(config_path);
  const rssl::RunResult res = rssl::run_scenario(cfg, opts);
  if (!opts.dry_run && res.exit_code != 2) {
    std::printf("%s\n", res.summary.dump(2).c_str());
  }
  return res.exit_code;
}

int cmd_validate(const std::string& config_path, bool override_windows) {
  const rssl::ScenarioConfig cfg = rssl::load_scenario(config_path);
  const rssl::ValidationReport rep = rssl::validate_scenario(cfg, override_windows);
  ordered_json out;
  out["name"] = cfg.name;
  out["ok"] = rep.ok;
  out["violations"] = rep.violations;
  out["warnings"] = rep.warnings;
  if (rep.ok) {
    const rssl::RunSetup setup = rssl::prepare_run(cfg);
    ordered_json derived;
    derived["c_g"] = setup.profile.c_g();
    derived["bound_eigenvalue"] = setup.bound.eigenvalue;
    derived["bound_residual"] = setup.bound.residual;
    if (setup.defect) derived["defect_eigenvalue"] = setup.defect->eigenvalue;
    if (setup.soliton) derived["soliton_energy"] = setup.soliton->eigenvalue;
    derived["t0"] = setup.t0;
    derived["s0"] = setup.s0;
    derived["g_t_end"] = setup.profile.g(cfg.t_end);
    derived["dilation_overflow_tail"] =
        rssl::dilation_overflow_tail(setup.bound.state, setup.profile.g(cfg.t_end));
    derived["initial_mass"] = rssl::mass(setup.initial);
    out["derived"] = derived;
  }
  std::printf("%s\n", out.dump(2).c_str());
  return rep.ok ? 0 : 2;
}

int cmd_calibrate(const std::string& config_path) {
  const rssl::ScenarioConfig cfg = rssl::load_scenario(config_path);
  const rssl::CalibrationReport rep = rssl::calibrate_potential(cfg);
  ordered_json out;
  out["depth_one"] = rep.depth_one;
  out["depth_two"] = rep.depth_two;
  out["suggested"] = rep.suggested;
  out["states_at_suggested"] = rep.states_at_suggested;
  std::printf("%s\n", out.dump(2).c_str());
  return rep.states_at_suggested == 1 ? 0 : 1;
}

int cmd_accept(const std::string& suite_dir, const rssl::RunOptions& base_opts) {
  std::vector<std::filesystem::path> configs;
  for (const auto& entry : std::filesystem::directory_iterator(suite_dir)) {
    if (entry.path().extension() == ".toml") configs.push_back(entry.path());
  }
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) {
    std::fprintf(stderr, "no .toml scenario configs under %s\n", suite_dir.c_str());
    return 2;
  }
  int worst = 0;
  for (const auto& path : configs) {
    const rssl::ScenarioConfig cfg = rssl::load_scenario(path.string());
    rssl::RunOptions opts = base_opts;
    if (!base_opts.out_override.empty()) {
      opts.out_override = (std::filesystem::path(base_opts.out_override) / cfg.name).string();
    }
    const rssl::RunResult res = rssl::run_scenario(cfg, opts);
    worst = std::max(worst, res.exit_code);
    if (res.exit_code == 2 || opts.dry_run) continue;
    for (const auto& item : res.summary["criteria"].items()) {
      const auto& c = item.value();
      const bool enabled = c["enabled"].get<bool>();
      const bool pass = c["pass"].get<bool>();
      std::printf("[%s] %s: %s\n", !enabled ? "SKIP" : (pass ? "PASS" : "FAIL"),
                  cfg.name.c_str(), item.key().c_str());
    }
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"radial self-similar scattering lab"};
  app.require_subcommand(1);

  std::string config_path, suite_dir;
  rssl::RunOptions opts;

  CLI::App* run = app.add_subcommand("run", "execute a scenario config");
  run->add_option("config", config_path, "scenario config file")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_flag("--dry-run", opts.dry_run, "print the resolved plan, write nothing");
  run->add_option("--out", opts.out_override, "override the output directory");
  run->add_flag("--override-windows", opts.override_windows,
                "downgrade parameter-window violations to warnings");

  CLI::App* validate = app.add_subcommand("validate", "check a scenario config");
  validate->add_option("config", config_path, "scenario config file")
      ->required()
      ->check(CLI::ExistingFile);
  validate->add_flag("--override-windows", opts.override_windows,
                     "downgrade parameter-window violations to warnings");

  CLI::App* calibrate = app.add_subcommand(
      "calibrate-potential", "depth window of the scaling well with exactly one bound state");
  calibrate->add_option("config", config_path, "scenario config file")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* accept = app.add_subcommand("accept", "run every scenario config in a directory");
  accept->add_option("suite", suite_dir, "directory of scenario configs")
      ->required()
      ->check(CLI::ExistingDirectory);
  accept->add_flag("--dry-run", opts.dry_run, "plan every scenario, write nothing");
  accept->add_option("--out", opts.out_override, "root output directory override");
  accept->add_flag("--override-windows", opts.override_windows,
                   "downgrade parameter-window violations to warnings");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, opts);
    if (validate->parsed()) return cmd_validate(config_path, opts.override_windows);
    if (calibrate->parsed()) return cmd_calibrate(config_path);
    if (accept->parsed()) return cmd_accept(suite_dir, opts);
  } catch (const rssl::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rssl/config.hpp"
#include "rssl/grid.hpp"
#include "rssl/model.hpp"
#include "rssl/spectral.hpp"

// Scenario orchestration: typed configuration, parameter-window validation,
// initial-time selection, the experiment runner with its diagnostics and
// acceptance gates, and the potential-depth calibrator.
namespace rssl {

enum class ScenarioKind { linear, mixture, nonlinear, free_channel };

const char* scenario_kind_name(ScenarioKind k);

struct ScenarioConfig {
  // [scenario]
  std::string name;
  ScenarioKind kind = ScenarioKind::linear;
  int dimension = 3;
  // [grid]
  double r_max = 0.0;
  long long npoints = 0;
  // [profile]
  double epsilon = 0.0;
  // [potential] — the scaling well V
  double depth = 4.0;
  double width = 1.0;
  // [defect] — optional static well W
  bool has_defect = false;
  double defect_depth = 0.0;
  double defect_width = 1.0;
  // [nonlinearity]
  double nl_strength = 0.0;
  double soliton_mass = 1.0;
  // [initial]
  std::string recipe;  // dilated_bound_state | defect_plus_dilated |
                       // soliton_plus_dilated | snapshot
  std::string snapshot_path;
  // [time]
  std::string t0_rule = "auto";  // auto | fixed
  double t0_fixed = 0.0;
  double t0_cap = 4096.0;
  double probe_span = 100.0;
  double dt = 0.0;
  double t_end = 0.0;
  double free_substep = 0.0;  // cap for embedded free flows at n >= 4 (0 = default)
  // [observe]
  long long observe_count = 0;
  std::string spacing = "geometric";  // geometric | linear
  // [diagnostics]
  double alpha = 0.0;  // 0 disables the free-channel family
  double beta = 0.0;   // 0 disables the weak-localization norms
  double cutoff_width = 0.1;
  std::vector<double> local_mass_radii;
  bool bubble_diag = false;
  bool second_bubble_diag = false;
  bool ledger_diag = false;
  bool weak_limit_diag = false;
  long long dictionary_size = 8;
  double probe_ds = 0.01;
  bool frame_residual_diag = false;
  // [fit]
  double final_decade = 10.0;      // "final decade" = s in [s_end/final_decade, s_end]
  double cauchy_window_div = 3.0;  // Cauchy fits use s1 <= s_end / this
  double plateau_rel_tol = 0.2;
  // [output]
  std::string out_dir;
  unsigned long long seed = 1;
};

ScenarioConfig scenario_from_config(const ConfigFile& file);
ScenarioConfig load_scenario(const std::string& path);

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> violations;  // hard rejections, each naming its window
  std::vector<std::string> warnings;    // soft notes (overridden windows etc.)
};
// override_windows downgrades the alpha/beta window clauses to warnings.
ValidationReport validate_scenario(const ScenarioConfig& cfg, bool override_windows = false);

// Relative amplitude of the state beyond r_max / g: the tail a dilation by g
// would push past the outer boundary (the run's content-overflow budget).
double dilation_overflow_tail(const RadialField& state, double g);

// Spectral solves, initial-time selection, and initial-state assembly.
struct RunSetup {
  RadialGrid grid;
  ScalingProfile profile;
  BoundState bound;                   // psi_b of the scaling well
  std::optional<BoundState> defect;   // psi_d of W (mixture)
  std::optional<BoundState> soliton;  // psi_s (nonlinear)
  double t0 = 0.0;
  double s0 = 0.0;
  RadialField initial;
};
RunSetup prepare_run(const ScenarioConfig& cfg);

// Doubling ladder from t = 1 up to t0_cap: the first rung whose probe run
// keeps |A| >= 0.9 over one s-decade (horizon capped by probe_span) and whose
// composite initial state keeps |(dilated psi_b, second)| <= 0.1 wins.
// "fixed" returns the configured value. Throws LadderExhausted.
double choose_t0(const ScenarioConfig& cfg, const RadialGrid& grid, const ScalingProfile& prof,
                 const BoundState& bound, const BoundState* second);

struct RunOptions {
  bool dry_run = false;
  bool override_windows = false;
  std::string out_override;
};

struct RunResult {
  int exit_code = 1;
  nlohmann::ordered_json summary;
  std::string out_dir;
};
// Executes the scenario and writes series.csv, snapshots, and summary.json
// into the output directory; exit_code 0 iff every enabled criterion passed.
RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& opts);

// Depth window of the scaling well with exactly one bound state, located by
// zero-energy node counting; suggested depth is the window's geometric mean.
struct CalibrationReport {
  double depth_one = 0.0;  // smallest depth with one bound state
  double depth_two = 0.0;  // smallest depth with two
  double suggested = 0.0;
  int states_at_suggested = 0;
};
CalibrationReport calibrate_potential(const ScenarioConfig& cfg);

}  // namespace rssl

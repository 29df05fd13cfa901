#pragma once

// Seeded Monte-Carlo experiments (fig2 to fig5 and custom): flat key = value
// configuration, a bounded worker pool over independent trials, and CSV
// output whose bytes depend only on (config, seed).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "secbeam/secure_design.hpp"

namespace secbeam {

inline constexpr const char* kVersion = "1.0.0";

enum class Experiment { Fig2, Fig3, Fig4, Fig5, Custom };

const char* to_string(Experiment e);
Experiment parse_experiment(const std::string& name);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every field has a key of the same name in the config file. Angles are in
/// degrees, powers in watts, gamma_b in dB.
struct ExperimentConfig {
  Experiment experiment = Experiment::Custom;
  Index n_antennas = 8;
  Index n_users = 2;
  double antenna_spacing = 0.5;
  Index frame_length = 30;
  double theta0_deg = 0.0;
  std::vector<double> delta_theta_deg{5.0};  // fig2 draws one design per value
  double desired_halfwidth_deg = 10.0;       // ideal pattern behind R_d
  double noise_power = 1.0;
  double target_gain_power = 1.0;
  std::vector<double> power_budget{1.0};
  // When set, gamma_bp and gamma_s are read as values at a 1 W budget and
  // scaled by P0^2 and P0 for each budget in the sweep.
  bool scale_thresholds_with_power = false;
  std::vector<double> gamma_b_db{10.0};
  double gamma_bp = 0.1;
  std::vector<double> gamma_s{1.0};
  double ripple = 0.1;
  double sidelobe_guard_deg = 10.0;
  double grid_resolution_deg = 1.0;
  int trials = 10;
  std::uint64_t seed = 1;
  int iter_max = 20;
  double epsilon = 1e-3;
  std::vector<DesignMode> modes{DesignMode::Precise, DesignMode::Uncertain};

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Canonical key = value listing, one key per line in a fixed order.
  std::string canonical() const;
  /// FNV-1a 64 of canonical(), as 16 hex digits.
  std::string hash() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Full-scale override: N = 18, K = 4, at least 50 trials.
void apply_paper_scale(ExperimentConfig& cfg);

/// Deterministic per-trial seed from (master seed, trial index, sweep index).
std::uint64_t trial_seed(std::uint64_t master, int trial, int sweep);

/// Scenario of one trial, thresholds of one sweep point.
Scenario make_scenario(const ExperimentConfig& cfg, double power_budget, double delta_theta_deg,
                       std::uint64_t seed);
Thresholds make_thresholds(const ExperimentConfig& cfg, double power_budget, double gamma_b_db, double gamma_s);
DesignOptions make_options(const ExperimentConfig& cfg);
AngularGrid make_grid(const ExperimentConfig& cfg);

/// Runs one design on one scenario; infeasible or failed designs return an
/// empty optional and set `status` / `family`.
struct TrialResult {
  DesignMode mode = DesignMode::Precise;
  double power_budget = 0.0;
  double gamma_b_db = 0.0;
  double gamma_s = 0.0;
  double delta_theta_deg = 0.0;
  int trial = 0;
  int sweep = 0;
  std::uint64_t seed = 0;
  std::string status;  // ok, infeasible, failed
  std::string family;  // binding family when infeasible
  int iterations = 0;
  int solver_iterations = 0;
  double sinr_eve = 0.0;
  double worst_sinr_eve = 0.0;
  double min_user_sinr = 0.0;
  double secrecy_rate = 0.0;
  double worst_secrecy_rate = 0.0;
  double max_rank1_defect = 0.0;
  double min_slack = 0.0;
  double power_error = 0.0;
  IterationTrace trace;
};

/// A single design run with validation, used by every sweep.
TrialResult run_design(const ExperimentConfig& cfg, DesignMode mode, double power_budget, double gamma_b_db,
                       double gamma_s, double delta_theta_deg, int trial, int sweep, DesignSolution* solution = nullptr);

/// Executes tasks 0..count-1 on up to `jobs` threads; each task writes only
/// its own slot, so results do not depend on scheduling.
void parallel_for(int count, int jobs, const std::function<void(int)>& task);

struct RunSummary {
  std::vector<std::filesystem::path> files;
  std::vector<TrialResult> trials;
  double wall_seconds = 0.0;
};

/// Writes the experiment's CSVs and manifest.txt into `out_dir`. Trial
/// failures are recorded in-row; only configuration errors throw.
RunSummary run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, int jobs);

/// Locale-independent shortest round-trip formatting; NaN prints as "nan".
std::string format_number(double v);

}  // namespace secbeam

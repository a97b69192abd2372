#pragma once

// Batch harness for the four-level example: single runs, initial-state
// sweeps, decay-rate scans and the controlled-versus-decay-only comparison.
//
// Angles are radians in memory. Config files and grid specs give them in
// units of pi.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dfsctl/control.hpp"
#include "dfsctl/four_level.hpp"
#include "dfsctl/lindblad.hpp"

namespace dfsctl::experiments {

/// Values, in radians, taken by each initial-state angle in a sweep.
struct AngleGrid {
  std::vector<double> beta1;
  std::vector<double> beta2;
  std::vector<double> beta3;

  std::size_t size() const { return beta1.size() * beta2.size() * beta3.size(); }
  /// Grid points in index order, beta3 varying fastest.
  std::vector<four_level::InitialAngles> points() const;
};

struct RunConfig {
  four_level::Params params{3.0, 5.0, kPi / 3.0, kPi / 4.0, {0.0, 0.0, 0.0}};
  four_level::InitialAngles angles{0.2 * kPi, 0.35 * kPi, 0.2 * kPi};
  ControlConfig control{};
  double dt = 1e-3;
  double t_max = 500.0;
  std::size_t sample_every = 100;
  double epsilon_conv = 0.01;
  AngleGrid grid = default_grid();
  std::vector<double> gammas = default_gammas();
  /// Rate used for the decay-only column of the comparison.
  double comparison_gamma = 0.1;
  /// Worker threads for batch runs; 0 picks the hardware concurrency.
  std::size_t threads = 0;

  static constexpr double kPi = 3.14159265358979323846;
  /// beta1, beta2 over [0, 0.5] pi in steps of 0.05 pi, beta3 = 0.25 pi.
  static AngleGrid default_grid();
  /// 0, 0.05, ..., 0.5.
  static std::vector<double> default_gammas();

  void validate() const;
};

/// Parses the JSON config format. Missing keys keep their defaults.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const RunConfig& cfg);

/// Parses "start:stop:step" or "v1,v2,..." in units of pi into radians.
std::vector<double> parse_range(const std::string& spec, double unit);
/// Parses "beta1=<range>;beta2=<range>;beta3=<range>"; absent angles keep
/// their values from `base`.
AngleGrid parse_grid_spec(const std::string& spec, AngleGrid base);

/// Earliest sampled t* with P_DFS >= 1 - epsilon at every sample t >= t*.
std::optional<double> convergence_time(const Trajectory& traj, double epsilon);

struct RunSummary {
  double p_dfs_final = 0.0;
  double p_d1_final = 0.0;
  std::optional<double> t_conv;
  double max_dv = 0.0;
  std::size_t dv_violations = 0;
  std::size_t renormalizations = 0;
  std::size_t floored_samples = 0;
  std::size_t capped_samples = 0;
  /// Set when the run aborted; the numeric fields are then meaningless.
  std::optional<std::string> error;
};

struct RunResult {
  Trajectory trajectory;
  RunSummary summary;
};

/// Builds the model, dark states and |Psi><Psi| from cfg and evolves.
/// Throws IntegrationError if a sample fails validation.
RunResult run_single(const RunConfig& cfg);

RunSummary summarize(const Trajectory& traj, double epsilon);

void write_trajectory_csv(const Trajectory& traj, std::ostream& os);
nlohmann::json summary_to_json(const RunSummary& s);

struct SweepRow {
  four_level::InitialAngles angles;
  RunSummary summary;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

/// run_single at every grid point; failures are recorded per row.
SweepResult sweep_initial_states(const RunConfig& cfg, const AngleGrid& grid);
void write_sweep_csv(const SweepResult& r, std::ostream& os);

struct DecayScanResult {
  std::vector<double> gammas;
  std::vector<RunResult> runs;
};

/// One run per gamma, applied to all three decay channels.
DecayScanResult decay_scan(const RunConfig& cfg, const std::vector<double>& gammas);
/// gamma,t,P_DFS,P_D1 rows.
void write_decay_surface_csv(const DecayScanResult& r, std::ostream& os);
/// gamma,P_DFS_final,P_D1_final,T_conv,dV_violations rows.
void write_decay_summary_csv(const DecayScanResult& r, std::ostream& os);

struct ComparisonRow {
  four_level::InitialAngles angles;
  RunSummary controlled;
  RunSummary decay_only;
};

struct ComparisonResult {
  std::vector<ComparisonRow> rows;
  double decay_gamma = 0.0;
  /// Points where the controlled T_conv is finite and below the decay-only
  /// one (or the decay-only run never converged), as a fraction of all points.
  double control_wins_fraction() const;
  std::size_t controlled_unconverged() const;
};

/// Per grid point: control on with gamma = 0, and control off with every
/// gamma_j = cfg.comparison_gamma.
ComparisonResult compare_control_vs_decay(const RunConfig& cfg, const AngleGrid& grid);
void write_comparison_csv(const ComparisonResult& r, std::ostream& os);

/// Formats an angle in radians as a multiple of pi.
std::string format_pi(double radians);

}  // namespace dfsctl::experiments

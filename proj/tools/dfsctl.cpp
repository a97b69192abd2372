#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include "dfsctl/dfs.hpp"
#include "dfsctl/experiments.hpp"
#include "dfsctl/four_level.hpp"

namespace fs = std::filesystem;
using namespace dfsctl;
using namespace dfsctl::experiments;

namespace {

struct Common {
  std::string config;
  std::string out = ".";
  std::optional<double> dt;
  std::optional<double> t_max;
  std::optional<double> epsilon;
  bool no_control = false;
  std::string seed_grid;
  std::size_t threads = 0;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--out", c.out, "output directory");
  app->add_option("--dt", c.dt, "integrator step");
  app->add_option("--t-max", c.t_max, "final time");
  app->add_option("--epsilon", c.epsilon, "convergence threshold");
  app->add_flag("--no-control", c.no_control, "disable feedback");
  app->add_option("--seed-grid", c.seed_grid, "beta1=a:b:c;beta2=v1,v2;beta3=... in units of pi");
  app->add_option("--threads", c.threads, "worker threads, 0 = all cores");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
  if (c.dt) cfg.dt = *c.dt;
  if (c.t_max) cfg.t_max = *c.t_max;
  if (c.epsilon) cfg.epsilon_conv = *c.epsilon;
  if (c.no_control) cfg.control.enabled = false;
  if (!c.seed_grid.empty()) cfg.grid = parse_grid_spec(c.seed_grid, cfg.grid);
  cfg.threads = c.threads;
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream os(dir / name);
  if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
  return os;
}

std::string t_conv_text(const std::optional<double>& t) { return t ? std::to_string(*t) : "none"; }

int cmd_run(const Common& c) {
  const RunConfig cfg = resolve(c);
  RunResult r;
  try {
    r = run_single(cfg);
  } catch (const IntegrationError& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 2;
  }
  auto csv = open_out(c.out, "trajectory.csv");
  write_trajectory_csv(r.trajectory, csv);
  nlohmann::json j = summary_to_json(r.summary);
  j["config"] = config_to_json(cfg);
  open_out(c.out, "summary.json") << j.dump(2) << "\n";
  std::cout << "P_DFS_final=" << r.summary.p_dfs_final << " P_D1_final=" << r.summary.p_d1_final
            << " T_conv=" << t_conv_text(r.summary.t_conv) << " dV_violations=" << r.summary.dv_violations
            << " renormalizations=" << r.summary.renormalizations << "\n";
  return 0;
}

int cmd_sweep(const Common& c) {
  const RunConfig cfg = resolve(c);
  const SweepResult r = sweep_initial_states(cfg, cfg.grid);
  auto csv = open_out(c.out, "sweep.csv");
  write_sweep_csv(r, csv);
  std::size_t failed = 0;
  for (const SweepRow& row : r.rows) {
    if (row.summary.error) {
      ++failed;
      std::cerr << "beta=(" << format_pi(row.angles.beta1) << "," << format_pi(row.angles.beta2) << ","
                << format_pi(row.angles.beta3) << ")pi: " << *row.summary.error << "\n";
    }
  }
  std::cout << r.rows.size() << " points, " << failed << " failed\n";
  return failed == 0 ? 0 : 2;
}

int cmd_decay_scan(const Common& c, const std::string& gammas_spec) {
  const RunConfig cfg = resolve(c);
  const std::vector<double> gammas = gammas_spec.empty() ? cfg.gammas : parse_range(gammas_spec, 1.0);
  DecayScanResult r;
  try {
    r = decay_scan(cfg, gammas);
  } catch (const IntegrationError& e) {
    std::cerr << "decay scan failed: " << e.what() << "\n";
    return 2;
  }
  auto surface = open_out(c.out, "decay_surface.csv");
  write_decay_surface_csv(r, surface);
  auto summary = open_out(c.out, "decay_summary.csv");
  write_decay_summary_csv(r, summary);
  for (std::size_t i = 0; i < r.gammas.size(); ++i) {
    const RunSummary& s = r.runs[i].summary;
    std::cout << "gamma=" << r.gammas[i] << " P_DFS_final=" << s.p_dfs_final << " T_conv=" << t_conv_text(s.t_conv)
              << "\n";
  }
  return 0;
}

int cmd_compare(const Common& c, std::optional<double> decay_gamma) {
  if (c.no_control) throw std::invalid_argument("compare always runs both arms; --no-control does not apply");
  RunConfig cfg = resolve(c);
  if (decay_gamma) cfg.comparison_gamma = *decay_gamma;
  cfg.validate();
  const ComparisonResult r = compare_control_vs_decay(cfg, cfg.grid);
  auto csv = open_out(c.out, "compare.csv");
  write_comparison_csv(r, csv);

  std::size_t failed = 0;
  for (const ComparisonRow& row : r.rows) failed += (row.controlled.error ? 1 : 0) + (row.decay_only.error ? 1 : 0);
  const nlohmann::json summary = {{"points", r.rows.size()},
                                  {"decay_gamma", r.decay_gamma},
                                  {"control_wins_fraction", r.control_wins_fraction()},
                                  {"controlled_unconverged", r.controlled_unconverged()},
                                  {"failed_runs", failed}};
  open_out(c.out, "compare_summary.json") << summary.dump(2) << "\n";
  std::cout << "control faster at " << r.control_wins_fraction() * 100.0 << "% of " << r.rows.size()
            << " points; controlled unconverged: " << r.controlled_unconverged() << "; failed runs: " << failed
            << "\n";
  return failed == 0 ? 0 : 2;
}

nlohmann::json report_json(const DfsReport& rep, const four_level::Params& p) {
  nlohmann::json jumps = nlohmann::json::array();
  for (const JumpEigenCheck& j : rep.jumps) {
    jumps.push_back({{"eigenvalue", {j.eigenvalue.real(), j.eigenvalue.imag()}},
                     {"residual", j.residual},
                     {"consistency", j.consistency}});
  }
  return {{"theta", p.theta / RunConfig::kPi},
          {"phi", p.phi / RunConfig::kPi},
          {"h0_invariance_residual", rep.h0_invariance_residual},
          {"jumps", jumps},
          {"gamma_eigenvalue", rep.gamma_eigenvalue},
          {"gamma_residual", rep.gamma_residual},
          {"pass", rep.pass()}};
}

int cmd_verify_dfs(const Common& c, double tol, std::size_t random_pairs, std::uint64_t seed) {
  const RunConfig cfg = resolve(c);
  std::vector<four_level::Params> cases{cfg.params};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * RunConfig::kPi);
  for (std::size_t k = 0; k < random_pairs; ++k) {
    four_level::Params p = cfg.params;
    p.theta = angle(rng);
    p.phi = angle(rng);
    cases.push_back(p);
  }
  nlohmann::json out = nlohmann::json::array();
  bool all = true;
  for (const four_level::Params& p : cases) {
    const DfsReport rep = verify_dfs(four_level::dark_states(p.theta, p.phi), four_level::build_model(p), tol);
    double jump = 0.0;
    for (const JumpEigenCheck& j : rep.jumps) jump = std::max({jump, j.residual, j.consistency});
    std::printf("theta=%sπ phi=%sπ h0=%.3e jumps=%.3e gamma=%.3e %s\n", format_pi(p.theta).c_str(),
                format_pi(p.phi).c_str(), rep.h0_invariance_residual, jump, rep.gamma_residual,
                rep.pass() ? "ok" : "FAIL");
    all = all && rep.pass();
    out.push_back(report_json(rep, p));
  }
  if (c.out != ".") open_out(c.out, "dfs_report.json") << out.dump(2) << "\n";
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lyapunov feedback toward decoherence-free subspaces of a four-level atom"};
  app.require_subcommand(1);

  Common run_opts, sweep_opts, scan_opts, cmp_opts, dfs_opts;
  auto* run = app.add_subcommand("run", "single trajectory");
  add_common(run, run_opts);
  auto* sweep = app.add_subcommand("sweep", "initial-state sweep");
  add_common(sweep, sweep_opts);
  auto* scan = app.add_subcommand("decay-scan", "one run per decay rate");
  add_common(scan, scan_opts);
  std::string gammas;
  scan->add_option("--gammas", gammas, "start:stop:step or v1,v2 (plain rates)");
  auto* cmp = app.add_subcommand("compare", "controlled (gamma=0) vs decay-only convergence times");
  add_common(cmp, cmp_opts);
  std::optional<double> decay_gamma;
  cmp->add_option("--decay-gamma", decay_gamma, "rate for the decay-only arm");
  auto* dfs = app.add_subcommand("verify-dfs", "check the dark states against the three DFS conditions");
  add_common(dfs, dfs_opts);
  double tol = 1e-12;
  std::size_t random_pairs = 0;
  std::uint64_t seed = 1;
  dfs->add_option("--tol", tol, "residual tolerance");
  dfs->add_option("--random", random_pairs, "also check this many random (theta, phi) pairs");
  dfs->add_option("--seed", seed, "seed for --random");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_opts);
    if (*sweep) return cmd_sweep(sweep_opts);
    if (*scan) return cmd_decay_scan(scan_opts, gammas);
    if (*cmp) return cmd_compare(cmp_opts, decay_gamma);
    if (*dfs) return cmd_verify_dfs(dfs_opts, tol, random_pairs, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

#include "dfsctl/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dfsctl/dfs.hpp"

namespace dfsctl::experiments {

namespace {

constexpr double kPi = RunConfig::kPi;

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string t_conv_field(const std::optional<double>& t) { return t ? num(*t) : "none"; }

// Evaluates fn(i) for i in [0, n) on up to `threads` workers and returns the
// results in index order.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, std::size_t threads, Fn fn) {
  std::vector<std::optional<T>> slots(n);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) slots[i].emplace(fn(i));
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(work);
  }
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

RunSummary failed_summary(const std::string& what) {
  RunSummary s;
  s.p_dfs_final = s.p_d1_final = std::nan("");
  s.error = what;
  return s;
}

// Runs cfg and keeps only the summary; errors are captured in the summary.
RunSummary summary_or_error(const RunConfig& cfg) {
  try {
    return run_single(cfg).summary;
  } catch (const std::exception& e) {
    return failed_summary(e.what());
  }
}

std::vector<double> angle_list(const nlohmann::json& j, const char* key) {
  if (j.is_array()) {
    std::vector<double> out;
    for (const auto& v : j) out.push_back(v.get<double>() * kPi);
    return out;
  }
  if (j.is_object()) {
    const double start = j.at("start").get<double>();
    const double stop = j.at("stop").get<double>();
    const double step = j.at("step").get<double>();
    return parse_range(num(start) + ":" + num(stop) + ":" + num(step), kPi);
  }
  if (j.is_number()) return {j.get<double>() * kPi};
  throw std::invalid_argument(std::string("grid.") + key + " must be an array, a number or {start, stop, step}");
}

}  // namespace

std::vector<four_level::InitialAngles> AngleGrid::points() const {
  std::vector<four_level::InitialAngles> out;
  out.reserve(size());
  for (double b1 : beta1) {
    for (double b2 : beta2) {
      for (double b3 : beta3) out.push_back({b1, b2, b3});
    }
  }
  return out;
}

AngleGrid RunConfig::default_grid() {
  return {parse_range("0:0.5:0.05", kPi), parse_range("0:0.5:0.05", kPi), {0.25 * kPi}};
}

std::vector<double> RunConfig::default_gammas() { return parse_range("0:0.5:0.05", 1.0); }

void RunConfig::validate() const {
  params.validate();
  control.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (!(t_max > dt)) throw std::invalid_argument("t_max must exceed dt");
  if (sample_every < 1) throw std::invalid_argument("sample_every must be >= 1");
  if (!(epsilon_conv > 0.0 && epsilon_conv < 1.0)) throw std::invalid_argument("epsilon_conv must lie in (0, 1)");
  if (!(comparison_gamma >= 0.0)) throw std::invalid_argument("comparison gamma must be >= 0");
  for (double g : gammas) {
    if (!(g >= 0.0)) throw std::invalid_argument("decay-scan rates must be >= 0");
  }
}

std::vector<double> parse_range(const std::string& spec, double unit) {
  std::vector<double> out;
  auto to_double = [&spec](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw std::invalid_argument("bad number '" + s + "' in '" + spec + "'");
    return v;
  };
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw std::invalid_argument("range '" + spec + "' must be start:stop:step");
    const double start = to_double(parts[0]);
    const double stop = to_double(parts[1]);
    const double step = to_double(parts[2]);
    if (!(step > 0.0) || stop < start) throw std::invalid_argument("range '" + spec + "' is empty or has step <= 0");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t k = 0; k < count; ++k) out.push_back((start + static_cast<double>(k) * step) * unit);
  } else {
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(to_double(p) * unit);
  }
  if (out.empty()) throw std::invalid_argument("range '" + spec + "' has no values");
  return out;
}

AngleGrid parse_grid_spec(const std::string& spec, AngleGrid base) {
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ';');) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("grid entry '" + item + "' must be name=range");
    const std::string name = item.substr(0, eq);
    std::vector<double> values = parse_range(item.substr(eq + 1), kPi);
    if (name == "beta1") {
      base.beta1 = std::move(values);
    } else if (name == "beta2") {
      base.beta2 = std::move(values);
    } else if (name == "beta3") {
      base.beta3 = std::move(values);
    } else {
      throw std::invalid_argument("unknown grid angle '" + name + "'");
    }
  }
  return base;
}

RunConfig config_from_json(const nlohmann::json& j, RunConfig c) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  if (j.contains("delta")) c.params.delta = j["delta"].get<double>();
  if (j.contains("omega")) c.params.omega = j["omega"].get<double>();
  if (j.contains("theta")) c.params.theta = j["theta"].get<double>() * kPi;
  if (j.contains("phi")) c.params.phi = j["phi"].get<double>() * kPi;
  if (j.contains("gammas")) {
    const auto g = j["gammas"].get<std::vector<double>>();
    if (g.size() != 3) throw std::invalid_argument("gammas must have 3 entries");
    std::copy(g.begin(), g.end(), c.params.gammas.begin());
  }
  if (j.contains("beta")) {
    const auto b = j["beta"].get<std::vector<double>>();
    if (b.size() != 3) throw std::invalid_argument("beta must have 3 entries");
    c.angles = {b[0] * kPi, b[1] * kPi, b[2] * kPi};
  }
  if (j.contains("dt")) c.dt = j["dt"].get<double>();
  if (j.contains("t_max")) c.t_max = j["t_max"].get<double>();
  if (j.contains("sample_every")) c.sample_every = j["sample_every"].get<std::size_t>();
  if (j.contains("epsilon_conv")) c.epsilon_conv = j["epsilon_conv"].get<double>();
  if (j.contains("control")) {
    const auto& k = j["control"];
    if (k.contains("enabled")) c.control.enabled = k["enabled"].get<bool>();
    if (k.contains("n0_strategy")) {
      const auto& s = k["n0_strategy"];
      if (s.is_number_integer()) {
        c.control.n0_strategy = N0Strategy::fixed_index;
        const auto idx = s.get<long>();
        if (idx < 1) throw std::invalid_argument("fixed n0 index is 1-based");
        c.control.n0_index = static_cast<std::size_t>(idx - 1);
      } else {
        c.control.n0_strategy = parse_n0_strategy(s.get<std::string>());
      }
    }
    if (k.contains("denominator_floor")) c.control.denominator_floor = k["denominator_floor"].get<double>();
    if (k.contains("field_cap")) {
      if (k["field_cap"].is_null()) {
        c.control.field_cap.reset();
      } else {
        c.control.field_cap = k["field_cap"].get<double>();
      }
    }
  }
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    if (g.contains("beta1")) c.grid.beta1 = angle_list(g["beta1"], "beta1");
    if (g.contains("beta2")) c.grid.beta2 = angle_list(g["beta2"], "beta2");
    if (g.contains("beta3")) c.grid.beta3 = angle_list(g["beta3"], "beta3");
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return config_from_json(nlohmann::json::parse(in));
}

nlohmann::json config_to_json(const RunConfig& c) {
  auto in_pi = [](const std::vector<double>& v) {
    std::vector<double> out;
    for (double x : v) out.push_back(x / kPi);
    return out;
  };
  nlohmann::json control = {{"enabled", c.control.enabled},
                            {"denominator_floor", c.control.denominator_floor},
                            {"field_cap", c.control.field_cap ? nlohmann::json(*c.control.field_cap) : nullptr}};
  if (c.control.n0_strategy == N0Strategy::fixed_index) {
    control["n0_strategy"] = c.control.n0_index + 1;
  } else {
    control["n0_strategy"] = to_string(c.control.n0_strategy);
  }
  return {{"delta", c.params.delta},
          {"omega", c.params.omega},
          {"theta", c.params.theta / kPi},
          {"phi", c.params.phi / kPi},
          {"gammas", c.params.gammas},
          {"beta", {c.angles.beta1 / kPi, c.angles.beta2 / kPi, c.angles.beta3 / kPi}},
          {"dt", c.dt},
          {"t_max", c.t_max},
          {"sample_every", c.sample_every},
          {"epsilon_conv", c.epsilon_conv},
          {"control", control},
          {"grid", {{"beta1", in_pi(c.grid.beta1)}, {"beta2", in_pi(c.grid.beta2)}, {"beta3", in_pi(c.grid.beta3)}}}};
}

std::optional<double> convergence_time(const Trajectory& traj, double epsilon) {
  if (traj.samples.empty()) throw std::invalid_argument("convergence_time: empty trajectory");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("convergence_time: epsilon must lie in (0, 1)");
  std::optional<double> t_star;
  for (auto it = traj.samples.rbegin(); it != traj.samples.rend(); ++it) {
    if (it->p_subspace < 1.0 - epsilon) break;
    t_star = it->t;
  }
  return t_star;
}

RunSummary summarize(const Trajectory& traj, double epsilon) {
  RunSummary s;
  const TrajectorySample& last = traj.samples.back();
  s.p_dfs_final = last.p_subspace;
  s.p_d1_final = last.p_basis.empty() ? std::nan("") : last.p_basis.front();
  s.t_conv = convergence_time(traj, epsilon);
  s.max_dv = traj.samples.size() > 1 ? traj.max_dv : 0.0;
  s.dv_violations = traj.dv_violations;
  s.renormalizations = traj.renormalizations;
  s.floored_samples = traj.floored_samples;
  s.capped_samples = traj.capped_samples;
  return s;
}

RunResult run_single(const RunConfig& cfg) {
  cfg.validate();
  const LindbladModel model = four_level::build_model(cfg.params);
  const TargetSubspace dark = four_level::dark_states(cfg.params.theta, cfg.params.phi);
  const DensityMatrix rho0 = DensityMatrix::from_pure(four_level::initial_state(cfg.angles));
  const Controller controller = make_feedback_controller(model, cfg.control);
  EvolveOptions opts;
  opts.t_max = cfg.t_max;
  opts.dt = cfg.dt;
  opts.sample_every = cfg.sample_every;
  RunResult r{evolve(model, controller, rho0, dark, opts), {}};
  r.summary = summarize(r.trajectory, cfg.epsilon_conv);
  return r;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
  if (traj.samples.empty()) return;
  const auto& first = traj.samples.front();
  os << "t,V,P_DFS";
  for (std::size_t j = 0; j < first.p_basis.size(); ++j) os << ",P_D" << j + 1;
  for (std::size_t n = 0; n < first.control.fields.size(); ++n) os << ",f" << n + 1;
  os << ",trace_dev,herm_dev,purity,n0,capped\n";
  for (const TrajectorySample& s : traj.samples) {
    os << num(s.t) << ',' << num(s.v) << ',' << num(s.p_subspace);
    for (double p : s.p_basis) os << ',' << num(p);
    for (double f : s.control.fields) os << ',' << num(f);
    os << ',' << num(s.diagnostics.trace_deviation) << ',' << num(s.diagnostics.hermiticity_deviation) << ','
       << num(s.purity) << ',' << (s.control.n0 ? std::to_string(*s.control.n0 + 1) : "none") << ','
       << (s.control.any_capped() ? 1 : 0) << '\n';
  }
}

nlohmann::json summary_to_json(const RunSummary& s) {
  nlohmann::json j = {{"P_DFS_final", s.p_dfs_final},
                      {"P_D1_final", s.p_d1_final},
                      {"T_conv", s.t_conv ? nlohmann::json(*s.t_conv) : nlohmann::json("none")},
                      {"max_dV", s.max_dv},
                      {"dV_violations", s.dv_violations},
                      {"renormalizations", s.renormalizations},
                      {"floored_samples", s.floored_samples},
                      {"capped_samples", s.capped_samples}};
  if (s.error) j["error"] = *s.error;
  return j;
}

SweepResult sweep_initial_states(const RunConfig& cfg, const AngleGrid& grid) {
  if (grid.size() == 0) throw std::invalid_argument("sweep grid is empty");
  cfg.validate();
  const auto points = grid.points();
  SweepResult r;
  r.rows = parallel_map<SweepRow>(points.size(), cfg.threads, [&](std::size_t i) {
    RunConfig c = cfg;
    c.angles = points[i];
    return SweepRow{points[i], summary_or_error(c)};
  });
  return r;
}

void write_sweep_csv(const SweepResult& r, std::ostream& os) {
  os << "beta1,beta2,beta3,P_DFS_final,P_D1_final,T_conv,dV_violations\n";
  for (const SweepRow& row : r.rows) {
    os << format_pi(row.angles.beta1) << ',' << format_pi(row.angles.beta2) << ',' << format_pi(row.angles.beta3)
       << ',' << num(row.summary.p_dfs_final) << ',' << num(row.summary.p_d1_final) << ','
       << t_conv_field(row.summary.t_conv) << ',' << row.summary.dv_violations << '\n';
  }
}

DecayScanResult decay_scan(const RunConfig& cfg, const std::vector<double>& gammas) {
  if (gammas.empty()) throw std::invalid_argument("decay scan needs at least one rate");
  for (double g : gammas) {
    if (!(g >= 0.0)) throw std::invalid_argument("decay rates must be >= 0");
  }
  cfg.validate();
  DecayScanResult r;
  r.gammas = gammas;
  r.runs = parallel_map<RunResult>(gammas.size(), cfg.threads, [&](std::size_t i) {
    RunConfig c = cfg;
    c.params.gammas = {gammas[i], gammas[i], gammas[i]};
    return run_single(c);
  });
  return r;
}

void write_decay_surface_csv(const DecayScanResult& r, std::ostream& os) {
  os << "gamma,t,P_DFS,P_D1\n";
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    for (const TrajectorySample& s : r.runs[i].trajectory.samples) {
      os << num(r.gammas[i]) << ',' << num(s.t) << ',' << num(s.p_subspace) << ','
         << num(s.p_basis.empty() ? std::nan("") : s.p_basis.front()) << '\n';
    }
  }
}

void write_decay_summary_csv(const DecayScanResult& r, std::ostream& os) {
  os << "gamma,P_DFS_final,P_D1_final,T_conv,dV_violations\n";
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    const RunSummary& s = r.runs[i].summary;
    os << num(r.gammas[i]) << ',' << num(s.p_dfs_final) << ',' << num(s.p_d1_final) << ',' << t_conv_field(s.t_conv)
       << ',' << s.dv_violations << '\n';
  }
}

double ComparisonResult::control_wins_fraction() const {
  if (rows.empty()) return 0.0;
  std::size_t wins = 0;
  for (const ComparisonRow& r : rows) {
    if (r.controlled.t_conv && (!r.decay_only.t_conv || *r.controlled.t_conv < *r.decay_only.t_conv)) ++wins;
  }
  return static_cast<double>(wins) / static_cast<double>(rows.size());
}

std::size_t ComparisonResult::controlled_unconverged() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const ComparisonRow& r) { return !r.controlled.t_conv; }));
}

ComparisonResult compare_control_vs_decay(const RunConfig& cfg, const AngleGrid& grid) {
  if (grid.size() == 0) throw std::invalid_argument("comparison grid is empty");
  cfg.validate();
  const auto points = grid.points();
  ComparisonResult r;
  r.decay_gamma = cfg.comparison_gamma;
  // Even task indices are the controlled runs, odd ones the decay-only runs.
  const auto summaries = parallel_map<RunSummary>(2 * points.size(), cfg.threads, [&](std::size_t k) {
    RunConfig c = cfg;
    c.angles = points[k / 2];
    if (k % 2 == 0) {
      c.control.enabled = true;
      c.params.gammas = {0.0, 0.0, 0.0};
    } else {
      c.control.enabled = false;
      c.params.gammas = {cfg.comparison_gamma, cfg.comparison_gamma, cfg.comparison_gamma};
    }
    return summary_or_error(c);
  });
  for (std::size_t i = 0; i < points.size(); ++i) {
    r.rows.push_back({points[i], summaries[2 * i], summaries[2 * i + 1]});
  }
  return r;
}

void write_comparison_csv(const ComparisonResult& r, std::ostream& os) {
  os << "beta1,beta2,beta3,T_conv_control,T_conv_decay,P_DFS_final_control,P_DFS_final_decay\n";
  for (const ComparisonRow& row : r.rows) {
    os << format_pi(row.angles.beta1) << ',' << format_pi(row.angles.beta2) << ',' << format_pi(row.angles.beta3)
       << ',' << t_conv_field(row.controlled.t_conv) << ',' << t_conv_field(row.decay_only.t_conv) << ','
       << num(row.controlled.p_dfs_final) << ',' << num(row.decay_only.p_dfs_final) << '\n';
  }
}

std::string format_pi(double radians) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", radians / kPi);
  return buf;
}

}  // namespace dfsctl::experiments

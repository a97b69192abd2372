#include "dfsctl/lindblad.hpp"

#include <cmath>
#include <string>

#include "dfsctl/control.hpp"
#include "dfsctl/dfs.hpp"

namespace dfsctl {

namespace {

void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(want) + ", got " +
                         std::to_string(got));
  }
}

// out = L(x)
void dissipator_into(const LindbladModel& model, const Mat& x, Mat& out) {
  out.setZero(x.rows(), x.cols());
  if (!model.dissipative()) return;
  for (std::size_t m = 0; m < model.jumps().size(); ++m) {
    const double rate = model.jumps()[m].rate;
    if (rate == 0.0) continue;
    detail::add_sandwich(model.jump_terms(m), x, rate, out);
  }
  detail::add_left_product(model.decay_terms(), x, -0.5, out);
  detail::add_right_product(x, model.decay_terms(), -0.5, out);
}

// out += -i [H0 + sum_n f_n H_n, x]
void add_hamiltonian_part(const LindbladModel& model, const Mat& x, std::span<const double> fields, Mat& out) {
  detail::add_left_product(model.h0_terms(), x, -kI, out);
  detail::add_right_product(x, model.h0_terms(), kI, out);
  for (std::size_t n = 0; n < fields.size(); ++n) {
    if (fields[n] == 0.0) continue;
    const Complex s = -kI * fields[n];
    detail::add_left_product(model.control_terms(n), x, s, out);
    detail::add_right_product(x, model.control_terms(n), -s, out);
  }
}

void require_fields(const LindbladModel& model, std::span<const double> fields) {
  if (fields.size() != model.num_controls()) {
    throw std::invalid_argument("expected " + std::to_string(model.num_controls()) + " fields, got " +
                                std::to_string(fields.size()));
  }
}

}  // namespace

LindbladModel::LindbladModel(ComplexMatrix h0, std::vector<JumpOperator> jumps, std::vector<ComplexMatrix> controls,
                             double hermitian_tol)
    : h0_(std::move(h0)), jumps_(std::move(jumps)), controls_(std::move(controls)) {
  const Eigen::Index n = h0_.dim();
  if (h0_.hermiticity_deviation() > hermitian_tol) throw ValidationError("H0 is not Hermitian");
  Mat decay = Mat::Zero(n, n);
  for (const JumpOperator& j : jumps_) {
    require_dim(j.op.dim(), n, "jump operator");
    if (!(j.rate >= 0.0) || !std::isfinite(j.rate)) throw ValidationError("jump rates must be finite and >= 0");
    if (j.rate > 0.0) dissipative_ = true;
    jump_terms_.push_back(detail::nonzero_terms(j.op.mat()));
    decay += j.rate * j.op.mat().adjoint() * j.op.mat();
  }
  for (const ComplexMatrix& h : controls_) {
    require_dim(h.dim(), n, "control Hamiltonian");
    if (h.hermiticity_deviation() > hermitian_tol) throw ValidationError("control Hamiltonian is not Hermitian");
    control_terms_.push_back(detail::nonzero_terms(h.mat()));
  }
  h0_terms_ = detail::nonzero_terms(h0_.mat());
  decay_terms_ = detail::nonzero_terms(decay);
}

Mat apply_dissipator(const LindbladModel& model, const Mat& x) {
  require_dim(x.rows(), model.dim(), "dissipator");
  require_dim(x.cols(), model.dim(), "dissipator");
  Mat out;
  dissipator_into(model, x, out);
  return out;
}

ComplexMatrix dissipator(const LindbladModel& model, const DensityMatrix& rho) {
  return ComplexMatrix(apply_dissipator(model, rho.mat()));
}

Mat apply_rhs(const LindbladModel& model, const Mat& x, std::span<const double> fields) {
  require_fields(model, fields);
  Mat out = apply_dissipator(model, x);
  add_hamiltonian_part(model, x, fields, out);
  return out;
}

ComplexMatrix lindblad_rhs(const LindbladModel& model, const DensityMatrix& rho, std::span<const double> fields) {
  return ComplexMatrix(apply_rhs(model, rho.mat(), fields));
}

Controller zero_controller(std::size_t num_controls) {
  return [num_controls](const ControllerInput&, FieldSample& out) { out.reset(num_controls); };
}

ClosedLoopStepper::ClosedLoopStepper(const LindbladModel& model, Controller controller)
    : model_(model), controller_(std::move(controller)) {}

void ClosedLoopStepper::derivative(const Mat& rho, const Mat& basis, Mat& drho, Mat& dbasis, FieldSample& sample,
                                   int stage) {
  dissipator_into(model_, rho, dissipation_);
  controller_(ControllerInput{rho, basis, dissipation_, stage}, sample);
  if (sample.fields.size() != model_.num_controls()) {
    throw std::logic_error("controller returned " + std::to_string(sample.fields.size()) + " fields for " +
                           std::to_string(model_.num_controls()) + " controls");
  }
  drho = dissipation_;
  add_hamiltonian_part(model_, rho, sample.fields, drho);
  dbasis.setZero(basis.rows(), basis.cols());
  detail::add_left_product(model_.h0_terms(), basis, -kI, dbasis);
}

FieldSample ClosedLoopStepper::fields_at(const Mat& rho, const Mat& basis) {
  FieldSample s;
  dissipator_into(model_, rho, dissipation_);
  controller_(ControllerInput{rho, basis, dissipation_, 0}, s);
  return s;
}

StepInfo ClosedLoopStepper::step(LoopState& state, double /*t*/, double dt, double renorm_threshold) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  require_dim(state.rho.rows(), model_.dim(), "rk4_step");

  derivative(state.rho, state.basis, k_rho_[0], k_basis_[0], scratch_fields_);

  stage_rho_ = state.rho + (0.5 * dt) * k_rho_[0];
  stage_basis_ = state.basis + (0.5 * dt) * k_basis_[0];
  derivative(stage_rho_, stage_basis_, k_rho_[1], k_basis_[1], scratch_fields_, 1);

  stage_rho_ = state.rho + (0.5 * dt) * k_rho_[1];
  stage_basis_ = state.basis + (0.5 * dt) * k_basis_[1];
  derivative(stage_rho_, stage_basis_, k_rho_[2], k_basis_[2], scratch_fields_, 2);

  stage_rho_ = state.rho + dt * k_rho_[2];
  stage_basis_ = state.basis + dt * k_basis_[2];
  derivative(stage_rho_, stage_basis_, k_rho_[3], k_basis_[3], scratch_fields_, 3);

  const double w = dt / 6.0;
  state.rho += w * (k_rho_[0] + 2.0 * k_rho_[1] + 2.0 * k_rho_[2] + k_rho_[3]);
  state.basis += w * (k_basis_[0] + 2.0 * k_basis_[1] + 2.0 * k_basis_[2] + k_basis_[3]);

  stage_rho_ = 0.5 * (state.rho + state.rho.adjoint());
  state.rho = stage_rho_;

  StepInfo info;
  const double tr = state.rho.trace().real();
  if (std::abs(tr - 1.0) > renorm_threshold) {
    state.rho /= tr;
    info.renormalized = true;
  }
  return info;
}

LoopState rk4_step(const LindbladModel& model, const Controller& controller, const LoopState& state, double t,
                   double dt) {
  ClosedLoopStepper stepper(model, controller);
  LoopState next = state;
  stepper.step(next, t, dt);
  return next;
}

IntegrationError::IntegrationError(double t, DensityReport report)
    : ValidationError("density matrix failed validation at t=" + std::to_string(t) + " (" + report.failures() +
                      "): herm_dev=" + std::to_string(report.hermiticity_deviation) +
                      " trace_dev=" + std::to_string(report.trace_deviation) +
                      " min_eig=" + std::to_string(report.min_eigenvalue)),
      t_(t),
      report_(report) {}

Trajectory evolve(const LindbladModel& model, const Controller& controller, const DensityMatrix& rho0,
                  const TargetSubspace& basis0, const EvolveOptions& opts) {
  if (!(opts.t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
  if (!(opts.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (opts.sample_every < 1) throw std::invalid_argument("sample_every must be >= 1");
  require_dim(rho0.dim(), model.dim(), "evolve");
  require_dim(basis0.ambient_dim(), model.dim(), "evolve");

  const auto steps = static_cast<std::size_t>(std::llround(opts.t_max / opts.dt));
  ClosedLoopStepper stepper(model, controller);
  LoopState state{rho0.mat(), basis0.columns()};
  Trajectory traj;

  auto record = [&](std::size_t k) {
    const double t = static_cast<double>(k) * opts.dt;
    const DensityReport report = validate_density(state.rho, opts.tolerances);
    if (!report.pass()) throw IntegrationError(t, report);
    DensityMatrix rho(ComplexMatrix(state.rho), opts.tolerances);
    const TargetSubspace basis = TargetSubspace::from_columns(state.basis, 1e-8);

    TrajectorySample s{.t = t,
                       .rho = rho,
                       .control = stepper.fields_at(state.rho, state.basis),
                       .v = lyapunov_vb(basis, rho),
                       .p_subspace = subspace_probability(rho, basis),
                       .p_basis = {},
                       .diagnostics = report,
                       .purity = rho.purity()};
    for (Eigen::Index j = 0; j < basis.size(); ++j) {
      s.p_basis.push_back(std::clamp(basis.columns().col(j).dot(state.rho * basis.columns().col(j)).real(), 0.0, 1.0));
    }
    if (s.control.floored) ++traj.floored_samples;
    if (s.control.any_capped()) ++traj.capped_samples;
    if (!traj.samples.empty()) {
      const double dv = s.v - traj.samples.back().v;
      traj.max_dv = std::max(traj.max_dv, dv);
      if (dv > opts.dv_tolerance) ++traj.dv_violations;
    }
    traj.samples.push_back(std::move(s));
  };

  record(0);
  for (std::size_t k = 1; k <= steps; ++k) {
    const StepInfo info = stepper.step(state, static_cast<double>(k - 1) * opts.dt, opts.dt, opts.renorm_threshold);
    if (info.renormalized) ++traj.renormalizations;
    if (k % opts.sample_every == 0 || k == steps) record(k);
  }
  return traj;
}

}  // namespace dfsctl

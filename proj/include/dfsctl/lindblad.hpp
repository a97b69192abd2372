#pragma once

// Markovian master equation
//
//   d rho/dt = -i [H0 + sum_n f_n H_n, rho] + L(rho),
//   L(rho)   = sum_m lambda_m (J_m rho J_m^dagger - 1/2 {J_m^dagger J_m, rho}),
//
// and a fixed-step RK4 integrator for the closed loop in which the fields f_n
// are recomputed from the state at every stage.

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "dfsctl/detail/operator_terms.hpp"
#include "dfsctl/field_sample.hpp"
#include "dfsctl/quantum_core.hpp"
#include "dfsctl/target_subspace.hpp"

namespace dfsctl {

struct JumpOperator {
  ComplexMatrix op;
  /// Nonnegative rate lambda_m.
  double rate;
};

/// Free Hamiltonian, jump operators with rates, and control Hamiltonians.
/// Immutable; one instance can back any number of concurrent runs.
class LindbladModel {
 public:
  LindbladModel(ComplexMatrix h0, std::vector<JumpOperator> jumps, std::vector<ComplexMatrix> controls,
                double hermitian_tol = 1e-12);

  Eigen::Index dim() const { return h0_.dim(); }
  const ComplexMatrix& h0() const { return h0_; }
  const std::vector<JumpOperator>& jumps() const { return jumps_; }
  const std::vector<ComplexMatrix>& controls() const { return controls_; }
  std::size_t num_controls() const { return controls_.size(); }
  /// True when some jump has a positive rate.
  bool dissipative() const { return dissipative_; }

  // Inner-loop caches.
  const detail::Terms& h0_terms() const { return h0_terms_; }
  const detail::Terms& control_terms(std::size_t n) const { return control_terms_[n]; }
  const detail::Terms& jump_terms(std::size_t m) const { return jump_terms_[m]; }
  /// sum_m lambda_m J_m^dagger J_m
  const detail::Terms& decay_terms() const { return decay_terms_; }

 private:
  ComplexMatrix h0_;
  std::vector<JumpOperator> jumps_;
  std::vector<ComplexMatrix> controls_;
  bool dissipative_ = false;
  detail::Terms h0_terms_;
  std::vector<detail::Terms> control_terms_;
  std::vector<detail::Terms> jump_terms_;
  detail::Terms decay_terms_;
};

/// L(rho). Traceless and Hermitian for Hermitian rho.
ComplexMatrix dissipator(const LindbladModel& model, const DensityMatrix& rho);
/// Same map on an arbitrary N x N matrix (it is linear).
Mat apply_dissipator(const LindbladModel& model, const Mat& x);

/// -i [H0 + sum_n f_n H_n, rho] + L(rho).
ComplexMatrix lindblad_rhs(const LindbladModel& model, const DensityMatrix& rho, std::span<const double> fields);
Mat apply_rhs(const LindbladModel& model, const Mat& x, std::span<const double> fields);

/// What the feedback law sees at one RK4 stage.
struct ControllerInput {
  const Mat& rho;
  /// N x D matrix of the propagated target basis.
  const Mat& basis;
  /// L(rho) at this stage.
  const Mat& dissipation;
  /// RK4 stage within the current step, 0..3. Stage 0 starts a new step.
  int stage = 0;
};

/// Fills one field per control Hamiltonian. Must be deterministic.
using Controller = std::function<void(const ControllerInput&, FieldSample&)>;

/// Controller that always returns zero fields.
Controller zero_controller(std::size_t num_controls);

/// Joint state of the closed loop: rho and the target basis columns.
struct LoopState {
  Mat rho;
  Mat basis;
};

struct StepInfo {
  bool renormalized = false;
};

/// Reusable RK4 stepper. Holds scratch buffers, so one instance per thread.
class ClosedLoopStepper {
 public:
  ClosedLoopStepper(const LindbladModel& model, Controller controller);

  /// Advances state by dt in place. Re-Hermitizes rho afterwards and rescales
  /// it when |Tr rho - 1| exceeds renorm_threshold.
  StepInfo step(LoopState& state, double t, double dt, double renorm_threshold = 1e-12);

  /// Closed-loop derivative at one point; fields are written to `sample`.
  void derivative(const Mat& rho, const Mat& basis, Mat& drho, Mat& dbasis, FieldSample& sample, int stage = 0);

  /// Fields the controller would apply at this state.
  FieldSample fields_at(const Mat& rho, const Mat& basis);

 private:
  const LindbladModel& model_;
  Controller controller_;
  FieldSample scratch_fields_;
  Mat dissipation_;
  Mat k_rho_[4];
  Mat k_basis_[4];
  Mat stage_rho_;
  Mat stage_basis_;
};

/// One RK4 step of the closed loop; see ClosedLoopStepper::step.
LoopState rk4_step(const LindbladModel& model, const Controller& controller, const LoopState& state, double t,
                   double dt);

struct EvolveOptions {
  double t_max = 500.0;
  double dt = 1e-3;
  std::size_t sample_every = 1;
  DensityTolerances tolerances{};
  /// Consecutive sampled V may rise by at most this much before it is counted.
  double dv_tolerance = 1e-8;
  double renorm_threshold = 1e-12;
};

struct TrajectorySample {
  double t = 0.0;
  DensityMatrix rho;
  FieldSample control;
  /// Basis-form Lyapunov value (1/D)(1 - P_subspace).
  double v = 0.0;
  /// Probability of the target subspace ("P_DFS"), clamped to [0, 1].
  double p_subspace = 0.0;
  /// Probability of each basis vector ("P_D1", "P_D2", ...).
  std::vector<double> p_basis;
  DensityReport diagnostics;
  double purity = 0.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::size_t renormalizations = 0;
  std::size_t floored_samples = 0;
  std::size_t capped_samples = 0;
  /// Count of sampled V increases above dv_tolerance.
  std::size_t dv_violations = 0;
  double max_dv = -std::numeric_limits<double>::infinity();
};

/// Validation failure during a run.
class IntegrationError : public ValidationError {
 public:
  IntegrationError(double t, DensityReport report);
  double time() const { return t_; }
  const DensityReport& report() const { return report_; }

 private:
  double t_;
  DensityReport report_;
};

/// Integrates from t = 0 to t_max, recording every sample_every-th step and
/// the final step. Throws IntegrationError when a sample fails validation.
Trajectory evolve(const LindbladModel& model, const Controller& controller, const DensityMatrix& rho0,
                  const TargetSubspace& basis0, const EvolveOptions& opts);

}  // namespace dfsctl

#include "dfsctl/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dfsctl/dfs.hpp"

namespace dfsctl {

namespace {

void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(want) + ", got " +
                         std::to_string(got));
  }
}

// Tr{rho_D [-i H_n, rho]} = -i Tr(H_n (rho rho_D - rho_D rho)) for every n.
void descent_gradients(const LindbladModel& model, const Mat& rho, const Mat& rho_d, std::vector<double>& out) {
  out.resize(model.num_controls());
  for (std::size_t n = 0; n < model.num_controls(); ++n) {
    out[n] = (-kI * detail::trace_commutator_product(model.control_terms(n), rho, rho_d)).real();
  }
}

// Fills `out` from the per-control gradients Tr{rho_D [-i H_n, rho]} and the
// dissipative numerator Tr[rho_D L(rho)]. Note Tr{rho_D [rho, i H_n]} is the
// same quantity as the gradient, so it doubles as the n0 denominator.
// Branch decisions taken at the first RK4 stage of a step.
struct HeldBranch {
  std::size_t n0;
  bool floored;
};

// A held branch (from an earlier RK4 stage of the same step) overrides the n0
// strategy and the floor test so the right-hand side stays smooth within a step.
void apply_law(const std::vector<double>& gradients, double numerator, bool dissipative, const ControlConfig& cfg,
               FieldSample& out, std::optional<HeldBranch> held = std::nullopt) {
  const std::size_t count = gradients.size();
  out.reset(count);
  if (!cfg.enabled) return;

  std::size_t n0 = 0;
  if (held) {
    n0 = held->n0;
  } else if (cfg.n0_strategy == N0Strategy::fixed_index) {
    n0 = cfg.n0_index;
  } else {
    for (std::size_t n = 1; n < count; ++n) {
      if (std::abs(gradients[n]) > std::abs(gradients[n0])) n0 = n;
    }
  }

  for (std::size_t n = 0; n < count; ++n) out.fields[n] = gradients[n];
  out.n0 = n0;
  out.denominator = gradients[n0];
  out.numerator = numerator;
  const bool floored = held ? held->floored : std::abs(out.denominator) < cfg.denominator_floor;
  if (floored) {
    out.floored = true;
    out.fields[n0] = 0.0;
  } else if (!dissipative || numerator == 0.0) {
    out.fields[n0] = 0.0;
  } else {
    out.fields[n0] = -numerator / out.denominator;
  }

  if (cfg.field_cap) {
    const double cap = *cfg.field_cap;
    for (std::size_t n = 0; n < count; ++n) {
      if (std::abs(out.fields[n]) > cap) {
        out.fields[n] = std::copysign(cap, out.fields[n]);
        out.capped[n] = true;
      }
    }
  }
}

void require_controls(const LindbladModel& model, const ControlConfig& cfg) {
  if (model.num_controls() == 0) throw std::invalid_argument("no control Hamiltonians configured");
  cfg.validate();
  if (cfg.n0_strategy == N0Strategy::fixed_index && cfg.n0_index >= model.num_controls()) {
    throw std::invalid_argument("n0 index out of range");
  }
}

}  // namespace

std::string to_string(N0Strategy s) {
  switch (s) {
    case N0Strategy::fixed_index:
      return "fixed";
    case N0Strategy::max_denominator:
      return "max-denominator";
  }
  return "unknown";
}

N0Strategy parse_n0_strategy(const std::string& s) {
  if (s == "fixed" || s == "fixed-index" || s == "fixed_index") return N0Strategy::fixed_index;
  if (s == "max-denominator" || s == "max_denominator") return N0Strategy::max_denominator;
  throw std::invalid_argument("unknown n0 strategy '" + s + "'");
}

void ControlConfig::validate() const {
  if (!(denominator_floor > 0.0)) throw std::invalid_argument("denominator_floor must be > 0");
  if (field_cap && !(*field_cap > 0.0)) throw std::invalid_argument("field_cap must be > 0 when set");
}

double lyapunov_v(const DensityMatrix& rho_d, const DensityMatrix& rho) {
  require_dim(rho.dim(), rho_d.dim(), "lyapunov_v");
  const Mat& d = rho_d.mat();
  return (d * d).trace().real() - (rho.mat() * d).trace().real();
}

double lyapunov_vb(const TargetSubspace& basis, const DensityMatrix& rho) {
  const double d = static_cast<double>(basis.size());
  return (1.0 - raw_subspace_probability(rho, basis)) / d;
}

FieldSample synthesize_fields(const LindbladModel& model, const DensityMatrix& rho, const DensityMatrix& rho_d,
                              const ControlConfig& cfg) {
  require_controls(model, cfg);
  require_dim(rho.dim(), model.dim(), "synthesize_fields");
  require_dim(rho_d.dim(), model.dim(), "synthesize_fields");
  std::vector<double> gradients;
  descent_gradients(model, rho.mat(), rho_d.mat(), gradients);
  const double numerator = (rho_d.mat() * apply_dissipator(model, rho.mat())).trace().real();
  FieldSample out;
  apply_law(gradients, numerator, model.dissipative(), cfg, out);
  return out;
}

FieldSample synthesize_basis_fields(const LindbladModel& model, const DensityMatrix& rho, const TargetSubspace& basis,
                                    const ControlConfig& cfg) {
  require_controls(model, cfg);
  require_dim(rho.dim(), model.dim(), "synthesize_basis_fields");
  require_dim(basis.ambient_dim(), model.dim(), "synthesize_basis_fields");
  const Mat& b = basis.columns();
  std::vector<double> gradients(model.num_controls());
  for (std::size_t n = 0; n < model.num_controls(); ++n) {
    const Mat& h = model.controls()[n].mat();
    const Mat comm = -kI * (h * rho.mat() - rho.mat() * h);
    gradients[n] = (b.adjoint() * comm * b).trace().real();
  }
  const Mat l = apply_dissipator(model, rho.mat());
  const double numerator = (b.adjoint() * l * b).trace().real();
  FieldSample out;
  apply_law(gradients, numerator, model.dissipative(), cfg, out);
  return out;
}

TargetSubspace propagate_target(const TargetSubspace& basis, const ComplexMatrix& h0, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  require_dim(basis.ambient_dim(), h0.dim(), "propagate_target");
  const Mat& h = h0.mat();
  const Mat& b = basis.columns();
  const Mat k1 = -kI * (h * b);
  const Mat k2 = -kI * (h * (b + 0.5 * dt * k1));
  const Mat k3 = -kI * (h * (b + 0.5 * dt * k2));
  const Mat k4 = -kI * (h * (b + dt * k3));
  return TargetSubspace::from_columns(b + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

std::vector<double> lasalle_residuals(const DensityMatrix& rho, const DensityMatrix& rho_d,
                                      const LindbladModel& model) {
  require_dim(rho.dim(), model.dim(), "lasalle_residuals");
  require_dim(rho_d.dim(), model.dim(), "lasalle_residuals");
  const Mat rr = rho.mat() * rho_d.mat();
  const Mat dr = rho_d.mat() * rho.mat();
  std::vector<double> out;
  for (const ComplexMatrix& h : model.controls()) {
    out.push_back(std::abs((h.mat() * rr).trace() - (h.mat() * dr).trace()));
  }
  return out;
}

Controller make_feedback_controller(const LindbladModel& model, const ControlConfig& cfg) {
  if (!cfg.enabled) return zero_controller(model.num_controls());
  require_controls(model, cfg);

  struct Scratch {
    Mat rho_d;
    std::vector<double> gradients;
    std::optional<HeldBranch> branch;
  };
  // The closure is copied into each stepper; scratch is per copy. The n0 index
  // and floor decision are made at stage 0 and held for the rest of the step.
  return [&model, cfg, scratch = Scratch{}](const ControllerInput& in, FieldSample& out) mutable {
    const double d = static_cast<double>(in.basis.cols());
    scratch.rho_d.noalias() = in.basis * in.basis.adjoint();
    scratch.rho_d /= d;
    descent_gradients(model, in.rho, scratch.rho_d, scratch.gradients);
    double numerator = 0.0;
    if (model.dissipative()) {
      numerator = scratch.rho_d.transpose().cwiseProduct(in.dissipation).sum().real();
    }
    if (in.stage == 0) scratch.branch.reset();
    apply_law(scratch.gradients, numerator, model.dissipative(), cfg, out, scratch.branch);
    if (in.stage == 0) scratch.branch = HeldBranch{*out.n0, out.floored};
  };
}

}  // namespace dfsctl

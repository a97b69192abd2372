#pragma once

// Lyapunov feedback toward a target subspace.
//
// With target state rho_D and V = Tr(rho_D^2) - Tr(rho rho_D), the fields
//
//   f_n   = Tr{[-i H_n, rho] rho_D}                       (n != n0)
//   f_n0  = -Tr[rho_D L(rho)] / Tr{rho_D [rho, i H_n0]}
//
// give dV/dt = -sum_{n != n0} f_n^2 <= 0. The target follows
// d rho_D/dt = -i [H0, rho_D], realized by propagating its basis vectors.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dfsctl/field_sample.hpp"
#include "dfsctl/lindblad.hpp"
#include "dfsctl/target_subspace.hpp"

namespace dfsctl {

enum class N0Strategy {
  /// Always cancel dissipation with the configured index.
  fixed_index,
  /// Pick the index with the largest |Tr{rho_D [rho, i H_n]}|, lowest index on ties.
  max_denominator,
};

std::string to_string(N0Strategy s);
N0Strategy parse_n0_strategy(const std::string& s);

struct ControlConfig {
  bool enabled = true;
  N0Strategy n0_strategy = N0Strategy::max_denominator;
  /// Used by N0Strategy::fixed_index.
  std::size_t n0_index = 0;
  double denominator_floor = 1e-2;
  /// Symmetric clamp on every field; nullopt disables clamping.
  std::optional<double> field_cap = 50.0;

  /// Throws std::invalid_argument on a bad setting.
  void validate() const;
};

/// Tr(rho_D^2) - Tr(rho rho_D)
double lyapunov_v(const DensityMatrix& rho_d, const DensityMatrix& rho);

/// (1/D)(1 - sum_j <psi_j|rho|psi_j>)
double lyapunov_vb(const TargetSubspace& basis, const DensityMatrix& rho);

/// Fields from the density-matrix form of the law. Throws when the model has
/// no controls.
FieldSample synthesize_fields(const LindbladModel& model, const DensityMatrix& rho, const DensityMatrix& rho_d,
                              const ControlConfig& cfg);

/// Fields from the basis form of the law:
///   f_n^b  = sum_j <psi_j|[-i H_n, rho]|psi_j>                               (n != n0)
///   f_n0^b = -sum_j <psi_j|L(rho)|psi_j> / sum_j <psi_j|[rho, i H_n0]|psi_j>
/// Relative to synthesize_fields with rho_D = (1/D) sum_j |psi_j><psi_j|, the
/// n != n0 fields carry an extra factor D and f_n0 is identical.
FieldSample synthesize_basis_fields(const LindbladModel& model, const DensityMatrix& rho, const TargetSubspace& basis,
                                    const ControlConfig& cfg);

/// One RK4 step of i d|psi_j>/dt = H0 |psi_j> for every basis vector.
TargetSubspace propagate_target(const TargetSubspace& basis, const ComplexMatrix& h0, double dt);

/// |Tr(H_n rho rho_D) - Tr(H_n rho_D rho)| for every control n.
std::vector<double> lasalle_residuals(const DensityMatrix& rho, const DensityMatrix& rho_d,
                                      const LindbladModel& model);

/// Closed-loop controller for the integrator: builds rho_D from the
/// propagated basis at each stage and applies synthesize_fields' law.
/// A disabled config yields zero fields.
Controller make_feedback_controller(const LindbladModel& model, const ControlConfig& cfg);

}  // namespace dfsctl

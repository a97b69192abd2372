#pragma once

// Decoherence-free subspace checks. A subspace spanned by {|psi_j>} is
// decoherence-free for all time iff
//   (1) it is invariant under H0,
//   (2) J_m |psi_j> = c_m |psi_j> for every m and j,
//   (3) Gamma |psi_j> = g |psi_j> with Gamma = sum_m lambda_m J_m^dagger J_m
//       and g = sum_m lambda_m |c_m|^2.

#include <vector>

#include "dfsctl/lindblad.hpp"
#include "dfsctl/quantum_core.hpp"
#include "dfsctl/target_subspace.hpp"

namespace dfsctl {

/// sum_m lambda_m J_m^dagger J_m
ComplexMatrix gamma_operator(const LindbladModel& model);

struct JumpEigenCheck {
  /// c_m, estimated as <psi_1|J_m|psi_1>.
  Complex eigenvalue;
  /// max_j || J_m psi_j - c_m psi_j ||
  double residual = 0.0;
  /// max_j |<psi_j|J_m|psi_j> - c_m|
  double consistency = 0.0;
};

struct DfsReport {
  double tolerance = 0.0;
  /// max_j || (1 - P) H0 psi_j ||, P the projector onto the span.
  double h0_invariance_residual = 0.0;
  std::vector<JumpEigenCheck> jumps;
  /// g = sum_m lambda_m |c_m|^2
  double gamma_eigenvalue = 0.0;
  /// max_j || Gamma psi_j - g psi_j ||
  double gamma_residual = 0.0;

  bool h0_invariant() const { return h0_invariance_residual <= tolerance; }
  bool jumps_ok() const;
  bool gamma_ok() const { return gamma_residual <= tolerance; }
  bool pass() const { return h0_invariant() && jumps_ok() && gamma_ok(); }
};

DfsReport verify_dfs(const TargetSubspace& basis, const LindbladModel& model, double tol = 1e-10);

/// sum_j <psi_j|rho|psi_j> without clamping.
double raw_subspace_probability(const DensityMatrix& rho, const TargetSubspace& basis);

/// raw_subspace_probability clamped to [0, 1].
double subspace_probability(const DensityMatrix& rho, const TargetSubspace& basis);

}  // namespace dfsctl

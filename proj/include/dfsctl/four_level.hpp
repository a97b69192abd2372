#pragma once

// Four-level atom: excited state |e> coupled to three degenerate ground
// states |1>, |2>, |3> by lasers with couplings Omega_j, detuning Delta.
//
// Basis order is (|e>, |1>, |2>, |3>) everywhere, including file output.
//
// Decay runs from |e> to each |j>: the jump operators are J_j = |j><e| with
// rate gamma_j. With this orientation the two dark states carry no |e>
// amplitude, are annihilated by every J_j, and form a decoherence-free
// subspace.

#include <array>

#include "dfsctl/lindblad.hpp"
#include "dfsctl/target_subspace.hpp"

namespace dfsctl::four_level {

inline constexpr Eigen::Index kDim = 4;
inline constexpr Eigen::Index kExcited = 0;

struct Params {
  double delta = 3.0;
  double omega = 5.0;
  double theta = 0.0;
  double phi = 0.0;
  std::array<double, 3> gammas{0.0, 0.0, 0.0};

  /// (Omega_1, Omega_2, Omega_3) = Omega (sin th cos ph, sin th sin ph, cos th).
  std::array<double, 3> couplings() const;
  void validate() const;
};

/// Angles of the initial-state family
///   |Psi> = sin b1 cos b3 |e> + cos b1 cos b2 |1> + cos b1 sin b2 |2> + sin b1 sin b3 |3>.
struct InitialAngles {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double beta3 = 0.0;
};

/// H0 = Delta |e><e| + sum_j (Omega_j |e><j| + h.c.), J_j = |j><e| with rate
/// gamma_j, and controls H_j = |e><j| + |j><e|.
LindbladModel build_model(const Params& p);

/// |D1> = cos ph |2> - sin ph |1>,
/// |D2> = cos th (cos ph |1> + sin ph |2>) - sin th |3>.
TargetSubspace dark_states(double theta, double phi);

PureState initial_state(const InitialAngles& b);

}  // namespace dfsctl::four_level

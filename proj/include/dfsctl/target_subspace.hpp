#pragma once

#include <vector>

#include "dfsctl/quantum_core.hpp"

namespace dfsctl {

/// Orthonormal basis {|psi_1>, ..., |psi_D>} of a D-dimensional subspace of
/// an N-dimensional Hilbert space, stored as the columns of an N x D matrix.
class TargetSubspace {
 public:
  explicit TargetSubspace(const std::vector<PureState>& basis, double tol = 1e-10);
  /// Columns must be orthonormal within tol.
  static TargetSubspace from_columns(Mat columns, double tol = 1e-10);

  Eigen::Index ambient_dim() const { return cols_.rows(); }
  Eigen::Index size() const { return cols_.cols(); }
  const Mat& columns() const { return cols_; }
  PureState vector(Eigen::Index j) const { return PureState::normalized(cols_.col(j)); }

  /// rho_D = (1/D) sum_j |psi_j><psi_j|.
  DensityMatrix target_state() const;

  /// max_ij |<psi_i|psi_j> - delta_ij|.
  static double orthonormality_error(const Mat& columns);

 private:
  TargetSubspace() = default;
  void check(double tol) const;

  Mat cols_;
};

}  // namespace dfsctl

#include "dfsctl/target_subspace.hpp"

namespace dfsctl {

TargetSubspace::TargetSubspace(const std::vector<PureState>& basis, double tol) {
  if (basis.empty()) throw ValidationError("TargetSubspace needs at least one basis vector");
  const Eigen::Index n = basis.front().dim();
  cols_.resize(n, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (basis[j].dim() != n) throw DimensionError("TargetSubspace basis vectors differ in dimension");
    cols_.col(static_cast<Eigen::Index>(j)) = basis[j].vec();
  }
  check(tol);
}

TargetSubspace TargetSubspace::from_columns(Mat columns, double tol) {
  TargetSubspace s;
  s.cols_ = std::move(columns);
  s.check(tol);
  return s;
}

void TargetSubspace::check(double tol) const {
  if (cols_.cols() < 1) throw ValidationError("TargetSubspace needs at least one basis vector");
  if (cols_.cols() > cols_.rows()) {
    throw ValidationError("TargetSubspace has more basis vectors than the ambient dimension");
  }
  if (!cols_.allFinite()) throw ValidationError("TargetSubspace has non-finite amplitudes");
  const double err = orthonormality_error(cols_);
  if (err > tol) {
    throw ValidationError("TargetSubspace basis is not orthonormal (error " + std::to_string(err) + ")");
  }
}

DensityMatrix TargetSubspace::target_state() const {
  const double d = static_cast<double>(size());
  return DensityMatrix(ComplexMatrix(cols_ * cols_.adjoint() / d));
}

double TargetSubspace::orthonormality_error(const Mat& columns) {
  const Mat gram = columns.adjoint() * columns;
  return max_abs_diff(gram, Mat::Identity(gram.rows(), gram.cols()));
}

}  // namespace dfsctl

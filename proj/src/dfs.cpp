#include "dfsctl/dfs.hpp"

#include <algorithm>
#include <string>

namespace dfsctl {

namespace {

void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(want) + ", got " +
                         std::to_string(got));
  }
}

}  // namespace

ComplexMatrix gamma_operator(const LindbladModel& model) {
  const Eigen::Index n = model.dim();
  Mat g = Mat::Zero(n, n);
  for (const JumpOperator& j : model.jumps()) g += j.rate * j.op.mat().adjoint() * j.op.mat();
  return ComplexMatrix(std::move(g));
}

bool DfsReport::jumps_ok() const {
  return std::all_of(jumps.begin(), jumps.end(),
                     [this](const JumpEigenCheck& j) { return j.residual <= tolerance && j.consistency <= tolerance; });
}

DfsReport verify_dfs(const TargetSubspace& basis, const LindbladModel& model, double tol) {
  require_dim(basis.ambient_dim(), model.dim(), "verify_dfs");
  const Mat& b = basis.columns();
  if (TargetSubspace::orthonormality_error(b) > tol) throw ValidationError("verify_dfs: basis is not orthonormal");

  DfsReport r;
  r.tolerance = tol;

  const Mat projector = b * b.adjoint();
  const Mat h0b = model.h0().mat() * b;
  const Mat outside = h0b - projector * h0b;
  r.h0_invariance_residual = outside.colwise().norm().maxCoeff();

  for (const JumpOperator& jump : model.jumps()) {
    const Mat jb = jump.op.mat() * b;
    JumpEigenCheck c;
    c.eigenvalue = b.col(0).dot(jb.col(0));
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      c.residual = std::max(c.residual, (jb.col(j) - c.eigenvalue * b.col(j)).norm());
      c.consistency = std::max(c.consistency, std::abs(b.col(j).dot(jb.col(j)) - c.eigenvalue));
    }
    r.gamma_eigenvalue += jump.rate * std::norm(c.eigenvalue);
    r.jumps.push_back(c);
  }

  const Mat gb = gamma_operator(model).mat() * b;
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    r.gamma_residual = std::max(r.gamma_residual, (gb.col(j) - r.gamma_eigenvalue * b.col(j)).norm());
  }
  return r;
}

double raw_subspace_probability(const DensityMatrix& rho, const TargetSubspace& basis) {
  require_dim(basis.ambient_dim(), rho.dim(), "subspace_probability");
  const Mat& b = basis.columns();
  return (b.adjoint() * rho.mat() * b).trace().real();
}

double subspace_probability(const DensityMatrix& rho, const TargetSubspace& basis) {
  return std::clamp(raw_subspace_probability(rho, basis), 0.0, 1.0);
}

}  // namespace dfsctl

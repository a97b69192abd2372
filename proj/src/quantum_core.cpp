#include "dfsctl/quantum_core.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace dfsctl {

namespace {

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
  }
}

}  // namespace

ComplexMatrix::ComplexMatrix(Mat entries) : m_(std::move(entries)) {
  if (m_.rows() != m_.cols()) {
    throw DimensionError("ComplexMatrix must be square, got " + std::to_string(m_.rows()) + "x" +
                         std::to_string(m_.cols()));
  }
  if (m_.rows() < 1) throw DimensionError("ComplexMatrix must have dim >= 1");
  if (!m_.allFinite()) throw ValidationError("ComplexMatrix has non-finite entries");
}

ComplexMatrix ComplexMatrix::zero(Eigen::Index dim) { return ComplexMatrix(Mat::Zero(dim, dim)); }

ComplexMatrix ComplexMatrix::identity(Eigen::Index dim) { return ComplexMatrix(Mat::Identity(dim, dim)); }

ComplexMatrix ComplexMatrix::outer(Eigen::Index dim, Eigen::Index ket, Eigen::Index bra) {
  Mat m = Mat::Zero(dim, dim);
  m(ket, bra) = 1.0;
  return ComplexMatrix(std::move(m));
}

double ComplexMatrix::hermiticity_deviation() const { return max_abs_diff(m_, m_.adjoint()); }

ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "operator+");
  return ComplexMatrix(a.mat() + b.mat());
}

ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "operator-");
  return ComplexMatrix(a.mat() - b.mat());
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "operator*");
  return ComplexMatrix(a.mat() * b.mat());
}

ComplexMatrix operator*(Complex s, const ComplexMatrix& a) { return ComplexMatrix(s * a.mat()); }

double max_abs_diff(const Mat& a, const Mat& b) {
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

PureState::PureState(Vec amplitudes, double tol) : v_(std::move(amplitudes)) {
  if (v_.size() < 1) throw DimensionError("PureState must have dim >= 1");
  if (!v_.allFinite()) throw ValidationError("PureState has non-finite amplitudes");
  const double n = v_.norm();
  if (std::abs(n - 1.0) > tol) {
    throw ValidationError("PureState norm " + std::to_string(n) + " differs from 1");
  }
}

PureState PureState::normalized(Vec amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("cannot normalize a zero or non-finite vector");
  return PureState(amplitudes / n);
}

PureState PureState::basis(Eigen::Index dim, Eigen::Index k) {
  Vec v = Vec::Zero(dim);
  v(k) = 1.0;
  return PureState(std::move(v));
}

std::string DensityReport::failures() const {
  std::string out;
  auto add = [&out](const char* s) {
    if (!out.empty()) out += ",";
    out += s;
  };
  if (!hermitian_ok) add("hermiticity");
  if (!trace_ok) add("trace");
  if (!positive_ok) add("positivity");
  return out;
}

DensityReport validate_density(const Mat& m, const DensityTolerances& tol) {
  DensityReport r;
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw DimensionError("validate_density requires a square matrix");
  }
  if (!m.allFinite()) {
    r.hermiticity_deviation = r.trace_deviation = std::numeric_limits<double>::infinity();
    r.min_eigenvalue = -std::numeric_limits<double>::infinity();
    return r;
  }
  r.hermiticity_deviation = max_abs_diff(m, m.adjoint());
  r.trace_deviation = std::abs(m.trace() - Complex(1.0, 0.0));
  const Mat herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(herm, Eigen::EigenvaluesOnly);
  r.min_eigenvalue = es.eigenvalues().minCoeff();
  r.hermitian_ok = r.hermiticity_deviation <= tol.hermiticity;
  r.trace_ok = r.trace_deviation <= tol.trace;
  r.positive_ok = r.min_eigenvalue >= -tol.positivity;
  return r;
}

DensityReport validate_density(const ComplexMatrix& m, const DensityTolerances& tol) {
  return validate_density(m.mat(), tol);
}

DensityMatrix::DensityMatrix(ComplexMatrix m, const DensityTolerances& tol) : m_(std::move(m)) {
  const DensityReport r = validate_density(m_, tol);
  if (!r.pass()) {
    throw ValidationError("not a density matrix (" + r.failures() + "): herm_dev=" +
                          std::to_string(r.hermiticity_deviation) + " trace_dev=" +
                          std::to_string(r.trace_deviation) + " min_eig=" + std::to_string(r.min_eigenvalue));
  }
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  return DensityMatrix(ComplexMatrix(psi.vec() * psi.vec().adjoint()));
}

DensityMatrix DensityMatrix::mixture(const std::vector<PureState>& states, const std::vector<double>& weights) {
  if (states.empty() || states.size() != weights.size()) {
    throw std::invalid_argument("mixture needs one weight per state");
  }
  const Eigen::Index n = states.front().dim();
  Mat m = Mat::Zero(n, n);
  for (std::size_t k = 0; k < states.size(); ++k) {
    require_same_dim(states[k].dim(), n, "mixture");
    if (weights[k] < 0.0) throw ValidationError("mixture weights must be nonnegative");
    m += weights[k] * states[k].vec() * states[k].vec().adjoint();
  }
  return DensityMatrix(ComplexMatrix(std::move(m)));
}

double DensityMatrix::purity() const { return (mat() * mat()).trace().real(); }

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "commutator");
  return ComplexMatrix(a.mat() * b.mat() - b.mat() * a.mat());
}

double expectation(const DensityMatrix& rho, const PureState& psi) {
  require_same_dim(rho.dim(), psi.dim(), "expectation");
  return psi.vec().dot(rho.mat() * psi.vec()).real();
}

}  // namespace dfsctl

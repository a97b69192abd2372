#pragma once

// Dense complex linear algebra for small open quantum systems.
//
// All operators are N x N complex matrices in units where hbar = 1. The
// wrappers below check their invariants once at construction and are
// immutable afterwards, so they can be shared freely between threads.

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dfsctl {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

/// Raised when operands do not share a dimension.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a value violates a physical or structural invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Square, finite, dense complex matrix.
class ComplexMatrix {
 public:
  explicit ComplexMatrix(Mat entries);

  static ComplexMatrix zero(Eigen::Index dim);
  static ComplexMatrix identity(Eigen::Index dim);
  /// |ket><bra| on the computational basis.
  static ComplexMatrix outer(Eigen::Index dim, Eigen::Index ket, Eigen::Index bra);

  Eigen::Index dim() const { return m_.rows(); }
  const Mat& mat() const { return m_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  ComplexMatrix adjoint() const { return ComplexMatrix(m_.adjoint()); }
  /// Largest absolute entry of (A - A^dagger).
  double hermiticity_deviation() const;

 private:
  Mat m_;
};

ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(Complex s, const ComplexMatrix& a);

/// Max-abs entry of a - b.
double max_abs_diff(const Mat& a, const Mat& b);

/// Unit-norm state vector.
class PureState {
 public:
  /// Requires |norm - 1| <= tol.
  explicit PureState(Vec amplitudes, double tol = 1e-12);
  /// Rescales a nonzero vector to unit norm.
  static PureState normalized(Vec amplitudes);
  static PureState basis(Eigen::Index dim, Eigen::Index k);

  Eigen::Index dim() const { return v_.size(); }
  const Vec& vec() const { return v_; }
  Complex operator[](Eigen::Index k) const { return v_(k); }

 private:
  Vec v_;
};

struct DensityTolerances {
  double hermiticity = 1e-9;
  double trace = 1e-9;
  /// Minimum eigenvalue must be >= -positivity.
  double positivity = 1e-8;
};

struct DensityReport {
  double hermiticity_deviation = 0.0;
  /// |Tr rho - 1|, including any imaginary part of the trace.
  double trace_deviation = 0.0;
  double min_eigenvalue = 0.0;
  bool hermitian_ok = false;
  bool trace_ok = false;
  bool positive_ok = false;

  bool pass() const { return hermitian_ok && trace_ok && positive_ok; }
  /// Comma-separated list of the failed checks, empty on pass.
  std::string failures() const;
};

/// Always produces a report. Positivity is judged on the Hermitian part
/// (m + m^dagger)/2 with a self-adjoint eigensolver.
DensityReport validate_density(const ComplexMatrix& m, const DensityTolerances& tol = {});
DensityReport validate_density(const Mat& m, const DensityTolerances& tol = {});

/// Hermitian, unit-trace, positive semidefinite matrix.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix m, const DensityTolerances& tol = {});
  static DensityMatrix from_pure(const PureState& psi);
  /// Convex mixture sum_k w_k |psi_k><psi_k|; weights must be >= 0 and sum to 1.
  static DensityMatrix mixture(const std::vector<PureState>& states, const std::vector<double>& weights);

  Eigen::Index dim() const { return m_.dim(); }
  const ComplexMatrix& matrix() const { return m_; }
  const Mat& mat() const { return m_.mat(); }

  double purity() const;

 private:
  ComplexMatrix m_;
};

/// ab - ba.
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// <psi|rho|psi>. The imaginary part is dropped; it vanishes for Hermitian rho.
double expectation(const DensityMatrix& rho, const PureState& psi);

}  // namespace dfsctl

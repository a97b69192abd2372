#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "dfsctl/quantum_core.hpp"

namespace testing_support {

using dfsctl::Complex;
using dfsctl::Mat;
using dfsctl::Vec;

inline constexpr double kPi = 3.14159265358979323846;

inline Mat random_matrix(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  Mat m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  }
  return m;
}

inline Mat random_hermitian(std::mt19937_64& rng, Eigen::Index n) {
  const Mat a = random_matrix(rng, n);
  return 0.5 * (a + a.adjoint());
}

inline Vec random_unit(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
  return v / v.norm();
}

// Full-rank random state A A^dagger / Tr.
inline Mat random_density(std::mt19937_64& rng, Eigen::Index n) {
  const Mat a = random_matrix(rng, n);
  Mat r = a * a.adjoint();
  return r / r.trace();
}

// exp(-i H t) by Hermitian diagonalization.
inline Mat exact_propagator(const Mat& h, double t) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  Vec phases(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k) phases(k) = std::exp(Complex(0.0, -es.eigenvalues()(k) * t));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

inline Mat ket_bra(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
  Mat m = Mat::Zero(n, n);
  m(i, j) = 1.0;
  return m;
}

}  // namespace testing_support

#pragma once

// Nonzero-entry lists of the model operators, used by the integrator's inner
// loop. Storage stays dense everywhere else; these lists are derived caches.

#include <vector>

#include "dfsctl/quantum_core.hpp"

namespace dfsctl::detail {

struct Term {
  Eigen::Index row;
  Eigen::Index col;
  Complex value;
};

using Terms = std::vector<Term>;

inline Terms nonzero_terms(const Mat& a) {
  Terms t;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (a(i, j) != Complex(0.0, 0.0)) t.push_back({i, j, a(i, j)});
    }
  }
  return t;
}

/// out += s * A x
inline void add_left_product(const Terms& a, const Mat& x, Complex s, Mat& out) {
  for (const Term& t : a) out.row(t.row) += (s * t.value) * x.row(t.col);
}

/// out += s * x A
inline void add_right_product(const Mat& x, const Terms& a, Complex s, Mat& out) {
  for (const Term& t : a) out.col(t.col) += (s * t.value) * x.col(t.row);
}

/// out += s * A x A^dagger
inline void add_sandwich(const Terms& a, const Mat& x, Complex s, Mat& out) {
  for (const Term& p : a) {
    for (const Term& q : a) out(p.row, q.row) += s * p.value * x(p.col, q.col) * std::conj(q.value);
  }
}

/// Tr(A x)
inline Complex trace_product(const Terms& a, const Mat& x) {
  Complex acc{0.0, 0.0};
  for (const Term& t : a) acc += t.value * x(t.col, t.row);
  return acc;
}

/// Tr(A (x y - y x)), touching only the entries of the commutator that A selects.
inline Complex trace_commutator_product(const Terms& a, const Mat& x, const Mat& y) {
  Complex acc{0.0, 0.0};
  for (const Term& t : a) {
    const Complex c = x.row(t.col).transpose().cwiseProduct(y.col(t.row)).sum() -
                      y.row(t.col).transpose().cwiseProduct(x.col(t.row)).sum();
    acc += t.value * c;
  }
  return acc;
}

}  // namespace dfsctl::detail

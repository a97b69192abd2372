#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace dfsctl {

/// One evaluation of the feedback law.
struct FieldSample {
  /// One real amplitude per control Hamiltonian, energy units.
  std::vector<double> fields;
  /// Index that cancels the dissipative contribution, if one was chosen.
  std::optional<std::size_t> n0;
  /// Tr{rho_D [rho, i H_n0]} for the chosen n0.
  double denominator = 0.0;
  /// Tr[rho_D L(rho)].
  double numerator = 0.0;
  /// |denominator| fell below the floor, so f_n0 was set to zero.
  bool floored = false;
  /// Per-field clamp flags.
  std::vector<bool> capped;

  bool any_capped() const {
    for (bool c : capped) {
      if (c) return true;
    }
    return false;
  }

  void reset(std::size_t n) {
    fields.assign(n, 0.0);
    capped.assign(n, false);
    n0.reset();
    denominator = numerator = 0.0;
    floored = false;
  }
};

}  // namespace dfsctl

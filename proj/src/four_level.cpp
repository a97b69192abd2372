#include "dfsctl/four_level.hpp"

#include <cmath>
#include <stdexcept>

namespace dfsctl::four_level {

std::array<double, 3> Params::couplings() const {
  return {omega * std::sin(theta) * std::cos(phi), omega * std::sin(theta) * std::sin(phi), omega * std::cos(theta)};
}

void Params::validate() const {
  if (!std::isfinite(delta) || !std::isfinite(theta) || !std::isfinite(phi)) {
    throw std::invalid_argument("four-level parameters must be finite");
  }
  if (!(omega >= 0.0) || !std::isfinite(omega)) throw std::invalid_argument("omega must be finite and >= 0");
  for (double g : gammas) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw std::invalid_argument("decay rates must be finite and >= 0");
  }
}

LindbladModel build_model(const Params& p) {
  p.validate();
  const auto om = p.couplings();

  Mat h0 = Mat::Zero(kDim, kDim);
  h0(kExcited, kExcited) = p.delta;
  std::vector<JumpOperator> jumps;
  std::vector<ComplexMatrix> controls;
  for (Eigen::Index j = 1; j <= 3; ++j) {
    h0(kExcited, j) = om[j - 1];
    h0(j, kExcited) = om[j - 1];
    jumps.push_back({ComplexMatrix::outer(kDim, j, kExcited), p.gammas[j - 1]});
    controls.push_back(ComplexMatrix::outer(kDim, kExcited, j) + ComplexMatrix::outer(kDim, j, kExcited));
  }
  return LindbladModel(ComplexMatrix(std::move(h0)), std::move(jumps), std::move(controls));
}

TargetSubspace dark_states(double theta, double phi) {
  Vec d1 = Vec::Zero(kDim);
  d1(1) = -std::sin(phi);
  d1(2) = std::cos(phi);
  Vec d2 = Vec::Zero(kDim);
  d2(1) = std::cos(theta) * std::cos(phi);
  d2(2) = std::cos(theta) * std::sin(phi);
  d2(3) = -std::sin(theta);
  return TargetSubspace({PureState(std::move(d1)), PureState(std::move(d2))});
}

PureState initial_state(const InitialAngles& b) {
  Vec v(kDim);
  v(0) = std::sin(b.beta1) * std::cos(b.beta3);
  v(1) = std::cos(b.beta1) * std::cos(b.beta2);
  v(2) = std::cos(b.beta1) * std::sin(b.beta2);
  v(3) = std::sin(b.beta1) * std::sin(b.beta3);
  return PureState(std::move(v));
}

}  // namespace dfsctl::four_level

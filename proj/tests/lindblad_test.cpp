#include <gtest/gtest.h>

#include "dfsctl/control.hpp"
#include "dfsctl/dfs.hpp"
#include "dfsctl/four_level.hpp"
#include "dfsctl/lindblad.hpp"
#include "support.hpp"

using namespace dfsctl;
using namespace testing_support;

namespace {

four_level::Params nominal(double gamma = 0.0) {
  return {3.0, 5.0, kPi / 3.0, kPi / 4.0, {gamma, gamma, gamma}};
}

LindbladModel random_model(std::mt19937_64& rng, Eigen::Index n, int jumps, int controls) {
  std::uniform_real_distribution<double> rate(0.0, 2.0);
  std::vector<JumpOperator> js;
  for (int m = 0; m < jumps; ++m) js.push_back({ComplexMatrix(random_matrix(rng, n)), rate(rng)});
  std::vector<ComplexMatrix> hs;
  for (int k = 0; k < controls; ++k) hs.emplace_back(random_hermitian(rng, n));
  return LindbladModel(ComplexMatrix(random_hermitian(rng, n)), js, hs);
}

// Hermitian with spectral radius scaled to `norm`.
Mat scaled_hermitian(std::mt19937_64& rng, Eigen::Index n, double norm) {
  const Mat h = random_hermitian(rng, n);
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  return h * (norm / es.eigenvalues().cwiseAbs().maxCoeff());
}

}  // namespace

TEST(LindbladModel, Validation) {
  const ComplexMatrix h = ComplexMatrix::identity(2);
  EXPECT_THROW(LindbladModel(ComplexMatrix(ket_bra(2, 0, 1)), {}, {}), ValidationError);
  EXPECT_THROW(LindbladModel(h, {{ComplexMatrix::identity(2), -0.1}}, {}), ValidationError);
  EXPECT_THROW(LindbladModel(h, {{ComplexMatrix::identity(3), 0.1}}, {}), DimensionError);
  EXPECT_THROW(LindbladModel(h, {}, {ComplexMatrix(ket_bra(2, 0, 1))}), ValidationError);
  EXPECT_FALSE(LindbladModel(h, {{ComplexMatrix::identity(2), 0.0}}, {}).dissipative());
  EXPECT_TRUE(LindbladModel(h, {{ComplexMatrix::identity(2), 0.5}}, {}).dissipative());
}

TEST(Dissipator, ZeroRates) {
  const auto model = four_level::build_model(nominal(0.0));
  std::mt19937_64 rng(2);
  const DensityMatrix rho{ComplexMatrix(random_density(rng, 4))};
  EXPECT_EQ(max_abs(dissipator(model, rho).mat()), 0.0);
}

TEST(Dissipator, ExcitedStateDecay) {
  four_level::Params p = nominal();
  p.gammas = {0.1, 0.2, 0.3};
  const auto model = four_level::build_model(p);
  const DensityMatrix rho = DensityMatrix::from_pure(PureState::basis(4, 0));
  Mat want = Mat::Zero(4, 4);
  want(0, 0) = -0.6;
  want(1, 1) = 0.1;
  want(2, 2) = 0.2;
  want(3, 3) = 0.3;
  EXPECT_LE(max_abs(dissipator(model, rho).mat() - want), 1e-15);
}

TEST(Dissipator, DarkStateIsUntouched) {
  const auto p = nominal(0.4);
  const auto model = four_level::build_model(p);
  const auto dark = four_level::dark_states(p.theta, p.phi);
  for (Eigen::Index j = 0; j < 2; ++j) {
    EXPECT_LE(max_abs(dissipator(model, DensityMatrix::from_pure(dark.vector(j))).mat()), 1e-15);
  }
}

TEST(Dissipator, MatchesDirectFormula) {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 50; ++k) {
    const auto model = random_model(rng, 3 + k % 3, 1 + k % 3, 1);
    const Mat rho = random_density(rng, model.dim());
    Mat want = Mat::Zero(model.dim(), model.dim());
    for (const JumpOperator& j : model.jumps()) {
      const Mat& a = j.op.mat();
      const Mat ad = a.adjoint();
      want += j.rate * (a * rho * ad - 0.5 * (ad * a * rho + rho * ad * a));
    }
    EXPECT_LE(max_abs(apply_dissipator(model, rho) - want), 1e-12);
  }
}

TEST(Dissipator, TracelessAndHermitian) {
  std::mt19937_64 rng(19);
  for (int k = 0; k < 200; ++k) {
    const auto model = random_model(rng, 2 + k % 5, 1 + k % 4, 0);
    const Mat rho = random_hermitian(rng, model.dim());
    const Mat l = apply_dissipator(model, rho);
    EXPECT_LE(std::abs(l.trace()), 1e-12);
    EXPECT_LE(max_abs(l - l.adjoint()), 1e-12);
  }
}

TEST(LindbladRhs, FieldCountChecked) {
  const auto model = four_level::build_model(nominal());
  const DensityMatrix rho = DensityMatrix::from_pure(PureState::basis(4, 1));
  const std::vector<double> two{0.0, 0.0};
  EXPECT_THROW(lindblad_rhs(model, rho, two), std::invalid_argument);
}

TEST(LindbladRhs, StationaryEigenprojector) {
  std::mt19937_64 rng(23);
  const Mat h = random_hermitian(rng, 4);
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  const LindbladModel model(ComplexMatrix(h), {}, {ComplexMatrix(random_hermitian(rng, 4))});
  const DensityMatrix rho = DensityMatrix::from_pure(PureState::normalized(es.eigenvectors().col(2)));
  const std::vector<double> zero{0.0};
  EXPECT_LE(max_abs(lindblad_rhs(model, rho, zero).mat()), 1e-12);
}

TEST(LindbladRhs, ZeroFieldDecomposition) {
  auto p = nominal(0.25);
  const auto model = four_level::build_model(p);
  std::mt19937_64 rng(29);
  const DensityMatrix rho{ComplexMatrix(random_density(rng, 4))};
  const std::vector<double> zero(3, 0.0);
  const Mat& h0 = model.h0().mat();
  const Mat want = -kI * (h0 * rho.mat() - rho.mat() * h0) + dissipator(model, rho).mat();
  EXPECT_LE(max_abs(lindblad_rhs(model, rho, zero).mat() - want), 1e-13);
}

TEST(LindbladRhs, ExcitedStateEntries) {
  const auto p = nominal();
  const auto model = four_level::build_model(p);
  const DensityMatrix rho = DensityMatrix::from_pure(PureState::basis(4, 0));
  const std::vector<double> zero(3, 0.0);
  const Mat r = lindblad_rhs(model, rho, zero).mat();
  const auto om = p.couplings();
  for (int j = 0; j < 3; ++j) {
    // -i (H0 |e><e| - |e><e| H0)_{e,j} = i Omega_j
    EXPECT_LE(std::abs(r(0, j + 1) - Complex(0.0, om[j])), 1e-14);
    EXPECT_LE(std::abs(r(j + 1, 0) - Complex(0.0, -om[j])), 1e-14);
  }
  EXPECT_LE(std::abs(r(0, 0)), 1e-15);
}

TEST(LindbladRhs, LinearTracelessHermitian) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 100; ++k) {
    const auto model = random_model(rng, 4, 2, 2);
    const std::vector<double> f{std::normal_distribution<double>()(rng), std::normal_distribution<double>()(rng)};
    const Mat a = random_hermitian(rng, 4), b = random_hermitian(rng, 4);
    const double s = 0.37;
    const Mat lhs = apply_rhs(model, a + s * b, f);
    EXPECT_LE(max_abs(lhs - apply_rhs(model, a, f) - s * apply_rhs(model, b, f)), 1e-12);
    EXPECT_LE(std::abs(lhs.trace()), 1e-12);
    EXPECT_LE(max_abs(lhs - lhs.adjoint()), 1e-12);
  }
}

TEST(Rk4Step, RejectsNonPositiveDt) {
  const auto model = four_level::build_model(nominal());
  const LoopState s{Mat::Identity(4, 4) / 4.0, four_level::dark_states(1.0, 0.5).columns()};
  EXPECT_THROW(rk4_step(model, zero_controller(3), s, 0.0, 0.0), std::invalid_argument);
  EXPECT_THROW(rk4_step(model, zero_controller(3), s, 0.0, -1e-3), std::invalid_argument);
}

TEST(Rk4Step, DiagonalCaseUnchanged) {
  Mat h = Mat::Zero(3, 3);
  h.diagonal() << 1.0, -2.0, 5.0;
  const LindbladModel model(ComplexMatrix(h), {}, {});
  Mat rho = Mat::Zero(3, 3);
  rho.diagonal() << 0.5, 0.3, 0.2;
  const LoopState s{rho, Mat::Identity(3, 1)};
  const LoopState next = rk4_step(model, zero_controller(0), s, 0.0, 1e-3);
  EXPECT_LE(max_abs(next.rho - rho), 1e-16);
}

TEST(Rk4Step, OneStepMatchesExactPropagator) {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    // spectrum in [0, 10], largest eigenvalue exactly 10
    Eigen::HouseholderQR<Mat> qr(random_matrix(rng, 4));
    const Mat q = qr.householderQ();
    Vec ev(4);
    ev << 10.0, 10.0 * u01(rng), 10.0 * u01(rng), 0.0;
    const Mat h = q * ev.asDiagonal() * q.adjoint();
    const LindbladModel model(ComplexMatrix(0.5 * (h + h.adjoint())), {}, {});
    const Mat rho = random_density(rng, 4);
    const Mat basis = random_unit(rng, 4);
    const double dt = 1e-3;
    const LoopState next = rk4_step(model, zero_controller(0), {rho, basis}, 0.0, dt);
    const Mat u = exact_propagator(model.h0().mat(), dt);
    EXPECT_LE(max_abs(next.rho - u * rho * u.adjoint()), 1e-12);
    EXPECT_LE(max_abs(next.basis - u * basis), 1e-12);
    EXPECT_LE(std::abs(next.rho.trace() - 1.0), 1e-12);
  }
}

TEST(Rk4Step, FourthOrderConvergence) {
  std::mt19937_64 rng(41);
  const Mat h = scaled_hermitian(rng, 4, 10.0);
  const LindbladModel model(ComplexMatrix(h), {}, {});
  const Mat rho = random_density(rng, 4);
  const double t_end = 1.0;
  const Mat u = exact_propagator(h, t_end);
  const Mat exact = u * rho * u.adjoint();
  auto error_at = [&](double dt) {
    LoopState s{rho, Mat::Identity(4, 1)};
    ClosedLoopStepper stepper(model, zero_controller(0));
    const auto steps = std::llround(t_end / dt);
    for (long long k = 0; k < steps; ++k) stepper.step(s, k * dt, dt);
    return max_abs(s.rho - exact);
  };
  // one decade of dt
  const std::vector<double> dts{0.016, 0.008, 0.004, 0.002};
  double prev = error_at(dts[0]);
  for (std::size_t i = 1; i < dts.size(); ++i) {
    const double e = error_at(dts[i]);
    EXPECT_GE(prev / e, 8.0) << "dt=" << dts[i];
    prev = e;
  }
}

TEST(Rk4Step, TracePreservedWithDissipationAndControl) {
  std::mt19937_64 rng(43);
  const auto model = four_level::build_model(nominal(0.3));
  const Controller ctl = make_feedback_controller(model, ControlConfig{});
  LoopState s{random_density(rng, 4), four_level::dark_states(kPi / 3.0, kPi / 4.0).columns()};
  ClosedLoopStepper stepper(model, ctl);
  for (int k = 0; k < 1000; ++k) {
    stepper.step(s, k * 1e-3, 1e-3);
    ASSERT_LE(std::abs(s.rho.trace() - 1.0), 1e-12);
  }
}

TEST(Evolve, SampleBookkeeping) {
  const auto model = four_level::build_model(nominal());
  const auto dark = four_level::dark_states(kPi / 3.0, kPi / 4.0);
  const auto rho0 = DensityMatrix::from_pure(four_level::initial_state({0.2 * kPi, 0.35 * kPi, 0.2 * kPi}));
  EvolveOptions o;
  o.dt = 1e-3;
  o.t_max = 10 * o.dt;
  o.sample_every = 1;
  const Trajectory tr = evolve(model, zero_controller(3), rho0, dark, o);
  ASSERT_EQ(tr.samples.size(), 11u);
  for (std::size_t k = 1; k < tr.samples.size(); ++k) EXPECT_GT(tr.samples[k].t, tr.samples[k - 1].t);
  EXPECT_NEAR(tr.samples.back().t, 0.01, 1e-15);

  o.t_max = 1.0;
  o.sample_every = 300;
  const Trajectory sparse = evolve(model, zero_controller(3), rho0, dark, o);
  ASSERT_EQ(sparse.samples.size(), 5u);
  EXPECT_NEAR(sparse.samples[3].t, 0.9, 1e-12);
  EXPECT_NEAR(sparse.samples[4].t, 1.0, 1e-12);
}

TEST(Evolve, RejectsBadOptions) {
  const auto model = four_level::build_model(nominal());
  const auto dark = four_level::dark_states(kPi / 3.0, kPi / 4.0);
  const auto rho0 = DensityMatrix::from_pure(PureState::basis(4, 1));
  EvolveOptions o;
  o.dt = 0.0;
  EXPECT_THROW(evolve(model, zero_controller(3), rho0, dark, o), std::invalid_argument);
  o = {};
  o.sample_every = 0;
  EXPECT_THROW(evolve(model, zero_controller(3), rho0, dark, o), std::invalid_argument);
  o = {};
  o.t_max = 0.0;
  EXPECT_THROW(evolve(model, zero_controller(3), rho0, dark, o), std::invalid_argument);
}

TEST(Evolve, UnitaryRunKeepsPurity) {
  const auto model = four_level::build_model(nominal());
  const auto dark = four_level::dark_states(kPi / 3.0, kPi / 4.0);
  std::mt19937_64 rng(47);
  const DensityMatrix rho0{ComplexMatrix(random_density(rng, 4))};
  EvolveOptions o;
  o.t_max = 10.0;
  o.sample_every = 100;
  const Trajectory tr = evolve(model, zero_controller(3), rho0, dark, o);
  for (const auto& s : tr.samples) EXPECT_NEAR(s.purity, rho0.purity(), 1e-9);
}

TEST(Evolve, ControlledUnitaryRunKeepsPurity) {
  const auto model = four_level::build_model(nominal());
  const auto dark = four_level::dark_states(kPi / 3.0, kPi / 4.0);
  std::mt19937_64 rng(53);
  const DensityMatrix rho0{ComplexMatrix(random_density(rng, 4))};
  EvolveOptions o;
  o.t_max = 100.0;
  o.sample_every = 1000;
  const Trajectory tr = evolve(model, make_feedback_controller(model, ControlConfig{}), rho0, dark, o);
  for (const auto& s : tr.samples) EXPECT_NEAR(s.purity, rho0.purity(), 1e-6);
}

TEST(Evolve, ControlledRunReachesDarkSubspace) {
  const auto model = four_level::build_model(nominal());
  const auto dark = four_level::dark_states(kPi / 3.0, kPi / 4.0);
  const auto rho0 = DensityMatrix::from_pure(four_level::initial_state({0.2 * kPi, 0.35 * kPi, 0.2 * kPi}));
  EvolveOptions o;
  o.t_max = 100.0;
  o.sample_every = 1000;
  const Trajectory tr = evolve(model, make_feedback_controller(model, ControlConfig{}), rho0, dark, o);
  EXPECT_GE(tr.samples.back().p_subspace, 0.99);
  EXPECT_EQ(tr.dv_violations, 0u);
  for (const auto& s : tr.samples) {
    EXPECT_LE(s.diagnostics.trace_deviation, 1e-9);
    EXPECT_LE(s.diagnostics.hermiticity_deviation, 1e-9);
    EXPECT_GE(s.diagnostics.min_eigenvalue, -1e-8);
  }
}

TEST(Evolve, UnstableStepReportsTime) {
  std::mt19937_64 rng(59);
  const LindbladModel model(ComplexMatrix(scaled_hermitian(rng, 4, 10.0)), {}, {});
  const DensityMatrix rho0{ComplexMatrix(random_density(rng, 4))};
  EvolveOptions o;
  o.dt = 0.5;
  o.t_max = 50.0;
  try {
    evolve(model, zero_controller(0), rho0, TargetSubspace::from_columns(Mat::Identity(4, 1)), o);
    FAIL() << "expected IntegrationError";
  } catch (const IntegrationError& e) {
    EXPECT_GT(e.time(), 0.0);
    EXPECT_FALSE(e.report().pass());
  }
}

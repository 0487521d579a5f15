#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "clfpde/error.hpp"
#include "clfpde/reduced.hpp"
#include "fixtures.hpp"

using namespace clfpde;
using fixtures::pi;

namespace {

// int_0^1 sin(a x) sin(b x) dx
double sin_sin(double a, double b) {
  auto sinc_half = [](double c) { return std::abs(c) < 1e-12 ? 0.5 : std::sin(c) / (2 * c); };
  return sinc_half(a - b) - sinc_half(a + b);
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

Eigen::VectorXd sorted_real_eigs(const Eigen::MatrixXd& A) {
  Eigen::VectorXd ev = A.eigenvalues().real();
  std::sort(ev.data(), ev.data() + ev.size());
  return ev;
}

}  // namespace

TEST_CASE("input matrix against analytic integrals") {
  const auto& m = fixtures::two_mode();
  const double q = -5.0 * pi * pi;
  for (int i = 0; i < 2; ++i) {
    const double omega = std::sqrt(m.shapes.mus[i] - q);
    const Eigen::VectorXd closed = input_vector_closed_form(m.problem, m.eigsys, m.shapes.mus[i], 2);
    for (int n = 1; n <= 2; ++n) {
      const double exact = -std::sqrt(2.0) * sin_sin(n * pi, omega) / std::sin(omega);
      CHECK(std::abs(m.model.B(n - 1, i) - exact) <= 1e-7 * std::abs(exact));
      CHECK(std::abs(closed[n - 1] - exact) <= 1e-7 * std::abs(exact));
    }
  }
  CHECK(m.model.lambda_next == doctest::Approx(4.0 * pi * pi).epsilon(1e-9));
  CHECK(m.model.C(0, 0) == doctest::Approx(4.0 * pi * pi).epsilon(1e-9));
}

TEST_CASE("closed-form gains assign -diag(sigma)") {
  const auto& m = fixtures::two_mode();
  Eigen::VectorXd targets(2);
  targets << 1.0, 3.0;
  const GainDesign d = design_gains(m.model, targets, GainMode::ClosedForm);
  const Eigen::MatrixXd A = closed_loop_matrix(m.model, d.K);
  CHECK((A + Eigen::MatrixXd(targets.asDiagonal())).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(d.sigma == 1.0);
  CHECK(d.R.isIdentity());
  CHECK(gain_inequality_residual(m.model, d) <= 1e-9);
}

TEST_CASE("single-input pole placement and Lyapunov certificate") {
  const auto& m = fixtures::two_mode();
  ShapeSet one = m.shapes;
  one.j = 1;
  one.mus = one.mus.head(1).eval();
  one.varphis = one.varphis.leftCols(1).eval();
  one.norms_sq = one.norms_sq.head(1).eval();
  const ReducedModel model = build_reduced_model(m.eigsys, one, 2);

  const ControllabilityReport ctrl = check_controllability(model);
  CHECK(ctrl.pass);
  CHECK(ctrl.structural());
  CHECK(ctrl.rank == 2);

  Eigen::VectorXd targets(2);
  targets << 2.0, 5.0;
  const GainDesign d = design_gains(model, targets, GainMode::PolePlacement);
  const Eigen::MatrixXd A = closed_loop_matrix(model, d.K);
  const Eigen::VectorXd ev = sorted_real_eigs(A);
  CHECK(ev[0] == doctest::Approx(-5.0).epsilon(1e-8));
  CHECK(ev[1] == doctest::Approx(-2.0).epsilon(1e-8));
  const Eigen::MatrixXd lyap = d.R * A + A.transpose() * d.R + 2.0 * d.sigma * Eigen::MatrixXd::Identity(2, 2);
  CHECK(lyap.cwiseAbs().maxCoeff() < 1e-8 * d.R.norm());
  CHECK(d.c1 > 0.0);
  CHECK(d.c2 >= d.c1);
}

TEST_CASE("uncontrollable and singular models are rejected") {
  ReducedModel model;
  model.N = 2, model.j = 1;
  model.C = Eigen::Vector2d(3.0, 1.0).asDiagonal();
  model.B = Eigen::Vector2d(1.0, 0.0);
  model.lambda_next = 1.0;
  const auto ctrl = check_controllability(model);
  CHECK_FALSE(ctrl.pass);
  CHECK_FALSE(ctrl.b_nonzero);
  CHECK(code_of([&] { design_gains(model, Eigen::Vector2d(1, 2), GainMode::PolePlacement); }) ==
        ErrorCode::PlacementFailed);
  CHECK(code_of([&] { design_gains(model, Eigen::Vector2d(1, 2), GainMode::ClosedForm); }) == ErrorCode::SingularB);

  model.j = 2;
  model.B = Eigen::Matrix2d::Ones();
  CHECK(code_of([&] { design_gains(model, Eigen::Vector2d(1, 2), GainMode::ClosedForm); }) == ErrorCode::SingularB);
  model.B = Eigen::Matrix2d::Identity();
  CHECK(code_of([&] { design_gains(model, Eigen::Vector2d(1, -2), GainMode::ClosedForm); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("cutoff validation") {
  const auto& m = fixtures::two_mode();
  CHECK(code_of([&] { build_reduced_model(m.eigsys, m.shapes, 1); }) == ErrorCode::CutoffNotStrictlyStable);
  CHECK(code_of([&] { build_reduced_model(m.eigsys, m.shapes, 64); }) == ErrorCode::CutoffExceedsComputedModes);
  CHECK(parse_gain_mode(to_string(GainMode::PolePlacement)) == GainMode::PolePlacement);
  CHECK(code_of([&] { parse_gain_mode("lqr"); }) == ErrorCode::ConfigInvalid);
}

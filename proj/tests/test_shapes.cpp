#include <doctest.h>

#include <cmath>

#include "clfpde/error.hpp"
#include "clfpde/shapes.hpp"
#include "fixtures.hpp"

using namespace clfpde;
using fixtures::pi;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("Dirichlet shapes match sin(omega x) / sin(omega)") {
  const auto& m = fixtures::two_mode();
  const double q = -5.0 * pi * pi;
  for (int i = 0; i < 2; ++i) {
    const double omega = std::sqrt(m.shapes.mus[i] - q);
    double err = 0.0;
    for (int k = 0; k < m.eigsys.grid.n_points; ++k) {
      const double x = m.eigsys.grid.x[k];
      err = std::max(err, std::abs(m.shapes.varphis(k, i) - std::sin(omega * x) / std::sin(omega)));
    }
    CHECK(err < 1e-9);
    // ||varphi||^2 = (1/2 - sin(2 omega) / (4 omega)) / sin^2(omega)
    const double s = std::sin(omega);
    CHECK(m.shapes.norms_sq[i] == doctest::Approx((0.5 - std::sin(2 * omega) / (4 * omega)) / (s * s)).epsilon(1e-10));
  }
}

TEST_CASE("shapes from both elimination directions agree") {
  const auto& m = fixtures::two_mode();
  ShapeOptions rev;
  rev.reverse_elimination = true;
  const Eigen::VectorXd a = solve_shape_bvp(m.problem, m.eigsys, 7.0);
  const Eigen::VectorXd b = solve_shape_bvp(m.problem, m.eigsys, 7.0, rev);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9 * a.cwiseAbs().maxCoeff());
}

TEST_CASE("Robin shapes satisfy both boundary conditions") {
  SLProblem pr = fixtures::dirichlet(1.0, 2.0);
  pr.b1 = 0.6, pr.b2 = 0.8;
  pr.a1 = std::sqrt(0.5), pr.a2 = std::sqrt(0.5);
  const auto es = eigensolve(pr, Grid::uniform(), 16);
  const Eigen::VectorXd f = solve_shape_bvp(pr, es, 3.5);
  const double h = es.grid.h;
  const int n = es.grid.n_points - 1;
  // second-order one-sided differences
  const double d0 = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h);
  const double d1 = (3 * f[n] - 4 * f[n - 1] + f[n - 2]) / (2 * h);
  CHECK(std::abs(pr.b1 * f[0] + pr.b2 * d0) < 1e-5);
  CHECK(std::abs(pr.a1 * f[n] + pr.a2 * d1 - 1.0) < 1e-5);

  // Closed form for p = 1: f = A cos(w x) + C sin(w x), w = sqrt(mu - q).
  const double w = std::sqrt(3.5 - 2.0);
  const double A = pr.b2, C = -pr.b1 / w;  // b1 f(0) + b2 f'(0) = 0
  const double at1 = pr.a1 * (A * std::cos(w) + C * std::sin(w)) + pr.a2 * w * (-A * std::sin(w) + C * std::cos(w));
  double err = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double x = es.grid.x[k];
    err = std::max(err, std::abs(f[k] - (A * std::cos(w * x) + C * std::sin(w * x)) / at1));
  }
  CHECK(err < 1e-8);
}

TEST_CASE("shape Gram matrix is diagonal for the two-mode example") {
  const auto& m = fixtures::two_mode();
  const auto rep = check_orthogonality(m.shapes, m.eigsys);
  CHECK(rep.pass);
  CHECK(rep.max_offdiag < 1e-10);
  CHECK(rep.gram(0, 0) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("mu validation") {
  const auto& m = fixtures::two_mode();
  CHECK(code_of([&] { solve_shape_bvp(m.problem, m.eigsys, -1.0); }) == ErrorCode::MuNotPositive);
  CHECK(code_of([&] { solve_shape_bvp(m.problem, m.eigsys, m.eigsys.lambdas[3]); }) ==
        ErrorCode::MuCollidesWithSpectrum);
  const auto rep = validate_mu_set({m.eigsys.lambdas[2], 7.0, -3.0}, m.eigsys);
  CHECK_FALSE(rep.pass());
  CHECK_FALSE(rep.verdicts[0].off_spectrum);
  CHECK(rep.verdicts[0].nearest_index == 3);
  CHECK(rep.verdicts[1].pass());
  CHECK_FALSE(rep.verdicts[2].positive);
}

#include <doctest.h>

#include <cmath>

#include "clfpde/coefficient.hpp"
#include "clfpde/error.hpp"
#include "clfpde/grid.hpp"
#include "clfpde/spectral.hpp"
#include "fixtures.hpp"

using namespace clfpde;
using fixtures::pi;

namespace {

// Root of sin k + k cos k on ((n - 1/2) pi, n pi): Dirichlet left, u(1) + u'(1) = 0 right.
double robin_root(int n) {
  double lo = (n - 0.5) * pi, hi = n * pi;
  auto f = [](double k) { return std::sin(k) + k * std::cos(k); };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(lo) * f(mid) <= 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// Fourth-order derivative on a uniform grid.
Eigen::VectorXd derivative(const Eigen::VectorXd& f, double h) {
  const int n = static_cast<int>(f.size());
  Eigen::VectorXd d(n);
  for (int i = 2; i < n - 2; ++i) d[i] = (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]) / (12 * h);
  for (int i : {0, 1}) {
    d[i] = (-25 * f[i] + 48 * f[i + 1] - 36 * f[i + 2] + 16 * f[i + 3] - 3 * f[i + 4]) / (12 * h);
    const int j = n - 1 - i;
    d[j] = (25 * f[j] - 48 * f[j - 1] + 36 * f[j - 2] - 16 * f[j - 3] + 3 * f[j - 4]) / (12 * h);
  }
  return d;
}

SLProblem variable_robin() {
  SLProblem pr;
  pr.p = Coefficient::polynomial({1.0, 1.0});
  pr.q = Coefficient::polynomial({0.0, 1.0});
  pr.r = Coefficient::polynomial({1.0, 0.0, 1.0});
  pr.b1 = 0.6, pr.b2 = 0.8, pr.a1 = 0.8, pr.a2 = 0.6;
  return pr;
}

}  // namespace

TEST_CASE("constant-coefficient Dirichlet spectrum matches the sine series") {
  const auto es = eigensolve(fixtures::dirichlet(1.0, -5.0 * pi * pi), Grid::uniform(), 64);
  for (int n = 1; n <= 8; ++n) {
    const double exact = (n * n - 5.0) * pi * pi;
    CHECK(std::abs(es.lambdas[n - 1] - exact) <= 1e-8 * std::abs(exact));
  }
  for (int n = 1; n <= 4; ++n) {
    double err = 0.0;
    for (int k = 0; k < es.grid.n_points; ++k)
      err = std::max(err, std::abs(es.phis(k, n - 1) - std::sqrt(2.0) * std::sin(n * pi * es.grid.x[k])));
    CHECK(err < 1e-8);
    CHECK(std::abs(es.dphi1[n - 1] - std::sqrt(2.0) * n * pi * std::cos(n * pi)) < 1e-6 * n * pi);
  }
}

TEST_CASE("Robin spectrum matches the transcendental root oracle") {
  SLProblem pr = fixtures::dirichlet(1.0, 0.0);
  pr.a1 = pr.a2 = std::sqrt(0.5);
  const auto es = eigensolve(pr, Grid::uniform(), 32);
  for (int n = 1; n <= 10; ++n) {
    const double k = robin_root(n);
    CHECK(std::abs(es.lambdas[n - 1] - k * k) <= 1e-7 * k * k);
  }
}

TEST_CASE("unextrapolated eigenvalues converge at second order") {
  const auto pr = fixtures::dirichlet(1.0, 0.0);
  EigenOptions raw;
  raw.richardson = false;
  const double e1 = std::abs(eigensolve(pr, Grid::uniform(1025), 2, raw).lambdas[0] - pi * pi);
  const double e2 = std::abs(eigensolve(pr, Grid::uniform(2049), 2, raw).lambdas[0] - pi * pi);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
  const double extrapolated = std::abs(eigensolve(pr, Grid::uniform(2049), 2).lambdas[0] - pi * pi);
  CHECK(extrapolated < 1e-3 * e2);
}

TEST_CASE("variable coefficients: weighted orthonormality and Rayleigh quotients") {
  const SLProblem pr = variable_robin();
  const auto es = eigensolve(pr, Grid::uniform(), 24);
  const Eigen::MatrixXd gram = es.phis.transpose() * es.rweights.asDiagonal() * es.phis;
  CHECK((gram - Eigen::MatrixXd::Identity(24, 24)).cwiseAbs().maxCoeff() < 1e-10);
  for (int n = 1; n < 24; ++n) CHECK(es.lambdas[n] > es.lambdas[n - 1]);

  const int last = es.grid.n_points - 1;
  for (int n = 0; n < 6; ++n) {
    const Eigen::VectorXd f = es.phis.col(n);
    const Eigen::VectorXd df = derivative(f, es.grid.h);
    double num = 0.0;
    for (int k = 0; k <= last; ++k) {
      const double x = es.grid.x[k];
      num += es.grid.weights[k] * (pr.p(x) * df[k] * df[k] + pr.q(x) * f[k] * f[k]);
    }
    num += pr.p(1.0) * pr.a1 / pr.a2 * f[last] * f[last] - pr.p(0.0) * pr.b1 / pr.b2 * f[0] * f[0];
    CHECK(std::abs(num - es.lambdas[n]) <= 1e-6 * (1.0 + std::abs(es.lambdas[n])));
  }
}

TEST_CASE("sign convention: eigenfunctions start upward from a Dirichlet end") {
  const auto es = eigensolve(fixtures::dirichlet(2.0, 1.0), Grid::uniform(), 16);
  for (int n = 0; n < 16; ++n) CHECK(es.phis(1, n) > 0.0);
}

TEST_CASE("Simpson inner product is exact for cubics") {
  const Grid g = Grid::uniform(129);
  const Eigen::VectorXd f = g.x.array().square();
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(g.n_points);
  CHECK(inner_product(f, g.x, g, one) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK_THROWS_AS(inner_product(f.head(10), g.x, g, one), Error);
}

TEST_CASE("projection leaves an orthogonal remainder") {
  const auto& es = fixtures::one_mode().eigsys;
  const Eigen::VectorXd w = es.grid.x.array() * (1.0 - es.grid.x.array()) * es.grid.x.array().exp();
  const Projection pr = project_P(w, es, 3);
  CHECK(es.coefficients(pr.remainder, 3).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(project_P(w, es, 100), Error);
}

TEST_CASE("assumption H follows the sign of lambda_{N+1}") {
  CHECK(check_assumption_H(fixtures::one_mode().eigsys, 1).pass());
  const auto es = eigensolve(fixtures::dirichlet(1.0, -5.0 * pi * pi), Grid::uniform(), 32);
  CHECK_FALSE(check_assumption_H(es, 1).pass());
  CHECK(check_assumption_H(es, 2).pass());
}

TEST_CASE("invalid problems are rejected") {
  SLProblem pr = fixtures::dirichlet(1.0, 0.0);
  pr.a1 = 0.8;
  try {
    eigensolve(pr, Grid::uniform(), 4);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
  SLProblem neg = fixtures::dirichlet(1.0, 0.0);
  neg.p = Coefficient::polynomial({0.5, -1.0});
  try {
    eigensolve(neg, Grid::uniform(), 4);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveCoefficient);
  }
  try {
    eigensolve(fixtures::dirichlet(1.0, 0.0), Grid::uniform(129), 32);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridTooCoarse);
  }
  CHECK_THROWS_AS(Grid::uniform(100), Error);
}

TEST_CASE("coefficient text round-trips") {
  for (const char* text : {"1.5", "poly: 1, 0.5, -0.25", "table(3): 1, 1.25, 1.5, 2, 3"}) {
    const Coefficient c = Coefficient::parse(text);
    const Coefficient again = Coefficient::parse(c.to_string());
    for (double x : {0.0, 0.13, 0.5, 0.97, 1.0}) CHECK(again(x) == c(x));
  }
  const Coefficient poly = Coefficient::parse("poly: 1, 2, 3");
  CHECK(poly(0.5) == doctest::Approx(1.0 + 1.0 + 0.75));
  CHECK(poly.derivative(0.5) == doctest::Approx(2.0 + 3.0));
  const Coefficient lin = Coefficient::parse("table(1): 0, 1, 4");
  CHECK(lin(0.25) == doctest::Approx(0.5));
  CHECK_THROWS_AS(Coefficient::parse("table(2): 1, 2, 3"), Error);
  CHECK_THROWS_AS(Coefficient::parse("abc"), Error);
}

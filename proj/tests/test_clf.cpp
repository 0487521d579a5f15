#include <doctest.h>

#include <cmath>
#include <random>

#include "clfpde/clf.hpp"
#include "clfpde/error.hpp"
#include "fixtures.hpp"

using namespace clfpde;
using fixtures::pi;

namespace {

struct State {
  Eigen::VectorXd a, w, y;
};

State random_state(std::mt19937_64& rng, const EigenSystem& es, int modes, int j) {
  std::normal_distribution<double> n01;
  State s;
  s.a = Eigen::VectorXd::Zero(es.K());
  for (int n = 0; n < modes; ++n) s.a[n] = n01(rng) / (1.0 + n);
  s.w = es.phis * s.a;
  s.y.resize(j);
  for (int i = 0; i < j; ++i) s.y[i] = n01(rng);
  return s;
}

struct Loop {
  const fixtures::OneMode& m = fixtures::one_mode();
  CLFParams params;
  FeedbackLaw law;
  explicit Loop(double L) {
    params = select_clf_params(m.gains, m.shapes, m.eigsys, Eigen::VectorXd::Constant(1, L));
    law = build_feedback_kernels(m.gains, params, m.shapes, m.eigsys);
  }
};

}  // namespace

TEST_CASE("parameters carry a factor-two safety margin") {
  const auto& m = fixtures::one_mode();
  for (double L : {0.0, 1.0, 5.0}) {
    const CLFParams p = select_clf_params(m.gains, m.shapes, m.eigsys, Eigen::VectorXd::Constant(1, L));
    const CLFCheck c = check_clf_params(p, m.gains, m.shapes, m.eigsys);
    CHECK(c.pass());
    CHECK(c.omega_margins[0] == doctest::Approx(0.5 * p.sigma * m.shapes.mus[0]).epsilon(1e-12));
    CHECK(c.gamma_margin == doctest::Approx(0.5 * p.sigma * m.eigsys.lambdas[1]).epsilon(1e-12));
    CHECK(c.m_margin >= 0.0);
    CHECK(p.M >= 2);
  }
  const CLFParams p = select_clf_params(m.gains, m.shapes, m.eigsys, Eigen::VectorXd::Constant(1, 1.0));
  CLFParams bad = p;
  bad.gamma *= 3.0;
  CHECK_FALSE(check_clf_params(bad, m.gains, m.shapes, m.eigsys).pass());
}

TEST_CASE("tail bound dominates the exact coupling tail") {
  const auto& m = fixtures::one_mode();
  const Eigen::MatrixXd Phi = shape_coupling(m.shapes, m.eigsys);
  for (int M = 2; M < 60; ++M) {
    // Parseval: sum_{n>M} <phi_n, varphi>^2 = ||varphi||^2 - sum_{n<=M} <phi_n, varphi>^2
    const double exact = m.shapes.norms_sq[0] - Phi.row(0).head(M).squaredNorm();
    CHECK(tail_bound(Phi, 0, M) >= exact);
  }
}

TEST_CASE("V is bounded by the coercivity constants") {
  std::mt19937_64 rng(11);
  for (double L : {0.0, 1.0}) {
    Loop loop(L);
    const Coercivity c = coercivity_constants(loop.params, loop.m.gains);
    CHECK(c.low > 0.0);
    for (int trial = 0; trial < 100; ++trial) {
      const State s = random_state(rng, loop.m.eigsys, 20, 1);
      const double energy = 0.5 * (loop.m.eigsys.norm_sq(s.w) + s.y.squaredNorm());
      const double V = eval_V(s.w, s.y, loop.params, loop.m.gains, loop.m.eigsys);
      CHECK(V >= c.low * energy * (1 - 1e-12));
      CHECK(V <= c.high * energy * (1 + 1e-12));
    }
  }
}

TEST_CASE("kernel and inner-product forms of the feedback agree") {
  std::mt19937_64 rng(12);
  for (double L : {0.0, 1.0, 3.0}) {
    Loop loop(L);
    for (int trial = 0; trial < 50; ++trial) {
      const State s = random_state(rng, loop.m.eigsys, 30, 1);
      const Eigen::VectorXd v1 = eval_feedback(loop.law, loop.m.eigsys, s.w, s.y);
      const Eigen::VectorXd v2 =
          eval_feedback_inner_form(loop.m.gains, loop.params, loop.m.shapes, loop.m.eigsys, s.w, s.y);
      CHECK(std::abs(v1[0] - v2[0]) <= 1e-8 * (1.0 + std::abs(v2[0])));
    }
  }
}

TEST_CASE("Vdot matches the derivative of V along the flow and respects the bound") {
  std::mt19937_64 rng(13);
  for (double L : {0.0, 1.0}) {
    Loop loop(L);
    const auto& es = loop.m.eigsys;
    const Eigen::MatrixXd Phi = shape_coupling(loop.m.shapes, es);
    for (int trial = 0; trial < 100; ++trial) {
      const State s = random_state(rng, es, 20, 1);
      const VdotResult r = eval_Vdot_bound(s.w, s.y, loop.law, loop.params, loop.m.gains, loop.m.shapes, es);
      CHECK(r.vdot <= r.bound + 1e-9 * std::abs(r.bound));

      // V is quadratic, so a central difference along the flow is exact.
      const Eigen::VectorXd v = eval_feedback(loop.law, es, s.w, s.y);
      const Eigen::VectorXd adot = -es.lambdas.cwiseProduct(s.a) - Phi.transpose() * v;
      const Eigen::VectorXd ydot = -loop.m.shapes.mus.cwiseProduct(s.y) + v;
      const double h = 1e-3;
      auto V_at = [&](double t) {
        return eval_V(es.phis * (s.a + t * adot), s.y + t * ydot, loop.params, loop.m.gains, es);
      };
      const double fd = (V_at(h) - V_at(-h)) / (2 * h);
      CHECK(std::abs(fd - r.vdot) <= 1e-7 * (1.0 + std::abs(r.vdot)));
    }
  }
}

TEST_CASE("state and input transforms round-trip") {
  const auto& m = fixtures::two_mode();
  const Eigen::VectorXd u = m.eigsys.grid.x.array().sin();
  const Eigen::Vector2d y(0.3, -1.2);
  const Eigen::VectorXd w = transform_state(u, y, m.shapes, StateDirection::ToW);
  CHECK((transform_state(w, y, m.shapes, StateDirection::ToU) - u).cwiseAbs().maxCoeff() < 1e-15);
  const Eigen::Vector2d v(1.0, 2.0);
  const Eigen::VectorXd vbar = transform_input(v, y, m.shapes.mus, InputDirection::ToVbar);
  CHECK(vbar[0] == doctest::Approx(1.0 - 0.3 * m.shapes.mus[0]));
  CHECK((transform_input(vbar, y, m.shapes.mus, InputDirection::ToV) - v).norm() < 1e-12);
  CHECK_THROWS_AS(transform_state(u, Eigen::VectorXd::Zero(3), m.shapes, StateDirection::ToW), Error);
}

TEST_CASE("parameter selection rejects bad inputs") {
  const auto& m = fixtures::one_mode();
  CHECK_THROWS_AS(select_clf_params(m.gains, m.shapes, m.eigsys, Eigen::VectorXd::Zero(2)), Error);
  CHECK_THROWS_AS(select_clf_params(m.gains, m.shapes, m.eigsys, Eigen::VectorXd::Constant(1, -1.0)), Error);
  const Eigen::VectorXd coeffs = Eigen::VectorXd::Ones(1);
  CHECK(apply_G(coeffs, m.gains.R)[0] == 1.0);
}

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "clfpde/error.hpp"
#include "clfpde/sim.hpp"
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

struct LinearLoop {
  const fixtures::OneMode& m = fixtures::one_mode();
  CLFParams params;
  FeedbackLaw law;
  LinearController ctrl;
  explicit LinearLoop(double L) {
    params = select_clf_params(m.gains, m.shapes, m.eigsys, Eigen::VectorXd::Constant(1, L));
    law = build_feedback_kernels(m.gains, params, m.shapes, m.eigsys);
    ctrl = make_linear_controller(law, params, m.gains);
  }
  Trajectory run(const SimConfig& cfg, double y0 = 0.3) const {
    Eigen::VectorXd a0 = Eigen::VectorXd::Zero(cfg.n_modes);
    a0[0] = 1.0, a0[1] = 0.5;
    return simulate_linear(make_modal_plant(m.eigsys, m.shapes, cfg.n_modes), ctrl, a0,
                           Eigen::VectorXd::Constant(1, y0), cfg);
  }
};

SimConfig config(int modes, double dt, double t_final, Integrator integ = Integrator::ExponentialMidpoint) {
  SimConfig cfg;
  cfg.n_modes = modes;
  cfg.dt = dt;
  cfg.t_final = t_final;
  cfg.integrator = integ;
  return cfg;
}

}  // namespace

TEST_CASE("decay fit recovers synthetic rates") {
  std::vector<double> t(200);
  Eigen::VectorXd y(200), flat = Eigen::VectorXd::Constant(200, 2.5);
  for (int k = 0; k < 200; ++k) {
    t[k] = 0.01 * k;
    y[k] = 3.0 * std::exp(-2.0 * t[k]);
  }
  const DecayFit fit = fit_decay_rate(t, y);
  CHECK(fit.K == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(fit.sigma == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(fit.r2 > 0.9999);
  CHECK(std::abs(fit_decay_rate(t, flat).sigma) < 1e-12);
  CHECK(code_of([&] { fit_decay_rate(t, Eigen::VectorXd::Zero(200)); }) == ErrorCode::DegenerateTrajectory);
  CHECK(code_of([&] { fit_decay_rate(std::vector<double>(5, 0.0), Eigen::VectorXd::Ones(5)); }) ==
        ErrorCode::DegenerateTrajectory);
}

TEST_CASE("the zero state stays at rest") {
  const LinearLoop loop(1.0);
  const SimConfig cfg = config(32, 1e-3, 0.5);
  const Trajectory tr = simulate_linear(make_modal_plant(loop.m.eigsys, loop.m.shapes, 32), loop.ctrl,
                                        Eigen::VectorXd::Zero(32), Eigen::VectorXd::Zero(1), cfg);
  CHECK(tr.norm_w.maxCoeff() == 0.0);
  CHECK(tr.V.maxCoeff() == 0.0);
  CHECK(code_of([&] { fit_decay_rate(tr); }) == ErrorCode::DegenerateTrajectory);
}

TEST_CASE("closed loop decays monotonically in V") {
  for (double L : {0.0, 1.0}) {
    const LinearLoop loop(L);
    const Trajectory tr = loop.run(config(64, 1e-3, 5.0));
    for (int k = 1; k < tr.samples(); ++k) CHECK(tr.V[k] <= tr.V[k - 1] * (1.0 + 1e-9));
    const DecayFit fit = fit_decay_rate(tr);
    CHECK(fit.sigma > 0.0);
    CHECK(fit.r2 > 0.99);
    CHECK(tr.samples() == 1001);
  }
}

TEST_CASE("open loop grows at the unstable eigenvalue") {
  LinearLoop loop(1.0);
  loop.ctrl.open_loop = true;
  const Trajectory tr = loop.run(config(32, 1e-3, 1.0), 0.0);
  CHECK(fit_decay_rate(tr).sigma == doctest::Approx(-pi * pi).epsilon(1e-4));
  CHECK(tr.v.cwiseAbs().maxCoeff() == 0.0);

  // Two unstable modes grow past the instability threshold.
  const auto& two = fixtures::two_mode();
  LinearController open;
  open.open_loop = true;
  Eigen::VectorXd a0 = Eigen::VectorXd::Zero(16);
  a0[0] = 1.0;
  CHECK(code_of([&] {
          simulate_linear(make_modal_plant(two.eigsys, two.shapes, 16), open, a0, Eigen::Vector2d::Zero(),
                          config(16, 1e-3, 1.0));
        }) == ErrorCode::Instability);
}

TEST_CASE("exponential midpoint agrees with RK4") {
  const LinearLoop loop(1.0);
  const Trajectory etd = loop.run(config(16, 1e-4, 1.0));
  const Trajectory rk = loop.run(config(16, 1e-4, 1.0, Integrator::Rk4));
  const int last = etd.samples() - 1;
  CHECK(std::abs(etd.norm_w[last] - rk.norm_w[last]) <= 1e-6 * rk.norm_w[last]);
  CHECK(std::abs(etd.norm_y[last] - rk.norm_y[last]) <= 1e-6 * (rk.norm_y[last] + 1e-12));
  CHECK(code_of([&] { loop.run(config(64, 1e-3, 1.0, Integrator::Rk4)); }) == ErrorCode::StepSizeTooLarge);
}

TEST_CASE("decay rate is insensitive to the modal truncation") {
  const LinearLoop loop(1.0);
  const double s32 = fit_decay_rate(loop.run(config(32, 1e-3, 5.0))).sigma;
  const double s64 = fit_decay_rate(loop.run(config(64, 1e-3, 5.0))).sigma;
  CHECK(std::abs(s32 - s64) <= 0.02 * s64);
}

TEST_CASE("trajectory CSV layout") {
  const LinearLoop loop(1.0);
  SimConfig cfg = config(32, 1e-3, 1.0);
  cfg.record_stride = 10;
  const Trajectory tr = loop.run(cfg);
  CHECK(tr.samples() == 101);
  std::ostringstream os;
  write_trajectory_csv(os, tr, 1);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "t,norm_w,norm_y,V,U,v_1,vbar_1,w_1");
  int rows = 0;
  for (std::string line; std::getline(is, line);) ++rows;
  CHECK(rows == 101);
}

TEST_CASE("initial states outside the simulated modes are rejected") {
  const auto& es = fixtures::one_mode().eigsys;
  const Eigen::VectorXd w = es.grid.x.array() * (1.0 - es.grid.x.array());
  CHECK(code_of([&] { expand_state(es, w, 4); }) == ErrorCode::RemainderTooLarge);
  const Eigen::VectorXd smooth = es.phis.col(0) - 0.25 * es.phis.col(3);
  const Eigen::VectorXd a = expand_state(es, smooth, 8);
  CHECK(a[0] == doctest::Approx(1.0));
  CHECK(a[3] == doctest::Approx(-0.25));
  SimConfig short_run = config(8, 1e-3, 0.05);
  CHECK(code_of([&] { LinearLoop(1.0).run(short_run); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("semilinear runs") {
  const auto& m = fixtures::two_mode();
  const int n = 24;
  const SemilinearPlant plant = make_semilinear_plant(m.eigsys, m.shapes, n);
  Eigen::VectorXd a0 = Eigen::VectorXd::Zero(n);
  a0[0] = 1.0, a0[1] = -0.5, a0[4] = 0.2;
  const Eigen::Vector2d y0(0.1, -0.2);

  SUBCASE("F = 0 reproduces the linear simulator") {
    const SemilinearDesign d = m.design(10.0, ControllerKind::Linear);
    const LinearParams p = select_params_linear(d, 0.05, find_kappa(d, 0.05, ControllerKind::Linear).kappa);
    const SimConfig cfg = config(n, 1e-4, 0.2);
    const Trajectory semi = simulate_semilinear(plant, d, p.clf, NonlinearitySpec{}, a0, y0, cfg, true);

    LinearController ctrl;
    ctrl.kernel_coeffs = d.g * (d.sigma - d.lambdas.head(2).array()).matrix().asDiagonal();
    ctrl.y_gains = Eigen::Vector2d::Zero();
    ctrl.R = p.clf.R * Eigen::MatrixXd::Identity(2, 2);
    ctrl.gamma = p.clf.gamma;
    ctrl.omegas = p.clf.omegas;
    const Trajectory lin = simulate_linear(plant.modal, ctrl, a0, y0, cfg);
    CHECK((semi.w_coeffs - lin.w_coeffs).cwiseAbs().maxCoeff() <= 1e-10 * lin.w_coeffs.cwiseAbs().maxCoeff());
    CHECK((semi.V - lin.V).cwiseAbs().maxCoeff() <= 1e-10 * lin.V.maxCoeff());
  }

  SUBCASE("certified cancelling controller") {
    const SemilinearDesign d = m.design(1.0, ControllerKind::Nonlinear);
    const NonlinearParams p = select_params_nonlinear(d, 0.29, find_kappa(d, 0.29, ControllerKind::Nonlinear).kappa);
    const Trajectory tr = simulate_semilinear(plant, d, p.clf, fixtures::sine(0.29), a0, y0, config(n, 1e-4, 0.5), true);
    for (int k = 1; k < tr.samples(); ++k) CHECK(tr.V[k] <= tr.V[k - 1] * (1.0 + 1e-9));
    CHECK(tr.energy_identity_error < 1e-10);
    // The cancelling law leaves a_n' = -sigma a_n on the retained modes.
    const int last = tr.samples() - 1;
    CHECK(tr.w_coeffs(last, 0) == doctest::Approx(a0[0] * std::exp(-0.5)).epsilon(1e-6));
    CHECK(tr.w_coeffs(last, 1) == doctest::Approx(a0[1] * std::exp(-0.5)).epsilon(1e-6));
    CHECK(tr.V[last] < tr.V[0]);
    CHECK(tr.certified);

    SimConfig tight = config(n, 1e-4, 0.5);
    tight.quadrature_budget = 1000;
    CHECK(code_of([&] { simulate_semilinear(plant, d, p.clf, fixtures::sine(0.29), a0, y0, tight, true); }) ==
          ErrorCode::QuadratureBudgetExceeded);
  }
}

TEST_CASE("integrator names") {
  CHECK(parse_integrator(to_string(Integrator::Rk4)) == Integrator::Rk4);
  CHECK(code_of([&] { parse_integrator("euler"); }) == ErrorCode::ConfigInvalid);
}

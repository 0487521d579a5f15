#pragma once

#include <cmath>

#include "clfpde/clf.hpp"
#include "clfpde/reduced.hpp"
#include "clfpde/semilinear.hpp"
#include "clfpde/shapes.hpp"
#include "clfpde/spectral.hpp"

namespace fixtures {

inline constexpr double pi = 3.14159265358979323846;

// -p u'' + q u with Dirichlet ends, lambda_n = p n^2 pi^2 + q.
inline clfpde::SLProblem dirichlet(double p, double q) {
  clfpde::SLProblem pr;
  pr.p = clfpde::Coefficient(p);
  pr.q = clfpde::Coefficient(q);
  pr.r = clfpde::Coefficient(1.0);
  pr.b1 = 1.0, pr.b2 = 0.0, pr.a1 = 1.0, pr.a2 = 0.0;
  return pr;
}

// Single unstable mode, one integrator state (q = -2 pi^2, mu = 17 pi^2 / 4).
struct OneMode {
  clfpde::SLProblem problem = dirichlet(1.0, -2.0 * pi * pi);
  clfpde::EigenSystem eigsys;
  clfpde::ShapeSet shapes;
  clfpde::ReducedModel model;
  clfpde::GainDesign gains;

  explicit OneMode(int K = 64) {
    eigsys = clfpde::eigensolve(problem, clfpde::Grid::uniform(), K);
    shapes = clfpde::build_shapes(problem, eigsys, {25.0 * pi * pi / 4.0 - 2.0 * pi * pi});
    model = clfpde::build_reduced_model(eigsys, shapes, 1);
    gains = clfpde::design_gains(model, Eigen::VectorXd::Constant(1, 1.0), clfpde::GainMode::ClosedForm);
  }
};

// Two unstable modes, two integrator states (q = -5 pi^2, mu = 5 pi^2/4, 29 pi^2/4).
struct TwoMode {
  clfpde::SLProblem problem = dirichlet(1.0, -5.0 * pi * pi);
  clfpde::EigenSystem eigsys;
  clfpde::ShapeSet shapes;
  clfpde::ReducedModel model;

  explicit TwoMode(int K = 64) {
    eigsys = clfpde::eigensolve(problem, clfpde::Grid::uniform(), K);
    shapes = clfpde::build_shapes(problem, eigsys, {5.0 * pi * pi / 4.0, 29.0 * pi * pi / 4.0});
    model = clfpde::build_reduced_model(eigsys, shapes, 2);
  }

  clfpde::SemilinearDesign design(double sigma, clfpde::ControllerKind kind) const {
    return clfpde::make_semilinear_design(model, shapes, sigma, kind);
  }
};

inline const OneMode& one_mode() {
  static const OneMode m;
  return m;
}

inline const TwoMode& two_mode() {
  static const TwoMode m;
  return m;
}

inline clfpde::NonlinearitySpec sine(double L) {
  clfpde::NonlinearitySpec F;
  F.kind = clfpde::NonlinearitySpec::Kind::SineType;
  F.scale = L;
  F.Lbar = L;
  return F;
}

}  // namespace fixtures

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clfpde/reduced.hpp"
#include "clfpde/shapes.hpp"
#include "clfpde/spectral.hpp"

namespace clfpde {

// Pointwise nonlinearity F(u)(x) = f(u(x)) with declared growth |f(s)| <= Lbar |s|.
struct NonlinearitySpec {
  enum class Kind { Zero, LinearGain, SineType, Saturation, UserTable };
  Kind kind = Kind::Zero;
  double scale = 0.0;
  double Lbar = 0.0;
  std::vector<double> table_s, table_f;  // user_table knots, strictly increasing s

  double operator()(double s) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
};

std::string to_string(NonlinearitySpec::Kind kind);
NonlinearitySpec::Kind parse_nonlinearity_kind(const std::string& text);

struct GrowthCheck {
  bool pass = false;
  double worst_ratio = 0.0;  // max |f(s)|/|s| over the sample
  double f_at_zero = 0.0;
};

// Samples s in [-10, 10].
GrowthCheck check_growth(const NonlinearitySpec& spec);

enum class ControllerKind { Nonlinear, Linear };

std::string to_string(ControllerKind kind);
ControllerKind parse_controller_kind(const std::string& text);

struct SemilinearDesign {
  int N = 0;
  Eigen::MatrixXd g;  // -B^{-1}
  Eigen::MatrixXd B;
  double sigma = 1.0;
  Eigen::VectorXd lambdas;  // lambda_1..lambda_{N+1}
  Eigen::VectorXd mus;
  Eigen::VectorXd norms_sq;
  ControllerKind kind = ControllerKind::Nonlinear;

  double lambda_next() const { return lambdas[N]; }
};

SemilinearDesign make_semilinear_design(const ReducedModel& model, const ShapeSet& shapes, double sigma,
                                        ControllerKind kind);

// Cancelling controller: v = g ((sigma - lambda) .* a + f)
Eigen::VectorXd eval_nonlinear_controller(const SemilinearDesign& d, const Eigen::VectorXd& w_coeffs,
                                          const Eigen::VectorXd& F_coeffs);
// Dominating controller: v = g ((sigma - lambda) .* a)
Eigen::VectorXd eval_linear_controller(const SemilinearDesign& d, const Eigen::VectorXd& w_coeffs);

struct GrowthInputs {
  int N = 0;
  Eigen::VectorXd mus, norms_sq;
  Eigen::MatrixXd g;
  double lambda_next = 0.0;
};

GrowthInputs growth_inputs(const SemilinearDesign& d);

struct GrowthBound {
  double a_bar = 0.0;
  double b_bar = 0.0;
  double Lbar_max = 0.0;
};

GrowthBound growth_bound_limit(const GrowthInputs& in);

struct NonlinearConditions {
  Eigen::VectorXd mu_margins;   // mu_i^2 - 2N Lbar^2 (1 + 1/kappa) ||varphi_i||^2 sum_m g_im^2
  double lambda_margin = 0.0;   // lambda_{N+1}^2 - Lbar^2 (1 + kappa N)(1 + 2N sum ||varphi||^2 g^2)
  double normalized = 0.0;      // min over conditions of lhs/rhs - 1 (inf when every rhs is 0)
  bool pass() const;
};

struct LinearConditions {
  double sigma_margin = 0.0;    // sigma^2 - Lbar^2 (1 + kappa N)
  double lambda_margin = 0.0;
  Eigen::VectorXd mu_margins;
  double normalized = 0.0;
  bool pass() const;
};

NonlinearConditions check_nonlinear_conditions(const SemilinearDesign& d, double Lbar, double kappa);
LinearConditions check_linear_conditions(const SemilinearDesign& d, double Lbar, double kappa);

struct KappaSearch {
  bool found = false;
  bool refined = false;  // located by refinement between grid points
  double kappa = 0.0;
  double normalized_margin = 0.0;
};

// 64 log-spaced points in [1e-4, 1e4]; if none is feasible, golden-section
// refinement of the normalized margin in log kappa.
KappaSearch find_kappa(const SemilinearDesign& d, double Lbar, ControllerKind kind);
std::vector<double> kappa_grid();

struct SemilinearCLF {
  double R = 0.0;
  double gamma = 0.0;
  Eigen::VectorXd omegas;
  double theta = 0.0;  // dissipation rate in Vdot <= -theta (||w||^2 + |y|^2)
};

struct NonlinearParams {
  double zeta = 0.0, beta = 0.0, epsilon = 0.0;
  SemilinearCLF clf;
  double theta_head = 0.0, theta_tail = 0.0;
  Eigen::VectorXd theta_y;
};

struct LinearParams {
  double a = 0.0, beta = 0.0;
  double epsilon = 0.0;  // fixed at zero
  SemilinearCLF clf;
  double theta_head = 0.0, theta_tail = 0.0;
  Eigen::VectorXd theta_y;
};

NonlinearParams select_params_nonlinear(const SemilinearDesign& d, double Lbar, double kappa);
LinearParams select_params_linear(const SemilinearDesign& d, double Lbar, double kappa);

struct SemilinearVdot {
  double V = 0.0;
  double Vdot = 0.0;
  double bound = 0.0;  // -theta (||w||^2 + |y|^2)
  Eigen::VectorXd v;
};

// Modal evaluation with w = sum a_n phi_n (n <= a.size()); F(u) projected by quadrature.
SemilinearVdot eval_semilinear_V_and_Vdot(const Eigen::VectorXd& a, const Eigen::VectorXd& y,
                                          const SemilinearCLF& clf, const SemilinearDesign& d,
                                          const ShapeSet& shapes, const EigenSystem& eigsys,
                                          const NonlinearitySpec& F);

}  // namespace clfpde

#pragma once

#include <Eigen/Dense>

#include "clfpde/reduced.hpp"
#include "clfpde/shapes.hpp"
#include "clfpde/spectral.hpp"

namespace clfpde {

struct CLFParams {
  Eigen::VectorXd omegas;
  double gamma = 0.0;
  double sigma = 0.0;
  int M = 0;
  Eigen::VectorXd Ls;
  Eigen::VectorXd tail_bounds;  // certified upper bound on sum_{n>M} <phi_n, varphi_i>^2
};

constexpr int kMaxKernelTruncation = 512;

// Modal coupling Phi(i, n-1) = <phi_n, varphi_i> for n = 1..K.
Eigen::MatrixXd shape_coupling(const ShapeSet& shapes, const EigenSystem& eigsys);

// Upper bound on sum_{n=M+1}^inf Phi(i, n-1)^2 from computed modes up to K plus
// C_i^2 / K, C_i = max_{K/2 <= n <= K} n |Phi(i, n-1)|.
double tail_bound(const Eigen::MatrixXd& Phi, int i, int M);

CLFParams select_clf_params(const GainDesign& design, const ShapeSet& shapes, const EigenSystem& eigsys,
                            const Eigen::VectorXd& Ls);

// Margins of the admissibility inequalities; all must be >= 0.
struct CLFCheck {
  Eigen::VectorXd omega_margins;  // sigma mu_i - 2 j omega_i |K_i|^2
  double gamma_margin = 0.0;      // sigma lambda_{N+1} - 2 j gamma sum ||varphi_i||^2 |K_i|^2
  double m_margin = 0.0;          // 4 (lambda_{M+1} - lambda_{N+1}) - gamma sum L_i tail_i
  bool pass() const;
};

CLFCheck check_clf_params(const CLFParams& params, const GainDesign& design, const ShapeSet& shapes,
                          const EigenSystem& eigsys);

Eigen::VectorXd apply_G(const Eigen::VectorXd& coeffs, const Eigen::MatrixXd& R);

double eval_V(const Eigen::VectorXd& w, const Eigen::VectorXd& y, const CLFParams& params,
              const GainDesign& design, const EigenSystem& eigsys);

struct Coercivity {
  double low = 0.0;   // min(lambda_min(R), gamma, omega_i)
  double high = 0.0;  // max(lambda_max(R), gamma, omega_i)
};

Coercivity coercivity_constants(const CLFParams& params, const GainDesign& design);

struct FeedbackLaw {
  Eigen::MatrixXd kernels;        // n_points x j
  Eigen::MatrixXd kernel_coeffs;  // j x M, coefficients on phi_1..phi_M
  Eigen::VectorXd y_gains;        // omega_i L_i
  Eigen::MatrixXd shapes;         // n_points x j
  Eigen::VectorXd mus;
};

FeedbackLaw build_feedback_kernels(const GainDesign& design, const CLFParams& params, const ShapeSet& shapes,
                                   const EigenSystem& eigsys);

// v_i = <k_i, w> - omega_i L_i y_i
Eigen::VectorXd eval_feedback(const FeedbackLaw& law, const EigenSystem& eigsys, const Eigen::VectorXd& w,
                              const Eigen::VectorXd& y);

// The same controls through <Gw, varphi_i> and the truncated shapes
// tilde varphi_i = sum_{n<=M} <phi_n, varphi_i> phi_n.
Eigen::VectorXd eval_feedback_inner_form(const GainDesign& design, const CLFParams& params, const ShapeSet& shapes,
                                         const EigenSystem& eigsys, const Eigen::VectorXd& w,
                                         const Eigen::VectorXd& y);

enum class StateDirection { ToW, ToU };
enum class InputDirection { ToVbar, ToV };

Eigen::VectorXd transform_state(const Eigen::VectorXd& u, const Eigen::VectorXd& y, const ShapeSet& shapes,
                                StateDirection direction);
Eigen::VectorXd transform_input(const Eigen::VectorXd& v, const Eigen::VectorXd& y, const Eigen::VectorXd& mus,
                                InputDirection direction);

struct VdotResult {
  double vdot = 0.0;
  double bound = 0.0;
};

// Modal Vdot for explicit controls v, using modes 1..K of w.
double eval_Vdot_modal(const Eigen::VectorXd& a, const Eigen::VectorXd& y, const Eigen::VectorXd& v,
                       const CLFParams& params, const GainDesign& design, const ShapeSet& shapes,
                       const EigenSystem& eigsys);

VdotResult eval_Vdot_bound(const Eigen::VectorXd& w, const Eigen::VectorXd& y, const FeedbackLaw& law,
                           const CLFParams& params, const GainDesign& design, const ShapeSet& shapes,
                           const EigenSystem& eigsys);

}  // namespace clfpde

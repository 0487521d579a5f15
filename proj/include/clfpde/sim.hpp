#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clfpde/clf.hpp"
#include "clfpde/reduced.hpp"
#include "clfpde/semilinear.hpp"
#include "clfpde/shapes.hpp"
#include "clfpde/spectral.hpp"

namespace clfpde {

enum class Integrator { ExponentialMidpoint, Rk4 };

std::string to_string(Integrator integrator);
Integrator parse_integrator(const std::string& text);

struct SimConfig {
  int n_modes = 64;
  double dt = 1e-4;
  double t_final = 10.0;
  Integrator integrator = Integrator::ExponentialMidpoint;
  int record_stride = 0;  // 0: about 1000 samples
  long long quadrature_budget = 20'000'000;  // projections of F(u) per run

  long long steps() const;
  int stride() const;
};

struct Trajectory {
  std::vector<double> times;
  Eigen::MatrixXd w_coeffs;  // samples x n_modes
  Eigen::MatrixXd y;         // samples x j
  Eigen::VectorXd norm_w, norm_y, V, U;
  Eigen::MatrixXd v, vbar;   // samples x j
  bool certified = true;
  double energy_identity_error = 0.0;  // semilinear runs, max relative mismatch
  int samples() const { return static_cast<int>(times.size()); }
};

// The truncated modal system: a_n' = -lambda_n a_n - sum_i Phi(i,n) v_i (+ f_n), y_i' = -mu_i y_i + v_i.
struct ModalPlant {
  Eigen::VectorXd lambdas;  // n_modes
  Eigen::MatrixXd Phi;      // j x n_modes, <phi_n, varphi_i>
  Eigen::VectorXd mus;
};

ModalPlant make_modal_plant(const EigenSystem& eigsys, const ShapeSet& shapes, int n_modes);

// Modal coefficients of a grid function; RemainderTooLarge when more than
// 1e-8 of its energy lies outside the first n_modes modes.
Eigen::VectorXd expand_state(const EigenSystem& eigsys, const Eigen::VectorXd& w0, int n_modes);

struct LinearController {
  Eigen::MatrixXd kernel_coeffs;  // j x M
  Eigen::VectorXd y_gains;        // omega_i L_i
  Eigen::MatrixXd R;
  double gamma = 0.0;
  Eigen::VectorXd omegas;
  bool open_loop = false;
};

LinearController make_linear_controller(const FeedbackLaw& law, const CLFParams& params, const GainDesign& design);

Trajectory simulate_linear(const ModalPlant& plant, const LinearController& ctrl, const Eigen::VectorXd& a0,
                           const Eigen::VectorXd& y0, const SimConfig& cfg);

struct SemilinearPlant {
  ModalPlant modal;
  Eigen::MatrixXd phis;      // n_points x n_modes
  Eigen::MatrixXd varphis;   // n_points x j
  Eigen::VectorXd rweights;
  Eigen::MatrixXd shape_gram;
};

SemilinearPlant make_semilinear_plant(const EigenSystem& eigsys, const ShapeSet& shapes, int n_modes);

Trajectory simulate_semilinear(const SemilinearPlant& plant, const SemilinearDesign& design,
                               const SemilinearCLF& clf, const NonlinearitySpec& F, const Eigen::VectorXd& a0,
                               const Eigen::VectorXd& y0, const SimConfig& cfg, bool certified);

struct DecayFit {
  double K = 0.0;
  double sigma = 0.0;
  double r2 = 0.0;
};

// Least-squares fit of log(norm_w + norm_y) over the trailing half of the samples.
DecayFit fit_decay_rate(const Trajectory& traj);
DecayFit fit_decay_rate(const std::vector<double>& times, const Eigen::VectorXd& norms);

// Columns t, norm_w, norm_y, V, U, v_1..v_j, vbar_1..vbar_j, w_1..w_k with k = min(8, N).
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, int N);

}  // namespace clfpde

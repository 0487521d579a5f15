#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clfpde/coefficient.hpp"
#include "clfpde/grid.hpp"

namespace clfpde {

// Sturm-Liouville plant: A f = (-(p f')' + q f) / r on [0,1] with
// b1 f(0) + b2 f'(0) = 0 and a1 f(1) + a2 f'(1) = 0 (the actuated end).
struct SLProblem {
  Coefficient p{1.0};
  Coefficient q{0.0};
  Coefficient r{1.0};
  double b1 = 1.0, b2 = 0.0;
  double a1 = 1.0, a2 = 0.0;

  bool dirichlet_left() const;
  bool dirichlet_right() const;

  // Throws InvalidArgument on unnormalized boundary constants and
  // NonPositiveCoefficient when p or r fails to be positive on the grid.
  void validate(const Grid& grid) const;
};

struct EigenOptions {
  // Combine the user grid with its 2x refinement to cancel the h^2 error term.
  bool richardson = true;
};

struct EigenSystem {
  Grid grid;
  Eigen::VectorXd lambdas;
  Eigen::MatrixXd phis;  // n_points x K, column n-1 holds phi_n
  Eigen::VectorXd dphi0, dphi1;
  Eigen::VectorXd r;        // weight samples
  Eigen::VectorXd rweights; // Simpson weights times r
  Eigen::VectorXd operator_residual;  // NaN for modes above K/2
  Eigen::VectorXd boundary_residual;  // max of both ends, relative to max|phi_n|

  int K() const { return static_cast<int>(lambdas.size()); }
  double inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const;
  double norm_sq(const Eigen::VectorXd& f) const { return inner(f, f); }
  // <phi_n, f> for n = 1..count.
  Eigen::VectorXd coefficients(const Eigen::VectorXd& f, int count) const;
};

EigenSystem eigensolve(const SLProblem& problem, const Grid& grid, int K,
                       const EigenOptions& options = {});

// Composite Simpson approximation of int_0^1 r f g dx.
double inner_product(const Eigen::VectorXd& f, const Eigen::VectorXd& g, const Grid& grid,
                     const Eigen::VectorXd& r);

struct Projection {
  Eigen::VectorXd coeffs;
  Eigen::VectorXd remainder;
};

Projection project_P(const Eigen::VectorXd& w, const EigenSystem& eigsys, int N);

struct AssumptionHReport {
  int N = 0;
  double lambda_next = 0.0;  // lambda_{N+1}
  bool lambda_positive = false;
  std::vector<double> partial_sums;  // sum_{n=N+1}^{m} max|phi_n| / lambda_n, m = N+1..K
  double decay_exponent = 0.0;       // fitted p in term_n ~ n^-p
  bool converging = false;
  bool enough_modes = false;
  std::string note;

  bool pass() const { return lambda_positive; }
};

AssumptionHReport check_assumption_H(const EigenSystem& eigsys, int N);

}  // namespace clfpde

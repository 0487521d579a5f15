#pragma once

#include <vector>

#include <Eigen/Dense>

#include "clfpde/spectral.hpp"

namespace clfpde {

struct ShapeOptions {
  bool reverse_elimination = false;  // eliminate from the x=1 end
  bool richardson = true;
};

// Solves -(p f')' + q f = mu r f with the homogeneous x=0 condition and
// a1 f(1) + a2 f'(1) = 1. Sampled on eigsys.grid.
Eigen::VectorXd solve_shape_bvp(const SLProblem& problem, const EigenSystem& eigsys, double mu,
                                const ShapeOptions& options = {});

struct ShapeSet {
  Eigen::VectorXd mus;
  Eigen::MatrixXd varphis;  // n_points x j
  Eigen::VectorXd norms_sq;
  int j = 0;
};

ShapeSet build_shapes(const SLProblem& problem, const EigenSystem& eigsys, const std::vector<double>& mus,
                      const ShapeOptions& options = {});

struct OrthogonalityReport {
  bool pass = true;
  double max_offdiag = 0.0;
  Eigen::MatrixXd gram;
};

OrthogonalityReport check_orthogonality(const ShapeSet& shapes, const EigenSystem& eigsys);

struct MuVerdict {
  double mu = 0.0;
  int nearest_index = 0;  // 1-based mode index of the closest eigenvalue
  double nearest_lambda = 0.0;
  double gap = 0.0;
  bool positive = false;
  bool off_spectrum = false;
  bool pass() const { return positive && off_spectrum; }
};

struct MuReport {
  std::vector<MuVerdict> verdicts;
  bool pass() const;
};

MuReport validate_mu_set(const std::vector<double>& mus, const EigenSystem& eigsys);

// Relative separation required between mu and the computed spectrum.
bool mu_collides(double mu, double lambda);

}  // namespace clfpde

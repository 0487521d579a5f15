#pragma once

#include <string>

#include <Eigen/Dense>

#include "clfpde/shapes.hpp"
#include "clfpde/spectral.hpp"

namespace clfpde {

// z' = C z + B v with C = -diag(lambda_1..lambda_N), B(n,i) = -<varphi_i, phi_n>.
struct ReducedModel {
  Eigen::MatrixXd C;
  Eigen::MatrixXd B;  // N x j
  int N = 0;
  int j = 0;
  double lambda_next = 0.0;  // lambda_{N+1}
};

ReducedModel build_reduced_model(const EigenSystem& eigsys, const ShapeSet& shapes, int N);

// B(:, i) from the boundary data of the eigenfunctions:
// p(1) (a2 phi_n(1) - a1 phi_n'(1)) / (mu - lambda_n), n = 1..N.
Eigen::VectorXd input_vector_closed_form(const SLProblem& problem, const EigenSystem& eigsys, double mu, int N);

struct ControllabilityReport {
  int rank = 0;
  Eigen::VectorXd singular_values;
  bool b_nonzero = false;   // every B(n,1) != 0
  bool distinct = false;    // eigenvalues pairwise distinct
  bool pass = false;        // rank == N
  bool structural() const { return b_nonzero && distinct; }
};

ControllabilityReport check_controllability(const ReducedModel& model);

enum class GainMode { ClosedForm, PolePlacement };

std::string to_string(GainMode mode);
GainMode parse_gain_mode(const std::string& text);

struct GainDesign {
  Eigen::MatrixXd K;  // j x N, row i is K_i^T
  Eigen::MatrixXd R;  // N x N
  double sigma = 0.0;
  double c1 = 0.0, c2 = 0.0;
  Eigen::VectorXd sigma_targets;
  GainMode mode = GainMode::ClosedForm;
};

GainDesign design_gains(const ReducedModel& model, const Eigen::VectorXd& sigma_targets, GainMode mode);

Eigen::MatrixXd closed_loop_matrix(const ReducedModel& model, const Eigen::MatrixXd& K);

// lambda_max(R A + A^T R) + 2 sigma; the gain inequality holds when <= 1e-9.
double gain_inequality_residual(const ReducedModel& model, const GainDesign& design);

}  // namespace clfpde

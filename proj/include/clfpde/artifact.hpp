#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clfpde/semilinear.hpp"

namespace clfpde {

inline constexpr const char* kToolkitVersion = "clfpde 1.0.0";

struct Verdict {
  std::string name;
  bool pass = false;
  double margin = 0.0;   // >= 0 when the condition holds, up to the stated tolerance
  bool required = true;  // advisory verdicts flag a run without failing certification
};

// Everything needed to re-instantiate and re-verify a design, stored as plain text.
struct DesignArtifact {
  std::string version = kToolkitVersion;

  std::string p = "1", q = "0", r = "1";
  double b1 = 1.0, b2 = 0.0, a1 = 1.0, a2 = 0.0;
  int grid_points = 2049;
  int modes = 64;

  int N = 0, j = 0;
  Eigen::VectorXd lambdas;
  double h_decay_exponent = 0.0;
  bool h_converging = false;

  Eigen::VectorXd mus, norms_sq;
  Eigen::MatrixXd shape_gram;
  Eigen::MatrixXd B, B_closed;

  std::string gain_mode = "closed_form";
  Eigen::VectorXd sigma_targets;
  double sigma = 0.0;
  Eigen::MatrixXd K, R;

  Eigen::VectorXd omegas;
  double gamma = 0.0;
  int M = 0;
  Eigen::VectorXd Ls, tail_bounds;
  Eigen::MatrixXd kernel_coeffs;
  Eigen::VectorXd y_gains;

  bool has_semilinear = false;
  NonlinearitySpec F;
  std::string controller = "nonlinear";
  double growth_ratio = 0.0;
  bool require_certificate = false;
  Eigen::MatrixXd g;
  bool kappa_found = false, kappa_refined = false;
  double kappa = 0.0;
  bool params_found = false;
  double search_point = 0.0;  // zeta (cancelling) or a (dominating)
  double beta = 0.0, epsilon = 0.0;
  SemilinearCLF sclf;

  std::vector<Verdict> verdicts;

  bool certified() const;             // every required verdict passes
  bool semilinear_certified() const;  // every verdict passes
};

// Recomputes every verdict from the stored numbers alone.
std::vector<Verdict> certify(const DesignArtifact& art);

SemilinearDesign semilinear_design_from(const DesignArtifact& art);

std::string write_artifact(const DesignArtifact& art);
DesignArtifact read_artifact(const std::string& text);
DesignArtifact load_artifact(const std::string& path);

std::string certification_report(const DesignArtifact& art, const std::vector<std::string>& notes);

}  // namespace clfpde

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clfpde/reduced.hpp"
#include "clfpde/semilinear.hpp"
#include "clfpde/sim.hpp"
#include "clfpde/spectral.hpp"

namespace clfpde {

struct SemilinearConfig {
  NonlinearitySpec F;
  ControllerKind controller = ControllerKind::Nonlinear;
  bool require_certificate = false;
};

struct InitialState {
  std::vector<double> w_modes;  // coefficients on phi_1, phi_2, ...
  std::vector<double> y;        // empty: zeros
  int random_modes = 0;         // adds sum_{n<=m} u_n / n^2 phi_n, u_n uniform in (-1, 1)
};

struct RunConfig {
  SLProblem problem;
  std::string problem_text[3];  // p, q, r as written
  int grid_points = 2049;
  int modes = 64;

  int N = 1;
  std::vector<double> mus;
  Eigen::VectorXd sigma_targets;
  GainMode gain_mode = GainMode::ClosedForm;
  Eigen::VectorXd Ls;

  std::optional<SemilinearConfig> semilinear;

  SimConfig sim;
  bool t_final_given = false;
  bool open_loop = false;
  InitialState initial;

  std::string out_dir;
  std::uint64_t seed = 1;

  int j() const { return static_cast<int>(mus.size()); }
};

// Parses and validates; every failure is ConfigInvalid.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace clfpde

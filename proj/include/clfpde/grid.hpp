#pragma once

#include <Eigen/Dense>

namespace clfpde {

// Uniform grid on [0,1] with composite Simpson weights (odd point count).
struct Grid {
  int n_points = 0;
  double h = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd weights;

  static constexpr int kDefaultPoints = 2049;
  static constexpr int kMinPoints = 129;

  static Grid uniform(int n_points = kDefaultPoints);
};

}  // namespace clfpde

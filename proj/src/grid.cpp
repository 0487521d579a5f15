#include "clfpde/grid.hpp"

#include <string>

#include "clfpde/error.hpp"

namespace clfpde {

Grid Grid::uniform(int n_points) {
  if (n_points < kMinPoints || n_points % 2 == 0)
    throw Error(ErrorCode::InvalidArgument,
                "grid needs an odd point count >= " + std::to_string(kMinPoints) + ", got " +
                    std::to_string(n_points));
  Grid g;
  g.n_points = n_points;
  g.h = 1.0 / (n_points - 1);
  g.x.resize(n_points);
  g.weights.resize(n_points);
  for (int k = 0; k < n_points; ++k) {
    g.x[k] = k * g.h;
    g.weights[k] = (k == 0 || k == n_points - 1) ? 1.0 : (k % 2 ? 4.0 : 2.0);
  }
  g.x[n_points - 1] = 1.0;
  g.weights *= g.h / 3.0;
  return g;
}

}  // namespace clfpde

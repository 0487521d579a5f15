#include "clfpde/shapes.hpp"

#include <cmath>
#include <string>

#include "clfpde/error.hpp"
#include "fd.hpp"

namespace clfpde {

bool mu_collides(double mu, double lambda) { return std::abs(mu - lambda) <= 1e-6 * (1.0 + std::abs(mu)); }

Eigen::VectorXd solve_shape_bvp(const SLProblem& problem, const EigenSystem& eigsys, double mu,
                                const ShapeOptions& options) {
  if (!(mu > 0.0)) throw Error(ErrorCode::MuNotPositive, "mu must be positive, got " + std::to_string(mu));
  for (int k = 0; k < eigsys.K(); ++k)
    if (mu_collides(mu, eigsys.lambdas[k]))
      throw Error(ErrorCode::MuCollidesWithSpectrum,
                  "mu=" + std::to_string(mu) + " is within tolerance of lambda_" + std::to_string(k + 1));

  const Grid& grid = eigsys.grid;
  Eigen::VectorXd f = fd::shape_solve(problem, grid, mu, options.reverse_elimination);
  if (options.richardson) {
    const Grid fine = Grid::uniform(2 * grid.n_points - 1);
    const Eigen::VectorXd ff = fd::shape_solve(problem, fine, mu, options.reverse_elimination);
    f = (4.0 * fd::restrict_to_coarse(ff) - f) / 3.0;
  }

  const Eigen::VectorXd res = fd::sl_residual(problem, grid, f, mu);
  const double norm = std::sqrt((grid.weights.array() * res.array().square() / eigsys.r.array()).sum());
  const double left = problem.b1 * f[0] + problem.b2 * fd::d1_left(f, grid.h);
  const double right = problem.a1 * f[grid.n_points - 1] + problem.a2 * fd::d1_right(f, grid.h) - 1.0;
  if (norm > 1e-5 || std::abs(left) > 1e-6 || std::abs(right) > 1e-6)
    throw Error(ErrorCode::GridTooCoarse, "shape residuals (" + std::to_string(norm) + ", " +
                                              std::to_string(left) + ", " + std::to_string(right) +
                                              ") exceed tolerance for mu=" + std::to_string(mu));
  return f;
}

ShapeSet build_shapes(const SLProblem& problem, const EigenSystem& eigsys, const std::vector<double>& mus,
                      const ShapeOptions& options) {
  ShapeSet s;
  s.j = static_cast<int>(mus.size());
  s.mus = Eigen::Map<const Eigen::VectorXd>(mus.data(), s.j);
  s.varphis.resize(eigsys.grid.n_points, s.j);
  s.norms_sq.resize(s.j);
  for (int i = 0; i < s.j; ++i) {
    s.varphis.col(i) = solve_shape_bvp(problem, eigsys, mus[i], options);
    s.norms_sq[i] = eigsys.norm_sq(s.varphis.col(i));
  }
  return s;
}

OrthogonalityReport check_orthogonality(const ShapeSet& shapes, const EigenSystem& eigsys) {
  OrthogonalityReport rep;
  rep.gram = shapes.varphis.transpose() * eigsys.rweights.asDiagonal() * shapes.varphis;
  for (int i = 0; i < shapes.j; ++i)
    for (int m = 0; m < shapes.j; ++m)
      if (i != m) rep.max_offdiag = std::max(rep.max_offdiag, std::abs(rep.gram(i, m)));
  rep.pass = rep.max_offdiag <= 1e-8;
  return rep;
}

bool MuReport::pass() const {
  for (const auto& v : verdicts)
    if (!v.pass()) return false;
  return true;
}

MuReport validate_mu_set(const std::vector<double>& mus, const EigenSystem& eigsys) {
  MuReport rep;
  for (double mu : mus) {
    MuVerdict v;
    v.mu = mu;
    v.positive = mu > 0.0;
    v.gap = std::numeric_limits<double>::infinity();
    for (int k = 0; k < eigsys.K(); ++k) {
      const double gap = std::abs(mu - eigsys.lambdas[k]);
      if (gap < v.gap) {
        v.gap = gap;
        v.nearest_index = k + 1;
        v.nearest_lambda = eigsys.lambdas[k];
      }
    }
    v.off_spectrum = !mu_collides(mu, v.nearest_lambda);
    rep.verdicts.push_back(v);
  }
  return rep;
}

}  // namespace clfpde

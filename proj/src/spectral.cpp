#include "clfpde/spectral.hpp"

#include <cmath>
#include <string>

#include "clfpde/error.hpp"
#include "fd.hpp"

namespace clfpde {

namespace {
constexpr double kDirichletTol = 1e-15;
}

bool SLProblem::dirichlet_left() const { return std::abs(b2) <= kDirichletTol; }
bool SLProblem::dirichlet_right() const { return std::abs(a2) <= kDirichletTol; }

void SLProblem::validate(const Grid& grid) const {
  if (std::abs(a1 * a1 + a2 * a2 - 1.0) > 1e-12)
    throw Error(ErrorCode::InvalidArgument, "boundary constants need a1^2 + a2^2 = 1");
  if (std::abs(b1 * b1 + b2 * b2 - 1.0) > 1e-12)
    throw Error(ErrorCode::InvalidArgument, "boundary constants need b1^2 + b2^2 = 1");
  for (int k = 0; k < grid.n_points; ++k) {
    const double x = grid.x[k];
    if (!(p(x) > 0.0)) throw Error(ErrorCode::NonPositiveCoefficient, "p <= 0 at x=" + std::to_string(x));
    if (!(r(x) > 0.0)) throw Error(ErrorCode::NonPositiveCoefficient, "r <= 0 at x=" + std::to_string(x));
  }
}

double inner_product(const Eigen::VectorXd& f, const Eigen::VectorXd& g, const Grid& grid,
                     const Eigen::VectorXd& r) {
  if (f.size() != grid.n_points || g.size() != grid.n_points || r.size() != grid.n_points)
    throw Error(ErrorCode::DimensionMismatch, "grid function length differs from grid size");
  return (grid.weights.array() * r.array() * f.array() * g.array()).sum();
}

double EigenSystem::inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
  if (f.size() != rweights.size() || g.size() != rweights.size())
    throw Error(ErrorCode::DimensionMismatch, "grid function length differs from grid size");
  return (rweights.array() * f.array() * g.array()).sum();
}

Eigen::VectorXd EigenSystem::coefficients(const Eigen::VectorXd& f, int count) const {
  if (f.size() != rweights.size())
    throw Error(ErrorCode::DimensionMismatch, "grid function length differs from grid size");
  if (count > K()) throw Error(ErrorCode::CutoffExceedsComputedModes, "requested more modes than computed");
  return phis.leftCols(count).transpose() * rweights.cwiseProduct(f);
}

EigenSystem eigensolve(const SLProblem& problem, const Grid& grid, int K, const EigenOptions& options) {
  if (K < 1) throw Error(ErrorCode::InvalidArgument, "mode count must be positive");
  problem.validate(grid);
  if (grid.n_points < 8 * K)
    throw Error(ErrorCode::GridTooCoarse,
                std::to_string(grid.n_points) + " grid points cannot resolve " + std::to_string(K) + " modes");

  fd::DiscreteEigen coarse = fd::discrete_eigen(problem, grid, K);
  EigenSystem es;
  es.grid = grid;
  if (options.richardson) {
    const Grid fine_grid = Grid::uniform(2 * grid.n_points - 1);
    const fd::DiscreteEigen fine = fd::discrete_eigen(problem, fine_grid, K);
    es.lambdas = (4.0 * fine.lambdas - coarse.lambdas) / 3.0;
    es.phis.resize(grid.n_points, K);
    for (int k = 0; k < K; ++k)
      es.phis.col(k) = (4.0 * fd::restrict_to_coarse(fine.phis.col(k)) - coarse.phis.col(k)) / 3.0;
  } else {
    es.lambdas = coarse.lambdas;
    es.phis = coarse.phis;
  }
  es.r = fd::sample(problem.r, grid);
  es.rweights = grid.weights.cwiseProduct(es.r);

  // Modified Gram-Schmidt (two passes) in the quadrature inner product, lowest
  // modes first; the adjustment is at the discretization-error level.
  for (int k = 0; k < K; ++k) {
    auto col = es.phis.col(k);
    for (int pass = 0; pass < 2; ++pass)
      for (int m = 0; m < k; ++m) col -= es.inner(es.phis.col(m), col) * es.phis.col(m);
    col /= std::sqrt(es.inner(col, col));
  }

  for (int k = 0; k + 1 < K; ++k)
    if (!(es.lambdas[k + 1] > es.lambdas[k]))
      throw Error(ErrorCode::GridTooCoarse, "computed eigenvalues are not strictly increasing");

  const double h = grid.h;
  es.dphi0.resize(K);
  es.dphi1.resize(K);
  es.boundary_residual.resize(K);
  es.operator_residual = Eigen::VectorXd::Constant(K, std::nan(""));
  const int checked = std::max(1, K / 2);
  for (int k = 0; k < K; ++k) {
    const Eigen::VectorXd phi = es.phis.col(k);
    es.dphi0[k] = fd::d1_left(phi, h);
    es.dphi1[k] = fd::d1_right(phi, h);
    const double left = problem.b1 * phi[0] + problem.b2 * es.dphi0[k];
    const double right = problem.a1 * phi[grid.n_points - 1] + problem.a2 * es.dphi1[k];
    es.boundary_residual[k] = std::max(std::abs(left), std::abs(right)) / phi.cwiseAbs().maxCoeff();
    if (k < checked) {
      const Eigen::VectorXd res = fd::sl_residual(problem, grid, phi, es.lambdas[k]);
      const double norm = std::sqrt((grid.weights.array() * res.array().square() / es.r.array()).sum());
      es.operator_residual[k] = norm;
      if (norm > 1e-5 * (1.0 + std::abs(es.lambdas[k])))
        throw Error(ErrorCode::GridTooCoarse, "operator residual " + std::to_string(norm) + " for mode " +
                                                  std::to_string(k + 1) + " exceeds tolerance");
    }
  }
  return es;
}

Projection project_P(const Eigen::VectorXd& w, const EigenSystem& eigsys, int N) {
  if (N > eigsys.K() || N < 0)
    throw Error(ErrorCode::CutoffExceedsComputedModes,
                "cutoff " + std::to_string(N) + " exceeds " + std::to_string(eigsys.K()) + " computed modes");
  Projection out;
  out.coeffs = eigsys.coefficients(w, N);
  out.remainder = w - eigsys.phis.leftCols(N) * out.coeffs;
  return out;
}

AssumptionHReport check_assumption_H(const EigenSystem& eigsys, int N) {
  AssumptionHReport rep;
  rep.N = N;
  const int K = eigsys.K();
  if (N < 0 || N + 1 > K) {
    rep.note = "lambda_{N+1} is not among the computed modes";
    return rep;
  }
  rep.lambda_next = eigsys.lambdas[N];
  rep.lambda_positive = rep.lambda_next > 0.0;
  rep.enough_modes = K >= N + 20;

  std::vector<double> terms;
  double acc = 0.0;
  for (int k = N; k < K; ++k) {
    const double term = eigsys.phis.col(k).cwiseAbs().maxCoeff() / std::abs(eigsys.lambdas[k]);
    terms.push_back(term);
    acc += term;
    rep.partial_sums.push_back(acc);
  }

  // Least-squares slope of log(term) against log(n) over the trailing half.
  const int count = static_cast<int>(terms.size());
  const int start = count / 2;
  if (count - start >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int m = count - start;
    for (int i = start; i < count; ++i) {
      const double lx = std::log(static_cast<double>(N + 1 + i));
      const double ly = std::log(terms[i]);
      sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    rep.decay_exponent = -slope;
    rep.converging = rep.decay_exponent > 1.0;
  }
  if (!rep.enough_modes) rep.note = "fewer than N+20 modes computed; trend indicator is unreliable";
  return rep;
}

}  // namespace clfpde

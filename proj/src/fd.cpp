#include "fd.hpp"

#include <cmath>
#include <limits>

#include "clfpde/error.hpp"

namespace clfpde::fd {

Eigen::VectorXd sample(const Coefficient& c, const Grid& grid) {
  Eigen::VectorXd out(grid.n_points);
  for (int k = 0; k < grid.n_points; ++k) out[k] = c(grid.x[k]);
  return out;
}

Operator assemble(const SLProblem& problem, const Grid& grid) {
  const int n = grid.n_points - 1;
  const double h = grid.h;
  Operator op;
  op.first = problem.dirichlet_left() ? 1 : 0;
  op.last = problem.dirichlet_right() ? n - 1 : n;
  const int m = op.size();
  op.diag.resize(m);
  op.off.resize(m - 1);
  op.mass.resize(m);

  auto p_half = [&](int k) { return problem.p((k + 0.5) * h); };  // p_{k+1/2}
  for (int i = 0; i < m; ++i) {
    const int k = op.first + i;
    const double xk = grid.x[k];
    if (k == 0) {
      op.diag[i] = p_half(0) / h - problem.p(0.0) * problem.b1 / problem.b2 + 0.5 * h * problem.q(0.0);
      op.mass[i] = 0.5 * h * problem.r(0.0);
    } else if (k == n) {
      op.diag[i] = p_half(n - 1) / h + problem.p(1.0) * problem.a1 / problem.a2 + 0.5 * h * problem.q(1.0);
      op.mass[i] = 0.5 * h * problem.r(1.0);
    } else {
      op.diag[i] = (p_half(k - 1) + p_half(k)) / h + h * problem.q(xk);
      op.mass[i] = h * problem.r(xk);
    }
    if (i + 1 < m) op.off[i] = -p_half(k) / h;
  }
  return op;
}

Eigen::VectorXd solve_tridiagonal(Eigen::VectorXd dl, Eigen::VectorXd d, Eigen::VectorXd du,
                                  Eigen::VectorXd b) {
  const int n = static_cast<int>(d.size());
  if (n == 1) return Eigen::VectorXd::Constant(1, b[0] / d[0]);
  const double scale = d.cwiseAbs().maxCoeff() + (n > 1 ? du.cwiseAbs().maxCoeff() : 0.0);
  const double floor = std::numeric_limits<double>::epsilon() * (scale > 0 ? scale : 1.0);
  Eigen::VectorXd du2 = Eigen::VectorXd::Zero(std::max(n - 2, 0));
  auto guard = [floor](double v) { return std::abs(v) < floor ? (v < 0 ? -floor : floor) : v; };

  for (int i = 0; i < n - 1; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      d[i] = guard(d[i]);
      const double fact = dl[i] / d[i];
      d[i + 1] -= fact * du[i];
      b[i + 1] -= fact * b[i];
    } else {
      const double fact = d[i] / dl[i];
      d[i] = dl[i];
      const double temp = d[i + 1];
      d[i + 1] = du[i] - fact * temp;
      if (i < n - 2) {
        du2[i] = du[i + 1];
        du[i + 1] = -fact * du2[i];
      }
      du[i] = temp;
      const double tb = b[i];
      b[i] = b[i + 1];
      b[i + 1] = tb - fact * b[i + 1];
    }
  }
  d[n - 1] = guard(d[n - 1]);
  b[n - 1] /= d[n - 1];
  b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
  for (int i = n - 3; i >= 0; --i) b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
  return b;
}

namespace {

// Number of eigenvalues of the symmetric tridiagonal (a, e) below x.
int sturm_count(const Eigen::VectorXd& a, const Eigen::VectorXd& e2, double x) {
  int count = 0;
  double q = a[0] - x;
  if (q < 0) ++count;
  for (int i = 1; i < a.size(); ++i) {
    if (q == 0.0) q = std::numeric_limits<double>::epsilon() * (std::abs(x) + 1.0);
    q = a[i] - x - e2[i - 1] / q;
    if (q < 0) ++count;
  }
  return count;
}

}  // namespace

DiscreteEigen discrete_eigen(const SLProblem& problem, const Grid& grid, int K) {
  const Operator op = assemble(problem, grid);
  const int m = op.size();
  if (K > m) throw Error(ErrorCode::GridTooCoarse, "more modes requested than grid unknowns");

  // Similarity transform to the symmetric standard form T = W^-1/2 S W^-1/2.
  const Eigen::VectorXd sw = op.mass.cwiseSqrt();
  Eigen::VectorXd a = op.diag.cwiseQuotient(op.mass);
  Eigen::VectorXd e(m - 1), e2(m - 1);
  for (int i = 0; i < m - 1; ++i) {
    e[i] = op.off[i] / (sw[i] * sw[i + 1]);
    e2[i] = e[i] * e[i];
  }

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 0; i < m; ++i) {
    const double rad = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i < m - 1 ? std::abs(e[i]) : 0.0);
    lo = std::min(lo, a[i] - rad);
    hi = std::max(hi, a[i] + rad);
  }

  DiscreteEigen out;
  out.lambdas.resize(K);
  out.phis = Eigen::MatrixXd::Zero(grid.n_points, K);
  const double eps = std::numeric_limits<double>::epsilon();
  double left = lo;
  for (int k = 0; k < K; ++k) {
    double l = left, u = hi;
    for (int it = 0; it < 200 && u - l > 2 * eps * std::max(std::abs(l), std::abs(u)) + 1e-300; ++it) {
      const double mid = 0.5 * (l + u);
      if (sturm_count(a, e2, mid) > k) u = mid; else l = mid;
    }
    const double lam = 0.5 * (l + u);
    out.lambdas[k] = lam;
    left = l;

    // Inverse iteration on T - lam I.
    Eigen::VectorXd x = Eigen::VectorXd::Ones(m);
    for (int i = 0; i < m; ++i) x[i] += 0.1 * std::sin(1.7 * i);
    x.normalize();
    for (int it = 0; it < 3; ++it) {
      x = solve_tridiagonal(e, a.array() - lam, e, x);
      x.normalize();
    }
    Eigen::VectorXd v = x.cwiseQuotient(sw);  // unit discrete mass norm
    // v[0] sits at x=h for a Dirichlet left end (sign of phi'(0)), else at x=0.
    if (v[0] < 0) v = -v;
    out.phis.col(k).segment(op.first, m) = v;
  }
  return out;
}

Eigen::VectorXd shape_solve(const SLProblem& problem, const Grid& grid, double mu, bool reverse) {
  const Operator op = assemble(problem, grid);
  const int m = op.size();
  const int n = grid.n_points - 1;
  const double h = grid.h;
  Eigen::VectorXd diag = op.diag - mu * op.mass;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(grid.n_points);
  if (problem.dirichlet_right()) {
    const double boundary = 1.0 / problem.a1;
    f[n] = boundary;
    rhs[m - 1] += problem.p((n - 0.5) * h) / h * boundary;
  } else {
    rhs[m - 1] = problem.p(1.0) / problem.a2;
  }
  Eigen::VectorXd sol;
  if (!reverse) {
    sol = solve_tridiagonal(op.off, diag, op.off, rhs);
  } else {
    sol = solve_tridiagonal(op.off.reverse(), diag.reverse(), op.off.reverse(), rhs.reverse()).reverse();
  }
  f.segment(op.first, m) = sol;
  return f;
}

Eigen::VectorXd d1(const Eigen::VectorXd& f, double h) {
  const int n = static_cast<int>(f.size());
  Eigen::VectorXd out(n);
  for (int k = 2; k < n - 2; ++k) out[k] = (-f[k + 2] + 8 * f[k + 1] - 8 * f[k - 1] + f[k - 2]) / (12 * h);
  out[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h);
  out[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h);
  const int e = n - 1;
  out[e] = (25 * f[e] - 48 * f[e - 1] + 36 * f[e - 2] - 16 * f[e - 3] + 3 * f[e - 4]) / (12 * h);
  out[e - 1] = (3 * f[e] + 10 * f[e - 1] - 18 * f[e - 2] + 6 * f[e - 3] - f[e - 4]) / (12 * h);
  return out;
}

Eigen::VectorXd d2(const Eigen::VectorXd& f, double h) {
  const int n = static_cast<int>(f.size());
  const double c = 12 * h * h;
  Eigen::VectorXd out(n);
  for (int k = 2; k < n - 2; ++k)
    out[k] = (-f[k + 2] + 16 * f[k + 1] - 30 * f[k] + 16 * f[k - 1] - f[k - 2]) / c;
  out[0] = (45 * f[0] - 154 * f[1] + 214 * f[2] - 156 * f[3] + 61 * f[4] - 10 * f[5]) / c;
  out[1] = (10 * f[0] - 15 * f[1] - 4 * f[2] + 14 * f[3] - 6 * f[4] + f[5]) / c;
  const int e = n - 1;
  out[e] = (45 * f[e] - 154 * f[e - 1] + 214 * f[e - 2] - 156 * f[e - 3] + 61 * f[e - 4] - 10 * f[e - 5]) / c;
  out[e - 1] = (10 * f[e] - 15 * f[e - 1] - 4 * f[e - 2] + 14 * f[e - 3] - 6 * f[e - 4] + f[e - 5]) / c;
  return out;
}

double d1_left(const Eigen::VectorXd& f, double h) {
  return (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h);
}

double d1_right(const Eigen::VectorXd& f, double h) {
  const int e = static_cast<int>(f.size()) - 1;
  return (25 * f[e] - 48 * f[e - 1] + 36 * f[e - 2] - 16 * f[e - 3] + 3 * f[e - 4]) / (12 * h);
}

Eigen::VectorXd sl_residual(const SLProblem& problem, const Grid& grid, const Eigen::VectorXd& f,
                            double mu) {
  const Eigen::VectorXd fp = d1(f, grid.h);
  const Eigen::VectorXd fpp = d2(f, grid.h);
  Eigen::VectorXd res(grid.n_points);
  for (int k = 0; k < grid.n_points; ++k) {
    const double x = grid.x[k];
    res[k] = problem.p(x) * fpp[k] + problem.p.derivative(x) * fp[k] - problem.q(x) * f[k] +
             mu * problem.r(x) * f[k];
  }
  return res;
}

Eigen::VectorXd restrict_to_coarse(const Eigen::VectorXd& fine) {
  const Eigen::Index n = (fine.size() + 1) / 2;
  Eigen::VectorXd out(n);
  for (Eigen::Index k = 0; k < n; ++k) out[k] = fine[2 * k];
  return out;
}

}  // namespace clfpde::fd

#pragma once

// Finite-difference machinery shared by the eigen and shape solvers.

#include <Eigen/Dense>

#include "clfpde/grid.hpp"
#include "clfpde/spectral.hpp"

namespace clfpde::fd {

// Symmetric three-point discretization of -(p f')' + q f over the unknown
// nodes first..last (Dirichlet ends are eliminated). S is stored as a
// diagonal plus superdiagonal; W is the diagonal mass (h r, h/2 r at a
// Robin end).
struct Operator {
  int first = 0, last = 0;
  Eigen::VectorXd diag, off, mass;

  int size() const { return last - first + 1; }
};

Operator assemble(const SLProblem& problem, const Grid& grid);

// Tridiagonal solve with partial pivoting. Inputs are taken by value and
// overwritten. Tiny pivots are replaced by a floor so the routine doubles as
// the inverse-iteration kernel.
Eigen::VectorXd solve_tridiagonal(Eigen::VectorXd sub, Eigen::VectorXd diag, Eigen::VectorXd sup,
                                  Eigen::VectorXd rhs);

struct DiscreteEigen {
  Eigen::VectorXd lambdas;
  Eigen::MatrixXd phis;  // full grid, mass-normalized, sign-fixed
};

DiscreteEigen discrete_eigen(const SLProblem& problem, const Grid& grid, int K);

// Solves (S - mu W) f = boundary data for the inhomogeneous actuated end.
// reverse=true eliminates from the x=1 end instead of x=0.
Eigen::VectorXd shape_solve(const SLProblem& problem, const Grid& grid, double mu, bool reverse);

// Fourth-order derivative stencils (one-sided near the ends).
Eigen::VectorXd d1(const Eigen::VectorXd& f, double h);
Eigen::VectorXd d2(const Eigen::VectorXd& f, double h);
double d1_left(const Eigen::VectorXd& f, double h);
double d1_right(const Eigen::VectorXd& f, double h);

// (p f')' - q f + mu r f evaluated with the stencils above.
Eigen::VectorXd sl_residual(const SLProblem& problem, const Grid& grid, const Eigen::VectorXd& f,
                            double mu);

// Samples of coefficient c on the grid.
Eigen::VectorXd sample(const Coefficient& c, const Grid& grid);

// Restriction of a 2n-1 grid function to the n-point grid.
Eigen::VectorXd restrict_to_coarse(const Eigen::VectorXd& fine);

}  // namespace clfpde::fd

#include "clfpde/reduced.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "clfpde/error.hpp"

namespace clfpde {

ReducedModel build_reduced_model(const EigenSystem& eigsys, const ShapeSet& shapes, int N) {
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "cutoff N must be at least 1");
  if (N + 1 > eigsys.K())
    throw Error(ErrorCode::CutoffExceedsComputedModes, "lambda_{N+1} is not among the computed modes");
  ReducedModel m;
  m.N = N;
  m.j = shapes.j;
  m.lambda_next = eigsys.lambdas[N];
  if (!(m.lambda_next > 0.0))
    throw Error(ErrorCode::CutoffNotStrictlyStable,
                "lambda_{N+1} = " + std::to_string(m.lambda_next) + " is not positive");
  m.C = -eigsys.lambdas.head(N).asDiagonal().toDenseMatrix();
  m.B = -(eigsys.phis.leftCols(N).transpose() * eigsys.rweights.asDiagonal() * shapes.varphis);
  return m;
}

Eigen::VectorXd input_vector_closed_form(const SLProblem& problem, const EigenSystem& eigsys, double mu, int N) {
  if (N > eigsys.K()) throw Error(ErrorCode::CutoffExceedsComputedModes, "N exceeds computed modes");
  const int last = eigsys.grid.n_points - 1;
  const double p1 = problem.p(1.0);
  Eigen::VectorXd b(N);
  for (int n = 0; n < N; ++n) {
    if (mu_collides(mu, eigsys.lambdas[n]))
      throw Error(ErrorCode::MuCollidesWithSpectrum, "mu collides with lambda_" + std::to_string(n + 1));
    b[n] = p1 * (problem.a2 * eigsys.phis(last, n) - problem.a1 * eigsys.dphi1[n]) / (mu - eigsys.lambdas[n]);
  }
  return b;
}

ControllabilityReport check_controllability(const ReducedModel& model) {
  ControllabilityReport rep;
  const int N = model.N;
  const Eigen::VectorXd c = model.C.diagonal();
  const Eigen::VectorXd b = model.B.col(0);

  // Powers of C/|C| keep the Kalman columns comparable in size; the rank is
  // unchanged by the scaling.
  const double scale = std::max(c.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::MatrixXd Q(N, N);
  Eigen::VectorXd col = b;
  for (int k = 0; k < N; ++k) {
    Q.col(k) = col;
    col = (c / scale).cwiseProduct(col);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Q);
  rep.singular_values = svd.singularValues();
  const double smax = rep.singular_values.size() ? rep.singular_values[0] : 0.0;
  for (int k = 0; k < rep.singular_values.size(); ++k)
    if (rep.singular_values[k] > 1e-10 * smax) ++rep.rank;
  rep.pass = rep.rank == N && smax > 0.0;

  rep.b_nonzero = (b.cwiseAbs().array() > 1e-10).all();
  rep.distinct = true;
  for (int n = 0; n < N; ++n)
    for (int m = n + 1; m < N; ++m)
      if (c[n] == c[m]) rep.distinct = false;
  return rep;
}

std::string to_string(GainMode mode) {
  return mode == GainMode::ClosedForm ? "closed_form" : "pole_placement";
}

GainMode parse_gain_mode(const std::string& text) {
  if (text == "closed_form") return GainMode::ClosedForm;
  if (text == "pole_placement") return GainMode::PolePlacement;
  throw Error(ErrorCode::ConfigInvalid, "unknown gain mode '" + text + "'");
}

Eigen::MatrixXd closed_loop_matrix(const ReducedModel& model, const Eigen::MatrixXd& K) {
  return model.C + model.B * K;
}

double gain_inequality_residual(const ReducedModel& model, const GainDesign& design) {
  const Eigen::MatrixXd A = closed_loop_matrix(model, design.K);
  const Eigen::MatrixXd S = design.R * A + A.transpose() * design.R;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff() + 2.0 * design.sigma;
}

namespace {

// Solves R A + A^T R = Q through the Kronecker form.
Eigen::MatrixXd lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q) {
  const int n = static_cast<int>(A.rows());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n * n, n * n);
  // vec(R A) = (A^T kron I) vec(R), vec(A^T R) = (I kron A^T) vec(R), column-major vec.
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      L.block(a * n, b * n, n, n) += A(b, a) * I;
      if (a == b) L.block(a * n, b * n, n, n) += A.transpose();
    }
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(Q.data(), n * n);
  const Eigen::VectorXd x = L.fullPivLu().solve(rhs);
  Eigen::MatrixXd R = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n);
  return 0.5 * (R + R.transpose());
}

Eigen::MatrixXd place_single_input(const ReducedModel& model, const Eigen::VectorXd& targets) {
  const int N = model.N;
  const Eigen::VectorXd c = model.C.diagonal();
  const Eigen::VectorXd b = model.B.col(0);
  Eigen::RowVectorXd k(N);
  // det(sI - C - b k^T) = prod(s - c_n) (1 - sum k_n b_n / (s - c_n)); matching
  // prod(s + sigma_i) at s = c_n gives k_n directly.
  for (int n = 0; n < N; ++n) {
    double num = 1.0, den = b[n];
    for (int i = 0; i < N; ++i) num *= c[n] + targets[i];
    for (int m = 0; m < N; ++m)
      if (m != n) den *= c[n] - c[m];
    k[n] = -num / den;
  }
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(model.j, N);
  K.row(0) = k;

  // Compare characteristic polynomials at N+1 sample points.
  const Eigen::MatrixXd A = closed_loop_matrix(model, K);
  const double scale = 1.0 + c.cwiseAbs().maxCoeff() + targets.cwiseAbs().maxCoeff();
  for (int s = 0; s <= N; ++s) {
    const double z = scale * (0.37 + 0.61 * s);
    const double got = (z * Eigen::MatrixXd::Identity(N, N) - A).determinant();
    double want = 1.0;
    for (int i = 0; i < N; ++i) want *= z + targets[i];
    if (!(std::abs(got - want) <= 1e-8 * std::abs(want)))
      throw Error(ErrorCode::PlacementFailed, "closed-loop characteristic polynomial mismatch");
  }
  return K;
}

}  // namespace

GainDesign design_gains(const ReducedModel& model, const Eigen::VectorXd& sigma_targets, GainMode mode) {
  const int N = model.N;
  if (sigma_targets.size() != N)
    throw Error(ErrorCode::DimensionMismatch, "need one sigma target per retained mode");
  if (!(sigma_targets.array() > 0.0).all())
    throw Error(ErrorCode::InvalidArgument, "sigma targets must be positive");

  GainDesign d;
  d.mode = mode;
  d.sigma_targets = sigma_targets;
  d.sigma = sigma_targets.minCoeff();
  const Eigen::VectorXd lambdas = -model.C.diagonal();

  if (mode == GainMode::ClosedForm) {
    if (model.j != N) throw Error(ErrorCode::SingularB, "closed-form gains need j = N");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(model.B);
    if (std::abs(lu.determinant()) <= 1e-10 || !lu.isInvertible())
      throw Error(ErrorCode::SingularB, "|det B| <= 1e-10");
    const Eigen::MatrixXd g = -lu.inverse();
    d.K = g * (sigma_targets - lambdas).asDiagonal();
    d.R = Eigen::MatrixXd::Identity(N, N);
  } else {
    const ControllabilityReport ctrl = check_controllability(model);
    if (!ctrl.pass) throw Error(ErrorCode::PlacementFailed, "(C, B_1) is not controllable");
    d.K = place_single_input(model, sigma_targets);
    const Eigen::MatrixXd A = closed_loop_matrix(model, d.K);
    d.R = lyapunov(A, -2.0 * d.sigma * Eigen::MatrixXd::Identity(N, N));
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d.R, Eigen::EigenvaluesOnly);
  d.c1 = es.eigenvalues().minCoeff();
  d.c2 = es.eigenvalues().maxCoeff();
  if (!(d.c1 > 0.0)) throw Error(ErrorCode::LyapunovIndefinite, "R is not positive definite");
  const double residual = gain_inequality_residual(model, d);
  if (!(residual <= 1e-9))
    throw Error(ErrorCode::LyapunovIndefinite,
                "gain inequality violated by " + std::to_string(residual));
  return d;
}

}  // namespace clfpde

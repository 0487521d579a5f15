#include "clfpde/clf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "clfpde/error.hpp"

namespace clfpde {

namespace {
constexpr double kSafety = 2.0;
}

Eigen::MatrixXd shape_coupling(const ShapeSet& shapes, const EigenSystem& eigsys) {
  return shapes.varphis.transpose() * eigsys.rweights.asDiagonal() * eigsys.phis;
}

double tail_bound(const Eigen::MatrixXd& Phi, int i, int M) {
  const int K = static_cast<int>(Phi.cols());
  double sum = 0.0;
  for (int n = M + 1; n <= K; ++n) sum += Phi(i, n - 1) * Phi(i, n - 1);
  double c = 0.0;
  for (int n = std::max(1, K / 2); n <= K; ++n) c = std::max(c, n * std::abs(Phi(i, n - 1)));
  return sum + c * c / K;
}

CLFParams select_clf_params(const GainDesign& design, const ShapeSet& shapes, const EigenSystem& eigsys,
                            const Eigen::VectorXd& Ls) {
  const int j = static_cast<int>(design.K.rows());
  const int N = static_cast<int>(design.K.cols());
  if (Ls.size() != j) throw Error(ErrorCode::DimensionMismatch, "need one L per input");
  if ((Ls.array() < 0.0).any()) throw Error(ErrorCode::InvalidArgument, "L values must be nonnegative");
  if (shapes.j != j) throw Error(ErrorCode::DimensionMismatch, "shape count differs from gain rows");
  if (N + 2 > eigsys.K())
    throw Error(ErrorCode::KernelTruncationExceedsModes, "need at least N+2 computed modes");

  CLFParams p;
  p.sigma = design.sigma;
  p.Ls = Ls;
  const double lambda_next = eigsys.lambdas[N];

  p.omegas.resize(j);
  double weighted = 0.0;
  for (int i = 0; i < j; ++i) {
    const double k2 = design.K.row(i).squaredNorm();
    p.omegas[i] = k2 > 0.0 ? p.sigma * shapes.mus[i] / (2.0 * kSafety * j * k2) : p.sigma * shapes.mus[i];
    weighted += shapes.norms_sq[i] * k2;
  }
  // With every K_i = 0 the tail inequality is vacuous; sigma / lambda_{N+1}
  // balances the two decay terms of the dissipation bound.
  p.gamma = weighted > 0.0 ? p.sigma * lambda_next / (2.0 * kSafety * j * weighted) : p.sigma / lambda_next;

  const Eigen::MatrixXd Phi = shape_coupling(shapes, eigsys);
  p.tail_bounds.resize(j);
  const int limit = std::min(kMaxKernelTruncation, eigsys.K() - 1);
  for (int M = N + 1; M <= limit; ++M) {
    double rhs = 0.0;
    for (int i = 0; i < j; ++i) {
      p.tail_bounds[i] = tail_bound(Phi, i, M);
      rhs += Ls[i] * p.tail_bounds[i];
    }
    rhs *= p.gamma;
    if (4.0 * (eigsys.lambdas[M] - lambda_next) >= rhs) {
      p.M = M;
      return p;
    }
  }
  throw Error(ErrorCode::TailBoundFailed,
              "no M <= " + std::to_string(limit) + " satisfies the kernel truncation inequality");
}

bool CLFCheck::pass() const {
  return (omega_margins.array() >= 0.0).all() && gamma_margin >= 0.0 && m_margin >= 0.0;
}

CLFCheck check_clf_params(const CLFParams& params, const GainDesign& design, const ShapeSet& shapes,
                          const EigenSystem& eigsys) {
  const int j = static_cast<int>(design.K.rows());
  const int N = static_cast<int>(design.K.cols());
  CLFCheck c;
  c.omega_margins.resize(j);
  double weighted = 0.0;
  for (int i = 0; i < j; ++i) {
    const double k2 = design.K.row(i).squaredNorm();
    c.omega_margins[i] = params.sigma * shapes.mus[i] - 2.0 * j * params.omegas[i] * k2;
    weighted += shapes.norms_sq[i] * k2;
  }
  c.gamma_margin = params.sigma * eigsys.lambdas[N] - 2.0 * j * params.gamma * weighted;
  if (params.M + 1 > eigsys.K() || params.M < N + 1) {
    c.m_margin = -1.0;
    return c;
  }
  const Eigen::MatrixXd Phi = shape_coupling(shapes, eigsys);
  double rhs = 0.0;
  for (int i = 0; i < j; ++i) rhs += params.Ls[i] * tail_bound(Phi, i, params.M);
  c.m_margin = 4.0 * (eigsys.lambdas[params.M] - eigsys.lambdas[N]) - params.gamma * rhs;
  return c;
}

Eigen::VectorXd apply_G(const Eigen::VectorXd& coeffs, const Eigen::MatrixXd& R) {
  if (R.cols() != coeffs.size()) throw Error(ErrorCode::DimensionMismatch, "R and coefficient sizes differ");
  return R * coeffs;
}

double eval_V(const Eigen::VectorXd& w, const Eigen::VectorXd& y, const CLFParams& params,
              const GainDesign& design, const EigenSystem& eigsys) {
  const int N = static_cast<int>(design.R.rows());
  const Eigen::VectorXd a = eigsys.coefficients(w, N);
  const double head = a.dot(design.R * a);
  const double tail = eigsys.norm_sq(w) - a.squaredNorm();
  return 0.5 * head + 0.5 * params.gamma * tail + 0.5 * params.omegas.dot(y.cwiseAbs2());
}

Coercivity coercivity_constants(const CLFParams& params, const GainDesign& design) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(design.R, Eigen::EigenvaluesOnly);
  Coercivity c;
  c.low = std::min({es.eigenvalues().minCoeff(), params.gamma, params.omegas.minCoeff()});
  c.high = std::max({es.eigenvalues().maxCoeff(), params.gamma, params.omegas.maxCoeff()});
  return c;
}

FeedbackLaw build_feedback_kernels(const GainDesign& design, const CLFParams& params, const ShapeSet& shapes,
                                   const EigenSystem& eigsys) {
  const int j = static_cast<int>(design.K.rows());
  const int N = static_cast<int>(design.K.cols());
  const int M = params.M;
  if (M > eigsys.K())
    throw Error(ErrorCode::KernelTruncationExceedsModes,
                "M = " + std::to_string(M) + " exceeds " + std::to_string(eigsys.K()) + " computed modes");
  const Eigen::MatrixXd Phi = shape_coupling(shapes, eigsys);

  FeedbackLaw law;
  law.kernel_coeffs = Eigen::MatrixXd::Zero(j, M);
  for (int i = 0; i < j; ++i) {
    const Eigen::VectorXd RPhi = design.R * Phi.row(i).head(N).transpose();
    law.kernel_coeffs.row(i).head(N) = design.K.row(i) + params.Ls[i] * RPhi.transpose();
    for (int n = N; n < M; ++n) law.kernel_coeffs(i, n) = params.gamma * params.Ls[i] * Phi(i, n);
  }
  law.kernels = eigsys.phis.leftCols(M) * law.kernel_coeffs.transpose();
  law.y_gains = params.omegas.cwiseProduct(params.Ls);
  law.shapes = shapes.varphis;
  law.mus = shapes.mus;
  return law;
}

Eigen::VectorXd eval_feedback(const FeedbackLaw& law, const EigenSystem& eigsys, const Eigen::VectorXd& w,
                              const Eigen::VectorXd& y) {
  if (y.size() != law.y_gains.size()) throw Error(ErrorCode::DimensionMismatch, "y has wrong length");
  if (w.size() != eigsys.rweights.size()) throw Error(ErrorCode::DimensionMismatch, "w has wrong length");
  return law.kernels.transpose() * eigsys.rweights.cwiseProduct(w) - law.y_gains.cwiseProduct(y);
}

Eigen::VectorXd eval_feedback_inner_form(const GainDesign& design, const CLFParams& params, const ShapeSet& shapes,
                                         const EigenSystem& eigsys, const Eigen::VectorXd& w,
                                         const Eigen::VectorXd& y) {
  const int j = static_cast<int>(design.K.rows());
  const int N = static_cast<int>(design.K.cols());
  const int M = params.M;
  const Eigen::VectorXd a = eigsys.coefficients(w, N);
  const Eigen::VectorXd Gw = eigsys.phis.leftCols(N) * (design.R * a);
  const Eigen::VectorXd tail = w - eigsys.phis.leftCols(N) * a;
  Eigen::VectorXd v(j);
  for (int i = 0; i < j; ++i) {
    const Eigen::VectorXd varphi = shapes.varphis.col(i);
    const Eigen::VectorXd tilde = eigsys.phis.leftCols(M) * eigsys.coefficients(varphi, M);
    const double bracket = eigsys.inner(Gw, varphi) + params.gamma * eigsys.inner(tail, tilde) -
                           params.omegas[i] * y[i];
    v[i] = design.K.row(i).dot(a) + params.Ls[i] * bracket;
  }
  return v;
}

Eigen::VectorXd transform_state(const Eigen::VectorXd& u, const Eigen::VectorXd& y, const ShapeSet& shapes,
                                StateDirection direction) {
  if (y.size() != shapes.j) throw Error(ErrorCode::DimensionMismatch, "y has wrong length");
  const Eigen::VectorXd shift = shapes.varphis * y;
  return direction == StateDirection::ToW ? Eigen::VectorXd(u - shift) : Eigen::VectorXd(u + shift);
}

Eigen::VectorXd transform_input(const Eigen::VectorXd& v, const Eigen::VectorXd& y, const Eigen::VectorXd& mus,
                                InputDirection direction) {
  if (v.size() != y.size() || y.size() != mus.size())
    throw Error(ErrorCode::DimensionMismatch, "v, y and mu lengths differ");
  const Eigen::VectorXd shift = mus.cwiseProduct(y);
  return direction == InputDirection::ToVbar ? Eigen::VectorXd(v - shift) : Eigen::VectorXd(v + shift);
}

double eval_Vdot_modal(const Eigen::VectorXd& a, const Eigen::VectorXd& y, const Eigen::VectorXd& v,
                       const CLFParams& params, const GainDesign& design, const ShapeSet& shapes,
                       const EigenSystem& eigsys) {
  const int N = static_cast<int>(design.R.rows());
  const int K = static_cast<int>(a.size());
  const Eigen::MatrixXd Phi = shape_coupling(shapes, eigsys).leftCols(K);
  const Eigen::VectorXd adot =
      -eigsys.lambdas.head(K).cwiseProduct(a) - Phi.transpose() * v;
  double vdot = a.head(N).dot(design.R * adot.head(N));
  vdot += params.gamma * a.tail(K - N).dot(adot.tail(K - N));
  vdot += (params.omegas.array() * y.array() * (v.array() - shapes.mus.array() * y.array())).sum();
  return vdot;
}

VdotResult eval_Vdot_bound(const Eigen::VectorXd& w, const Eigen::VectorXd& y, const FeedbackLaw& law,
                           const CLFParams& params, const GainDesign& design, const ShapeSet& shapes,
                           const EigenSystem& eigsys) {
  const int N = static_cast<int>(design.R.rows());
  const Eigen::VectorXd a = eigsys.coefficients(w, eigsys.K());
  const double total = eigsys.norm_sq(w);
  const double modal = a.squaredNorm();
  if (total - modal > 1e-6 * total)
    throw Error(ErrorCode::RemainderTooLarge, "state has energy outside the computed modes");
  const Eigen::VectorXd v = eval_feedback(law, eigsys, w, y);
  VdotResult r;
  r.vdot = eval_Vdot_modal(a, y, v, params, design, shapes, eigsys);
  const double rate = std::min(params.gamma * eigsys.lambdas[N], params.sigma);
  r.bound = -0.5 * (params.omegas.array() * shapes.mus.array() * y.array().square()).sum() - 0.5 * rate * modal;
  return r;
}

}  // namespace clfpde

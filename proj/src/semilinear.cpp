#include "clfpde/semilinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "clfpde/error.hpp"

namespace clfpde {

namespace {

constexpr double kSearchMargin = 1e-9;
constexpr int kGridPoints = 64;

// Uniform points k/65 first, then a geometric tail 2^-k/65 for designs whose
// admissible interval lies below the uniform grid.
std::vector<double> unit_search_grid() {
  std::vector<double> out;
  for (int k = 1; k <= kGridPoints; ++k) out.push_back(static_cast<double>(k) / (kGridPoints + 1));
  for (int k = 1; k <= kGridPoints; ++k) out.push_back(std::ldexp(1.0, -k) / (kGridPoints + 1));
  return out;
}

double table_eval(const std::vector<double>& s, const std::vector<double>& f, double x) {
  const std::size_t n = s.size();
  std::size_t k = 0;
  if (x >= s[n - 1]) {
    k = n - 2;
  } else if (x > s[0]) {
    k = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), x) - s.begin()) - 1;
  }
  const double t = (x - s[k]) / (s[k + 1] - s[k]);
  return f[k] + t * (f[k + 1] - f[k]);
}

// sum_m g_im^2 and sum_m g_im^2 (sigma - lambda_m)^2 per row.
Eigen::VectorXd row_sums(const SemilinearDesign& d, bool weighted) {
  Eigen::VectorXd out(d.N);
  for (int i = 0; i < d.N; ++i) {
    double acc = 0.0;
    for (int m = 0; m < d.N; ++m) {
      const double w = weighted ? (d.sigma - d.lambdas[m]) * (d.sigma - d.lambdas[m]) : 1.0;
      acc += d.g(i, m) * d.g(i, m) * w;
    }
    out[i] = acc;
  }
  return out;
}

double min_ratio(const Eigen::VectorXd& lhs, const Eigen::VectorXd& rhs) {
  double out = std::numeric_limits<double>::infinity();
  for (int k = 0; k < lhs.size(); ++k)
    if (rhs[k] > 0.0) out = std::min(out, lhs[k] / rhs[k] - 1.0);
  return out;
}

}  // namespace

double NonlinearitySpec::operator()(double s) const {
  switch (kind) {
    case Kind::Zero:
      return 0.0;
    case Kind::LinearGain:
      return scale * s;
    case Kind::SineType:
      return scale * std::sin(s);
    case Kind::Saturation:
      return scale * std::clamp(s, -1.0, 1.0);
    case Kind::UserTable:
      return table_eval(table_s, table_f, s);
  }
  return 0.0;
}

Eigen::VectorXd NonlinearitySpec::apply(const Eigen::VectorXd& u) const {
  Eigen::VectorXd out(u.size());
  for (int k = 0; k < u.size(); ++k) out[k] = (*this)(u[k]);
  return out;
}

std::string to_string(NonlinearitySpec::Kind kind) {
  switch (kind) {
    case NonlinearitySpec::Kind::Zero: return "zero";
    case NonlinearitySpec::Kind::LinearGain: return "linear_gain";
    case NonlinearitySpec::Kind::SineType: return "sine_type";
    case NonlinearitySpec::Kind::Saturation: return "saturation";
    case NonlinearitySpec::Kind::UserTable: return "user_table";
  }
  return "zero";
}

NonlinearitySpec::Kind parse_nonlinearity_kind(const std::string& text) {
  using K = NonlinearitySpec::Kind;
  for (K k : {K::Zero, K::LinearGain, K::SineType, K::Saturation, K::UserTable})
    if (to_string(k) == text) return k;
  throw Error(ErrorCode::ConfigInvalid, "unknown nonlinearity kind '" + text + "'");
}

GrowthCheck check_growth(const NonlinearitySpec& spec) {
  if (spec.kind == NonlinearitySpec::Kind::UserTable) {
    if (spec.table_s.size() < 2 || spec.table_s.size() != spec.table_f.size())
      throw Error(ErrorCode::InvalidArgument, "user table needs at least two (s, f) pairs of equal length");
    for (std::size_t k = 1; k < spec.table_s.size(); ++k)
      if (!(spec.table_s[k] > spec.table_s[k - 1]))
        throw Error(ErrorCode::InvalidArgument, "user table abscissae must increase strictly");
  }
  GrowthCheck out;
  out.f_at_zero = spec(0.0);
  const int samples = 20001;
  for (int k = 0; k < samples; ++k) {
    const double s = -10.0 + 20.0 * k / (samples - 1);
    if (s == 0.0) continue;
    out.worst_ratio = std::max(out.worst_ratio, std::abs(spec(s)) / std::abs(s));
  }
  out.pass = out.f_at_zero == 0.0 && out.worst_ratio <= spec.Lbar * (1.0 + 1e-12);
  return out;
}

std::string to_string(ControllerKind kind) { return kind == ControllerKind::Nonlinear ? "nonlinear" : "linear"; }

ControllerKind parse_controller_kind(const std::string& text) {
  if (text == "nonlinear") return ControllerKind::Nonlinear;
  if (text == "linear") return ControllerKind::Linear;
  throw Error(ErrorCode::ConfigInvalid, "unknown controller kind '" + text + "'");
}

SemilinearDesign make_semilinear_design(const ReducedModel& model, const ShapeSet& shapes, double sigma,
                                        ControllerKind kind) {
  if (model.j != model.N)
    throw Error(ErrorCode::DimensionMismatch, "semilinear controllers need j = N");
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
  SemilinearDesign d;
  d.N = model.N;
  d.B = model.B;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(model.B);
  if (!lu.isInvertible()) throw Error(ErrorCode::SingularB, "B is singular");
  d.g = -lu.inverse();
  const double err = (d.g * model.B + Eigen::MatrixXd::Identity(d.N, d.N)).cwiseAbs().maxCoeff();
  if (err > 1e-10) throw Error(ErrorCode::SingularB, "g B + I residual " + std::to_string(err));
  d.sigma = sigma;
  d.lambdas.resize(d.N + 1);
  d.lambdas.head(d.N) = -model.C.diagonal();
  d.lambdas[d.N] = model.lambda_next;
  d.mus = shapes.mus;
  d.norms_sq = shapes.norms_sq;
  d.kind = kind;
  return d;
}

Eigen::VectorXd eval_nonlinear_controller(const SemilinearDesign& d, const Eigen::VectorXd& w_coeffs,
                                          const Eigen::VectorXd& F_coeffs) {
  if (w_coeffs.size() < d.N || F_coeffs.size() < d.N)
    throw Error(ErrorCode::DimensionMismatch, "controller needs N modal coefficients");
  const Eigen::VectorXd s = (d.sigma - d.lambdas.head(d.N).array()).matrix();
  return d.g * (s.cwiseProduct(w_coeffs.head(d.N)) + F_coeffs.head(d.N));
}

Eigen::VectorXd eval_linear_controller(const SemilinearDesign& d, const Eigen::VectorXd& w_coeffs) {
  if (w_coeffs.size() < d.N) throw Error(ErrorCode::DimensionMismatch, "controller needs N modal coefficients");
  const Eigen::VectorXd s = (d.sigma - d.lambdas.head(d.N).array()).matrix();
  return d.g * s.cwiseProduct(w_coeffs.head(d.N));
}

GrowthInputs growth_inputs(const SemilinearDesign& d) {
  return GrowthInputs{d.N, d.mus, d.norms_sq, d.g, d.lambda_next()};
}

GrowthBound growth_bound_limit(const GrowthInputs& in) {
  const int N = in.N;
  if (N < 1 || in.mus.size() != N || in.norms_sq.size() != N || in.g.rows() != N || in.g.cols() != N)
    throw Error(ErrorCode::DimensionMismatch, "growth bound inputs must all have size N");
  GrowthBound out;
  const double inf = std::numeric_limits<double>::infinity();
  out.a_bar = inf;
  double total = 0.0;
  for (int i = 0; i < N; ++i) {
    if (!(in.mus[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "mu_i must be positive");
    const double gs = in.g.row(i).squaredNorm();
    total += in.norms_sq[i] * gs;
    const double den = 2.0 * N * in.norms_sq[i] * gs;
    if (den > 0.0) out.a_bar = std::min(out.a_bar, in.mus[i] * in.mus[i] / den);
  }
  out.b_bar = in.lambda_next * in.lambda_next / (1.0 + 2.0 * N * total);
  const double a = out.a_bar, b = out.b_bar;
  if (std::isinf(a)) {
    // No coupling through g: only the tail condition constrains, at kappa -> 0.
    out.Lbar_max = std::sqrt(b);
    return out;
  }
  const double den = a + b + std::sqrt((a - b) * (a - b) + 4.0 * N * a * b);
  if (!(den > 0.0) || !std::isfinite(den))
    throw Error(ErrorCode::DegenerateDenominator, "growth bound denominator vanishes");
  out.Lbar_max = std::sqrt(2.0 * a * b / den);
  return out;
}

bool NonlinearConditions::pass() const {
  return lambda_margin > 0.0 && (mu_margins.array() > 0.0).all();
}

bool LinearConditions::pass() const {
  return sigma_margin > 0.0 && lambda_margin > 0.0 && (mu_margins.array() > 0.0).all();
}

NonlinearConditions check_nonlinear_conditions(const SemilinearDesign& d, double Lbar, double kappa) {
  if (!(kappa > 0.0)) throw Error(ErrorCode::InvalidArgument, "kappa must be positive");
  const int N = d.N;
  const double L2 = Lbar * Lbar;
  const Eigen::VectorXd gs = row_sums(d, false);
  NonlinearConditions out;
  out.mu_margins.resize(N);
  Eigen::VectorXd lhs(N + 1), rhs(N + 1);
  double total = 0.0;
  for (int i = 0; i < N; ++i) {
    lhs[i] = d.mus[i] * d.mus[i];
    rhs[i] = 2.0 * N * L2 * (1.0 + 1.0 / kappa) * d.norms_sq[i] * gs[i];
    out.mu_margins[i] = lhs[i] - rhs[i];
    total += d.norms_sq[i] * gs[i];
  }
  lhs[N] = d.lambda_next() * d.lambda_next();
  rhs[N] = L2 * (1.0 + kappa * N) * (1.0 + 2.0 * N * total);
  out.lambda_margin = lhs[N] - rhs[N];
  out.normalized = min_ratio(lhs, rhs);
  return out;
}

LinearConditions check_linear_conditions(const SemilinearDesign& d, double Lbar, double kappa) {
  if (!(kappa > 0.0)) throw Error(ErrorCode::InvalidArgument, "kappa must be positive");
  if (!(d.sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
  const int N = d.N;
  const double L2 = Lbar * Lbar;
  const double growth = L2 * (1.0 + kappa * N);
  const double slack = d.sigma * d.sigma - growth;
  const Eigen::VectorXd gs = row_sums(d, true);
  LinearConditions out;
  out.sigma_margin = slack;
  out.mu_margins = Eigen::VectorXd::Constant(N, -std::numeric_limits<double>::infinity());
  out.lambda_margin = -std::numeric_limits<double>::infinity();
  out.normalized = growth > 0.0 ? d.sigma * d.sigma / growth - 1.0 : std::numeric_limits<double>::infinity();
  if (!(slack > 0.0)) return out;  // the remaining conditions divide by this slack

  Eigen::VectorXd lhs(N + 1), rhs(N + 1);
  double total = 0.0;
  for (int i = 0; i < N; ++i) {
    lhs[i] = d.mus[i] * d.mus[i];
    rhs[i] = 2.0 * N * L2 * (1.0 + 1.0 / kappa) * d.norms_sq[i] * gs[i] / slack;
    out.mu_margins[i] = lhs[i] - rhs[i];
    total += d.norms_sq[i] * gs[i];
  }
  lhs[N] = d.lambda_next() * d.lambda_next();
  rhs[N] = growth * (1.0 + 2.0 * N * total / slack);
  out.lambda_margin = lhs[N] - rhs[N];
  out.normalized = std::min(out.normalized, min_ratio(lhs, rhs));
  return out;
}

std::vector<double> kappa_grid() {
  std::vector<double> out(kGridPoints);
  for (int k = 0; k < kGridPoints; ++k) out[k] = std::pow(10.0, -4.0 + 8.0 * k / (kGridPoints - 1));
  return out;
}

KappaSearch find_kappa(const SemilinearDesign& d, double Lbar, ControllerKind kind) {
  auto margin = [&](double kappa) {
    const double m = kind == ControllerKind::Nonlinear ? check_nonlinear_conditions(d, Lbar, kappa).normalized
                                                       : check_linear_conditions(d, Lbar, kappa).normalized;
    return std::isfinite(m) ? m : 1e300;
  };
  KappaSearch out;
  const auto grid = kappa_grid();
  std::size_t best = 0;
  double best_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double m = margin(grid[k]);
    if (m > kSearchMargin) {
      out.found = true;
      out.kappa = grid[k];
      out.normalized_margin = m;
      return out;
    }
    if (m > best_margin) {
      best_margin = m;
      best = k;
    }
  }
  // The margin is the minimum of a term increasing and a term decreasing in
  // kappa, so it is unimodal in log kappa around the best grid point.
  double lo = std::log(grid[best == 0 ? 0 : best - 1]);
  double hi = std::log(grid[std::min(best + 1, grid.size() - 1)]);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - ratio * (hi - lo), x2 = lo + ratio * (hi - lo);
  double f1 = margin(std::exp(x1)), f2 = margin(std::exp(x2));
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = margin(std::exp(x2));
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = margin(std::exp(x1));
    }
  }
  const double x = f1 > f2 ? x1 : x2;
  const double m = std::max(f1, f2);
  out.kappa = std::exp(x);
  out.normalized_margin = m;
  out.refined = true;
  out.found = m > kSearchMargin;
  return out;
}

NonlinearParams select_params_nonlinear(const SemilinearDesign& d, double Lbar, double kappa) {
  if (!check_nonlinear_conditions(d, Lbar, kappa).pass())
    throw Error(ErrorCode::NoAdmissibleZeta, "stability conditions for the cancelling controller fail");
  const int N = d.N;
  const double L2 = Lbar * Lbar;
  const double growth = 1.0 + kappa * N;
  const Eigen::VectorXd gs = row_sums(d, false);
  const Eigen::VectorXd gw = row_sums(d, true);
  double phi_g = 0.0, phi_gw = 0.0;
  for (int i = 0; i < N; ++i) {
    phi_g += d.norms_sq[i] * gs[i];
    phi_gw += d.norms_sq[i] * gw[i];
  }
  const double lam2 = d.lambda_next() * d.lambda_next();

  for (const double zeta : unit_search_grid()) {
    const double h = 2.0 * zeta / ((1.0 - zeta) * (1.0 + L2) * growth);
    Eigen::VectorXd ybr(N);
    bool ok = true;
    for (int i = 0; i < N; ++i) {
      const double rhs = N * L2 * (1.0 + 1.0 / kappa) * d.norms_sq[i];
      ybr[i] = d.mus[i] * d.mus[i] / (h * gw[i] + 2.0 * gs[i]) - rhs;
      if (!(ybr[i] > kSearchMargin * std::max(1.0, rhs))) ok = false;
    }
    const double tail_rhs = L2 * growth;
    const double tbr = lam2 / (1.0 + N * h * phi_gw + 2.0 * N * phi_g) - tail_rhs;
    if (!(tbr > kSearchMargin * std::max(1.0, tail_rhs))) ok = false;
    if (!ok) continue;

    NonlinearParams p;
    p.zeta = zeta;
    p.clf.R = N * (1.0 + L2) * growth / d.sigma;
    p.beta = (1.0 - zeta) * d.sigma * p.clf.R / N;
    p.epsilon = 1.0 / (2.0 * N * zeta);
    const Eigen::VectorXd q = gw / p.beta + gs / zeta;
    double tail_den = p.epsilon;
    for (int i = 0; i < N; ++i) tail_den += d.norms_sq[i] * q[i];
    p.clf.gamma = d.lambda_next() / tail_den;
    p.clf.omegas = d.mus.cwiseQuotient(q);
    p.theta_head = zeta * N * growth;
    p.theta_y = zeta * ybr;
    p.theta_tail = N * zeta * tbr;
    p.clf.theta = std::min({p.theta_head, p.theta_tail, p.theta_y.minCoeff()});
    return p;
  }
  throw Error(ErrorCode::NoAdmissibleZeta, "no zeta on the search grid satisfies both dissipation conditions");
}

LinearParams select_params_linear(const SemilinearDesign& d, double Lbar, double kappa) {
  if (!check_linear_conditions(d, Lbar, kappa).pass())
    throw Error(ErrorCode::NoAdmissibleA, "stability conditions for the dominating controller fail");
  const int N = d.N;
  const double L2 = Lbar * Lbar;
  const double growth = L2 * (1.0 + kappa * N);
  const double s2 = d.sigma * d.sigma;
  const Eigen::VectorXd gw = row_sums(d, true);
  double phi_gw = 0.0;
  for (int i = 0; i < N; ++i) phi_gw += d.norms_sq[i] * gw[i];
  const double lam2 = d.lambda_next() * d.lambda_next();
  const double a_cap = std::min(1.0, s2 - growth);

  for (const double t : unit_search_grid()) {
    const double a = a_cap * t;
    const double slack = s2 - a - growth;
    if (!(slack > 0.0)) continue;
    Eigen::VectorXd ybr(N);
    bool ok = true;
    for (int i = 0; i < N; ++i) {
      const double rhs = (1.0 + 1.0 / kappa) * L2 * d.norms_sq[i];
      ybr[i] = slack * d.mus[i] * d.mus[i] / (2.0 * N * gw[i]) - rhs;
      if (!(gw[i] > 0.0) || !(ybr[i] > kSearchMargin * std::max(1.0, rhs))) ok = false;
    }
    const double tbr = lam2 / (1.0 + 2.0 * N * phi_gw / slack) - growth;
    if (!(tbr > kSearchMargin * std::max(1.0, growth))) ok = false;
    if (!ok) continue;

    LinearParams p;
    p.a = a;
    p.beta = slack / (2.0 * N);
    p.clf.R = d.sigma;
    p.clf.gamma = p.beta * d.lambda_next() / (p.beta + phi_gw);
    p.clf.omegas = p.beta * d.mus.cwiseQuotient(gw);
    p.theta_head = a / 2.0;
    p.theta_y = ybr / 2.0;
    p.theta_tail = tbr / 2.0;
    p.clf.theta = std::min({p.theta_head, p.theta_tail, p.theta_y.minCoeff()});
    return p;
  }
  throw Error(ErrorCode::NoAdmissibleA, "no a on the search grid satisfies the dissipation conditions");
}

SemilinearVdot eval_semilinear_V_and_Vdot(const Eigen::VectorXd& a, const Eigen::VectorXd& y,
                                          const SemilinearCLF& clf, const SemilinearDesign& d,
                                          const ShapeSet& shapes, const EigenSystem& eigsys,
                                          const NonlinearitySpec& F) {
  const int N = d.N;
  const int K = static_cast<int>(a.size());
  if (K < N + 1 || K > eigsys.K()) throw Error(ErrorCode::DimensionMismatch, "need N < modes <= computed modes");
  if (y.size() != N || shapes.j != N) throw Error(ErrorCode::DimensionMismatch, "y must have N entries");

  const Eigen::VectorXd u = eigsys.phis.leftCols(K) * a + shapes.varphis * y;
  const Eigen::VectorXd f = eigsys.coefficients(F.apply(u), K);
  const Eigen::VectorXd v =
      d.kind == ControllerKind::Nonlinear ? eval_nonlinear_controller(d, a, f) : eval_linear_controller(d, a);

  // adot_n = -lambda_n a_n - sum_i v_i <phi_n, varphi_i> + f_n
  const Eigen::MatrixXd Phi = eigsys.phis.leftCols(K).transpose() * eigsys.rweights.asDiagonal() * shapes.varphis;
  const Eigen::VectorXd adot = -eigsys.lambdas.head(K).cwiseProduct(a) - Phi * v + f;

  SemilinearVdot out;
  out.v = v;
  const double head = a.head(N).squaredNorm();
  const double tail = a.tail(K - N).squaredNorm();
  const Eigen::VectorXd wy = clf.omegas.cwiseProduct(y);
  out.V = 0.5 * clf.R * head + 0.5 * clf.gamma * tail + 0.5 * wy.dot(y);
  out.Vdot = clf.R * a.head(N).dot(adot.head(N)) + clf.gamma * a.tail(K - N).dot(adot.tail(K - N)) +
             wy.dot(v - d.mus.cwiseProduct(y));
  out.bound = -clf.theta * (head + tail + y.squaredNorm());
  return out;
}

}  // namespace clfpde

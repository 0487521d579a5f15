#include "clfpde/sim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>

#include "clfpde/error.hpp"
#include "format.hpp"

namespace clfpde {

namespace {

constexpr double kRk4Stability = 2.78;  // real-axis stability limit of classical RK4
constexpr double kGrowthLimit = 1e6;

// expm1(x)/x with the removable singularity filled in.
double phi1(double x) { return std::abs(x) < 1e-12 ? 1.0 + 0.5 * x : std::expm1(x) / x; }

using Rhs = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// z' = D z + G(z) with diagonal D.
class Stepper {
 public:
  Stepper(const Eigen::VectorXd& D, double dt, Integrator integrator) : D_(D), dt_(dt), integrator_(integrator) {
    if (integrator == Integrator::ExponentialMidpoint) {
      const int n = static_cast<int>(D.size());
      e_full_.resize(n), e_half_.resize(n), p_full_.resize(n), p_half_.resize(n);
      for (int k = 0; k < n; ++k) {
        e_full_[k] = std::exp(D[k] * dt);
        e_half_[k] = std::exp(D[k] * dt / 2);
        p_full_[k] = dt * phi1(D[k] * dt);
        p_half_[k] = dt / 2 * phi1(D[k] * dt / 2);
      }
    } else if (dt * D.cwiseAbs().maxCoeff() > kRk4Stability) {
      throw Error(ErrorCode::StepSizeTooLarge, "rk4 needs dt * max rate <= 2.78; reduce dt or n_modes");
    }
  }

  Eigen::VectorXd step(const Eigen::VectorXd& z, const Rhs& G) const {
    if (integrator_ == Integrator::ExponentialMidpoint) {
      const Eigen::VectorXd mid = e_half_.cwiseProduct(z) + p_half_.cwiseProduct(G(z));
      return e_full_.cwiseProduct(z) + p_full_.cwiseProduct(G(mid));
    }
    auto f = [&](const Eigen::VectorXd& s) -> Eigen::VectorXd { return D_.cwiseProduct(s) + G(s); };
    const Eigen::VectorXd k1 = f(z);
    const Eigen::VectorXd k2 = f(z + dt_ / 2 * k1);
    const Eigen::VectorXd k3 = f(z + dt_ / 2 * k2);
    const Eigen::VectorXd k4 = f(z + dt_ * k3);
    return z + dt_ / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }

 private:
  Eigen::VectorXd D_;
  double dt_;
  Integrator integrator_;
  Eigen::VectorXd e_full_, e_half_, p_full_, p_half_;
};

void check_config(const SimConfig& cfg, const ModalPlant& plant) {
  if (!(cfg.dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  if (!(cfg.t_final >= 100.0 * cfg.dt)) throw Error(ErrorCode::InvalidArgument, "t_final must be at least 100 dt");
  if (cfg.n_modes != plant.lambdas.size())
    throw Error(ErrorCode::DimensionMismatch, "plant truncation differs from n_modes");
}

void allocate(Trajectory& tr, int samples, int n_modes, int j) {
  tr.times.assign(samples, 0.0);
  tr.w_coeffs.setZero(samples, n_modes);
  tr.y.setZero(samples, j);
  tr.norm_w.setZero(samples);
  tr.norm_y.setZero(samples);
  tr.V.setZero(samples);
  tr.U.setZero(samples);
  tr.v.setZero(samples, j);
  tr.vbar.setZero(samples, j);
}

// Shared driver: record(k, t, z) is called on sample k.
template <class Record>
void integrate(const Eigen::VectorXd& D, const Rhs& G, Eigen::VectorXd z, const SimConfig& cfg, Record record) {
  const Stepper stepper(D, cfg.dt, cfg.integrator);
  const long long steps = cfg.steps();
  const int stride = cfg.stride();
  const double start = z.norm();
  const double limit = kGrowthLimit * std::max(start, 1e-300);
  record(0, 0.0, z);
  int sample = 1;
  for (long long s = 1; s <= steps; ++s) {
    z = stepper.step(z, G);
    const double size = z.norm();
    if (!std::isfinite(size) || size > limit)
      throw Error(ErrorCode::Instability,
                  "state norm grew beyond 1e6 times its initial value at t = " + fmt_double(s * cfg.dt));
    if (s % stride == 0) record(sample++, s * cfg.dt, z);
  }
}

}  // namespace

std::string to_string(Integrator integrator) {
  return integrator == Integrator::ExponentialMidpoint ? "exponential_midpoint" : "rk4";
}

Integrator parse_integrator(const std::string& text) {
  if (text == "exponential_midpoint") return Integrator::ExponentialMidpoint;
  if (text == "rk4") return Integrator::Rk4;
  throw Error(ErrorCode::ConfigInvalid, "unknown integrator '" + text + "'");
}

long long SimConfig::steps() const { return std::llround(t_final / dt); }

int SimConfig::stride() const {
  if (record_stride > 0) return record_stride;
  return static_cast<int>(std::max<long long>(1, steps() / 1000));
}

ModalPlant make_modal_plant(const EigenSystem& eigsys, const ShapeSet& shapes, int n_modes) {
  if (n_modes < 1 || n_modes > eigsys.K())
    throw Error(ErrorCode::CutoffExceedsComputedModes, "n_modes exceeds computed modes");
  ModalPlant p;
  p.lambdas = eigsys.lambdas.head(n_modes);
  p.Phi = shape_coupling(shapes, eigsys).leftCols(n_modes);
  p.mus = shapes.mus;
  return p;
}

Eigen::VectorXd expand_state(const EigenSystem& eigsys, const Eigen::VectorXd& w0, int n_modes) {
  const Eigen::VectorXd a = eigsys.coefficients(w0, n_modes);
  const double total = eigsys.norm_sq(w0);
  const double rest = eigsys.norm_sq(w0 - eigsys.phis.leftCols(n_modes) * a);
  if (rest > 1e-8 * total)
    throw Error(ErrorCode::RemainderTooLarge, "initial state has energy outside the simulated modes");
  return a;
}

LinearController make_linear_controller(const FeedbackLaw& law, const CLFParams& params, const GainDesign& design) {
  LinearController c;
  c.kernel_coeffs = law.kernel_coeffs;
  c.y_gains = law.y_gains;
  c.R = design.R;
  c.gamma = params.gamma;
  c.omegas = params.omegas;
  return c;
}

Trajectory simulate_linear(const ModalPlant& plant, const LinearController& ctrl, const Eigen::VectorXd& a0,
                           const Eigen::VectorXd& y0, const SimConfig& cfg) {
  check_config(cfg, plant);
  const int n = cfg.n_modes;
  const int j = static_cast<int>(plant.mus.size());
  const int M = static_cast<int>(ctrl.kernel_coeffs.cols());
  const int N = static_cast<int>(ctrl.R.rows());
  if (a0.size() != n || y0.size() != j) throw Error(ErrorCode::DimensionMismatch, "initial state size mismatch");
  if (!ctrl.open_loop && M >= n) throw Error(ErrorCode::InvalidArgument, "n_modes must exceed the kernel truncation M");

  auto control = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    if (ctrl.open_loop) return Eigen::VectorXd::Zero(j);
    return ctrl.kernel_coeffs * z.head(M) - ctrl.y_gains.cwiseProduct(z.tail(j));
  };
  Eigen::VectorXd D(n + j);
  D << -plant.lambdas, -plant.mus;
  const Rhs G = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    const Eigen::VectorXd v = control(z);
    Eigen::VectorXd out(n + j);
    out << -plant.Phi.transpose() * v, v;
    return out;
  };

  Trajectory tr;
  allocate(tr, static_cast<int>(cfg.steps() / cfg.stride()) + 1, n, j);
  Eigen::VectorXd z(n + j);
  z << a0, y0;
  integrate(D, G, z, cfg, [&](int k, double t, const Eigen::VectorXd& s) {
    const Eigen::VectorXd a = s.head(n), y = s.tail(j);
    const Eigen::VectorXd v = control(s);
    tr.times[k] = t;
    tr.w_coeffs.row(k) = a.transpose();
    tr.y.row(k) = y.transpose();
    tr.norm_w[k] = a.norm();
    tr.norm_y[k] = y.norm();
    tr.U[k] = y.sum();
    tr.v.row(k) = v.transpose();
    tr.vbar.row(k) = (v - plant.mus.cwiseProduct(y)).transpose();
    if (ctrl.R.size() > 0) {
      tr.V[k] = 0.5 * a.head(N).dot(ctrl.R * a.head(N)) + 0.5 * ctrl.gamma * a.tail(n - N).squaredNorm() +
                0.5 * ctrl.omegas.dot(y.cwiseAbs2());
    }
  });
  return tr;
}

SemilinearPlant make_semilinear_plant(const EigenSystem& eigsys, const ShapeSet& shapes, int n_modes) {
  SemilinearPlant p;
  p.modal = make_modal_plant(eigsys, shapes, n_modes);
  p.phis = eigsys.phis.leftCols(n_modes);
  p.varphis = shapes.varphis;
  p.rweights = eigsys.rweights;
  p.shape_gram = shapes.varphis.transpose() * eigsys.rweights.asDiagonal() * shapes.varphis;
  return p;
}

Trajectory simulate_semilinear(const SemilinearPlant& plant, const SemilinearDesign& design,
                               const SemilinearCLF& clf, const NonlinearitySpec& F, const Eigen::VectorXd& a0,
                               const Eigen::VectorXd& y0, const SimConfig& cfg, bool certified) {
  check_config(cfg, plant.modal);
  const int n = cfg.n_modes;
  const int N = design.N;
  const int j = static_cast<int>(plant.modal.mus.size());
  if (j != N) throw Error(ErrorCode::DimensionMismatch, "semilinear controllers need j = N");
  if (n <= N) throw Error(ErrorCode::InvalidArgument, "n_modes must exceed N");
  if (a0.size() != n || y0.size() != j) throw Error(ErrorCode::DimensionMismatch, "initial state size mismatch");
  const int evals_per_step = cfg.integrator == Integrator::ExponentialMidpoint ? 2 : 4;
  if (cfg.steps() * evals_per_step > cfg.quadrature_budget)
    throw Error(ErrorCode::QuadratureBudgetExceeded,
                "run needs " + std::to_string(cfg.steps() * evals_per_step) + " projections of F(u)");

  auto project_F = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    const Eigen::VectorXd u = plant.phis * z.head(n) + plant.varphis * z.tail(j);
    return plant.phis.transpose() * plant.rweights.cwiseProduct(F.apply(u));
  };
  auto control = [&](const Eigen::VectorXd& z, const Eigen::VectorXd& f) -> Eigen::VectorXd {
    return design.kind == ControllerKind::Nonlinear ? eval_nonlinear_controller(design, z.head(n), f)
                                                    : eval_linear_controller(design, z.head(n));
  };
  Eigen::VectorXd D(n + j);
  D << -plant.modal.lambdas, -plant.modal.mus;
  const Rhs G = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    const Eigen::VectorXd f = project_F(z);
    const Eigen::VectorXd v = control(z, f);
    Eigen::VectorXd out(n + j);
    out << -plant.modal.Phi.transpose() * v + f, v;
    return out;
  };

  Trajectory tr;
  tr.certified = certified;
  allocate(tr, static_cast<int>(cfg.steps() / cfg.stride()) + 1, n, j);
  Eigen::VectorXd z(n + j);
  z << a0, y0;
  integrate(D, G, z, cfg, [&](int k, double t, const Eigen::VectorXd& s) {
    const Eigen::VectorXd a = s.head(n), y = s.tail(j);
    const Eigen::VectorXd v = control(s, project_F(s));
    tr.times[k] = t;
    tr.w_coeffs.row(k) = a.transpose();
    tr.y.row(k) = y.transpose();
    tr.norm_w[k] = a.norm();
    tr.norm_y[k] = y.norm();
    tr.U[k] = y.sum();
    tr.v.row(k) = v.transpose();
    tr.vbar.row(k) = (v - plant.modal.mus.cwiseProduct(y)).transpose();
    tr.V[k] = 0.5 * clf.R * a.head(N).squaredNorm() + 0.5 * clf.gamma * a.tail(n - N).squaredNorm() +
              0.5 * clf.omegas.dot(y.cwiseAbs2());

    // ||u||^2 = ||w||^2 + 2 sum <varphi_i, w> y_i + y^T Gram y
    const Eigen::VectorXd u = plant.phis * a + plant.varphis * y;
    const double direct = (plant.rweights.array() * u.array().square()).sum();
    const double modal = a.squaredNorm() + 2.0 * y.dot(plant.modal.Phi * a) + y.dot(plant.shape_gram * y);
    tr.energy_identity_error =
        std::max(tr.energy_identity_error, std::abs(direct - modal) / std::max(direct, 1e-300));
  });
  return tr;
}

DecayFit fit_decay_rate(const std::vector<double>& times, const Eigen::VectorXd& norms) {
  const int n = static_cast<int>(times.size());
  if (n < 20 || norms.size() != n)
    throw Error(ErrorCode::DegenerateTrajectory, "need at least 20 samples to fit a decay rate");
  if (!(norms.array() > 0.0).any()) throw Error(ErrorCode::DegenerateTrajectory, "trajectory is identically zero");
  const int first = n / 2;
  const int m = n - first;
  double st = 0.0, sl = 0.0;
  std::vector<double> logs(m);
  for (int k = 0; k < m; ++k) {
    logs[k] = std::log(std::max(norms[first + k], 1e-300));
    st += times[first + k];
    sl += logs[k];
  }
  st /= m;
  sl /= m;
  double stt = 0.0, stl = 0.0, sll = 0.0;
  for (int k = 0; k < m; ++k) {
    const double dt = times[first + k] - st, dl = logs[k] - sl;
    stt += dt * dt;
    stl += dt * dl;
    sll += dl * dl;
  }
  if (!(stt > 0.0)) throw Error(ErrorCode::DegenerateTrajectory, "fit window has no time extent");
  DecayFit fit;
  const double slope = stl / stt;
  fit.sigma = -slope;
  fit.K = std::exp(sl - slope * st);
  fit.r2 = sll > 0.0 ? std::min(1.0, (stl * stl) / (stt * sll)) : 1.0;
  return fit;
}

DecayFit fit_decay_rate(const Trajectory& traj) { return fit_decay_rate(traj.times, traj.norm_w + traj.norm_y); }

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, int N) {
  const int j = static_cast<int>(traj.y.cols());
  const int k = std::min<int>({8, N, static_cast<int>(traj.w_coeffs.cols())});
  os << "t,norm_w,norm_y,V,U";
  for (int i = 1; i <= j; ++i) os << ",v_" << i;
  for (int i = 1; i <= j; ++i) os << ",vbar_" << i;
  for (int i = 1; i <= k; ++i) os << ",w_" << i;
  os << '\n';
  for (int s = 0; s < traj.samples(); ++s) {
    os << fmt_double(traj.times[s]) << ',' << fmt_double(traj.norm_w[s]) << ',' << fmt_double(traj.norm_y[s]) << ','
       << fmt_double(traj.V[s]) << ',' << fmt_double(traj.U[s]);
    for (int i = 0; i < j; ++i) os << ',' << fmt_double(traj.v(s, i));
    for (int i = 0; i < j; ++i) os << ',' << fmt_double(traj.vbar(s, i));
    for (int i = 0; i < k; ++i) os << ',' << fmt_double(traj.w_coeffs(s, i));
    os << '\n';
  }
}

}  // namespace clfpde

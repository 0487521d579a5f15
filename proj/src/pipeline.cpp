#include "clfpde/pipeline.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "clfpde/error.hpp"
#include "format.hpp"

namespace clfpde {

namespace {

void fill_problem(DesignArtifact& art, const RunConfig& c) {
  art.p = c.problem.p.to_string();
  art.q = c.problem.q.to_string();
  art.r = c.problem.r.to_string();
  art.b1 = c.problem.b1;
  art.b2 = c.problem.b2;
  art.a1 = c.problem.a1;
  art.a2 = c.problem.a2;
  art.grid_points = c.grid_points;
  art.N = c.N;
  art.j = c.j();
}

void design_semilinear(DesignBundle& b) {
  const SemilinearConfig& sc = *b.config.semilinear;
  DesignArtifact& art = b.artifact;
  b.semi = make_semilinear_design(b.model, b.shapes, b.gains.sigma, sc.controller);
  b.has_semilinear = true;
  art.has_semilinear = true;
  art.F = sc.F;
  art.controller = to_string(sc.controller);
  art.require_certificate = sc.require_certificate;
  art.g = b.semi.g;
  art.growth_ratio = check_growth(sc.F).worst_ratio;

  const KappaSearch ks = find_kappa(b.semi, sc.F.Lbar, sc.controller);
  art.kappa_found = ks.found;
  art.kappa_refined = ks.refined;
  art.kappa = ks.kappa;
  if (ks.refined && ks.found)
    b.notes.push_back("kappa located by refinement between search grid points: " + fmt_double(ks.kappa));
  if (!ks.found) {
    b.notes.push_back("no kappa satisfies the stability conditions at Lbar = " + fmt_double(sc.F.Lbar) +
                      "; simulation runs are flagged uncertified");
    return;
  }
  try {
    if (sc.controller == ControllerKind::Nonlinear) {
      const NonlinearParams p = select_params_nonlinear(b.semi, sc.F.Lbar, ks.kappa);
      art.search_point = p.zeta;
      art.beta = p.beta;
      art.epsilon = p.epsilon;
      b.sclf = p.clf;
    } else {
      const LinearParams p = select_params_linear(b.semi, sc.F.Lbar, ks.kappa);
      art.search_point = p.a;
      art.beta = p.beta;
      art.epsilon = p.epsilon;
      b.sclf = p.clf;
      b.notes.push_back("dominating-controller parameters use epsilon = 0 in the omega and dissipation formulas");
    }
    art.params_found = true;
    art.sclf = b.sclf;
  } catch (const Error& e) {
    b.notes.push_back(e.what());
  }
}

}  // namespace

DesignBundle build_design(const RunConfig& config) {
  DesignBundle b;
  b.config = config;
  DesignArtifact& art = b.artifact;
  fill_problem(art, config);
  const int K = std::max(config.modes, config.sim.n_modes);
  art.modes = K;

  try {
    b.eigsys = eigensolve(config.problem, Grid::uniform(config.grid_points), K);
    art.lambdas = b.eigsys.lambdas;
    const AssumptionHReport H = check_assumption_H(b.eigsys, config.N);
    art.h_decay_exponent = H.decay_exponent;
    art.h_converging = H.converging;
    if (!H.note.empty()) b.notes.push_back(H.note);
    art.mus = Eigen::Map<const Eigen::VectorXd>(config.mus.data(), config.j());
    if (!H.pass()) {
      b.failure = "assumption_H: lambda_{N+1} = " + fmt_double(H.lambda_next) + " is not positive";
    } else if (!validate_mu_set(config.mus, b.eigsys).pass()) {
      b.failure = "mu set collides with the spectrum or is not positive";
    } else {
      b.shapes = build_shapes(config.problem, b.eigsys, config.mus);
      art.norms_sq = b.shapes.norms_sq;
      art.shape_gram = b.shapes.varphis.transpose() * b.eigsys.rweights.asDiagonal() * b.shapes.varphis;
      b.model = build_reduced_model(b.eigsys, b.shapes, config.N);
      art.B = b.model.B;
      art.B_closed.resize(config.N, config.j());
      for (int i = 0; i < config.j(); ++i)
        art.B_closed.col(i) = input_vector_closed_form(config.problem, b.eigsys, config.mus[i], config.N);

      b.gains = design_gains(b.model, config.sigma_targets, config.gain_mode);
      art.gain_mode = to_string(b.gains.mode);
      art.sigma_targets = b.gains.sigma_targets;
      art.sigma = b.gains.sigma;
      art.K = b.gains.K;
      art.R = b.gains.R;

      b.clf = select_clf_params(b.gains, b.shapes, b.eigsys, config.Ls);
      b.law = build_feedback_kernels(b.gains, b.clf, b.shapes, b.eigsys);
      art.omegas = b.clf.omegas;
      art.gamma = b.clf.gamma;
      art.M = b.clf.M;
      art.Ls = b.clf.Ls;
      art.tail_bounds = b.clf.tail_bounds;
      art.kernel_coeffs = b.law.kernel_coeffs;
      art.y_gains = b.law.y_gains;

      if (config.semilinear) design_semilinear(b);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    b.failure = e.what();
  }
  art.verdicts = certify(art);
  if (!b.failure.empty()) {
    art.verdicts.push_back(Verdict{"design_complete", false, -1.0, true});
    b.notes.push_back("design stopped: " + b.failure);
  }
  return b;
}

Eigen::VectorXd initial_modes(const RunConfig& config, int n_modes) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n_modes);
  const int given = std::min<int>(n_modes, static_cast<int>(config.initial.w_modes.size()));
  for (int n = 0; n < given; ++n) a[n] = config.initial.w_modes[n];
  // Raw 64-bit draws keep the sequence identical across standard libraries.
  std::mt19937_64 rng(config.seed);
  for (int n = 0; n < std::min(n_modes, config.initial.random_modes); ++n) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    a[n] += u / ((n + 1.0) * (n + 1.0));
  }
  return a;
}

double default_t_final(const DesignBundle& b) {
  const double rate = b.config.open_loop ? std::abs(b.eigsys.lambdas[0]) : b.gains.sigma;
  const double t = rate > 0.0 ? 5.0 / rate : 10.0;
  return std::max(t, 100.0 * b.config.sim.dt);
}

SimulationResult run_simulation(const DesignBundle& b) {
  if (!b.complete()) throw Error(ErrorCode::InvalidArgument, "cannot simulate an incomplete design");
  const RunConfig& c = b.config;
  SimConfig cfg = c.sim;
  if (!c.t_final_given) cfg.t_final = default_t_final(b);
  const int n = cfg.n_modes;
  const Eigen::VectorXd a0 = initial_modes(c, n);
  const Eigen::VectorXd y0 = c.initial.y.empty()
                                 ? Eigen::VectorXd::Zero(c.j())
                                 : Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(c.initial.y.data(), c.j()));

  SimulationResult out;
  if (b.has_semilinear) {
    if (n <= c.N) throw Error(ErrorCode::ConfigInvalid, "simulation modes must exceed N");
    const SemilinearPlant plant = make_semilinear_plant(b.eigsys, b.shapes, n);
    out.semilinear = true;
    out.certified = b.artifact.semilinear_certified();
    out.traj = simulate_semilinear(plant, b.semi, b.sclf, c.semilinear->F, a0, y0, cfg, out.certified);
  } else {
    if (!c.open_loop && n <= b.clf.M)
      throw Error(ErrorCode::ConfigInvalid, "simulation modes must exceed the kernel truncation M = " +
                                                std::to_string(b.clf.M));
    const ModalPlant plant = make_modal_plant(b.eigsys, b.shapes, n);
    LinearController ctrl = make_linear_controller(b.law, b.clf, b.gains);
    ctrl.open_loop = c.open_loop;
    out.certified = b.artifact.certified() && !c.open_loop;
    out.traj = simulate_linear(plant, ctrl, a0, y0, cfg);
    out.traj.certified = out.certified;
  }
  try {
    out.fit = fit_decay_rate(out.traj);
    out.fit_ok = true;
  } catch (const Error&) {
    out.fit_ok = false;
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  os << text;
  if (!os) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir + "': " + ec.message());
}

}  // namespace

std::string controller_table_csv(const SemilinearDesign& d) {
  std::ostringstream os;
  os << "i,m,g,sigma_minus_lambda,w_gain,F_gain\n";
  for (int i = 0; i < d.N; ++i)
    for (int m = 0; m < d.N; ++m) {
      const double s = d.sigma - d.lambdas[m];
      os << i + 1 << ',' << m + 1 << ',' << fmt_double(d.g(i, m)) << ',' << fmt_double(s) << ','
         << fmt_double(d.g(i, m) * s) << ',' << fmt_double(d.g(i, m)) << '\n';
    }
  return os.str();
}

void write_design_outputs(const DesignBundle& b, const std::string& dir) {
  ensure_dir(dir);
  write_text(join_path(dir, "design.txt"), write_artifact(b.artifact));
  write_text(join_path(dir, "certification.txt"), certification_report(b.artifact, b.notes));

  std::ostringstream eig;
  eig << "n,lambda\n";
  for (int n = 0; n < b.artifact.lambdas.size(); ++n) eig << n + 1 << ',' << fmt_double(b.artifact.lambdas[n]) << '\n';
  write_text(join_path(dir, "eigen.csv"), eig.str());

  if (!b.complete()) return;
  std::ostringstream ker;
  ker << 'x';
  for (int i = 1; i <= b.law.kernels.cols(); ++i) ker << ",k_" << i;
  ker << '\n';
  for (int r = 0; r < b.law.kernels.rows(); ++r) {
    ker << fmt_double(b.eigsys.grid.x[r]);
    for (int i = 0; i < b.law.kernels.cols(); ++i) ker << ',' << fmt_double(b.law.kernels(r, i));
    ker << '\n';
  }
  write_text(join_path(dir, "kernels.csv"), ker.str());
  if (b.has_semilinear) write_text(join_path(dir, "controller_table.csv"), controller_table_csv(b.semi));
}

void write_simulation_outputs(const DesignBundle& b, const SimulationResult& sim, const std::string& dir) {
  ensure_dir(dir);
  std::ostringstream csv;
  write_trajectory_csv(csv, sim.traj, b.config.N);
  write_text(join_path(dir, "trajectory.csv"), csv.str());

  std::ostringstream s;
  s << "kind = " << (sim.semilinear ? "semilinear" : (b.config.open_loop ? "open_loop" : "linear")) << '\n';
  s << "status = " << (sim.certified ? "certified" : "uncertified") << '\n';
  s << "samples = " << sim.traj.samples() << '\n';
  if (sim.fit_ok) {
    s << "fit_K = " << fmt_double(sim.fit.K) << '\n';
    s << "fit_sigma = " << fmt_double(sim.fit.sigma) << '\n';
    s << "fit_r2 = " << fmt_double(sim.fit.r2) << '\n';
  } else {
    s << "fit = unavailable\n";
  }
  if (sim.semilinear) s << "energy_identity_error = " << fmt_double(sim.traj.energy_identity_error) << '\n';
  write_text(join_path(dir, "simulation.txt"), s.str());
}

namespace {

ReproRow row(const std::string& q, double ref, double got) {
  const double err = std::abs(got - ref) / std::max(std::abs(ref), 1e-300);
  return ReproRow{q, ref, got, err};
}

RunConfig benchmark_config(double q, std::vector<double> mus, int N, double L) {
  RunConfig c;
  c.problem.p = Coefficient(1.0);
  c.problem.q = Coefficient(q);
  c.problem.r = Coefficient(1.0);
  c.N = N;
  c.mus = std::move(mus);
  c.sigma_targets = Eigen::VectorXd::Constant(N, 1.0);
  c.gain_mode = GainMode::ClosedForm;
  c.Ls = Eigen::VectorXd::Constant(c.j(), L);
  return c;
}

std::vector<ReproRow> reproduce_reaction_diffusion() {
  const double pi = M_PI, p = 1.0, q = -2.0 * pi * pi, sigma = 1.0, L = 1.0;
  const DesignBundle b = build_design(benchmark_config(q, {25.0 * pi * pi / 4.0 + q}, 1, L));
  if (!b.complete()) throw Error(ErrorCode::InvalidArgument, "benchmark design failed: " + b.failure);
  std::vector<ReproRow> rows;
  for (int n = 1; n <= 5; ++n)
    rows.push_back(row("lambda_" + std::to_string(n), p * n * n * pi * pi + q, b.eigsys.lambdas[n - 1]));
  rows.push_back(row("B", 4.0 * std::sqrt(2.0) / (21.0 * pi), b.model.B(0, 0)));
  const double K = -(21.0 * pi / (4.0 * std::sqrt(2.0))) * (sigma - p * pi * pi - q);
  rows.push_back(row("K", K, b.gains.K(0, 0)));
  const Eigen::MatrixXd Phi = shape_coupling(b.shapes, b.eigsys);
  for (int n = 1; n <= 4; ++n)
    rows.push_back(row("<phi_" + std::to_string(n) + ", varphi>",
                       4.0 * std::sqrt(2.0) * std::pow(-1.0, n) * n / (pi * (25.0 - 4.0 * n * n)), Phi(0, n - 1)));
  const double s = sigma - p * pi * pi - q;
  rows.push_back(row("omega (half the admissible maximum)",
                     0.5 * 4.0 * sigma * (25.0 * p * pi * pi + 4.0 * q) / (441.0 * pi * pi * s * s), b.clf.omegas[0]));
  rows.push_back(row("gamma (half the admissible maximum)",
                     0.5 * 32.0 * sigma * (4.0 * p * pi * pi + q) / (441.0 * pi * pi * s * s), b.clf.gamma));

  const double gamma = b.clf.gamma;
  const int M = b.clf.M;
  for (const double x : {0.25, 0.5, 0.75}) {
    double k = -(21.0 * pi / 4.0 * s + 8.0 * L / (21.0 * pi)) * std::sin(pi * x);
    for (int n = 2; n <= M; ++n)
      k += 8.0 * gamma * L / pi * std::pow(-1.0, n) * n / (25.0 - 4.0 * n * n) * std::sin(n * pi * x);
    const int idx = static_cast<int>(std::lround(x * (b.eigsys.grid.n_points - 1)));
    std::ostringstream name;
    name << "kernel k(" << x << "), M = " << M;
    rows.push_back(row(name.str(), k, b.law.kernels(idx, 0)));
  }
  return rows;
}

std::vector<ReproRow> reproduce_semilinear() {
  const double pi = M_PI, sigma = 1.0;
  RunConfig c = benchmark_config(-5.0 * pi * pi, {5.0 * pi * pi / 4.0, 29.0 * pi * pi / 4.0}, 2, 0.0);
  SemilinearConfig sc;
  sc.F.kind = NonlinearitySpec::Kind::SineType;
  sc.F.scale = 0.29;
  sc.F.Lbar = 0.29;
  c.semilinear = sc;
  const DesignBundle b = build_design(c);
  if (!b.complete()) throw Error(ErrorCode::InvalidArgument, "benchmark design failed: " + b.failure);
  std::vector<ReproRow> rows;
  for (int n = 1; n <= 8; ++n)
    rows.push_back(row("lambda_" + std::to_string(n), (n * n - 5.0) * pi * pi, b.eigsys.lambdas[n - 1]));

  const double sb = 4.0 * std::sqrt(2.0) / (3.0 * pi);
  const double Bref[2][2] = {{sb / 7.0, sb / 15.0}, {-2.0 * sb / 3.0, -2.0 * sb / 11.0}};
  const double sg = pi / (256.0 * std::sqrt(2.0));
  const double gref[2][2] = {{1890.0 * sg, 693.0 * sg}, {-6930.0 * sg, -1485.0 * sg}};
  for (int n = 0; n < 2; ++n)
    for (int i = 0; i < 2; ++i)
      rows.push_back(row("B(" + std::to_string(n + 1) + "," + std::to_string(i + 1) + ")", Bref[n][i], b.model.B(n, i)));
  for (int i = 0; i < 2; ++i)
    for (int m = 0; m < 2; ++m)
      rows.push_back(row("g(" + std::to_string(i + 1) + "," + std::to_string(m + 1) + ")", gref[i][m], b.semi.g(i, m)));

  // Controller written in sine coefficients c_m = <sin(m pi x), w> = a_m / sqrt(2).
  const double c1 = 63.0 * pi / 256.0, c2 = -495.0 * pi / 256.0;
  const double wref[2][2] = {{c1 * 30.0, c1 * 11.0}, {c2 * 14.0, c2 * 3.0}};
  const double shift[2] = {sigma + 4.0 * pi * pi, sigma + pi * pi};
  for (int i = 0; i < 2; ++i)
    for (int m = 0; m < 2; ++m) {
      const std::string tag = "(" + std::to_string(i + 1) + "," + std::to_string(m + 1) + ")";
      rows.push_back(row("controller c-gain" + tag, wref[i][m] * shift[m],
                         std::sqrt(2.0) * b.semi.g(i, m) * (sigma - b.semi.lambdas[m])));
      rows.push_back(row("controller f-gain" + tag, wref[i][m], std::sqrt(2.0) * b.semi.g(i, m)));
    }
  const Eigen::MatrixXd Phi = shape_coupling(b.shapes, b.eigsys);
  const double den[2] = {25.0, 49.0};
  for (int i = 0; i < 2; ++i)
    for (int n = 1; n <= 2; ++n)
      rows.push_back(row("<sin(" + std::to_string(n) + " pi x), varphi_" + std::to_string(i + 1) + ">",
                         4.0 * std::pow(-1.0, n) * n / ((den[i] - 4.0 * n * n) * pi), Phi(i, n - 1) / std::sqrt(2.0)));
  rows.push_back(row("Lbar_max", 0.299, growth_bound_limit(growth_inputs(b.semi)).Lbar_max));
  return rows;
}

}  // namespace

std::vector<ReproRow> reproduce(const std::string& id) {
  if (id == "2.4") return reproduce_reaction_diffusion();
  if (id == "3.3") return reproduce_semilinear();
  throw Error(ErrorCode::InvalidArgument, "unknown example id '" + id + "' (expected 2.4 or 3.3)");
}

std::string format_reproduction(const std::string& id, const std::vector<ReproRow>& rows) {
  std::ostringstream os;
  os << "benchmark " << id << '\n';
  os << std::left << std::setw(40) << "quantity" << std::setw(26) << "reference" << std::setw(26) << "computed"
     << "rel_err\n";
  for (const auto& r : rows) {
    os << std::left << std::setw(40) << r.quantity << std::setw(26) << fmt_double(r.reference) << std::setw(26)
       << fmt_double(r.computed);
    std::ostringstream e;
    e << std::scientific << std::setprecision(3) << r.rel_err;
    os << e.str() << '\n';
  }
  return os.str();
}

void export_plotdata(std::istream& in, std::ostream& out, int stride) {
  std::string header;
  if (!std::getline(in, header) || trim(header).empty()) throw Error(ErrorCode::MalformedCsv, "missing header");
  const std::size_t columns = split(header, ',').size();
  std::vector<std::string> lines;
  std::string line;
  double last_t = -std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    const std::string where = "row " + std::to_string(lines.size() + 1);
    if (fields.size() != columns) throw Error(ErrorCode::MalformedCsv, where + ": wrong field count");
    double t = 0.0;
    try {
      for (std::size_t k = 0; k < fields.size(); ++k) {
        const double v = parse_double(fields[k]);
        if (k == 0) t = v;
      }
    } catch (const Error&) {
      throw Error(ErrorCode::MalformedCsv, where + ": non-numeric field");
    }
    if (t < last_t) throw Error(ErrorCode::MalformedCsv, where + ": time column decreases");
    last_t = t;
    lines.push_back(line);
  }
  const int n = static_cast<int>(lines.size());
  if (stride <= 0) stride = std::max(1, n / 1000);
  out << header << '\n';
  for (int k = 0; k < n; ++k)
    if (k % stride == 0 || k == n - 1) out << lines[k] << '\n';
}

}  // namespace clfpde

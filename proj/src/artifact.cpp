#include "clfpde/artifact.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "clfpde/error.hpp"
#include "clfpde/reduced.hpp"
#include "clfpde/shapes.hpp"
#include "format.hpp"
#include "keyvalue.hpp"

namespace clfpde {

namespace {

Verdict make(const std::string& name, double margin, bool required = true) {
  return Verdict{name, margin >= 0.0, margin, required};
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

ReducedModel model_from(const DesignArtifact& art) {
  ReducedModel m;
  m.N = art.N;
  m.j = art.j;
  m.C = -art.lambdas.head(art.N).asDiagonal().toDenseMatrix();
  m.B = art.B;
  m.lambda_next = art.lambdas[art.N];
  return m;
}

void semilinear_verdicts(const DesignArtifact& art, std::vector<Verdict>& out) {
  const bool req = art.require_certificate;
  double offdiag = 0.0;
  for (int i = 0; i < art.j; ++i)
    for (int k = 0; k < art.j; ++k)
      if (i != k)
        offdiag = std::max(offdiag, std::abs(art.shape_gram(i, k)) /
                                        std::sqrt(art.shape_gram(i, i) * art.shape_gram(k, k)));
  out.push_back(make("shape_orthogonality", 1e-6 - offdiag, req));

  const SemilinearDesign d = semilinear_design_from(art);
  const double ginv = max_abs(d.g * d.B + Eigen::MatrixXd::Identity(d.N, d.N));
  out.push_back(make("g_inverse", 1e-10 - ginv, req));

  const GrowthCheck growth = check_growth(art.F);
  out.push_back(make("growth_declared", growth.f_at_zero == 0.0 ? art.F.Lbar - growth.worst_ratio : -1.0, req));

  if (!art.kappa_found) {
    out.push_back(Verdict{"stability_conditions", false, -1.0, req});
    out.push_back(Verdict{"dissipation_rate", false, 0.0, req});
    return;
  }
  double theta = 0.0;
  if (d.kind == ControllerKind::Nonlinear) {
    const NonlinearConditions c = check_nonlinear_conditions(d, art.F.Lbar, art.kappa);
    out.push_back(Verdict{"stability_conditions", c.pass(), c.normalized, req});
    if (c.pass()) {
      try {
        theta = select_params_nonlinear(d, art.F.Lbar, art.kappa).clf.theta;
      } catch (const Error&) {
      }
    }
  } else {
    const LinearConditions c = check_linear_conditions(d, art.F.Lbar, art.kappa);
    out.push_back(Verdict{"stability_conditions", c.pass(), c.normalized, req});
    if (c.pass()) {
      try {
        theta = select_params_linear(d, art.F.Lbar, art.kappa).clf.theta;
      } catch (const Error&) {
      }
    }
  }
  out.push_back(Verdict{"dissipation_rate", theta > 0.0, theta, req});
}

}  // namespace

bool DesignArtifact::certified() const {
  if (verdicts.empty()) return false;
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass || !v.required; });
}

bool DesignArtifact::semilinear_certified() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

SemilinearDesign semilinear_design_from(const DesignArtifact& art) {
  SemilinearDesign d;
  d.N = art.N;
  d.g = art.g;
  d.B = art.B;
  d.sigma = art.sigma;
  d.lambdas = art.lambdas.head(art.N + 1);
  d.mus = art.mus;
  d.norms_sq = art.norms_sq;
  d.kind = parse_controller_kind(art.controller);
  return d;
}

std::vector<Verdict> certify(const DesignArtifact& art) {
  std::vector<Verdict> out;
  if (art.lambdas.size() < art.N + 1) {
    out.push_back(Verdict{"assumption_H", false, -1.0, true});
    return out;
  }
  out.push_back(Verdict{"assumption_H", art.lambdas[art.N] > 0.0, art.lambdas[art.N], true});
  if (!(art.lambdas[art.N] > 0.0)) return out;

  for (int i = 0; i < art.j; ++i) {
    const double mu = art.mus[i];
    double gap = std::numeric_limits<double>::infinity();
    for (int n = 0; n < art.lambdas.size(); ++n) gap = std::min(gap, std::abs(mu - art.lambdas[n]));
    const double margin = mu > 0.0 ? gap / (1.0 + std::abs(mu)) - 1e-6 : mu;
    out.push_back(make("mu_" + std::to_string(i + 1), margin));
  }

  if (art.B.size() == 0) return out;
  const ReducedModel model = model_from(art);
  const ControllabilityReport ctrl = check_controllability(model);
  const double smax = ctrl.singular_values.size() ? ctrl.singular_values[0] : 0.0;
  const double smin = ctrl.singular_values.size() ? ctrl.singular_values[ctrl.singular_values.size() - 1] : 0.0;
  out.push_back(make("controllability", smax > 0.0 ? smin / smax - 1e-10 : -1.0));
  out.push_back(make("input_matrix_oracle", 1e-6 - max_abs(art.B - art.B_closed) / std::max(max_abs(art.B), 1e-300)));

  if (art.K.size() == 0) return out;
  GainDesign gd;
  gd.K = art.K;
  gd.R = art.R;
  gd.sigma = art.sigma;
  out.push_back(make("gain_inequality", 1e-9 - gain_inequality_residual(model, gd)));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(art.R, Eigen::EigenvaluesOnly);
  out.push_back(make("R_positive", es.eigenvalues().minCoeff()));

  if (art.omegas.size() == 0) return out;
  const double lambda_next = art.lambdas[art.N];
  double weighted = 0.0;
  for (int i = 0; i < art.j; ++i) {
    const double k2 = art.K.row(i).squaredNorm();
    weighted += art.norms_sq[i] * k2;
    out.push_back(make("omega_" + std::to_string(i + 1), art.sigma * art.mus[i] - 2.0 * art.j * art.omegas[i] * k2));
  }
  out.push_back(make("gamma", art.sigma * lambda_next - 2.0 * art.j * art.gamma * weighted));
  const double tail = art.Ls.dot(art.tail_bounds);
  if (art.kernel_coeffs.size() == 0) return out;
  const double m_margin = art.M < art.lambdas.size()
                              ? 4.0 * (art.lambdas[art.M] - lambda_next) - art.gamma * tail
                              : -1.0;
  out.push_back(make("kernel_truncation", m_margin));

  if (art.has_semilinear) semilinear_verdicts(art, out);
  return out;
}

std::string write_artifact(const DesignArtifact& art) {
  KvDoc doc;
  doc.set("toolkit", "version", art.version);
  doc.set("problem", "p", art.p);
  doc.set("problem", "q", art.q);
  doc.set("problem", "r", art.r);
  doc.set("problem", "b1", fmt_double(art.b1));
  doc.set("problem", "b2", fmt_double(art.b2));
  doc.set("problem", "a1", fmt_double(art.a1));
  doc.set("problem", "a2", fmt_double(art.a2));
  doc.set("grid", "points", std::to_string(art.grid_points));
  doc.set("grid", "modes", std::to_string(art.modes));
  doc.set("eigen", "lambdas", fmt_vector(art.lambdas));
  doc.set("eigen", "h_decay_exponent", fmt_double(art.h_decay_exponent));
  doc.set("eigen", "h_converging", art.h_converging ? "true" : "false");
  doc.set("shapes", "mus", fmt_vector(art.mus));
  doc.set("shapes", "norms_sq", fmt_vector(art.norms_sq));
  doc.set("shapes", "gram", fmt_matrix(art.shape_gram));
  doc.set("reduced", "N", std::to_string(art.N));
  doc.set("reduced", "j", std::to_string(art.j));
  doc.set("reduced", "B", fmt_matrix(art.B));
  doc.set("reduced", "B_closed", fmt_matrix(art.B_closed));
  doc.set("gains", "mode", art.gain_mode);
  doc.set("gains", "sigma_targets", fmt_vector(art.sigma_targets));
  doc.set("gains", "sigma", fmt_double(art.sigma));
  doc.set("gains", "K", fmt_matrix(art.K));
  doc.set("gains", "R", fmt_matrix(art.R));
  doc.set("clf", "omegas", fmt_vector(art.omegas));
  doc.set("clf", "gamma", fmt_double(art.gamma));
  doc.set("clf", "M", std::to_string(art.M));
  doc.set("clf", "L", fmt_vector(art.Ls));
  doc.set("clf", "tail_bounds", fmt_vector(art.tail_bounds));
  doc.set("kernels", "coeffs", fmt_matrix(art.kernel_coeffs));
  doc.set("kernels", "y_gains", fmt_vector(art.y_gains));
  if (art.has_semilinear) {
    doc.set("semilinear", "nonlinearity", to_string(art.F.kind));
    doc.set("semilinear", "scale", fmt_double(art.F.scale));
    doc.set("semilinear", "Lbar", fmt_double(art.F.Lbar));
    doc.set("semilinear", "table_s", join_doubles(art.F.table_s));
    doc.set("semilinear", "table_f", join_doubles(art.F.table_f));
    doc.set("semilinear", "growth_ratio", fmt_double(art.growth_ratio));
    doc.set("semilinear", "controller", art.controller);
    doc.set("semilinear", "require_certificate", art.require_certificate ? "true" : "false");
    doc.set("semilinear", "g", fmt_matrix(art.g));
    doc.set("semilinear", "kappa_found", art.kappa_found ? "true" : "false");
    doc.set("semilinear", "kappa_refined", art.kappa_refined ? "true" : "false");
    doc.set("semilinear", "kappa", fmt_double(art.kappa));
    doc.set("semilinear", "params_found", art.params_found ? "true" : "false");
    doc.set("semilinear", "search_point", fmt_double(art.search_point));
    doc.set("semilinear", "beta", fmt_double(art.beta));
    doc.set("semilinear", "epsilon", fmt_double(art.epsilon));
    doc.set("semilinear", "R", fmt_double(art.sclf.R));
    doc.set("semilinear", "gamma", fmt_double(art.sclf.gamma));
    doc.set("semilinear", "omegas", fmt_vector(art.sclf.omegas));
    doc.set("semilinear", "theta", fmt_double(art.sclf.theta));
  }
  for (const auto& v : art.verdicts)
    doc.set("verdicts", v.name,
            std::string(v.pass ? "pass " : "fail ") + fmt_double(v.margin) + (v.required ? " required" : " advisory"));
  return doc.dump();
}

DesignArtifact read_artifact(const std::string& text) {
  const KvDoc doc = KvDoc::parse(text);
  DesignArtifact art;
  art.version = doc.get("toolkit", "version");
  art.p = doc.get("problem", "p");
  art.q = doc.get("problem", "q");
  art.r = doc.get("problem", "r");
  art.b1 = parse_double(doc.get("problem", "b1"));
  art.b2 = parse_double(doc.get("problem", "b2"));
  art.a1 = parse_double(doc.get("problem", "a1"));
  art.a2 = parse_double(doc.get("problem", "a2"));
  art.grid_points = static_cast<int>(parse_int(doc.get("grid", "points")));
  art.modes = static_cast<int>(parse_int(doc.get("grid", "modes")));
  art.lambdas = parse_vector(doc.get("eigen", "lambdas"));
  art.h_decay_exponent = parse_double(doc.get("eigen", "h_decay_exponent"));
  art.h_converging = parse_bool(doc.get("eigen", "h_converging"));
  art.N = static_cast<int>(parse_int(doc.get("reduced", "N")));
  art.j = static_cast<int>(parse_int(doc.get("reduced", "j")));
  if (doc.has_section("shapes")) {
    art.mus = parse_vector(doc.get("shapes", "mus"));
    art.norms_sq = parse_vector(doc.get("shapes", "norms_sq"));
    art.shape_gram = parse_matrix(doc.get("shapes", "gram"));
  }
  art.B = parse_matrix(doc.get_or("reduced", "B", ""));
  art.B_closed = parse_matrix(doc.get_or("reduced", "B_closed", ""));
  if (doc.has_section("gains")) {
    art.gain_mode = doc.get("gains", "mode");
    art.sigma_targets = parse_vector(doc.get("gains", "sigma_targets"));
    art.sigma = parse_double(doc.get("gains", "sigma"));
    art.K = parse_matrix(doc.get("gains", "K"));
    art.R = parse_matrix(doc.get("gains", "R"));
  }
  if (doc.has_section("clf")) {
    art.omegas = parse_vector(doc.get("clf", "omegas"));
    art.gamma = parse_double(doc.get("clf", "gamma"));
    art.M = static_cast<int>(parse_int(doc.get("clf", "M")));
    art.Ls = parse_vector(doc.get("clf", "L"));
    art.tail_bounds = parse_vector(doc.get("clf", "tail_bounds"));
    art.kernel_coeffs = parse_matrix(doc.get("kernels", "coeffs"));
    art.y_gains = parse_vector(doc.get("kernels", "y_gains"));
  }
  if (doc.has_section("semilinear")) {
    art.has_semilinear = true;
    art.F.kind = parse_nonlinearity_kind(doc.get("semilinear", "nonlinearity"));
    art.F.scale = parse_double(doc.get("semilinear", "scale"));
    art.F.Lbar = parse_double(doc.get("semilinear", "Lbar"));
    art.F.table_s = parse_doubles(doc.get("semilinear", "table_s"));
    art.F.table_f = parse_doubles(doc.get("semilinear", "table_f"));
    art.growth_ratio = parse_double(doc.get("semilinear", "growth_ratio"));
    art.controller = doc.get("semilinear", "controller");
    art.require_certificate = parse_bool(doc.get("semilinear", "require_certificate"));
    art.g = parse_matrix(doc.get("semilinear", "g"));
    art.kappa_found = parse_bool(doc.get("semilinear", "kappa_found"));
    art.kappa_refined = parse_bool(doc.get("semilinear", "kappa_refined"));
    art.kappa = parse_double(doc.get("semilinear", "kappa"));
    art.params_found = parse_bool(doc.get("semilinear", "params_found"));
    art.search_point = parse_double(doc.get("semilinear", "search_point"));
    art.beta = parse_double(doc.get("semilinear", "beta"));
    art.epsilon = parse_double(doc.get("semilinear", "epsilon"));
    art.sclf.R = parse_double(doc.get("semilinear", "R"));
    art.sclf.gamma = parse_double(doc.get("semilinear", "gamma"));
    art.sclf.omegas = parse_vector(doc.get("semilinear", "omegas"));
    art.sclf.theta = parse_double(doc.get("semilinear", "theta"));
  }
  for (const auto& name : doc.keys("verdicts")) {
    const auto parts = split(trim(doc.get("verdicts", name)), ' ');
    if (parts.size() != 3) throw Error(ErrorCode::ConfigInvalid, "malformed verdict '" + name + "'");
    art.verdicts.push_back(Verdict{name, parts[0] == "pass", parse_double(parts[1]), parts[2] == "required"});
  }
  return art;
}

DesignArtifact load_artifact(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return read_artifact(ss.str());
}

std::string certification_report(const DesignArtifact& art, const std::vector<std::string>& notes) {
  std::ostringstream os;
  os << art.version << " certification report\n";
  os << "N = " << art.N << ", j = " << art.j << "\n\n";
  for (const auto& v : art.verdicts) {
    os << (v.pass ? "PASS " : "FAIL ") << v.name << "  margin " << fmt_double(v.margin)
       << (v.required ? "" : "  (advisory)") << '\n';
  }
  os << "\noverall: " << (art.certified() ? "certified" : "NOT certified") << '\n';
  if (art.has_semilinear)
    os << "semilinear controller: " << (art.semilinear_certified() ? "certified" : "uncertified") << '\n';
  for (const auto& n : notes) os << "note: " << n << '\n';
  return os.str();
}

}  // namespace clfpde

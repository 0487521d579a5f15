#include "clfpde/config.hpp"

#include "clfpde/error.hpp"
#include "format.hpp"
#include "keyvalue.hpp"

namespace clfpde {

namespace {

int as_int(const std::string& text, const std::string& what) {
  const long v = parse_int(text);
  if (v < -2147483647L || v > 2147483647L) throw Error(ErrorCode::ConfigInvalid, what + " out of range");
  return static_cast<int>(v);
}

Eigen::VectorXd broadcast(const std::string& text, int n, const std::string& what) {
  Eigen::VectorXd v = parse_vector(text);
  if (v.size() == 1 && n > 1) return Eigen::VectorXd::Constant(n, v[0]);
  if (v.size() != n)
    throw Error(ErrorCode::ConfigInvalid, what + " needs 1 or " + std::to_string(n) + " values");
  return v;
}

RunConfig parse_doc(const KvDoc& doc) {
  for (const char* s : {"problem", "design"})
    if (!doc.has_section(s)) throw Error(ErrorCode::ConfigInvalid, std::string("missing section [") + s + "]");

  for (const auto& name : doc.section_names()) {
    bool known = false;
    for (const char* s : {"problem", "grid", "design", "semilinear", "simulation", "initial", "output"})
      known = known || name == s;
    if (!known) throw Error(ErrorCode::ConfigInvalid, "unknown section [" + name + "]");
  }

  RunConfig c;
  doc.expect_keys("problem", {"p", "q", "r", "b1", "b2", "a1", "a2"});
  const char* coeffs[3] = {"p", "q", "r"};
  const char* defaults[3] = {"1", "0", "1"};
  for (int k = 0; k < 3; ++k) c.problem_text[k] = doc.get_or("problem", coeffs[k], defaults[k]);
  c.problem.p = Coefficient::parse(c.problem_text[0]);
  c.problem.q = Coefficient::parse(c.problem_text[1]);
  c.problem.r = Coefficient::parse(c.problem_text[2]);
  c.problem.b1 = parse_double(doc.get_or("problem", "b1", "1"));
  c.problem.b2 = parse_double(doc.get_or("problem", "b2", "0"));
  c.problem.a1 = parse_double(doc.get_or("problem", "a1", "1"));
  c.problem.a2 = parse_double(doc.get_or("problem", "a2", "0"));

  doc.expect_keys("grid", {"points", "modes"});
  c.grid_points = as_int(doc.get_or("grid", "points", "2049"), "grid points");
  c.modes = as_int(doc.get_or("grid", "modes", "64"), "grid modes");

  doc.expect_keys("design", {"N", "mus", "sigma", "sigma_targets", "gain_mode", "L"});
  c.N = as_int(doc.get("design", "N"), "N");
  c.mus = parse_doubles(doc.get("design", "mus"));
  if (c.N < 1) throw Error(ErrorCode::ConfigInvalid, "N must be at least 1");
  if (c.mus.empty()) throw Error(ErrorCode::ConfigInvalid, "at least one mu is required (j >= 1)");
  if (const std::string* t = doc.find("design", "sigma_targets")) {
    c.sigma_targets = broadcast(*t, c.N, "sigma_targets");
  } else {
    c.sigma_targets = broadcast(doc.get_or("design", "sigma", "1"), c.N, "sigma");
  }
  c.gain_mode = parse_gain_mode(doc.get_or("design", "gain_mode", c.j() == c.N ? "closed_form" : "pole_placement"));
  c.Ls = broadcast(doc.get_or("design", "L", "0"), c.j(), "L");

  if (doc.has_section("semilinear")) {
    doc.expect_keys("semilinear",
                    {"nonlinearity", "scale", "Lbar", "controller", "require_certificate", "table_s", "table_f"});
    SemilinearConfig s;
    s.F.kind = parse_nonlinearity_kind(doc.get("semilinear", "nonlinearity"));
    s.F.scale = parse_double(doc.get_or("semilinear", "scale", "0"));
    s.F.Lbar = parse_double(doc.get_or("semilinear", "Lbar", fmt_double(std::abs(s.F.scale))));
    s.F.table_s = parse_doubles(doc.get_or("semilinear", "table_s", ""));
    s.F.table_f = parse_doubles(doc.get_or("semilinear", "table_f", ""));
    s.controller = parse_controller_kind(doc.get_or("semilinear", "controller", "nonlinear"));
    s.require_certificate = parse_bool(doc.get_or("semilinear", "require_certificate", "false"));
    if (c.j() != c.N) throw Error(ErrorCode::ConfigInvalid, "semilinear controllers need j = N");
    if (s.F.Lbar < 0.0) throw Error(ErrorCode::ConfigInvalid, "Lbar must be nonnegative");
    c.semilinear = s;
  }

  doc.expect_keys("simulation", {"modes", "dt", "t_final", "integrator", "record_stride", "open_loop"});
  c.sim.n_modes = as_int(doc.get_or("simulation", "modes", "64"), "simulation modes");
  c.sim.dt = parse_double(doc.get_or("simulation", "dt", "1e-4"));
  if (const std::string* t = doc.find("simulation", "t_final")) {
    c.sim.t_final = parse_double(*t);
    c.t_final_given = true;
  }
  c.sim.integrator = parse_integrator(doc.get_or("simulation", "integrator", "exponential_midpoint"));
  c.sim.record_stride = as_int(doc.get_or("simulation", "record_stride", "0"), "record_stride");
  c.open_loop = parse_bool(doc.get_or("simulation", "open_loop", "false"));

  doc.expect_keys("initial", {"w_modes", "y", "random_modes", "seed"});
  c.initial.w_modes = parse_doubles(doc.get_or("initial", "w_modes", "1"));
  c.initial.y = parse_doubles(doc.get_or("initial", "y", ""));
  c.initial.random_modes = as_int(doc.get_or("initial", "random_modes", "0"), "random_modes");
  c.seed = static_cast<std::uint64_t>(parse_int(doc.get_or("initial", "seed", "1")));
  if (!c.initial.y.empty() && static_cast<int>(c.initial.y.size()) != c.j())
    throw Error(ErrorCode::ConfigInvalid, "initial y needs j values");

  doc.expect_keys("output", {"dir"});
  c.out_dir = doc.get_or("output", "dir", "");

  return c;
}

void validate(const RunConfig& c) {
  if (c.grid_points < 129 || c.grid_points % 2 == 0)
    throw Error(ErrorCode::ConfigInvalid, "grid points must be odd and at least 129");
  if (c.modes < c.N + 2) throw Error(ErrorCode::ConfigInvalid, "grid modes must be at least N + 2");
  if (c.sim.n_modes <= c.N) throw Error(ErrorCode::ConfigInvalid, "simulation modes must exceed N");
  if (!(c.sim.dt > 0.0)) throw Error(ErrorCode::ConfigInvalid, "dt must be positive");
  if (c.t_final_given && !(c.sim.t_final >= 100.0 * c.sim.dt))
    throw Error(ErrorCode::ConfigInvalid, "t_final must be at least 100 dt");
  if (c.initial.random_modes < 0) throw Error(ErrorCode::ConfigInvalid, "random_modes must be nonnegative");
  try {
    c.problem.validate(Grid::uniform(c.grid_points));
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigInvalid, e.what());
  }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  try {
    RunConfig c = parse_doc(KvDoc::parse(text));
    validate(c);
    return c;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    throw Error(ErrorCode::ConfigInvalid, e.what());
  }
}

RunConfig load_config(const std::string& path) {
  try {
    RunConfig c = parse_doc(KvDoc::load(path));
    validate(c);
    return c;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    throw Error(ErrorCode::ConfigInvalid, e.what());
  }
}

}  // namespace clfpde

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "clfpde/artifact.hpp"
#include "clfpde/error.hpp"
#include "clfpde/pipeline.hpp"

using namespace clfpde;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCertification = 3;
constexpr int kExitInstability = 4;

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> modes;
  std::optional<double> dt;
  bool quiet = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "run configuration file")->required();
  app->add_option("--out", c.out, "output directory");
  app->add_option("--seed", c.seed, "seed for randomized initial states");
  app->add_option("--modes", c.modes, "simulation modal truncation");
  app->add_option("--dt", c.dt, "time step");
  app->add_flag("--quiet", c.quiet, "suppress summaries");
}

RunConfig load(const Common& c) {
  RunConfig cfg = load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.modes) {
    if (*c.modes <= cfg.N) throw Error(ErrorCode::ConfigInvalid, "--modes must exceed N");
    cfg.sim.n_modes = *c.modes;
  }
  if (c.dt) {
    if (!(*c.dt > 0.0)) throw Error(ErrorCode::ConfigInvalid, "--dt must be positive");
    cfg.sim.dt = *c.dt;
  }
  return cfg;
}

std::string out_dir(const std::string& flag, const std::string& from_config) {
  if (!flag.empty()) return flag;
  if (!from_config.empty()) return from_config;
  if (const char* env = std::getenv("CLF_OUT_DIR"); env && *env) return env;
  return "clfpde_out";
}

int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ConfigInvalid:
    case ErrorCode::InvalidArgument:
    case ErrorCode::MalformedCsv:
      return kExitConfig;
    case ErrorCode::Instability:
      return kExitInstability;
    default:
      return 1;
  }
}

void summarize_design(const DesignBundle& b, const std::string& dir) {
  std::cout << certification_report(b.artifact, b.notes) << "outputs: " << dir << '\n';
}

int cmd_design(const Common& c) {
  const RunConfig cfg = load(c);
  const std::string dir = out_dir(c.out, cfg.out_dir);
  const DesignBundle b = build_design(cfg);
  write_design_outputs(b, dir);
  if (!c.quiet) summarize_design(b, dir);
  return b.artifact.certified() ? kExitOk : kExitCertification;
}

int cmd_simulate(const Common& c) {
  const RunConfig cfg = load(c);
  const std::string dir = out_dir(c.out, cfg.out_dir);
  const DesignBundle b = build_design(cfg);
  write_design_outputs(b, dir);
  if (!b.artifact.certified()) {
    if (!c.quiet) summarize_design(b, dir);
    return kExitCertification;
  }
  SimulationResult sim;
  try {
    sim = run_simulation(b);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Instability)
      write_text((std::filesystem::path(dir) / "simulation.txt").string(), std::string("status = unstable\nerror = ") + e.what() + "\n");
    throw;
  }
  write_simulation_outputs(b, sim, dir);
  if (!c.quiet) {
    std::cout << (sim.certified ? "certified" : "UNCERTIFIED") << " run, " << sim.traj.samples() << " samples";
    if (sim.fit_ok) std::cout << ", fitted rate " << sim.fit.sigma << " (r^2 " << sim.fit.r2 << ")";
    std::cout << "\noutputs: " << dir << '\n';
  }
  return kExitOk;
}

int cmd_check(const std::string& artifact_path, const Common& c) {
  if (!artifact_path.empty()) {
    const DesignArtifact art = load_artifact(artifact_path);
    DesignArtifact again = art;
    again.verdicts = certify(art);
    bool same = again.verdicts.size() == art.verdicts.size();
    for (std::size_t k = 0; same && k < art.verdicts.size(); ++k) {
      const auto &a = art.verdicts[k], &b = again.verdicts[k];
      same = a.name == b.name && a.pass == b.pass && a.required == b.required &&
             std::abs(a.margin - b.margin) <= 1e-12 * std::max(1.0, std::abs(a.margin));
    }
    if (!c.quiet) {
      std::cout << certification_report(again, {});
      std::cout << "stored verdicts " << (same ? "reproduced" : "NOT reproduced") << '\n';
    }
    return again.certified() && same ? kExitOk : kExitCertification;
  }
  if (c.config.empty()) throw Error(ErrorCode::ConfigInvalid, "check needs --config or --artifact");
  const DesignBundle b = build_design(load(c));
  if (!c.quiet) std::cout << certification_report(b.artifact, b.notes);
  return b.artifact.certified() ? kExitOk : kExitCertification;
}

int cmd_reproduce(const std::string& id, const std::string& out, bool quiet) {
  const std::string text = format_reproduction(id, reproduce(id));
  if (!quiet) std::cout << text;
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    std::string name = "reproduce_" + id;
    std::replace(name.begin(), name.end(), '.', '_');
    name += ".txt";
    write_text((std::filesystem::path(out) / name).string(), text);
  }
  return kExitOk;
}

int cmd_export(const std::string& input, const std::string& output, const std::string& out, int stride) {
  std::ifstream in(input);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot read '" + input + "'");
  std::ostringstream os;
  export_plotdata(in, os, stride);
  std::string path = output;
  if (path.empty()) {
    const std::string dir = out_dir(out, "");
    std::filesystem::create_directories(dir);
    path = (std::filesystem::path(dir) / ("plot_" + std::filesystem::path(input).filename().string())).string();
  }
  write_text(path, os.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Control Lyapunov functional design and verification for 1-D parabolic PDEs"};
  app.require_subcommand(1);

  Common design_opts, sim_opts, check_opts;
  auto* design = app.add_subcommand("design", "compute and certify a design");
  add_common(design, design_opts);

  auto* simulate = app.add_subcommand("simulate", "design, certify and simulate the closed loop");
  simulate->alias("run");
  add_common(simulate, sim_opts);

  auto* check = app.add_subcommand("check", "re-verify a design from a config or a stored artifact");
  std::string artifact_path;
  check->add_option("--config", check_opts.config, "run configuration file");
  check->add_option("--artifact", artifact_path, "design.txt written by design or simulate");
  check->add_option("--out", check_opts.out, "unused; accepted for symmetry");
  check->add_option("--seed", check_opts.seed, "seed");
  check->add_option("--modes", check_opts.modes, "simulation modal truncation");
  check->add_option("--dt", check_opts.dt, "time step");
  check->add_flag("--quiet", check_opts.quiet, "suppress the report");

  auto* repro = app.add_subcommand("reproduce", "compare computed values with the benchmark reference values");
  std::string example_id, repro_out;
  bool repro_quiet = false;
  repro->add_option("id", example_id, "benchmark id: 2.4 or 3.3")->required();
  repro->add_option("--out", repro_out, "also write the table to this directory");
  repro->add_flag("--quiet", repro_quiet, "suppress the table");

  auto* exp = app.add_subcommand("export", "downsample a trajectory CSV for plotting");
  std::string exp_input, exp_output, exp_out;
  int exp_stride = 0;
  exp->add_option("--input", exp_input, "trajectory CSV")->required();
  exp->add_option("--output", exp_output, "output file (default <out>/plot_<input name>)");
  exp->add_option("--out", exp_out, "output directory");
  exp->add_option("--stride", exp_stride, "keep every stride-th row (0: about 1000 rows)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*design) return cmd_design(design_opts);
    if (*simulate) return cmd_simulate(sim_opts);
    if (*check) return cmd_check(artifact_path, check_opts);
    if (*repro) return cmd_reproduce(example_id, repro_out, repro_quiet);
    if (*exp) return cmd_export(exp_input, exp_output, exp_out, exp_stride);
  } catch (const Error& e) {
    std::cerr << "clfpde: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "clfpde: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}

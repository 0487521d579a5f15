#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "clfpde/artifact.hpp"
#include "clfpde/config.hpp"
#include "clfpde/error.hpp"
#include "clfpde/pipeline.hpp"

using namespace clfpde;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

const char* kOneMode = R"(
# single unstable mode
[problem]
q = -19.739208802178716

[design]
N = 1
mus = 41.94581870462977
L = 1

[simulation]
dt = 1e-3
t_final = 1

[initial]
w_modes = 1, 0.5
y = 0.3
)";

std::string csv_of(const DesignBundle& b, const SimulationResult& sim) {
  std::ostringstream os;
  write_trajectory_csv(os, sim.traj, b.config.N);
  return os.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("config defaults") {
  const RunConfig c = parse_config(kOneMode);
  CHECK(c.grid_points == 2049);
  CHECK(c.modes == 64);
  CHECK(c.j() == 1);
  CHECK(c.sigma_targets.size() == 1);
  CHECK(c.sigma_targets[0] == 1.0);
  CHECK(c.gain_mode == GainMode::ClosedForm);
  CHECK(c.Ls[0] == 1.0);
  CHECK(c.sim.integrator == Integrator::ExponentialMidpoint);
  CHECK(c.t_final_given);
  CHECK_FALSE(c.semilinear.has_value());
  CHECK(c.problem.dirichlet_left());
  CHECK(c.problem.q(0.3) == doctest::Approx(-19.739208802178716));
  CHECK(c.seed == 1);
}

TEST_CASE("config errors are ConfigInvalid") {
  const std::string base = kOneMode;
  for (const std::string& bad : {
           base + "[extra]\nx = 1\n",
           base + "[grid]\npoints = 100\n",
           base + "[grid]\nspacing = 2\n",
           std::string("[problem]\np = 1\n"),
           base + "[semilinear]\nnonlinearity = cubic\n",
           std::string(kOneMode).replace(base.find("N = 1"), 5, "N = 0"),
           std::string(kOneMode).replace(base.find("q = "), 4, "a1 = 0.5\nq = "),
           std::string(kOneMode).replace(base.find("dt = 1e-3"), 9, "dt = fast"),
       }) {
    CHECK(code_of([&] { parse_config(bad); }) == ErrorCode::ConfigInvalid);
  }
  CHECK(code_of([] { load_config("/nonexistent/file.cfg"); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("artifact text round-trips and re-certifies") {
  const DesignBundle b = build_design(parse_config(kOneMode));
  REQUIRE(b.complete());
  CHECK(b.artifact.certified());
  const std::string text = write_artifact(b.artifact);
  const DesignArtifact back = read_artifact(text);
  CHECK(write_artifact(back) == text);

  const std::vector<Verdict> again = certify(back);
  REQUIRE(again.size() == b.artifact.verdicts.size());
  for (std::size_t k = 0; k < again.size(); ++k) {
    CHECK(again[k].name == b.artifact.verdicts[k].name);
    CHECK(again[k].pass == b.artifact.verdicts[k].pass);
    CHECK(std::abs(again[k].margin - b.artifact.verdicts[k].margin) <= 1e-12 * (1.0 + std::abs(again[k].margin)));
  }
  CHECK(code_of([] { read_artifact("not an artifact\n"); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("design and simulation are deterministic") {
  const RunConfig c = parse_config(kOneMode);
  const DesignBundle b1 = build_design(c), b2 = build_design(c);
  CHECK(write_artifact(b1.artifact) == write_artifact(b2.artifact));
  const SimulationResult s1 = run_simulation(b1), s2 = run_simulation(b2);
  CHECK(csv_of(b1, s1) == csv_of(b2, s2));
  CHECK(s1.fit_ok);
  CHECK(s1.fit.sigma > 0.0);

  const fs::path dir = fs::temp_directory_path() / "clfpde_test_outputs";
  fs::remove_all(dir);
  write_design_outputs(b1, dir.string());
  write_simulation_outputs(b1, s1, dir.string());
  for (const char* name : {"design.txt", "certification.txt", "eigen.csv", "kernels.csv", "trajectory.csv",
                           "simulation.txt"})
    CHECK(fs::exists(dir / name));
  fs::remove_all(dir);
}

TEST_CASE("plot-data export") {
  const DesignBundle b = build_design(parse_config(kOneMode));
  const SimulationResult sim = run_simulation(b);
  const std::string csv = csv_of(b, sim);
  const auto rows = lines_of(csv);
  REQUIRE(rows.size() == 1002);

  std::istringstream in1(csv);
  std::ostringstream out1;
  export_plotdata(in1, out1, 1);
  CHECK(out1.str() == csv);

  std::istringstream in10(csv);
  std::ostringstream out10;
  export_plotdata(in10, out10, 10);
  const auto kept = lines_of(out10.str());
  CHECK(kept.size() == 102);
  CHECK(kept.front() == rows.front());
  CHECK(kept.back() == rows.back());
  double prev = INFINITY;
  for (std::size_t k = 1; k < kept.size(); ++k) {
    std::istringstream fields(kept[k]);
    std::string cell;
    for (int col = 0; col < 4; ++col) std::getline(fields, cell, ',');
    const double V = std::stod(cell);
    CHECK(V <= prev * (1.0 + 1e-9));
    prev = V;
  }

  for (const std::string& bad : {std::string("t,a\n0,1\n1\n"), std::string("t,a\n0,1\n1,x\n"),
                                 std::string("t,a\n0,1\n2,1\n1,1\n")}) {
    std::istringstream in(bad);
    std::ostringstream out;
    CHECK(code_of([&] { export_plotdata(in, out, 1); }) == ErrorCode::MalformedCsv);
  }
}

TEST_CASE("reproduction tables") {
  for (const char* id : {"2.4", "3.3"}) {
    const auto rows = reproduce(id);
    CHECK(rows.size() > 5);
    for (const auto& r : rows) {
      const double tol = r.quantity == "Lbar_max" ? 3e-3 : 1e-6;
      CHECK_MESSAGE(r.rel_err <= tol, r.quantity);
    }
    CHECK(format_reproduction(id, rows).find("quantity") != std::string::npos);
  }
  CHECK(code_of([] { reproduce("9.9"); }) == ErrorCode::InvalidArgument);
}

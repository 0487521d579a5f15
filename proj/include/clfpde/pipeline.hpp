#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "clfpde/artifact.hpp"
#include "clfpde/clf.hpp"
#include "clfpde/config.hpp"
#include "clfpde/sim.hpp"

namespace clfpde {

struct DesignBundle {
  RunConfig config;
  EigenSystem eigsys;
  ShapeSet shapes;
  ReducedModel model;
  GainDesign gains;
  CLFParams clf;
  FeedbackLaw law;
  bool has_semilinear = false;
  SemilinearDesign semi;
  SemilinearCLF sclf;

  DesignArtifact artifact;
  std::vector<std::string> notes;
  std::string failure;  // empty when every design stage completed

  bool complete() const { return failure.empty(); }
};

// Runs eigensolve, shapes, reduced model, gains, CLF and kernels, then the
// semilinear selection when requested. Stage errors are recorded in failure.
DesignBundle build_design(const RunConfig& config);

struct SimulationResult {
  Trajectory traj;
  DecayFit fit;
  bool fit_ok = false;
  bool semilinear = false;
  bool certified = true;
};

Eigen::VectorXd initial_modes(const RunConfig& config, int n_modes);
double default_t_final(const DesignBundle& bundle);
SimulationResult run_simulation(const DesignBundle& bundle);

void write_text(const std::string& path, const std::string& text);
void write_design_outputs(const DesignBundle& bundle, const std::string& dir);
void write_simulation_outputs(const DesignBundle& bundle, const SimulationResult& sim, const std::string& dir);
std::string controller_table_csv(const SemilinearDesign& design);

struct ReproRow {
  std::string quantity;
  double reference = 0.0;
  double computed = 0.0;
  double rel_err = 0.0;
};

// Reference values of the two benchmark plants, ids "2.4" and "3.3".
std::vector<ReproRow> reproduce(const std::string& id);
std::string format_reproduction(const std::string& id, const std::vector<ReproRow>& rows);

// Keeps the header, every stride-th data row and the last row. stride 0
// picks max(1, rows / 1000).
void export_plotdata(std::istream& in, std::ostream& out, int stride);

}  // namespace clfpde

#pragma once
// Experiment orchestration: initial-data recipes, the flow runner with its
// file outputs, the reflection / Pohozaev refinement studies, the synthetic
// bubbling ladder, snapshot analysis, and the full verification suite.
// Every report is plain data computed from the inputs (no wall clock, no
// environment), so identical configs give byte-identical JSON.

#include "fbflow/analyze.hpp"
#include "fbflow/config.hpp"
#include "fbflow/flow.hpp"
#include "fbflow/geometry.hpp"
#include "fbflow/grid.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace fbflow {

// Initial data per cfg.initial.kind: constant | identity | exact-bubble |
// glued-bubble | gap-data | snapshot, plus optional smooth tangential noise.
// gap-data bisects a blend toward the constant map until the energy sits
// just under cfg.initial.target_energy. snapshot ignores cfg.grid and keeps
// the stored grid.
Field build_initial(const ExperimentConfig& cfg, const FreeBoundaryPair& pair);

// Max over nodes of the tension component normal to the sphere, relative to
// the largest tension magnitude on the grid (0 when the field has no
// tension at all). Flat-pair tension has no normal component by definition.
double tension_normal_relative(const Field& f, const std::vector<double>& tau);

struct FlowExperimentOutput {
  FlowResult result;
  nlohmann::json report;
  std::vector<std::string> snapshot_paths;
};

// Runs the flow and writes <name>-snap-*.{bin,csv}, <name>-energy.csv and
// <name>-report.json under cfg.output_dir (created if missing).
FlowExperimentOutput run_flow_experiment(const ExperimentConfig& cfg);

// Divergence-form / global-form checks on the exact map the config
// describes, at cfg.grid.h and h/2. Keys: antisymmetry_max, trace_gap,
// residual_h, residual_h2, order_estimate, plus the lambda deviation,
// transported-force ratio and the upper-half equivalence defect.
nlohmann::json run_reflection_checks(const ExperimentConfig& cfg);

// Radial-balance defect of the configured exact map at h and h/2 around
// cfg.initial.center, plus the annulus inequality at half the probe radius.
nlohmann::json run_pohozaev_checks(const ExperimentConfig& cfg);

// Synthetic bubbling ladder over cfg.analysis.ladder_scales: per-rung scale
// selection and neck oscillation, then the finest-rung energy ledger, neck
// partition, dyadic profile and mass recovery against the planted bubble.
// With write_outputs the rung and dyadic tables go to cfg.output_dir as CSV.
nlohmann::json run_ladder(const ExperimentConfig& cfg, bool write_outputs);

// Blow-up analysis of stored snapshots (time order; the last snapshot is the
// settled base state, the one before it the concentrated state).
nlohmann::json analyze_snapshots(const std::vector<std::string>& paths,
                                 const AnalysisConfig& acfg);

// Every named invariant check over the preset suite; "checks" is an array of
// {name, pass, measured numbers}, "failed" counts failures.
nlohmann::json run_verification_suite();

}  // namespace fbflow

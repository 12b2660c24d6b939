#pragma once
// Declarative experiment configuration: JSON in/out with strict validation
// (unknown keys rejected, errors carry the field path), plus the named preset
// table used by the verification suite.

#include "fbflow/types.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace fbflow {

struct GridConfig {
  double radius = 1.0;
  double h = 1.0 / 64;
  bool full = false;
};

struct InitialConfig {
  // constant | identity | exact-bubble | glued-bubble | gap-data | snapshot
  std::string kind = "constant";
  std::string snapshot_path;
  std::string bubble_kind = "boundary_disk";  // boundary_disk | interior_sphere
  double center[2] = {0.0, 0.0};
  double lambda = 0.25;
  double theta = 0.0;
  double cap_lambda = 0.0;     // background cap scale; 0 = constant background
  double target_energy = 0.1;  // gap-data: bisect the blend to this energy
  double noise_amplitude = 0.0;
  unsigned long noise_seed = 7;
  int noise_modes = 4;
};

struct FlowConfig {
  double dt_factor = 0.2;
  double t_end = 1.0;
  long snapshot_every = 0;
  long stop_check_every = 64;
  double stop_eps_sq = 0.0;  // 0 disables the concentration stop rule
  double stop_radius_factor = 8.0;
};

struct AnalysisConfig {
  double eps_sq = 1.0;  // squared small-energy threshold
  double delta = 0.25;
  double R = 8.0;
  double a_max = 100.0;
  double r_det_factor = 8.0;    // detection radius in units of h
  double neck_threshold = 0.05; // middle-dyadic fraction of bubble energy
  double pohozaev_radius = 0.5;
  std::vector<double> ladder_scales = {0.0625, 0.015625, 0.00390625};
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string pair = "sphere";
  GridConfig grid;
  InitialConfig initial;
  FlowConfig flow;
  AnalysisConfig analysis;
  std::string output_dir = "out";
};

// Strict parse: unknown or ill-typed fields throw ConfigError with the field
// path; numeric ranges validated; a snapshot path must exist on disk.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config_file(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Re-checks the invariants on an assembled config (used after overrides).
void validate_config(const ExperimentConfig& cfg);

// Apply a "dotted.path=value" override onto the JSON form of a config.
nlohmann::json apply_override(nlohmann::json doc, const std::string& assignment);

const std::vector<std::string>& preset_names();
ExperimentConfig preset_config(const std::string& name);

}  // namespace fbflow

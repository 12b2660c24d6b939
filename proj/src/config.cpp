#include "fbflow/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace fbflow {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) fail(path + "." + it.key(), "unknown field");
  }
}

double get_num(const json& obj, const std::string& path, const char* key,
               double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

long get_int(const json& obj, const std::string& path, const char* key,
             long fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<long>();
}

bool get_bool(const json& obj, const std::string& path, const char* key,
              bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail(path + "." + key, "expected a boolean");
  return v.get<bool>();
}

std::string get_str(const json& obj, const std::string& path, const char* key,
                    const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& doc) {
  ExperimentConfig cfg;
  check_keys(doc, "config",
             {"name", "pair", "grid", "initial", "flow", "analysis",
              "output_dir"});
  cfg.name = get_str(doc, "config", "name", cfg.name);
  cfg.pair = get_str(doc, "config", "pair", cfg.pair);
  cfg.output_dir = get_str(doc, "config", "output_dir", cfg.output_dir);

  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    check_keys(g, "grid", {"radius", "h", "full"});
    cfg.grid.radius = get_num(g, "grid", "radius", cfg.grid.radius);
    cfg.grid.h = get_num(g, "grid", "h", cfg.grid.h);
    cfg.grid.full = get_bool(g, "grid", "full", cfg.grid.full);
  }

  if (doc.contains("initial")) {
    const json& s = doc.at("initial");
    check_keys(s, "initial",
               {"kind", "snapshot_path", "bubble_kind", "center", "lambda",
                "theta", "cap_lambda", "target_energy", "noise_amplitude",
                "noise_seed", "noise_modes"});
    cfg.initial.kind = get_str(s, "initial", "kind", cfg.initial.kind);
    cfg.initial.snapshot_path =
        get_str(s, "initial", "snapshot_path", cfg.initial.snapshot_path);
    cfg.initial.bubble_kind =
        get_str(s, "initial", "bubble_kind", cfg.initial.bubble_kind);
    if (s.contains("center")) {
      const json& c = s.at("center");
      if (!c.is_array() || c.size() != 2 || !c[0].is_number() ||
          !c[1].is_number())
        fail("initial.center", "expected [x1, x2]");
      cfg.initial.center[0] = c[0].get<double>();
      cfg.initial.center[1] = c[1].get<double>();
    }
    cfg.initial.lambda = get_num(s, "initial", "lambda", cfg.initial.lambda);
    cfg.initial.theta = get_num(s, "initial", "theta", cfg.initial.theta);
    cfg.initial.cap_lambda =
        get_num(s, "initial", "cap_lambda", cfg.initial.cap_lambda);
    cfg.initial.target_energy =
        get_num(s, "initial", "target_energy", cfg.initial.target_energy);
    cfg.initial.noise_amplitude =
        get_num(s, "initial", "noise_amplitude", cfg.initial.noise_amplitude);
    cfg.initial.noise_seed = static_cast<unsigned long>(
        get_int(s, "initial", "noise_seed",
                static_cast<long>(cfg.initial.noise_seed)));
    cfg.initial.noise_modes = static_cast<int>(
        get_int(s, "initial", "noise_modes", cfg.initial.noise_modes));
  }

  if (doc.contains("flow")) {
    const json& f = doc.at("flow");
    check_keys(f, "flow",
               {"dt_factor", "t_end", "snapshot_every", "stop_check_every",
                "stop_eps_sq", "stop_radius_factor"});
    cfg.flow.dt_factor = get_num(f, "flow", "dt_factor", cfg.flow.dt_factor);
    cfg.flow.t_end = get_num(f, "flow", "t_end", cfg.flow.t_end);
    cfg.flow.snapshot_every =
        get_int(f, "flow", "snapshot_every", cfg.flow.snapshot_every);
    cfg.flow.stop_check_every =
        get_int(f, "flow", "stop_check_every", cfg.flow.stop_check_every);
    cfg.flow.stop_eps_sq =
        get_num(f, "flow", "stop_eps_sq", cfg.flow.stop_eps_sq);
    cfg.flow.stop_radius_factor =
        get_num(f, "flow", "stop_radius_factor", cfg.flow.stop_radius_factor);
  }

  if (doc.contains("analysis")) {
    const json& a = doc.at("analysis");
    check_keys(a, "analysis",
               {"eps_sq", "delta", "R", "a_max", "r_det_factor",
                "neck_threshold", "pohozaev_radius", "ladder_scales"});
    cfg.analysis.eps_sq = get_num(a, "analysis", "eps_sq", cfg.analysis.eps_sq);
    cfg.analysis.delta = get_num(a, "analysis", "delta", cfg.analysis.delta);
    cfg.analysis.R = get_num(a, "analysis", "R", cfg.analysis.R);
    cfg.analysis.a_max = get_num(a, "analysis", "a_max", cfg.analysis.a_max);
    cfg.analysis.r_det_factor =
        get_num(a, "analysis", "r_det_factor", cfg.analysis.r_det_factor);
    cfg.analysis.neck_threshold =
        get_num(a, "analysis", "neck_threshold", cfg.analysis.neck_threshold);
    cfg.analysis.pohozaev_radius =
        get_num(a, "analysis", "pohozaev_radius", cfg.analysis.pohozaev_radius);
    if (a.contains("ladder_scales")) {
      const json& ls = a.at("ladder_scales");
      if (!ls.is_array() || ls.empty())
        fail("analysis.ladder_scales", "expected a non-empty array");
      cfg.analysis.ladder_scales.clear();
      for (size_t i = 0; i < ls.size(); ++i) {
        if (!ls[i].is_number())
          fail("analysis.ladder_scales[" + std::to_string(i) + "]",
               "expected a number");
        cfg.analysis.ladder_scales.push_back(ls[i].get<double>());
      }
    }
  }

  validate_config(cfg);
  return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.name.empty()) fail("name", "must not be empty");
  if (cfg.pair != "sphere" && cfg.pair != "flat")
    fail("pair", "expected sphere or flat, got '" + cfg.pair + "'");
  if (cfg.output_dir.empty()) fail("output_dir", "must not be empty");

  if (!(cfg.grid.radius > 0)) fail("grid.radius", "must be positive");
  if (!(cfg.grid.h > 0)) fail("grid.h", "must be positive");
  if (cfg.grid.h > cfg.grid.radius / 4)
    fail("grid.h", "must be at most radius/4");

  const std::set<std::string> kinds = {"constant",  "identity", "exact-bubble",
                                       "glued-bubble", "gap-data", "snapshot"};
  if (!kinds.count(cfg.initial.kind))
    fail("initial.kind", "unknown kind '" + cfg.initial.kind + "'");
  if (cfg.initial.kind == "identity" && cfg.pair != "flat")
    fail("initial.kind", "identity data needs the flat pair");
  if ((cfg.initial.kind == "exact-bubble" || cfg.initial.kind == "glued-bubble" ||
       cfg.initial.kind == "gap-data") &&
      cfg.pair != "sphere")
    fail("initial.kind", "'" + cfg.initial.kind + "' needs the sphere pair");
  if (cfg.initial.kind == "snapshot") {
    if (cfg.initial.snapshot_path.empty())
      fail("initial.snapshot_path", "required for kind=snapshot");
    std::ifstream probe(cfg.initial.snapshot_path);
    if (!probe)
      fail("initial.snapshot_path",
           "file not found: " + cfg.initial.snapshot_path);
  }
  if (cfg.initial.bubble_kind != "boundary_disk" &&
      cfg.initial.bubble_kind != "interior_sphere")
    fail("initial.bubble_kind", "expected boundary_disk or interior_sphere");
  if (!(cfg.initial.lambda > 0)) fail("initial.lambda", "must be positive");
  if (cfg.initial.cap_lambda < 0)
    fail("initial.cap_lambda", "must be nonnegative");
  if (!(cfg.initial.target_energy > 0))
    fail("initial.target_energy", "must be positive");
  if (cfg.initial.noise_amplitude < 0)
    fail("initial.noise_amplitude", "must be nonnegative");
  if (cfg.initial.noise_modes < 1)
    fail("initial.noise_modes", "must be at least 1");

  if (!(cfg.flow.dt_factor > 0) || cfg.flow.dt_factor > 1.0)
    fail("flow.dt_factor", "must be in (0, 1]");
  if (!(cfg.flow.t_end > 0)) fail("flow.t_end", "must be positive");
  if (cfg.flow.snapshot_every < 0)
    fail("flow.snapshot_every", "must be nonnegative");
  if (cfg.flow.stop_check_every < 1)
    fail("flow.stop_check_every", "must be at least 1");
  if (cfg.flow.stop_eps_sq < 0)
    fail("flow.stop_eps_sq", "must be nonnegative (0 disables)");
  if (!(cfg.flow.stop_radius_factor >= 2))
    fail("flow.stop_radius_factor", "must be at least 2");

  if (!(cfg.analysis.eps_sq > 0)) fail("analysis.eps_sq", "must be positive");
  if (!(cfg.analysis.delta > 0)) fail("analysis.delta", "must be positive");
  if (!(cfg.analysis.R > 1)) fail("analysis.R", "must exceed 1");
  if (!(cfg.analysis.a_max > 0)) fail("analysis.a_max", "must be positive");
  if (!(cfg.analysis.r_det_factor >= 4))
    fail("analysis.r_det_factor", "must be at least 4");
  if (!(cfg.analysis.neck_threshold > 0 && cfg.analysis.neck_threshold < 1))
    fail("analysis.neck_threshold", "must be in (0, 1)");
  if (!(cfg.analysis.pohozaev_radius > 0))
    fail("analysis.pohozaev_radius", "must be positive");
  double prev = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < cfg.analysis.ladder_scales.size(); ++i) {
    const double s = cfg.analysis.ladder_scales[i];
    if (!(s > 0))
      fail("analysis.ladder_scales[" + std::to_string(i) + "]",
           "must be positive");
    if (!(s < prev))
      fail("analysis.ladder_scales[" + std::to_string(i) + "]",
           "must be strictly decreasing");
    prev = s;
  }
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open config file");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(doc);
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  json doc;
  doc["name"] = cfg.name;
  doc["pair"] = cfg.pair;
  doc["output_dir"] = cfg.output_dir;
  doc["grid"] = {{"radius", cfg.grid.radius},
                 {"h", cfg.grid.h},
                 {"full", cfg.grid.full}};
  doc["initial"] = {{"kind", cfg.initial.kind},
                    {"snapshot_path", cfg.initial.snapshot_path},
                    {"bubble_kind", cfg.initial.bubble_kind},
                    {"center", {cfg.initial.center[0], cfg.initial.center[1]}},
                    {"lambda", cfg.initial.lambda},
                    {"theta", cfg.initial.theta},
                    {"cap_lambda", cfg.initial.cap_lambda},
                    {"target_energy", cfg.initial.target_energy},
                    {"noise_amplitude", cfg.initial.noise_amplitude},
                    {"noise_seed", cfg.initial.noise_seed},
                    {"noise_modes", cfg.initial.noise_modes}};
  doc["flow"] = {{"dt_factor", cfg.flow.dt_factor},
                 {"t_end", cfg.flow.t_end},
                 {"snapshot_every", cfg.flow.snapshot_every},
                 {"stop_check_every", cfg.flow.stop_check_every},
                 {"stop_eps_sq", cfg.flow.stop_eps_sq},
                 {"stop_radius_factor", cfg.flow.stop_radius_factor}};
  doc["analysis"] = {{"eps_sq", cfg.analysis.eps_sq},
                     {"delta", cfg.analysis.delta},
                     {"R", cfg.analysis.R},
                     {"a_max", cfg.analysis.a_max},
                     {"r_det_factor", cfg.analysis.r_det_factor},
                     {"neck_threshold", cfg.analysis.neck_threshold},
                     {"pohozaev_radius", cfg.analysis.pohozaev_radius},
                     {"ladder_scales", cfg.analysis.ladder_scales}};
  return doc;
}

nlohmann::json apply_override(nlohmann::json doc, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "': expected path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;  // bare strings allowed unquoted
  }

  json* node = &doc;
  size_t pos = 0;
  while (true) {
    const size_t dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot - pos);
    if (key.empty())
      throw ConfigError("override '" + assignment + "': empty path segment");
    if (dot == std::string::npos) {
      (*node)[key] = parsed;
      break;
    }
    node = &(*node)[key];
    pos = dot + 1;
  }
  return doc;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "gap-test",         "flow-bubble",
      "flow-noise",       "pohozaev-refine",
      "flat-exact",       "reflection-verify",
      "energy-identity-boundary", "energy-identity-interior"};
  return names;
}

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig cfg;
  cfg.name = name;
  if (name == "gap-test") {
    cfg.grid.h = 1.0 / 32;
    cfg.initial.kind = "gap-data";
    cfg.initial.target_energy = 0.1;
    cfg.flow.dt_factor = 0.1;
    cfg.flow.t_end = 5.0;
  } else if (name == "flow-bubble") {
    cfg.grid.h = 1.0 / 64;
    cfg.initial.kind = "glued-bubble";
    cfg.initial.bubble_kind = "boundary_disk";
    // Node-aligned on every dyadic grid; gluing matches the background at
    // the centre node exactly.
    cfg.initial.center[0] = 0.25;
    cfg.initial.center[1] = 0.0;
    cfg.initial.lambda = 0.25;
    cfg.initial.cap_lambda = 8.0;
    cfg.initial.noise_amplitude = 0.05;
    cfg.initial.noise_seed = 7;
    cfg.flow.t_end = 0.2;
    cfg.flow.snapshot_every = 1024;
    cfg.flow.stop_eps_sq = 3.0;
  } else if (name == "flow-noise") {
    cfg.grid.h = 1.0 / 32;
    cfg.initial.kind = "exact-bubble";
    cfg.initial.center[0] = 0.0;
    cfg.initial.center[1] = 0.0;
    cfg.initial.lambda = 1.0;
    cfg.initial.noise_amplitude = 0.01;
    cfg.initial.noise_seed = 11;
    cfg.flow.t_end = 0.1;
    cfg.flow.snapshot_every = 512;
  } else if (name == "pohozaev-refine") {
    cfg.grid.h = 1.0 / 32;
    cfg.initial.kind = "exact-bubble";
    cfg.initial.lambda = 1.0;
    cfg.analysis.pohozaev_radius = 0.5;
  } else if (name == "flat-exact") {
    cfg.pair = "flat";
    cfg.grid.h = 1.0 / 32;
    cfg.initial.kind = "identity";
    cfg.analysis.pohozaev_radius = 0.5;
  } else if (name == "reflection-verify") {
    cfg.grid.h = 1.0 / 32;
    cfg.initial.kind = "exact-bubble";
    cfg.initial.lambda = 1.0;
  } else if (name == "energy-identity-boundary") {
    cfg.grid.h = std::pow(2.0, -11);
    cfg.initial.kind = "glued-bubble";
    cfg.initial.bubble_kind = "boundary_disk";
    cfg.initial.center[0] = 0.25;
    cfg.initial.center[1] = 0.0;
    cfg.initial.cap_lambda = 8.0;
    cfg.analysis.delta = 0.5;
    cfg.analysis.R = 16.0;
  } else if (name == "energy-identity-interior") {
    cfg.grid.h = std::pow(2.0, -11);
    cfg.initial.kind = "glued-bubble";
    cfg.initial.bubble_kind = "interior_sphere";
    cfg.initial.center[0] = 0.0;
    cfg.initial.center[1] = 0.5;
    cfg.initial.cap_lambda = 0.0;
    cfg.analysis.delta = 0.5;
    cfg.analysis.R = 16.0;
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  validate_config(cfg);
  return cfg;
}

}  // namespace fbflow

// fbflow command line: experiment runner for the free-boundary harmonic map
// heat flow with synthetic bubbling data, reflection-extension checks, and
// the blow-up analysis toolkit. Exit codes: 0 success, 2 config error,
// 3 I/O or data-format error, 4 invariant-check failure, 5 flow left the
// involution tube.

#include "fbflow/config.hpp"
#include "fbflow/flow.hpp"
#include "fbflow/geometry.hpp"
#include "fbflow/grid.hpp"
#include "fbflow/persist.hpp"
#include "fbflow/runner.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using fbflow::ConfigError;
using fbflow::ExperimentConfig;
using nlohmann::json;

struct CommonOpts {
  std::string config_path;
  std::string preset;
  std::vector<std::string> sets;
  std::string output_dir;
};

void add_common(CLI::App* sc, CommonOpts& c) {
  sc->add_option("-c,--config", c.config_path, "JSON config file");
  sc->add_option("--preset", c.preset, "named preset configuration");
  sc->add_option("--set", c.sets,
                 "override a config field, dotted.path=value (repeatable)");
  sc->add_option("--output-dir", c.output_dir, "output directory override");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fbflow::IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

ExperimentConfig resolve_config(const CommonOpts& c) {
  if (!c.preset.empty() && !c.config_path.empty())
    throw ConfigError("give either --preset or --config, not both");
  json doc;
  if (!c.preset.empty())
    doc = fbflow::config_to_json(fbflow::preset_config(c.preset));
  else if (!c.config_path.empty())
    doc = read_json_file(c.config_path);
  else
    doc = fbflow::config_to_json(ExperimentConfig{});
  for (const std::string& s : c.sets) doc = fbflow::apply_override(doc, s);
  if (!c.output_dir.empty()) doc["output_dir"] = c.output_dir;
  return fbflow::parse_config(doc);
}

void maybe_write_report(const std::string& path, const json& rep) {
  if (!path.empty()) fbflow::write_json_report(path, rep);
}

void create_parent_dirs(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
}

int cmd_flow_run(const CommonOpts& c) {
  const ExperimentConfig cfg = resolve_config(c);
  const fbflow::FlowExperimentOutput out = fbflow::run_flow_experiment(cfg);
  std::cout << out.report.dump(2) << "\n";
  return 0;
}

int cmd_synth_make(const CommonOpts& c, const std::string& out_path) {
  const ExperimentConfig cfg = resolve_config(c);
  const auto pair = fbflow::make_pair(cfg.pair);
  const fbflow::Field f = fbflow::build_initial(cfg, *pair);
  std::string path = out_path;
  if (path.empty())
    path = cfg.output_dir + "/" + cfg.name + "-initial.bin";
  create_parent_dirs(path);
  fbflow::write_snapshot(f, path);
  const json rep{{"schema", "fbflow-report-v1"},
                 {"kind", "synth"},
                 {"path", path},
                 {"pair", f.pair_name},
                 {"h", f.grid->h},
                 {"nodes", f.grid->mask_count()},
                 {"energy", fbflow::dirichlet_energy(f)}};
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int cmd_analyze_bubbles(const CommonOpts& c,
                        const std::vector<std::string>& inputs,
                        const std::string& report_path) {
  const ExperimentConfig cfg = resolve_config(c);
  const json rep = fbflow::analyze_snapshots(inputs, cfg.analysis);
  maybe_write_report(report_path, rep);
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int cmd_verify_reflection(CommonOpts c, const std::string& report_path) {
  if (c.preset.empty() && c.config_path.empty()) c.preset = "reflection-verify";
  const ExperimentConfig cfg = resolve_config(c);
  const json rep = fbflow::run_reflection_checks(cfg);
  maybe_write_report(report_path, rep);
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int cmd_verify_all(const std::string& report_path) {
  const json rep = fbflow::run_verification_suite();
  maybe_write_report(report_path, rep);
  std::cout << rep.dump(2) << "\n";
  return rep["pass"].get<bool>() ? 0 : 4;
}

int cmd_plot_data(const std::string& input, const std::string& output_dir) {
  const json doc = read_json_file(input);
  if (!doc.contains("kind"))
    throw ConfigError("'" + input + "': not an fbflow report (no kind)");
  const std::string kind = doc["kind"].get<std::string>();
  const std::string dir = output_dir.empty() ? std::string(".") : output_dir;
  std::filesystem::create_directories(dir);
  const std::string name =
      doc.contains("name") ? doc["name"].get<std::string>() : kind;
  std::vector<std::string> written;

  auto put = [&](const std::string& suffix, const std::string& body) {
    const std::string path = dir + "/" + name + "-" + suffix;
    fbflow::write_text_file(path, body);
    written.push_back(path);
  };

  if (kind == "flow") {
    const std::string energy_csv = doc["energy_csv"].get<std::string>();
    std::ifstream in(energy_csv);
    if (!in) throw fbflow::IoError("cannot open '" + energy_csv + "'");
    std::string line, body = "t,energy\n";
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      const size_t a = line.find(',');
      if (a == std::string::npos) continue;
      const size_t b = line.find(',', a + 1);
      body += line.substr(0, b) + "\n";
    }
    put("energy-plot.csv", body);
  } else if (kind == "ladder") {
    std::string body = "lambda,r,oscillation\n";
    for (const json& rg : doc["rungs"])
      body += rg["lambda"].dump() + "," + rg["r"].dump() + "," +
              rg["oscillation"].dump() + "\n";
    put("rungs-plot.csv", body);

    body = "i,energy,defect\n";
    const json& dy = doc["dyadic"];
    for (size_t i = 0; i < dy["f"].size(); ++i)
      body += std::to_string(i) + "," + dy["f"][i].dump() + "," +
              dy["defects"][i].dump() + "\n";
    put("dyadic-plot.csv", body);

    body = "radius,mass\n";
    const json& ms = doc["mass"];
    for (size_t i = 0; i < ms["radii"].size(); ++i)
      body += ms["radii"][i].dump() + "," + ms["at"][i].dump() + "\n";
    put("mass-plot.csv", body);
  } else if (kind == "analysis") {
    std::string body = "x1,x2,r,a,regime\n";
    for (const json& pt : doc["points"]) {
      if (!pt.contains("r")) continue;
      body += pt["x"][0].dump() + "," + pt["x"][1].dump() + "," +
              pt["r"].dump() + "," + pt["a"].dump() + "," +
              pt["regime"].get<std::string>() + "\n";
    }
    put("points-plot.csv", body);
  } else {
    throw ConfigError("no plot data extraction for report kind '" + kind + "'");
  }

  const json rep{{"schema", "fbflow-report-v1"},
                 {"kind", "plot-data"},
                 {"written", written}};
  std::cout << rep.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "fbflow: heat flow of maps into a sphere or plane with free boundary "
      "on a submanifold, plus blow-up analysis and identity checks"};
  app.require_subcommand(0, 1);

  bool emit_default = false;
  app.add_flag("--emit-default-config", emit_default,
               "print the default JSON config and exit");

  auto* flow = app.add_subcommand("flow", "heat-flow experiments");
  auto* flow_run =
      flow->add_subcommand("run", "run the flow; write snapshots and reports");
  CommonOpts cf;
  add_common(flow_run, cf);

  auto* synth = app.add_subcommand("synth", "synthetic initial data");
  auto* synth_make =
      synth->add_subcommand("make", "build initial data and store a snapshot");
  CommonOpts cs;
  add_common(synth_make, cs);
  std::string synth_out;
  synth_make->add_option("--output", synth_out,
                         "snapshot path (.csv extension for text format)");

  auto* analyze = app.add_subcommand("analyze", "blow-up analysis");
  auto* an_bub = analyze->add_subcommand(
      "bubbles", "concentration detection and neck analysis of snapshots");
  CommonOpts ca;
  add_common(an_bub, ca);
  std::vector<std::string> an_inputs;
  an_bub->add_option("--input", an_inputs, "snapshot files in time order")
      ->required();
  std::string an_report;
  an_bub->add_option("--report", an_report, "write the JSON report here");

  auto* verify = app.add_subcommand("verify", "identity and invariant checks");
  auto* v_refl = verify->add_subcommand(
      "reflection", "reflection-extension calculus on the exact map");
  CommonOpts cr;
  add_common(v_refl, cr);
  std::string vr_report;
  v_refl->add_option("--report", vr_report, "write the JSON report here");
  auto* v_all = verify->add_subcommand("all", "full verification suite");
  std::string va_report;
  v_all->add_option("--report", va_report, "write the JSON report here");

  auto* report = app.add_subcommand("report", "report utilities");
  auto* plot = report->add_subcommand(
      "plot-data", "extract plot-ready CSV tables from a JSON report");
  std::string plot_in, plot_out;
  plot->add_option("--input", plot_in, "report JSON file")->required();
  plot->add_option("--output-dir", plot_out, "directory for the CSV tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (emit_default) {
      std::cout << fbflow::config_to_json(ExperimentConfig{}).dump(2) << "\n";
      return 0;
    }
    if (flow_run->parsed()) return cmd_flow_run(cf);
    if (synth_make->parsed()) return cmd_synth_make(cs, synth_out);
    if (an_bub->parsed()) return cmd_analyze_bubbles(ca, an_inputs, an_report);
    if (v_refl->parsed()) return cmd_verify_reflection(cr, vr_report);
    if (v_all->parsed()) return cmd_verify_all(va_report);
    if (plot->parsed()) return cmd_plot_data(plot_in, plot_out);
    std::cout << app.help();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const fbflow::VersionMismatch& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const fbflow::CorruptRow& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const fbflow::OffManifold& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const fbflow::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const fbflow::LeftTube& e) {
    std::cerr << "flow left the involution tube: " << e.what() << "\n";
    return 5;
  } catch (const fbflow::Error& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}

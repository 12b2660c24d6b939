#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

std::string bin() {
  const char* b = std::getenv("FBFLOW_BIN");
  REQUIRE_MESSAGE(b != nullptr, "FBFLOW_BIN must point at the cli binary");
  return b;
}

fs::path work_dir() {
  fs::path p = fs::temp_directory_path() / "fbflow-test-cli";
  fs::create_directories(p);
  return p;
}

int run(const std::string& args, const fs::path& capture) {
  std::string cmd = bin() + " " + args + " > " + capture.string() + " 2>&1";
  int st = std::system(cmd.c_str());
  if (WIFEXITED(st)) return WEXITSTATUS(st);
  return -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_tiny_config(const fs::path& cfg_path, const fs::path& out_dir) {
  nlohmann::json doc;
  doc["name"] = "tiny";
  doc["pair"] = "sphere";
  doc["grid"] = {{"h", 0.0625}, {"radius", 1.0}};
  doc["initial"] = {{"kind", "exact-bubble"}, {"lambda", 1.0}};
  doc["flow"] = {{"t_end", 0.01}, {"dt_factor", 0.2}, {"snapshot_every", 8}};
  doc["output_dir"] = out_dir.string();
  std::ofstream out(cfg_path);
  out << doc.dump(2) << "\n";
}

}  // namespace

TEST_CASE("emit-default-config prints a parsable configuration") {
  fs::path cap = work_dir() / "default.json";
  CHECK(run("--emit-default-config", cap) == 0);
  auto doc = nlohmann::json::parse(slurp(cap));
  CHECK(doc.contains("pair"));
  CHECK(doc.contains("grid"));
  CHECK(doc["pair"] == "sphere");
}

TEST_CASE("malformed invocations exit with the usage code") {
  fs::path cap = work_dir() / "bad.txt";
  CHECK(run("--no-such-flag", cap) == 2);
  CHECK(run("verify reflection --preset bogus", cap) == 2);
  // Both sources at once is contradictory.
  CHECK(run("flow run --preset flat-exact -c somefile.json", cap) == 2);

  // Config file that is not valid json.
  fs::path broken = work_dir() / "broken.json";
  std::ofstream(broken) << "{ not json";
  CHECK(run("flow run -c " + broken.string(), cap) == 2);

  // Missing config file is an io error.
  CHECK(run("flow run -c " + (work_dir() / "ghost.json").string(), cap) == 3);
}

TEST_CASE("flow run writes snapshots, an energy trace, and a report") {
  fs::path dir = work_dir() / "flow-a";
  fs::path cfg = work_dir() / "tiny.json";
  write_tiny_config(cfg, dir);
  fs::path cap = work_dir() / "flow.txt";
  REQUIRE(run("flow run -c " + cfg.string(), cap) == 0);

  fs::path report = dir / "tiny-report.json";
  REQUIRE(fs::exists(report));
  auto doc = nlohmann::json::parse(slurp(report));
  CHECK(doc["kind"] == "flow");
  CHECK(doc["schema"] == "fbflow-report-v1");
  REQUIRE(doc.contains("snapshots"));
  REQUIRE(!doc["snapshots"].empty());
  for (const auto& s : doc["snapshots"]) {
    CHECK(fs::exists(fs::path(s.get<std::string>())));
  }
  fs::path energy = dir / "tiny-energy.csv";
  REQUIRE(fs::exists(energy));
  std::string csv = slurp(energy);
  CHECK(csv.rfind("t,energy,tension_l2,kinetic", 0) == 0);

  // Reruns are deterministic: the energy trace is byte-identical.
  fs::path dir2 = work_dir() / "flow-b";
  fs::path cfg2 = work_dir() / "tiny2.json";
  write_tiny_config(cfg2, dir2);
  REQUIRE(run("flow run -c " + cfg2.string(), cap) == 0);
  CHECK(slurp(dir2 / "tiny-energy.csv") == csv);
}

TEST_CASE("synth make materializes initial data on disk") {
  fs::path out = work_dir() / "made.bin";
  fs::path cap = work_dir() / "synth.txt";
  CHECK(run("synth make --preset flat-exact --output " + out.string(), cap) == 0);
  CHECK(fs::exists(out));
  CHECK(fs::file_size(out) > 0);
}

TEST_CASE("analyze bubbles reads snapshots and reports detections") {
  // Reuse the tiny flow's snapshots.
  fs::path dir = work_dir() / "flow-a";
  fs::path report = dir / "tiny-report.json";
  if (!fs::exists(report)) {
    fs::path cfg = work_dir() / "tiny.json";
    write_tiny_config(cfg, dir);
    fs::path cap0 = work_dir() / "flow0.txt";
    REQUIRE(run("flow run -c " + cfg.string(), cap0) == 0);
  }
  auto doc = nlohmann::json::parse(slurp(report));
  REQUIRE(!doc["snapshots"].empty());
  std::string snap = doc["snapshots"].back().get<std::string>();

  fs::path out = work_dir() / "analysis.json";
  fs::path cap = work_dir() / "analyze.txt";
  CHECK(run("analyze bubbles --input " + snap + " --report " + out.string(), cap) == 0);
  auto rep = nlohmann::json::parse(slurp(out));
  CHECK(rep["kind"] == "analysis");
  CHECK(rep.contains("points"));

  // A missing snapshot is an io error.
  CHECK(run("analyze bubbles --input " + (work_dir() / "none.bin").string(), cap) == 3);
}

TEST_CASE("verify reflection emits the identity-check report") {
  fs::path out = work_dir() / "reflection.json";
  fs::path cap = work_dir() / "verify.txt";
  CHECK(run("verify reflection --preset flat-exact --report " + out.string(), cap) == 0);
  auto rep = nlohmann::json::parse(slurp(out));
  CHECK(rep["pair"] == "flat");
  CHECK(rep["antisymmetry_max"].get<double>() <= 1e-10);
  CHECK(rep["residual_h"].get<double>() <= 1e-12);
  CHECK(rep.contains("order_estimate"));
  CHECK(rep.contains("trace_gap"));
  CHECK(rep.contains("equivalence_defect"));
}

TEST_CASE("report plot-data extracts plottable series") {
  fs::path dir = work_dir() / "flow-a";
  fs::path report = dir / "tiny-report.json";
  REQUIRE(fs::exists(report));
  fs::path out_dir = work_dir() / "plots";
  fs::path cap = work_dir() / "plot.txt";
  CHECK(run("report plot-data --input " + report.string() + " --output-dir " +
                out_dir.string(),
            cap) == 0);
  // Plot files are prefixed with the report name so several reports can
  // share one directory.
  fs::path plot = out_dir / "tiny-energy-plot.csv";
  REQUIRE(fs::exists(plot));
  CHECK(slurp(plot).rfind("t,energy\n", 0) == 0);
}

#include "fbflow/runner.hpp"

#include "fbflow/parallel.hpp"
#include "fbflow/persist.hpp"
#include "fbflow/reflect.hpp"
#include "fbflow/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace fbflow {

namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

Vec north_pole() {
  Vec v(3);
  v << 0.0, 0.0, 1.0;
  return v;
}

std::shared_ptr<const GridGeom> grid_from(const GridConfig& gc) {
  return gc.full ? GridGeom::full_disk(gc.radius, gc.h)
                 : GridGeom::half_disk(gc.radius, gc.h);
}

BubbleSpec spec_from(const InitialConfig& ic) {
  BubbleSpec sp;
  sp.kind = ic.bubble_kind;
  sp.center[0] = ic.center[0];
  sp.center[1] = ic.center[1];
  sp.lambda = ic.lambda;
  sp.theta = ic.theta;
  return sp;
}

Field background_field(std::shared_ptr<const GridGeom> grid,
                       const FreeBoundaryPair& pair, const InitialConfig& ic) {
  if (ic.cap_lambda > 0.0) return cap_base(grid, ic.cap_lambda, ic.center);
  return constant_base(grid, north_pole(), pair.name());
}

Field identity_field(std::shared_ptr<const GridGeom> grid,
                     const FreeBoundaryPair& pair) {
  Field f = make_field(grid, 2, pair.name());
  const GridGeom& g = *grid;
  for (int j = g.j_lo(); j <= g.n; ++j) {
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      double* u = f.at(g.index(i, j));
      u[0] = g.x1(i);
      u[1] = g.x2(j);
    }
  }
  return f;
}

// Low-energy data for the gap experiment: a fixed smooth unit field blended
// toward the constant map, with the blend weight bisected until the energy
// sits just under the requested target.
Field gap_data_field(std::shared_ptr<const GridGeom> grid,
                     const FreeBoundaryPair& pair, double target_energy) {
  const GridGeom& g = *grid;
  Field shape = make_field(grid, 3, pair.name());
  for (int j = g.j_lo(); j <= g.n; ++j) {
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      const double s1 = std::cos(kPi * g.x1(i) / 2.0);
      Vec v(3);
      v << 0.3 * s1, 0.5 * g.x2(j) * s1, 1.0;
      shape.set_value(g.index(i, j), v / v.norm());
    }
  }
  enforce_free_boundary(shape, pair);

  const Vec np = north_pole();
  auto blend = [&](double a) {
    Field f = make_field(grid, 3, pair.name());
    for (int j = g.j_lo(); j <= g.n; ++j) {
      for (int i = -g.n; i <= g.n; ++i) {
        if (!g.in_disc(i, j)) continue;
        const long k = g.index(i, j);
        const Vec w = np + a * (shape.value(k) - np);
        f.set_value(k, w / w.norm());
      }
    }
    enforce_free_boundary(f, pair);
    return f;
  };

  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 50; ++it) {
    const double a = 0.5 * (lo + hi);
    if (dirichlet_energy(blend(a)) < target_energy)
      lo = a;
    else
      hi = a;
  }
  return blend(lo);
}

FlowParams params_from(const FlowConfig& fc) {
  FlowParams p;
  p.dt_factor = fc.dt_factor;
  p.t_end = fc.t_end;
  p.snapshot_every = fc.snapshot_every;
  p.stop_check_every = fc.stop_check_every;
  p.stop_eps2 = fc.stop_eps_sq > 0.0
                    ? fc.stop_eps_sq
                    : std::numeric_limits<double>::infinity();
  p.stop_radius_factor = fc.stop_radius_factor;
  return p;
}

json event_json(const ConcentrationEvent& e) {
  return json{{"fired", e.fired},
              {"time", e.time},
              {"step", e.step},
              {"x", {e.x[0], e.x[1]}},
              {"ball_energy", e.ball_energy},
              {"radius", e.radius}};
}

json flow_summary(const FlowResult& r) {
  const double drop = r.E0 - r.E_final;
  json j{{"E0", r.E0},
         {"E_final", r.E_final},
         {"energy_drop", drop},
         {"kinetic", r.kinetic},
         {"kinetic_ratio", drop > 0.0 ? r.kinetic / drop : 0.0},
         {"worst_violation", r.worst_violation},
         {"tension_l2_final", r.tension_l2_final},
         {"max_drift", r.max_drift},
         {"steps", r.steps},
         {"blew_up", r.blew_up},
         {"event", event_json(r.event)}};
  return j;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Annulus probe center: the planted bubble center when it sits on the
// boundary line, else the origin.
void annulus_center(const ExperimentConfig& cfg, double x0[2]) {
  if ((cfg.initial.kind == "glued-bubble" || cfg.initial.kind == "exact-bubble") &&
      std::abs(cfg.initial.center[1]) < 1e-12) {
    x0[0] = cfg.initial.center[0];
    x0[1] = 0.0;
  } else {
    x0[0] = 0.0;
    x0[1] = 0.0;
  }
}

struct ReflectionLevel {
  double antisymmetry = 0.0;
  double lambda_deviation = 0.0;
  double trace_gap_v = 0.0;
  double div_residual = 0.0;
  double global_residual = 0.0;
  double f_hat_ratio = 0.0;
  double upsilon_bound = 0.0;
  double equivalence = 0.0;
};

ReflectionLevel reflection_level(const ExperimentConfig& cfg,
                                 const FreeBoundaryPair& pair, double h) {
  ExperimentConfig c = cfg;
  c.grid.h = h;
  const Field f = build_initial(c, pair);
  const std::vector<double> tau = tension_field(f, pair);
  const ReflectedField rf = extend(f, pair);
  const PotentialAssembly pa = assemble_potentials(rf, pair);
  const std::vector<double> fhat = transported_force(rf, pair, tau);

  ReflectionLevel lv;
  lv.antisymmetry = pa.antisymmetry_max;
  lv.lambda_deviation = pa.lambda_deviation;
  lv.trace_gap_v = trace_gap(f, pair);
  lv.div_residual = divergence_form_residual(rf, pa, tau);
  const GlobalFormReport gf = global_form_residual(rf, pair, fhat, tau);
  lv.global_residual = gf.residual;
  lv.f_hat_ratio = gf.f_hat_ratio;
  lv.upsilon_bound = gf.upsilon_bound;
  lv.equivalence = upper_half_equivalence_defect(rf, pa, pair, tau);
  return lv;
}

double order_of(double coarse, double fine) {
  if (!(fine > 1e-13)) return 0.0;
  return std::log2(coarse / fine);
}

json point_json(const ConcentrationPoint& cp) {
  return json{{"x", {cp.x[0], cp.x[1]}},
              {"r", cp.r},
              {"d", cp.d},
              {"a", cp.a},
              {"regime", regime_name(cp.regime)},
              {"achieved", cp.achieved},
              {"saturated", cp.saturated}};
}

json neck_json(const NeckDecomposition& nd) {
  json pieces = json::array();
  for (const NeckPiece& p : nd.pieces)
    pieces.push_back(json{{"name", p.name},
                          {"count", p.count},
                          {"energy", p.energy},
                          {"oscillation", p.oscillation}});
  return json{{"delta", nd.delta},
              {"R", nd.R},
              {"annulus_count", nd.annulus_count},
              {"annulus_energy", nd.annulus_energy},
              {"partition_exact", nd.partition_exact},
              {"pieces", pieces}};
}

json dyadic_json(const DyadicProfile& dy) {
  return json{{"center", {dy.center[0], dy.center[1]}},
              {"base_scale", dy.base_scale},
              {"m_n", dy.m_n},
              {"f", dy.f},
              {"defects", dy.defects},
              {"covered_energy", dy.covered_energy},
              {"max_at_ends", dy.max_at_ends}};
}

json ledger_json(const EnergyLedger& lg) {
  return json{{"E_total", lg.E_total},
              {"E_base", lg.E_base},
              {"E_neck", lg.E_neck},
              {"bubble_energies", lg.bubble_energies},
              {"residual", lg.residual},
              {"residual_fraction",
               lg.E_total > 0.0 ? lg.residual / lg.E_total : 0.0}};
}

json mass_json(const MassEstimate& me) {
  return json{{"radii", {me.radii[0], me.radii[1], me.radii[2]}},
              {"at", {me.at[0], me.at[1], me.at[2]}},
              {"value", me.value}};
}

}  // namespace

Field build_initial(const ExperimentConfig& cfg, const FreeBoundaryPair& pair) {
  const InitialConfig& ic = cfg.initial;
  Field f;
  if (ic.kind == "snapshot") {
    f = read_snapshot(ic.snapshot_path);
    if (f.pair_name != pair.name())
      throw ConfigError("initial.snapshot_path: stored pair '" + f.pair_name +
                        "' does not match configured pair '" + pair.name() +
                        "'");
  } else {
    auto grid = grid_from(cfg.grid);
    if (ic.kind == "constant") {
      const Vec v = pair.name() == "flat" ? Vec(Vec::Zero(2)) : north_pole();
      f = constant_base(grid, v, pair.name());
    } else if (ic.kind == "identity") {
      f = identity_field(grid, pair);
    } else if (ic.kind == "exact-bubble") {
      f = bubble_field(grid, spec_from(ic));
    } else if (ic.kind == "glued-bubble") {
      f = glue(background_field(grid, pair, ic), pair, spec_from(ic));
    } else if (ic.kind == "gap-data") {
      f = gap_data_field(grid, pair, ic.target_energy);
    } else {
      throw ConfigError("initial.kind: unknown kind '" + ic.kind + "'");
    }
  }
  if (ic.noise_amplitude > 0.0)
    f = add_smooth_noise(f, pair, ic.noise_amplitude, ic.noise_seed,
                         ic.noise_modes);
  return f;
}

double tension_normal_relative(const Field& f, const std::vector<double>& tau) {
  if (f.m != 3) return 0.0;
  const GridGeom& g = *f.grid;
  std::vector<double> pn(static_cast<size_t>(g.nj()), 0.0);
  std::vector<double> pm(static_cast<size_t>(g.nj()), 0.0);
  par::for_rows(g.nj(), [&](int row) {
    const int j = g.j_lo() + row;
    double worst_n = 0.0, worst_m = 0.0;
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      const long k = g.index(i, j);
      const double* u = f.at(k);
      const double* t = tau.data() + static_cast<size_t>(k) * 3;
      const double dot =
          std::abs(u[0] * t[0] + u[1] * t[1] + u[2] * t[2]);
      const double mag =
          std::sqrt(t[0] * t[0] + t[1] * t[1] + t[2] * t[2]);
      worst_n = std::max(worst_n, dot);
      worst_m = std::max(worst_m, mag);
    }
    pn[static_cast<size_t>(row)] = worst_n;
    pm[static_cast<size_t>(row)] = worst_m;
  });
  double num = 0.0, den = 0.0;
  for (int r = 0; r < g.nj(); ++r) {
    num = std::max(num, pn[static_cast<size_t>(r)]);
    den = std::max(den, pm[static_cast<size_t>(r)]);
  }
  return den > 0.0 ? num / den : 0.0;
}

FlowExperimentOutput run_flow_experiment(const ExperimentConfig& cfg) {
  const auto pair = make_pair(cfg.pair);
  const Field u0 = build_initial(cfg, *pair);

  FlowExperimentOutput out;
  out.result = run_flow(u0, *pair, params_from(cfg.flow));
  const FlowResult& r = out.result;

  std::filesystem::create_directories(cfg.output_dir);
  const std::string stem = cfg.output_dir + "/" + cfg.name;

  for (const Field& snap : r.snapshots) {
    char tag[32];
    std::snprintf(tag, sizeof(tag), "-snap-%08ld.bin", snap.step);
    const std::string path = stem + tag;
    write_snapshot(snap, path);
    out.snapshot_paths.push_back(path);
  }

  std::string csv = "t,energy,tension_l2,kinetic\n";
  for (const TraceRow& row : r.trace)
    csv += fmt17(row.t) + "," + fmt17(row.energy) + "," +
           fmt17(row.tension_l2) + "," + fmt17(row.kinetic) + "\n";
  const std::string energy_path = stem + "-energy.csv";
  write_text_file(energy_path, csv);

  json rep = flow_summary(r);
  rep["schema"] = "fbflow-report-v1";
  rep["kind"] = "flow";
  rep["name"] = cfg.name;
  rep["config"] = config_to_json(cfg);
  rep["snapshots"] = out.snapshot_paths;
  rep["energy_csv"] = energy_path;
  out.report = rep;
  write_json_report(stem + "-report.json", rep);
  return out;
}

nlohmann::json run_reflection_checks(const ExperimentConfig& cfg) {
  const auto pair = make_pair(cfg.pair);
  const ReflectionLevel c = reflection_level(cfg, *pair, cfg.grid.h);
  const ReflectionLevel f = reflection_level(cfg, *pair, cfg.grid.h / 2.0);

  return json{{"schema", "fbflow-report-v1"},
              {"kind", "reflection"},
              {"pair", cfg.pair},
              {"h", cfg.grid.h},
              {"antisymmetry_max", std::max(c.antisymmetry, f.antisymmetry)},
              {"lambda_deviation",
               std::max(c.lambda_deviation, f.lambda_deviation)},
              {"trace_gap", std::max(c.trace_gap_v, f.trace_gap_v)},
              {"residual_h", c.div_residual},
              {"residual_h2", f.div_residual},
              {"order_estimate", order_of(c.div_residual, f.div_residual)},
              {"equivalence_defect", std::max(c.equivalence, f.equivalence)},
              {"global_residual_h", c.global_residual},
              {"global_residual_h2", f.global_residual},
              {"global_order_estimate",
               order_of(c.global_residual, f.global_residual)},
              {"f_hat_ratio", c.f_hat_ratio},
              {"upsilon_bound", c.upsilon_bound}};
}

nlohmann::json run_pohozaev_checks(const ExperimentConfig& cfg) {
  const auto pair = make_pair(cfg.pair);
  const double t = cfg.analysis.pohozaev_radius;
  double x0[2];
  annulus_center(cfg, x0);

  auto level = [&](double h) {
    ExperimentConfig c = cfg;
    c.grid.h = h;
    const Field f = build_initial(c, *pair);
    const std::vector<double> tau = tension_field(f, *pair);
    const PohozaevReport rb = pohozaev_boundary(f, tau, x0, t);
    const AnnulusReport an = pohozaev_annulus(f, tau, x0, t / 2.0);
    return std::make_pair(rb, an);
  };
  const auto [rb_h, an_h] = level(cfg.grid.h);
  const auto [rb_f, an_f] = level(cfg.grid.h / 2.0);

  const double ratio =
      rb_f.defect > 1e-15 ? rb_h.defect / rb_f.defect : 0.0;
  return json{{"schema", "fbflow-report-v1"},
              {"kind", "pohozaev"},
              {"pair", cfg.pair},
              {"h", cfg.grid.h},
              {"t", t},
              {"x0", {x0[0], x0[1]}},
              {"lhs_h", rb_h.lhs},
              {"rhs_h", rb_h.rhs},
              {"defect_h", rb_h.defect},
              {"defect_h2", rb_f.defect},
              {"defect_ratio", ratio},
              {"order_estimate", ratio > 0.0 ? std::log2(ratio) : 0.0},
              {"annulus_value", an_h.value},
              {"annulus_bound", an_h.bound},
              {"annulus_value_h2", an_f.value},
              {"annulus_bound_h2", an_f.bound}};
}

nlohmann::json run_ladder(const ExperimentConfig& cfg, bool write_outputs) {
  const auto pair = make_pair(cfg.pair);
  const AnalysisConfig& ac = cfg.analysis;
  auto grid = grid_from(cfg.grid);
  const GridGeom& g = *grid;
  const double target = ac.eps_sq / 32.0;
  const double* center = cfg.initial.center;

  const Field base = background_field(grid, *pair, cfg.initial);

  json rungs = json::array();
  std::vector<double> oscillations;
  Field finest;
  ConcentrationPoint cp_finest;
  bool fine_all_within = true;

  for (size_t n = 0; n < ac.ladder_scales.size(); ++n) {
    BubbleSpec sp = spec_from(cfg.initial);
    sp.lambda = ac.ladder_scales[n];
    Field u = glue(base, *pair, sp);

    SelectOptions so;
    so.fine = false;
    so.a_max = ac.a_max;
    const ConcentrationPoint cp = select_scale(u, center, ac.eps_sq, so);

    Region reg = region_ball(g, center, ac.delta);
    region_subtract(reg, region_ball(g, center, ac.R * cp.r));
    const double osc = oscillation(u, reg);
    oscillations.push_back(osc);

    json rung{{"lambda", sp.lambda},
              {"r", cp.r},
              {"r_over_h", cp.r / g.h},
              {"achieved", cp.achieved},
              {"target", target},
              {"saturated", cp.saturated},
              {"regime", regime_name(cp.regime)},
              {"a", cp.a},
              {"d", cp.d},
              {"oscillation", osc}};
    if (!cp.saturated) {
      SelectOptions sf = so;
      sf.fine = true;
      const ConcentrationPoint cpf = select_scale(u, center, ac.eps_sq, sf);
      const bool within =
          std::abs(cpf.achieved - target) <= 0.05 * target;
      rung["fine_achieved"] = cpf.achieved;
      rung["fine_r"] = cpf.r;
      rung["fine_within_tolerance"] = within;
      fine_all_within = fine_all_within && within;
    }
    rungs.push_back(rung);

    if (n + 1 == ac.ladder_scales.size()) {
      finest = std::move(u);
      cp_finest = cp;
    }
  }

  const EnergyLedger lg = energy_ledger(finest, base, {cp_finest}, ac.delta);
  const NeckDecomposition nd = neck_decompose(finest, cp_finest, ac.delta, ac.R);
  const DyadicProfile dy = dyadic_profile(finest, cp_finest, ac.delta, ac.R);
  const double middle = middle_third_max(dy);
  const double bubble_e =
      lg.bubble_energies.empty() ? 0.0 : lg.bubble_energies[0];
  const double middle_fraction = bubble_e > 0.0 ? middle / bubble_e : 0.0;

  std::vector<Field> history;
  history.push_back(finest);
  history.push_back(base);
  const MassEstimate me = concentration_mass(history, center);

  const double oracle =
      cfg.initial.bubble_kind == "interior_sphere" ? 4.0 * kPi : 2.0 * kPi;
  bool osc_decreasing = true;
  for (size_t n = 1; n < oscillations.size(); ++n)
    osc_decreasing = osc_decreasing && oscillations[n] < oscillations[n - 1];

  json rep{{"schema", "fbflow-report-v1"},
           {"kind", "ladder"},
           {"name", cfg.name},
           {"pair", cfg.pair},
           {"h", g.h},
           {"delta", ac.delta},
           {"R", ac.R},
           {"eps_sq", ac.eps_sq},
           {"center", {center[0], center[1]}},
           {"bubble_kind", cfg.initial.bubble_kind},
           {"scales", ac.ladder_scales},
           {"rungs", rungs},
           {"oscillation_decreasing", osc_decreasing},
           {"fine_selection_within_tolerance", fine_all_within},
           {"point", point_json(cp_finest)},
           {"ledger", ledger_json(lg)},
           {"neck", neck_json(nd)},
           {"dyadic", dyadic_json(dy)},
           {"middle_dyadic_max", middle},
           {"middle_dyadic_fraction", middle_fraction},
           {"mass", mass_json(me)},
           {"oracle_energy", oracle},
           {"bubble_energy", bubble_e},
           {"bubble_rel_error",
            oracle > 0.0 ? (bubble_e - oracle) / oracle : 0.0},
           {"mass_rel_error",
            oracle > 0.0 ? (me.value - oracle) / oracle : 0.0}};

  if (write_outputs) {
    std::filesystem::create_directories(cfg.output_dir);
    const std::string stem = cfg.output_dir + "/" + cfg.name;

    std::string rcsv =
        "lambda,r,r_over_h,achieved,saturated,regime,a,oscillation\n";
    for (const json& rg : rungs)
      rcsv += fmt17(rg["lambda"].get<double>()) + "," +
              fmt17(rg["r"].get<double>()) + "," +
              fmt17(rg["r_over_h"].get<double>()) + "," +
              fmt17(rg["achieved"].get<double>()) + "," +
              (rg["saturated"].get<bool>() ? "1" : "0") + "," +
              rg["regime"].get<std::string>() + "," +
              fmt17(rg["a"].get<double>()) + "," +
              fmt17(rg["oscillation"].get<double>()) + "\n";
    write_text_file(stem + "-rungs.csv", rcsv);

    std::string dcsv = "i,inner_radius,outer_radius,energy,defect\n";
    for (int i = 0; i < dy.m_n; ++i)
      dcsv += std::to_string(i) + "," +
              fmt17(dy.base_scale * std::pow(2.0, i)) + "," +
              fmt17(dy.base_scale * std::pow(2.0, i + 1)) + "," +
              fmt17(dy.f[static_cast<size_t>(i)]) + "," +
              fmt17(dy.defects[static_cast<size_t>(i)]) + "\n";
    write_text_file(stem + "-dyadic.csv", dcsv);

    write_json_report(stem + "-report.json", rep);
  }
  return rep;
}

nlohmann::json analyze_snapshots(const std::vector<std::string>& paths,
                                 const AnalysisConfig& acfg) {
  if (paths.empty())
    throw ConfigError("analyze: at least one snapshot path is required");
  std::vector<Field> history;
  history.reserve(paths.size());
  for (const std::string& p : paths) history.push_back(read_snapshot(p));

  const Field& u = history.size() >= 2 ? history[history.size() - 2]
                                       : history.front();
  const Field* base = history.size() >= 2 ? &history.back() : nullptr;
  const GridGeom& g = *u.grid;

  const double r_det = acfg.r_det_factor * g.h;
  const std::vector<Detection> dets =
      detect_concentration(u, acfg.eps_sq, r_det);

  json points = json::array();
  std::vector<ConcentrationPoint> cps;
  const size_t max_points = 8;
  for (size_t n = 0; n < dets.size() && n < max_points; ++n) {
    const Detection& det = dets[n];
    json pt{{"x", {det.x[0], det.x[1]}}, {"ball_energy", det.ball_energy}};
    SelectOptions so;
    so.a_max = acfg.a_max;
    try {
      const ConcentrationPoint cp = select_scale(u, det.x, acfg.eps_sq, so);
      pt.update(point_json(cp));
      cps.push_back(cp);
      try {
        pt["neck"] = neck_json(neck_decompose(u, cp, acfg.delta, acfg.R));
        const DyadicProfile dy = dyadic_profile(u, cp, acfg.delta, acfg.R);
        pt["dyadic"] = dyadic_json(dy);
        pt["middle_dyadic_max"] = middle_third_max(dy);
      } catch (const ScaleOverlap& e) {
        pt["neck_error"] = e.what();
      } catch (const BadCenter& e) {
        pt["neck_error"] = e.what();
      }
      if (base != nullptr)
        pt["mass"] = mass_json(concentration_mass(history, cp.x));
    } catch (const NoScale& e) {
      pt["select_error"] = e.what();
    }
    points.push_back(pt);
  }

  json rep{{"schema", "fbflow-report-v1"},
           {"kind", "analysis"},
           {"pair", u.pair_name},
           {"h", g.h},
           {"snapshot_count", history.size()},
           {"E_total", dirichlet_energy(u)},
           {"detections", dets.size()},
           {"points", points}};
  if (base != nullptr) {
    rep["E_base"] = dirichlet_energy(*base);
    rep["ledger"] = ledger_json(energy_ledger(u, *base, cps, acfg.delta));
  }
  return rep;
}

nlohmann::json run_verification_suite() {
  json checks = json::array();
  long failed = 0;
  auto add = [&](const std::string& name, bool pass, json measured) {
    measured["name"] = name;
    measured["pass"] = pass;
    checks.push_back(std::move(measured));
    if (!pass) ++failed;
  };

  json reports;

  // Flow presets: monotonicity, kinetic bound, tangency, annulus balance.
  for (const std::string name : {"gap-test", "flow-bubble", "flow-noise"}) {
    const ExperimentConfig cfg = preset_config(name);
    const auto pair = make_pair(cfg.pair);
    const Field u0 = build_initial(cfg, *pair);
    const FlowResult fr = run_flow(u0, *pair, params_from(cfg.flow));
    reports[name] = flow_summary(fr);

    add(name + "/completed", !fr.blew_up,
        {{"blew_up", fr.blew_up},
         {"steps", fr.steps},
         {"event_fired", fr.event.fired}});
    add(name + "/energy-monotone", fr.worst_violation <= 1e-8,
        {{"worst_violation", fr.worst_violation}, {"limit", 1e-8}});
    const double drop = fr.E0 - fr.E_final;
    add(name + "/kinetic-bound", fr.kinetic <= 1.05 * drop + 1e-6,
        {{"kinetic", fr.kinetic},
         {"energy_drop", drop},
         {"ratio", drop > 0.0 ? fr.kinetic / drop : 0.0},
         {"limit_factor", 1.05}});

    const Field& uf = fr.snapshots.back();
    const double tang0 = tension_normal_relative(u0, tension_field(u0, *pair));
    const double tangf = tension_normal_relative(uf, tension_field(uf, *pair));
    add(name + "/tension-tangency", std::max(tang0, tangf) <= 1e-10,
        {{"initial", tang0}, {"final", tangf}, {"limit", 1e-10}});

    double x0[2];
    annulus_center(cfg, x0);
    const std::vector<double> tauf = tension_field(uf, *pair);
    const AnnulusReport an =
        pohozaev_annulus(uf, tauf, x0, cfg.analysis.pohozaev_radius / 2.0);
    add(name + "/annulus-pohozaev", an.value <= 1.1 * an.bound + 1e-12,
        {{"value", an.value}, {"bound", an.bound}});

    if (name == "gap-test")
      add("gap-test/gap-decay", fr.E_final <= 1e-6 * fr.E0,
          {{"E0", fr.E0},
           {"E_final", fr.E_final},
           {"ratio", fr.E0 > 0.0 ? fr.E_final / fr.E0 : 0.0},
           {"limit", 1e-6}});

    if (name == "flow-bubble" && fr.snapshots.size() >= 2) {
      const TwoBallReport tb =
          two_ball_check(fr, x0, 0.2, 0, fr.snapshots.size() - 1, 100.0);
      add("flow-bubble/two-ball", !tb.violation,
          {{"c_forward", tb.c_forward}, {"c_backward", tb.c_backward}});
    }
  }

  // Pohozaev refinement on the exact maps.
  {
    const json pj = run_pohozaev_checks(preset_config("pohozaev-refine"));
    reports["pohozaev-refine"] = pj;
    add("pohozaev/sphere-refine", pj["defect_ratio"].get<double>() >= 1.8,
        {{"defect_h", pj["defect_h"]},
         {"defect_h2", pj["defect_h2"]},
         {"ratio", pj["defect_ratio"]},
         {"limit", 1.8}});
    add("pohozaev/sphere-annulus",
        pj["annulus_value"].get<double>() <=
            1.1 * pj["annulus_bound"].get<double>() + 1e-12,
        {{"value", pj["annulus_value"]}, {"bound", pj["annulus_bound"]}});

    const json fj = run_pohozaev_checks(preset_config("flat-exact"));
    reports["flat-exact-pohozaev"] = fj;
    add("pohozaev/flat-exact", fj["defect_h"].get<double>() <= 1e-12,
        {{"defect_h", fj["defect_h"]}, {"limit", 1e-12}});
    add("pohozaev/flat-annulus",
        fj["annulus_value"].get<double>() <=
            1.1 * fj["annulus_bound"].get<double>() + 1e-12,
        {{"value", fj["annulus_value"]}, {"bound", fj["annulus_bound"]}});
  }

  // Reflection-extension calculus.
  {
    const json rj = run_reflection_checks(preset_config("reflection-verify"));
    reports["reflection-verify"] = rj;
    add("reflection/antisymmetry",
        rj["antisymmetry_max"].get<double>() <= 1e-10,
        {{"antisymmetry_max", rj["antisymmetry_max"]}, {"limit", 1e-10}});
    add("reflection/eigenvalue-normalization",
        rj["lambda_deviation"].get<double>() <= 1e-8,
        {{"lambda_deviation", rj["lambda_deviation"]}, {"limit", 1e-8}});
    add("reflection/trace-agreement", rj["trace_gap"].get<double>() == 0.0,
        {{"trace_gap", rj["trace_gap"]}});
    add("reflection/divergence-order",
        rj["order_estimate"].get<double>() >= 1.0,
        {{"residual_h", rj["residual_h"]},
         {"residual_h2", rj["residual_h2"]},
         {"order_estimate", rj["order_estimate"]},
         {"limit", 1.0}});
    add("reflection/upper-half-equivalence",
        rj["equivalence_defect"].get<double>() <= 1e-10,
        {{"equivalence_defect", rj["equivalence_defect"]}, {"limit", 1e-10}});

    const json fj = run_reflection_checks(preset_config("flat-exact"));
    reports["flat-exact-reflection"] = fj;
    const double flat_resid = std::max(fj["residual_h"].get<double>(),
                                       fj["residual_h2"].get<double>());
    add("reflection/flat-exact", flat_resid <= 1e-12,
        {{"residual_h", fj["residual_h"]},
         {"residual_h2", fj["residual_h2"]},
         {"limit", 1e-12}});
  }

  // Synthetic bubbling ladders: ledger, no-neck, dyadic, mass.
  for (const std::string name :
       {"energy-identity-boundary", "energy-identity-interior"}) {
    const std::string tag =
        name == "energy-identity-boundary" ? "ladder-boundary" : "ladder-interior";
    const ExperimentConfig cfg = preset_config(name);
    const json lj = run_ladder(cfg, false);
    reports[name] = lj;

    const double etot = lj["ledger"]["E_total"].get<double>();
    const double resid = lj["ledger"]["residual"].get<double>();
    add(tag + "/ledger-residual", std::abs(resid) <= 0.02 * etot,
        {{"residual", resid},
         {"E_total", etot},
         {"fraction", etot > 0.0 ? resid / etot : 0.0},
         {"limit_fraction", 0.02}});
    add(tag + "/bubble-energy",
        std::abs(lj["bubble_rel_error"].get<double>()) <= 0.02,
        {{"bubble_energy", lj["bubble_energy"]},
         {"oracle", lj["oracle_energy"]},
         {"rel_error", lj["bubble_rel_error"]},
         {"limit", 0.02}});
    add(tag + "/oscillation-decreasing",
        lj["oscillation_decreasing"].get<bool>(), {{"rungs", lj["rungs"]}});
    add(tag + "/middle-dyadic",
        lj["middle_dyadic_fraction"].get<double>() <= cfg.analysis.neck_threshold,
        {{"fraction", lj["middle_dyadic_fraction"]},
         {"m_n", lj["dyadic"]["m_n"]},
         {"limit", cfg.analysis.neck_threshold}});
    add(tag + "/neck-partition", lj["neck"]["partition_exact"].get<bool>(),
        {{"annulus_count", lj["neck"]["annulus_count"]}});
    add(tag + "/mass-recovery",
        std::abs(lj["mass_rel_error"].get<double>()) <= 0.05,
        {{"mass", lj["mass"]["value"]},
         {"oracle", lj["oracle_energy"]},
         {"rel_error", lj["mass_rel_error"]},
         {"limit", 0.05}});
    add(tag + "/scale-selection",
        lj["fine_selection_within_tolerance"].get<bool>(),
        {{"target", lj["rungs"][0]["target"]}});
  }

  json suite{{"schema", "fbflow-verify-v1"},
             {"kind", "verify-all"},
             {"checks", checks},
             {"checks_total", checks.size()},
             {"checks_failed", failed},
             {"pass", failed == 0},
             {"reports", reports}};
  return suite;
}

}  // namespace fbflow

#include "doctest.h"

#include <cmath>

#include "fbflow/flow.hpp"
#include "fbflow/geometry.hpp"
#include "fbflow/grid.hpp"
#include "fbflow/runner.hpp"
#include "fbflow/synth.hpp"

using fbflow::BubbleSpec;
using fbflow::Field;
using fbflow::FlowParams;
using fbflow::GridGeom;
using fbflow::NodeClass;

namespace {

Field glued_start(double h, double noise_amp = 0.02) {
  auto g = GridGeom::half_disk(1.0, h);
  auto pair = fbflow::make_pair("sphere");
  double c[2] = {0.25, 0.0};
  Field base = fbflow::cap_base(g, 8.0, c);
  BubbleSpec spec;
  spec.center[0] = 0.25;
  spec.lambda = 0.25;
  Field u = fbflow::glue(base, *pair, spec);
  if (noise_amp > 0.0) u = fbflow::add_smooth_noise(u, *pair, noise_amp, 7);
  return u;
}

}  // namespace

TEST_CASE("flow state construction validates the step factor and the pair") {
  auto pair = fbflow::make_pair("sphere");
  Field u = glued_start(1.0 / 16.0, 0.0);

  CHECK_THROWS_AS(fbflow::make_flow_state(u, *pair, 0.0), fbflow::CflViolation);
  CHECK_THROWS_AS(fbflow::make_flow_state(u, *pair, 1.5), fbflow::CflViolation);

  auto flat = fbflow::make_pair("flat");
  CHECK_THROWS_AS(fbflow::make_flow_state(u, *flat, 0.2), fbflow::ConfigError);

  auto st = fbflow::make_flow_state(u, *pair, 0.2);
  CHECK(st.dt == doctest::Approx(0.2 / 256.0).epsilon(1e-15));
  CHECK(st.energy == doctest::Approx(fbflow::dirichlet_energy(u)).epsilon(1e-14));
}

TEST_CASE("the flow dissipates energy and balances it against kinetic output") {
  auto pair = fbflow::make_pair("sphere");
  Field u0 = glued_start(1.0 / 32.0);
  FlowParams p;
  // The imbalance between the kinetic output and the energy drop scales
  // with dt; a rough start at dt_factor 0.2 leaves ~7%, so use a smaller
  // step to test the balance at the 5% level.
  p.dt_factor = 0.05;
  p.t_end = 0.02;
  auto r = fbflow::run_flow(u0, *pair, p);

  CHECK_FALSE(r.blew_up);
  CHECK(r.worst_violation <= 1e-10);
  CHECK(r.E_final < r.E0);
  double drop = r.E0 - r.E_final;
  CHECK(r.kinetic <= 1.05 * drop + 1e-6);
  CHECK(r.kinetic >= 0.5 * drop);
  CHECK(r.max_drift < 1e-12);

  REQUIRE(!r.trace.empty());
  CHECK(static_cast<long>(r.trace.size()) == r.steps);
  CHECK(r.trace.back().energy == r.E_final);
  // Smoothing: the tension norm ends below where it started.
  CHECK(r.trace.back().tension_l2 < r.trace.front().tension_l2);
}

TEST_CASE("tension stays tangent to the sphere") {
  auto pair = fbflow::make_pair("sphere");
  Field u = glued_start(1.0 / 32.0);
  auto tau = fbflow::tension_field(u, *pair);
  CHECK(fbflow::tension_normal_relative(u, tau) <= 1e-10);
}

TEST_CASE("snapshots follow the requested cadence and always include the last state") {
  auto pair = fbflow::make_pair("sphere");
  Field u0 = glued_start(1.0 / 16.0, 0.0);
  FlowParams p;
  p.dt_factor = 0.2;
  p.snapshot_every = 16;
  auto st = fbflow::make_flow_state(u0, *pair, p.dt_factor);
  p.t_end = 50.5 * st.dt;  // 51 steps
  auto r = fbflow::run_flow(u0, *pair, p);

  CHECK(r.steps == 51);
  REQUIRE(r.snapshots.size() == 4);
  CHECK(r.snapshots[0].step == 16);
  CHECK(r.snapshots[1].step == 32);
  CHECK(r.snapshots[2].step == 48);
  CHECK(r.snapshots[3].step == 51);  // final state appended
  CHECK(r.snapshots[1].time == doctest::Approx(32 * st.dt).epsilon(1e-13));
  CHECK(r.snapshot_kinetic.size() == r.snapshots.size());
}

TEST_CASE("an over-long step is caught by the monotonicity monitor") {
  auto pair = fbflow::make_pair("sphere");
  Field u0 = glued_start(1.0 / 16.0, 0.05);
  FlowParams p;
  p.dt_factor = 0.9;  // far beyond the stable explicit range
  p.t_end = 300.0 * 0.9 / 256.0;
  auto r = fbflow::run_flow(u0, *pair, p);
  CHECK((r.worst_violation > 1e-8 || r.blew_up));
}

TEST_CASE("concentration monitoring stops the flow and reports the ball") {
  auto pair = fbflow::make_pair("sphere");
  Field u0 = glued_start(1.0 / 32.0, 0.0);
  FlowParams p;
  p.dt_factor = 0.2;
  p.t_end = 1.0;  // would be ~5000 steps without the stop rule
  p.stop_eps2 = 0.05;
  p.stop_check_every = 64;
  p.stop_radius_factor = 8.0;
  auto r = fbflow::run_flow(u0, *pair, p);

  CHECK(r.event.fired);
  CHECK(r.event.step == 64);
  CHECK(r.steps == 64);
  CHECK(r.event.ball_energy > 0.05);
  CHECK(r.event.radius == doctest::Approx(8.0 / 32.0).epsilon(1e-15));
  // The concentration ball sits near the planted bubble.
  CHECK(std::abs(r.event.x[0] - 0.25) < 0.2);
  REQUIRE(!r.snapshots.empty());
  CHECK(r.snapshots.back().step == r.steps);
}

TEST_CASE("free-boundary enforcement returns boundary values to the equator") {
  auto pair = fbflow::make_pair("sphere");
  Field u = glued_start(1.0 / 16.0, 0.0);
  const auto& g = *u.grid;
  for (int i = -g.n; i <= g.n; ++i) {
    long k = g.index(i, 0);
    if (g.node_class(k) != NodeClass::free_boundary) continue;
    u.at(k)[1] += 0.3;  // push off K (and off the sphere)
  }
  fbflow::enforce_free_boundary(u, *pair);
  for (int i = -g.n; i <= g.n; ++i) {
    long k = g.index(i, 0);
    if (g.node_class(k) != NodeClass::free_boundary) continue;
    const double* v = u.at(k);
    CHECK(v[1] == 0.0);
    CHECK(std::abs(std::sqrt(v[0] * v[0] + v[2] * v[2]) - 1.0) < 1e-14);
  }
}

TEST_CASE("local energy comparison between snapshots holds with a small constant") {
  auto pair = fbflow::make_pair("sphere");
  Field u0 = glued_start(1.0 / 32.0);
  FlowParams p;
  p.dt_factor = 0.2;
  p.snapshot_every = 32;
  p.t_end = 0.02;  // ~103 steps -> several snapshots
  auto r = fbflow::run_flow(u0, *pair, p);
  REQUIRE(r.snapshots.size() >= 2);

  double x0[2] = {0.25, 0.0};
  auto rep = fbflow::two_ball_check(r, x0, 0.2, 0, r.snapshots.size() - 1, 100.0);
  CHECK_FALSE(rep.violation);
  CHECK(rep.c_forward < 100.0);
  CHECK(rep.c_backward < 100.0);

  CHECK_THROWS_AS(fbflow::two_ball_check(r, x0, 0.2, 0, 99, 100.0),
                  fbflow::MissingSnapshot);
}

TEST_CASE("field norms use the quadrature weights") {
  auto g = GridGeom::half_disk(1.0, 1.0 / 16.0);
  std::vector<double> ones(static_cast<size_t>(g->node_count()) * 3, 1.0);
  double w = 0.0;
  for (long k = 0; k < g->node_count(); ++k) w += g->weight(k);
  CHECK(fbflow::field_l2_norm(*g, ones, 3) ==
        doctest::Approx(std::sqrt(3.0 * w)).epsilon(1e-13));
}

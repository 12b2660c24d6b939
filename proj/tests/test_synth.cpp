#include "doctest.h"

#include <cmath>
#include <vector>

#include "fbflow/geometry.hpp"
#include "fbflow/grid.hpp"
#include "fbflow/synth.hpp"

using fbflow::BubbleSpec;
using fbflow::Field;
using fbflow::GridGeom;
using fbflow::NodeClass;
using fbflow::Vec;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Dirichlet energy of a degree-1 bubble of scale lambda over the disk of
// radius R about its center: full disk 4*pi*R^2/(lambda^2+R^2), halved when
// only the upper half-disk is covered.
double bubble_energy_exact(double lambda, double R, bool half) {
  double full = 4.0 * kPi * R * R / (lambda * lambda + R * R);
  return half ? 0.5 * full : full;
}

double rel_err(double measured, double exact) { return (measured - exact) / exact; }

}  // namespace

TEST_CASE("inverse stereographic map hits the sphere with the expected landmarks") {
  double c[2] = {0.3, 0.0};
  // Unit norm everywhere.
  for (double x1 : {-0.7, 0.0, 0.4}) {
    for (double x2 : {0.0, 0.2, 0.9}) {
      Vec u = fbflow::inverse_stereographic(x1, x2, 0.5, c, 0.3);
      CHECK(std::abs(u.norm() - 1.0) < 1e-15);
    }
  }
  // Center goes to the south pole exactly.
  Vec s = fbflow::inverse_stereographic(0.3, 0.0, 0.5, c, 0.0);
  CHECK(s[0] == 0.0);
  CHECK(s[1] == 0.0);
  CHECK(s[2] == -1.0);
  // Far away approaches the rotated north pole.
  Vec far = fbflow::inverse_stereographic(1e8, 0.0, 0.5, c, kPi / 2.0);
  CHECK(std::abs(far[0] - 1.0) < 1e-6);
  CHECK(std::abs(far[2]) < 1e-6);
  // The axis x2 = center2 lands on the equator.
  Vec eq = fbflow::inverse_stereographic(-2.0, 0.0, 0.5, c, 0.7);
  CHECK(eq[1] == 0.0);
}

TEST_CASE("bubble energy density matches the conformal profile") {
  auto g = GridGeom::half_disk(1.0, 1.0 / 32.0);
  BubbleSpec spec;
  spec.lambda = 1.0;
  Field f = fbflow::bubble_field(g, spec);
  auto dens = fbflow::energy_density(f);
  struct Probe { int i, j; };
  for (Probe p : {Probe{8, 8}, Probe{0, 16}, Probe{-12, 4}}) {
    double x = g->x1(p.i), y = g->x2(p.j);
    double rho2 = x * x + y * y;
    double exact = 4.0 / ((1.0 + rho2) * (1.0 + rho2));
    double got = dens[static_cast<size_t>(g->index(p.i, p.j))];
    CHECK(std::abs(rel_err(got, exact)) < 0.02);
  }
}

TEST_CASE("bubble energies converge to the closed form from below") {
  const double lambda = 0.25;
  const double exact = bubble_energy_exact(lambda, 1.0, true);
  std::vector<double> errs;
  for (double h : {1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0}) {
    BubbleSpec spec;
    spec.lambda = lambda;
    Field f = fbflow::bubble_field(GridGeom::half_disk(1.0, h), spec);
    errs.push_back(rel_err(fbflow::dirichlet_energy(f), exact));
  }
  // Four, eight, and sixteen nodes across the scale.
  CHECK(errs[0] > -0.05);
  CHECK(errs[0] < -0.025);
  CHECK(errs[1] > -0.014);
  CHECK(errs[1] < -0.006);
  CHECK(errs[2] > -0.0045);
  CHECK(errs[2] < -0.0012);
  CHECK(std::abs(errs[2]) < std::abs(errs[1]));
  CHECK(std::abs(errs[1]) < std::abs(errs[0]));
}

TEST_CASE("unit-scale bubble carries half the sphere area over the half disk") {
  BubbleSpec spec;
  spec.lambda = 1.0;
  Field f = fbflow::bubble_field(GridGeom::half_disk(1.0, 1.0 / 32.0), spec);
  double E = fbflow::dirichlet_energy(f);
  // The staircase arc carries O(h) quadrature error where the density is
  // still ~1, so the band is wider than for the concentrated bubbles.
  CHECK(std::abs(E - kPi) < 0.025 * kPi);
}

TEST_CASE("a huge disk captures the full sphere area") {
  BubbleSpec spec;
  spec.kind = "interior_sphere";
  spec.lambda = 1.0;
  Field f = fbflow::bubble_field(GridGeom::full_disk(100.0, 0.1), spec);
  double E = fbflow::dirichlet_energy(f);
  CHECK(std::abs(E - 4.0 * kPi) < 0.01 * 4.0 * kPi);
}

TEST_CASE("background cap is the north pole at its center and sits on the equator") {
  auto g = GridGeom::half_disk(1.0, 1.0 / 32.0);
  double c[2] = {0.25, 0.0};
  Field f = fbflow::cap_base(g, 8.0, c);
  const double* u0 = f.at(g->index(8, 0));  // 8 * h = 0.25
  CHECK(u0[0] == 0.0);
  CHECK(u0[1] == 0.0);
  CHECK(u0[2] == 1.0);
  for (int i = -g->n; i <= g->n; ++i) {
    long k = g->index(i, 0);
    if (g->node_class(k) == NodeClass::outside) continue;
    CHECK(f.at(k)[1] == 0.0);
  }
}

TEST_CASE("gluing produces a unit field that is the bubble inside and the base outside") {
  auto g = GridGeom::half_disk(1.0, 1.0 / 128.0);
  auto pair = fbflow::make_pair("sphere");
  double c[2] = {0.0, 0.0};
  Field base = fbflow::cap_base(g, 8.0, c);
  BubbleSpec spec;
  spec.lambda = 1.0 / 32.0;  // collar [1/4, 1/2] sits inside the grid
  Field u = fbflow::glue(base, *pair, spec);

  for (long k = 0; k < g->node_count(); ++k) {
    if (g->node_class(k) == NodeClass::outside) continue;
    const double* v = u.at(k);
    double nrm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    CHECK(std::abs(nrm - 1.0) < 1e-14);
    if (g->node_class(k) == NodeClass::free_boundary) CHECK(v[1] == 0.0);

    double x = g->x1(g->i_of(k)), y = g->x2(g->j_of(k));
    double s = std::sqrt(x * x + y * y);
    if (s >= 2.0 * 8.0 * spec.lambda + 1e-12) {
      // Outside the collar the base passes through unchanged (up to the
      // final renormalization).
      const double* b = base.at(k);
      CHECK(std::abs(v[0] - b[0]) < 1e-14);
      CHECK(std::abs(v[1] - b[1]) < 1e-14);
      CHECK(std::abs(v[2] - b[2]) < 1e-14);
    }
  }
  // Pure bubble at the center: the south pole.
  const double* vc = u.at(g->index(0, 0));
  CHECK(std::abs(vc[2] + 1.0) < 1e-15);
}

TEST_CASE("gluing rejects malformed requests") {
  auto g = GridGeom::half_disk(1.0, 1.0 / 32.0);
  auto sphere = fbflow::make_pair("sphere");
  auto flat = fbflow::make_pair("flat");
  double c[2] = {0.0, 0.0};
  Field base = fbflow::cap_base(g, 8.0, c);

  BubbleSpec ok;
  ok.lambda = 0.25;
  CHECK_NOTHROW(fbflow::glue(base, *sphere, ok));

  // Wrong target.
  Vec z2(2);
  z2 << 0.0, 0.0;
  Field flat_base = fbflow::constant_base(g, z2, "flat");
  CHECK_THROWS_AS(fbflow::glue(flat_base, *flat, ok), fbflow::ConfigError);

  // Boundary bubble off the free-boundary line.
  BubbleSpec off = ok;
  off.center[1] = 0.1;
  CHECK_THROWS_AS(fbflow::glue(base, *sphere, off), fbflow::ConfigError);

  // Scale below the resolvable floor.
  BubbleSpec tiny = ok;
  tiny.lambda = 2.0 * g->h;
  CHECK_THROWS_AS(fbflow::glue(base, *sphere, tiny), fbflow::ConfigError);

  // Center outside the grid.
  BubbleSpec outside = ok;
  outside.center[0] = 2.0;
  CHECK_THROWS_AS(fbflow::glue(base, *sphere, outside), fbflow::ConfigError);

  // Background that disagrees with the bubble's value at infinity.
  Vec south(3);
  south << 0.0, 0.0, -1.0;
  Field bad_base = fbflow::constant_base(g, south, "sphere");
  CHECK_THROWS_AS(fbflow::glue(bad_base, *sphere, ok), fbflow::MismatchAtInfinity);
}

TEST_CASE("bubbling sequences demand strictly decreasing scales") {
  auto g = GridGeom::half_disk(1.0, 1.0 / 64.0);
  auto pair = fbflow::make_pair("sphere");
  double c[2] = {0.0, 0.0};
  Field base = fbflow::cap_base(g, 8.0, c);
  BubbleSpec spec;
  spec.lambda = 0.25;

  auto fields = fbflow::bubbling_sequence(base, *pair, spec, {0.25, 0.125});
  CHECK(fields.size() == 2);
  CHECK_THROWS_AS(fbflow::bubbling_sequence(base, *pair, spec, {0.25, 0.25}),
                  fbflow::ConfigError);
}

TEST_CASE("smooth noise is deterministic, tangential, and respects the constraints") {
  auto g = GridGeom::half_disk(1.0, 1.0 / 32.0);
  auto pair = fbflow::make_pair("sphere");
  BubbleSpec spec;
  spec.lambda = 0.5;
  Field f = fbflow::bubble_field(g, spec);

  Field a = fbflow::add_smooth_noise(f, *pair, 0.05, 1234);
  Field b = fbflow::add_smooth_noise(f, *pair, 0.05, 1234);
  CHECK(a.data == b.data);  // bitwise reproducible

  Field other = fbflow::add_smooth_noise(f, *pair, 0.05, 99);
  CHECK(a.data != other.data);

  double max_change = 0.0;
  for (long k = 0; k < g->node_count(); ++k) {
    if (g->node_class(k) == NodeClass::outside) continue;
    const double* v = a.at(k);
    double nrm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    CHECK(std::abs(nrm - 1.0) < 1e-14);
    if (g->node_class(k) == NodeClass::free_boundary) CHECK(v[1] == 0.0);
    max_change = std::max(max_change, (a.value(k) - f.value(k)).norm());
  }
  CHECK(max_change > 0.001);       // the noise actually moved the field
  CHECK(max_change < 3.0 * 0.05);  // but stayed at the requested amplitude

  Field quiet = fbflow::add_smooth_noise(f, *pair, 0.0, 1234);
  double quiet_diff = 0.0;
  for (size_t k = 0; k < quiet.data.size(); ++k)
    quiet_diff = std::max(quiet_diff, std::abs(quiet.data[k] - f.data[k]));
  CHECK(quiet_diff < 1e-15);
}

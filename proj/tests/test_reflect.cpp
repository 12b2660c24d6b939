#include "doctest.h"

#include <cmath>

#include "fbflow/flow.hpp"
#include "fbflow/geometry.hpp"
#include "fbflow/grid.hpp"
#include "fbflow/reflect.hpp"
#include "fbflow/synth.hpp"

using fbflow::BubbleSpec;
using fbflow::Field;
using fbflow::GridGeom;
using fbflow::NodeClass;
using fbflow::Vec;

namespace {

Field exact_bubble(double h) {
  BubbleSpec spec;
  spec.lambda = 1.0;
  return fbflow::bubble_field(GridGeom::half_disk(1.0, h), spec);
}

Field flat_identity(double h) {
  auto g = GridGeom::half_disk(1.0, h);
  Field f = fbflow::make_field(g, 2, "flat");
  for (long k = 0; k < g->node_count(); ++k) {
    if (g->node_class(k) == NodeClass::outside) continue;
    f.at(k)[0] = g->x1(g->i_of(k));
    f.at(k)[1] = g->x2(g->j_of(k));
  }
  return f;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("mirror ghost values reflect across the boundary circle") {
  auto pair = fbflow::make_pair("sphere");
  Vec p(3);
  p << 0.6, 0.48, 0.64;
  Vec gv = fbflow::ghost_value(*pair, p);
  CHECK(gv[0] == 0.6);
  CHECK(gv[1] == -0.48);
  CHECK(gv[2] == 0.64);
}

TEST_CASE("extension of the symmetric exact solution reproduces it on the full disk") {
  auto pair = fbflow::make_pair("sphere");
  Field u = exact_bubble(1.0 / 32.0);
  CHECK(fbflow::trace_gap(u, *pair) == 0.0);

  auto rf = fbflow::extend(u, *pair);
  const auto& gf = *rf.field.grid;
  CHECK(gf.full);

  // The scale-one bubble satisfies u(x1, -x2) = sigma(u(x1, x2)), so the
  // reflected extension must equal the bubble sampled on the full disk.
  BubbleSpec spec;
  spec.lambda = 1.0;
  Field full = fbflow::bubble_field(rf.field.grid, spec);
  double max_diff = 0.0;
  for (long k = 0; k < gf.node_count(); ++k) {
    if (gf.node_class(k) == NodeClass::outside) continue;
    max_diff = std::max(max_diff, (rf.field.value(k) - full.value(k)).norm());
  }
  CHECK(max_diff < 1e-13);

  // Provenance marks the two halves.
  for (long k = 0; k < gf.node_count(); ++k) {
    int j = gf.j_of(k);
    if (gf.node_class(k) == NodeClass::outside) {
      CHECK(rf.provenance[static_cast<size_t>(k)] == 0);
    } else if (j >= 0) {
      CHECK(rf.provenance[static_cast<size_t>(k)] == 1);
    } else {
      CHECK(rf.provenance[static_cast<size_t>(k)] == -1);
    }
  }
}

TEST_CASE("assembled connection blocks are antisymmetric with unit spectrum") {
  auto pair = fbflow::make_pair("sphere");
  auto g = GridGeom::half_disk(1.0, 1.0 / 32.0);
  double c[2] = {0.25, 0.0};
  Field base = fbflow::cap_base(g, 8.0, c);
  BubbleSpec spec;
  spec.center[0] = 0.25;
  spec.lambda = 0.25;
  Field u = fbflow::add_smooth_noise(fbflow::glue(base, *pair, spec), *pair, 0.02, 3);

  auto rf = fbflow::extend(u, *pair);
  auto pa = fbflow::assemble_potentials(rf, *pair);
  CHECK(pa.antisymmetry_max <= 1e-10);
  CHECK(pa.lambda_deviation <= 1e-8);

  // Upper half: Q and Qtilde are exactly the identity.
  const auto& gf = *rf.field.grid;
  long k_up = gf.index(3, 5);
  const double* Q = pa.q(k_up);
  const double* Qt = pa.qt(k_up);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      double expect = (a == b) ? 1.0 : 0.0;
      CHECK(Q[3 * b + a] == expect);
      CHECK(Qt[3 * b + a] == expect);
    }
  }
}

TEST_CASE("constant fields carry vanishing connection forms") {
  auto pair = fbflow::make_pair("sphere");
  auto g = GridGeom::half_disk(1.0, 1.0 / 16.0);
  Vec on_K(3);
  on_K << 1.0, 0.0, 0.0;
  Field u = fbflow::constant_base(g, on_K, "sphere");
  auto rf = fbflow::extend(u, *pair);
  auto pa = fbflow::assemble_potentials(rf, *pair);
  CHECK(max_abs(pa.Omega) < 1e-14);
  CHECK(max_abs(pa.Omega1) < 1e-14);
  CHECK(max_abs(pa.Omega2) < 1e-14);

  auto tau = fbflow::tension_field(u, *pair);
  CHECK(fbflow::divergence_form_residual(rf, pa, tau) < 1e-14);
}

TEST_CASE("flat extension uses the constant reflection matrix and closes exactly") {
  auto pair = fbflow::make_pair("flat");
  Field u = flat_identity(1.0 / 32.0);
  auto rf = fbflow::extend(u, *pair);
  auto pa = fbflow::assemble_potentials(rf, *pair);

  CHECK(pa.antisymmetry_max <= 1e-14);
  CHECK(max_abs(pa.Omega) < 1e-14);

  // Below the interface Q is the reflection diag(1, -1).
  const auto& gf = *rf.field.grid;
  long k_lo = gf.index(2, -4);
  const double* Q = pa.q(k_lo);
  CHECK(Q[0] == 1.0);
  CHECK(Q[1] == 0.0);
  CHECK(Q[2] == 0.0);
  CHECK(Q[3] == -1.0);

  auto tau = fbflow::tension_field(u, *pair);
  CHECK(fbflow::divergence_form_residual(rf, pa, tau) <= 1e-12);

  auto f_hat = fbflow::transported_force(rf, *pair, tau);
  auto rep = fbflow::global_form_residual(rf, *pair, f_hat, tau);
  CHECK(rep.residual <= 1e-12);
}

TEST_CASE("divergence-form residual shrinks at first order under refinement") {
  auto pair = fbflow::make_pair("sphere");
  double res[2];
  int idx = 0;
  for (double h : {1.0 / 16.0, 1.0 / 32.0}) {
    Field u = exact_bubble(h);
    auto rf = fbflow::extend(u, *pair);
    auto pa = fbflow::assemble_potentials(rf, *pair);
    auto tau = fbflow::tension_field(u, *pair);
    res[idx++] = fbflow::divergence_form_residual(rf, pa, tau);
  }
  CHECK(res[0] > 0.0);
  CHECK(res[1] > 0.0);
  CHECK(res[0] / res[1] >= 1.8);
}

TEST_CASE("upper-half divergence form collapses to the plain tension equation") {
  auto pair = fbflow::make_pair("sphere");

  // Exact data.
  Field u = exact_bubble(1.0 / 16.0);
  auto rf = fbflow::extend(u, *pair);
  auto pa = fbflow::assemble_potentials(rf, *pair);
  auto tau = fbflow::tension_field(u, *pair);
  CHECK(fbflow::upper_half_equivalence_defect(rf, pa, *pair, tau) <= 1e-10);

  // Generic data: the collapse is structural, not a property of the solution.
  auto g = GridGeom::half_disk(1.0, 1.0 / 32.0);
  double c[2] = {0.25, 0.0};
  Field base = fbflow::cap_base(g, 8.0, c);
  BubbleSpec spec;
  spec.center[0] = 0.25;
  spec.lambda = 0.25;
  Field w = fbflow::add_smooth_noise(fbflow::glue(base, *pair, spec), *pair, 0.05, 17);
  auto rfw = fbflow::extend(w, *pair);
  auto paw = fbflow::assemble_potentials(rfw, *pair);
  auto tauw = fbflow::tension_field(w, *pair);
  CHECK(fbflow::upper_half_equivalence_defect(rfw, paw, *pair, tauw) <= 1e-10);
}

TEST_CASE("transported force copies the tension above and stays bounded below") {
  auto pair = fbflow::make_pair("sphere");
  Field u = exact_bubble(1.0 / 16.0);
  auto rf = fbflow::extend(u, *pair);
  auto tau = fbflow::tension_field(u, *pair);
  auto f_hat = fbflow::transported_force(rf, *pair, tau);

  const auto& gf = *rf.field.grid;
  const auto& gh = *rf.half;
  for (long k = 0; k < gf.node_count(); ++k) {
    if (gf.node_class(k) == NodeClass::outside) continue;
    int i = gf.i_of(k), j = gf.j_of(k);
    if (j < 0) continue;
    long kh = gh.index(i, j);
    for (int cmp = 0; cmp < 3; ++cmp)
      CHECK(f_hat[static_cast<size_t>(k) * 3 + cmp] ==
            tau[static_cast<size_t>(kh) * 3 + cmp]);
  }

  auto rep = fbflow::global_form_residual(rf, *pair, f_hat, tau);
  // P is an isometry, so the transported force has comparable size.
  CHECK(rep.f_hat_ratio >= 0.9);
  CHECK(rep.f_hat_ratio <= 3.0);
  // The curvature correction is bounded by a fixed multiple of |grad|^2.
  CHECK(rep.upsilon_bound <= 4.0);
}

TEST_CASE("global-form residual shrinks under refinement") {
  auto pair = fbflow::make_pair("sphere");
  double res[2];
  int idx = 0;
  for (double h : {1.0 / 16.0, 1.0 / 32.0}) {
    Field u = exact_bubble(h);
    auto rf = fbflow::extend(u, *pair);
    auto tau = fbflow::tension_field(u, *pair);
    auto f_hat = fbflow::transported_force(rf, *pair, tau);
    res[idx++] = fbflow::global_form_residual(rf, *pair, f_hat, tau).residual;
  }
  CHECK(res[0] > 0.0);
  CHECK(res[1] < res[0]);
}

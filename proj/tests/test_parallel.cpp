#include "doctest.h"

#include <vector>

#include "fbflow/flow.hpp"
#include "fbflow/geometry.hpp"
#include "fbflow/grid.hpp"
#include "fbflow/parallel.hpp"
#include "fbflow/reflect.hpp"
#include "fbflow/synth.hpp"

namespace {

// RAII guard so a failing CHECK cannot leave the process-wide switch off.
struct ParallelGuard {
  bool saved;
  ParallelGuard() : saved(fbflow::par::parallel_enabled()) {}
  ~ParallelGuard() { fbflow::par::parallel_enabled() = saved; }
};

fbflow::Field noisy_test_field() {
  auto pair = fbflow::make_pair("sphere");
  auto gh = fbflow::GridGeom::half_disk(1.0, 1.0 / 32.0);
  fbflow::BubbleSpec spec;
  spec.kind = "boundary_disk";
  spec.center[0] = 0.25;
  spec.center[1] = 0.0;
  spec.lambda = 0.25;
  double center[2] = {0.25, 0.0};
  auto base = fbflow::cap_base(gh, 4.0, center);
  auto glued = fbflow::glue(base, *pair, spec);
  return fbflow::add_smooth_noise(glued, *pair, 0.03, 42);
}

}  // namespace

TEST_CASE("row loop visits every row exactly once") {
  ParallelGuard guard;
  for (bool enabled : {false, true}) {
    fbflow::par::parallel_enabled() = enabled;
    std::vector<int> hits(37, 0);
    fbflow::par::for_rows(37, [&](int j) { hits[static_cast<size_t>(j)] += 1; });
    for (int h : hits) CHECK(h == 1);
  }
}

TEST_CASE("row-ordered reduction is independent of the parallel switch") {
  ParallelGuard guard;
  std::vector<double> vals(101);
  for (size_t i = 0; i < vals.size(); ++i)
    vals[i] = 1.0 / (1.0 + 0.37 * static_cast<double>(i));

  fbflow::par::parallel_enabled() = false;
  double serial = fbflow::par::sum_rows(
      101, [&](int j) { return vals[static_cast<size_t>(j)]; });
  fbflow::par::parallel_enabled() = true;
  double parallel = fbflow::par::sum_rows(
      101, [&](int j) { return vals[static_cast<size_t>(j)]; });
  CHECK(serial == parallel);  // bitwise: same summation order by contract
}

TEST_CASE("energy, density, and tension kernels are bitwise identical serial vs parallel") {
  ParallelGuard guard;
  auto pair = fbflow::make_pair("sphere");
  auto u = noisy_test_field();

  fbflow::par::parallel_enabled() = false;
  double e_serial = fbflow::dirichlet_energy(u);
  auto dens_serial = fbflow::energy_density(u);
  auto tau_serial = fbflow::tension_field(u, *pair);

  fbflow::par::parallel_enabled() = true;
  double e_parallel = fbflow::dirichlet_energy(u);
  auto dens_parallel = fbflow::energy_density(u);
  auto tau_parallel = fbflow::tension_field(u, *pair);

  CHECK(e_serial == e_parallel);
  CHECK(dens_serial == dens_parallel);
  CHECK(tau_serial == tau_parallel);
}

TEST_CASE("reflection assembly is bitwise identical serial vs parallel") {
  ParallelGuard guard;
  auto pair = fbflow::make_pair("sphere");
  auto u = noisy_test_field();
  auto rf = fbflow::extend(u, *pair);

  fbflow::par::parallel_enabled() = false;
  auto pa_serial = fbflow::assemble_potentials(rf, *pair);
  fbflow::par::parallel_enabled() = true;
  auto pa_parallel = fbflow::assemble_potentials(rf, *pair);

  CHECK(pa_serial.Q == pa_parallel.Q);
  CHECK(pa_serial.Qtilde == pa_parallel.Qtilde);
  CHECK(pa_serial.Omega == pa_parallel.Omega);
  CHECK(pa_serial.antisymmetry_max == pa_parallel.antisymmetry_max);
}

TEST_CASE("flow steps are bitwise identical serial vs parallel") {
  ParallelGuard guard;
  auto pair = fbflow::make_pair("sphere");
  auto u0 = noisy_test_field();

  auto run_steps = [&](bool enabled) {
    fbflow::par::parallel_enabled() = enabled;
    auto st = fbflow::make_flow_state(u0, *pair, 0.2);
    for (int s = 0; s < 10; ++s) fbflow::flow_step(st, *pair);
    return st.field.data;
  };
  auto serial = run_steps(false);
  auto parallel = run_steps(true);
  CHECK(serial == parallel);
}

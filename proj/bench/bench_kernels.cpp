// Kernel benchmark: times the row-parallel kernels against the serial
// reference path (same closures, parallelism switched off) and reports the
// speedup. Results are wall-clock best-of-N to damp scheduler noise.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "fbflow/flow.hpp"
#include "fbflow/geometry.hpp"
#include "fbflow/grid.hpp"
#include "fbflow/parallel.hpp"
#include "fbflow/reflect.hpp"
#include "fbflow/synth.hpp"

namespace {

double time_best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    double s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    best = std::min(best, s);
  }
  return best;
}

struct BenchCase {
  std::string name;
  std::function<void()> fn;
};

}  // namespace

int main() {
  auto pair = fbflow::make_pair("sphere");

  std::printf("threads: %s (compiled %s OpenMP)\n\n",
              fbflow::par::parallel_enabled() ? "on" : "off",
              fbflow::par::compiled_with_openmp() ? "with" : "without");
  std::printf("%-28s %10s %12s %12s %9s\n", "kernel", "h", "serial[ms]",
              "parallel[ms]", "speedup");

  for (double h : {1.0 / 128.0, 1.0 / 256.0}) {
    auto g = fbflow::GridGeom::half_disk(1.0, h);
    double c[2] = {0.25, 0.0};
    fbflow::Field base = fbflow::cap_base(g, 8.0, c);
    fbflow::BubbleSpec spec;
    spec.center[0] = 0.25;
    spec.lambda = 0.25;
    fbflow::Field u =
        fbflow::add_smooth_noise(fbflow::glue(base, *pair, spec), *pair, 0.02, 9);
    auto rf = fbflow::extend(u, *pair);
    auto tau = fbflow::tension_field(u, *pair);
    auto st = fbflow::make_flow_state(u, *pair, 0.2);

    std::vector<BenchCase> cases;
    cases.push_back({"dirichlet_energy", [&] { fbflow::dirichlet_energy(u); }});
    cases.push_back({"energy_density", [&] { fbflow::energy_density(u); }});
    cases.push_back({"tension_field", [&] { fbflow::tension_field(u, *pair); }});
    cases.push_back(
        {"assemble_potentials", [&] { fbflow::assemble_potentials(rf, *pair); }});
    cases.push_back({"divergence_form_residual", [&] {
                       auto pa = fbflow::assemble_potentials(rf, *pair);
                       fbflow::divergence_form_residual(rf, pa, tau);
                     }});
    cases.push_back({"flow_step", [&] { fbflow::flow_step(st, *pair); }});

    const int reps = h > 1.0 / 200.0 ? 5 : 3;
    for (auto& bc : cases) {
      fbflow::par::parallel_enabled() = false;
      const double serial = time_best_of(reps, bc.fn);
      fbflow::par::parallel_enabled() = true;
      const double parallel = time_best_of(reps, bc.fn);
      std::printf("%-28s %10.6f %12.3f %12.3f %8.2fx\n", bc.name.c_str(), h,
                  serial * 1e3, parallel * 1e3,
                  parallel > 0 ? serial / parallel : 0.0);
    }
    std::printf("\n");
  }
  return 0;
}

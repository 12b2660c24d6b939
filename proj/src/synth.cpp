#include "fbflow/synth.hpp"

#include "fbflow/parallel.hpp"

#include <cmath>
#include <random>

namespace fbflow {

Vec inverse_stereographic(double x1, double x2, double lambda, const double center[2],
                          double theta) {
  const double zx = (x1 - center[0]) / lambda;
  const double zy = (x2 - center[1]) / lambda;
  const double s = zx * zx + zy * zy;
  const double d = 1.0 + s;
  Vec u(3);
  u[0] = 2.0 * zx / d;
  u[1] = 2.0 * zy / d;
  u[2] = (s - 1.0) / d;
  if (theta != 0.0) {
    const double ct = std::cos(theta), st = std::sin(theta);
    const double u0 = u[0], u2 = u[2];
    u[0] = ct * u0 + st * u2;
    u[2] = -st * u0 + ct * u2;
  }
  return u;
}

namespace {

// Value of the bubble at infinity: the rotated north pole.
Vec bubble_at_infinity(const BubbleSpec& spec) {
  Vec v(3);
  v[0] = std::sin(spec.theta);
  v[1] = 0.0;
  v[2] = std::cos(spec.theta);
  return v;
}

double quintic(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

void pin_free_row_sphere(Field& f) {
  const GridGeom& g = *f.grid;
  for (int i = -g.n; i <= g.n; ++i) {
    const long k = g.index(i, 0);
    if (g.node_class(k) != NodeClass::free_boundary) continue;
    double* u = f.at(k);
    u[1] = 0.0;
    const double nrm = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    u[0] /= nrm;
    u[1] /= nrm;
    u[2] /= nrm;
  }
}

}  // namespace

Field bubble_field(std::shared_ptr<const GridGeom> grid, const BubbleSpec& spec) {
  Field f = make_field(std::move(grid), 3, "sphere");
  const GridGeom& g = *f.grid;
  par::for_rows(g.nj(), [&](int row) {
    const int j = g.j_lo() + row;
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      f.set_value(g.index(i, j),
                  inverse_stereographic(g.x1(i), g.x2(j), spec.lambda, spec.center,
                                        spec.theta));
    }
  });
  return f;
}

Field cap_base(std::shared_ptr<const GridGeom> grid, double Lambda,
               const double center[2]) {
  // Half-turn in the (y1, y3)-plane applied exactly (component negation), so
  // the cap value at `center` is the north pole with no rounding residue and
  // the free-boundary row stays on the equator exactly.
  Field f = make_field(std::move(grid), 3, "sphere");
  const GridGeom& g = *f.grid;
  par::for_rows(g.nj(), [&](int row) {
    const int j = g.j_lo() + row;
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      Vec u = inverse_stereographic(g.x1(i), g.x2(j), Lambda, center, 0.0);
      u[0] = -u[0];
      u[2] = -u[2];
      f.set_value(g.index(i, j), u);
    }
  });
  return f;
}

Field constant_base(std::shared_ptr<const GridGeom> grid, const Vec& value,
                    const std::string& pair_name) {
  Field f = make_field(std::move(grid), static_cast<int>(value.size()), pair_name);
  const GridGeom& g = *f.grid;
  for (long k = 0; k < g.node_count(); ++k) {
    if (g.node_class(k) == NodeClass::outside) continue;
    f.set_value(k, value);
  }
  return f;
}

Field glue(const Field& base, const FreeBoundaryPair& pair, const BubbleSpec& spec,
           double neck_width) {
  if (base.m != 3 || pair.name() != "sphere")
    throw ConfigError("glue: bubble synthesis targets the sphere pair");
  if (spec.kind == "boundary_disk" && spec.center[1] != 0.0)
    throw ConfigError("glue: boundary_disk bubbles must be centered on x2 = 0");
  const GridGeom& g = *base.grid;
  if (spec.lambda < 4 * g.h)
    throw ConfigError("glue: scale below 4h is unresolvable on this grid");
  const double nw = neck_width > 0.0 ? neck_width : 8.0 * spec.lambda;

  const Vec at_inf = bubble_at_infinity(spec);
  const Vec base_at_center = [&] {
    // Nearest lattice node to the bubble center.
    const int ic = static_cast<int>(std::llround(spec.center[0] / g.h));
    const int jc = static_cast<int>(std::llround(spec.center[1] / g.h));
    if (!g.in_disc(ic, jc)) throw ConfigError("glue: bubble center outside the grid");
    return base.value(g.index(ic, jc));
  }();
  if ((at_inf - base_at_center).norm() > 1e-8)
    throw MismatchAtInfinity("bubble value at infinity differs from the background at "
                             "the gluing center by " +
                             std::to_string((at_inf - base_at_center).norm()));

  Field out = make_field(base.grid, 3, base.pair_name);
  par::for_rows(g.nj(), [&](int row) {
    const int j = g.j_lo() + row;
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      const long k = g.index(i, j);
      const Vec bub = inverse_stereographic(g.x1(i), g.x2(j), spec.lambda, spec.center,
                                            spec.theta);
      const double dx = g.x1(i) - spec.center[0];
      const double dy = g.x2(j) - spec.center[1];
      const double s = std::sqrt(dx * dx + dy * dy);
      const double wgt = quintic((s - nw) / nw);  // 0: bubble, 1: background
      const double* b = base.at(k);
      double v[3];
      double nrm = 0.0;
      for (int c = 0; c < 3; ++c) {
        v[c] = (1.0 - wgt) * bub[c] + wgt * b[c];
        nrm += v[c] * v[c];
      }
      nrm = std::sqrt(nrm);
      if (nrm == 0.0) nrm = 1.0;
      double* o = out.at(k);
      for (int c = 0; c < 3; ++c) o[c] = v[c] / nrm;
    }
  });
  pin_free_row_sphere(out);
  return out;
}

std::vector<Field> bubbling_sequence(const Field& base, const FreeBoundaryPair& pair,
                                     const BubbleSpec& spec,
                                     const std::vector<double>& scales) {
  for (size_t a = 1; a < scales.size(); ++a)
    if (!(scales[a] < scales[a - 1]))
      throw ConfigError("bubbling_sequence: scales must be strictly decreasing");
  std::vector<Field> out;
  out.reserve(scales.size());
  for (double lam : scales) {
    BubbleSpec s = spec;
    s.lambda = lam;
    out.push_back(glue(base, pair, s));
  }
  return out;
}

Field add_smooth_noise(const Field& f, const FreeBoundaryPair& pair, double amplitude,
                       unsigned long seed, int modes) {
  const GridGeom& g = *f.grid;
  const int m = f.m;
  const EmbeddedTarget& target = pair.target();

  // Draw the mode table first so the node loop is parallel-safe and the
  // realization depends only on (seed, modes, m).
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(0.5, 3.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  struct Mode {
    double kx, ky;
    double ph[8];
  };
  std::vector<Mode> table(static_cast<size_t>(modes));
  for (auto& md : table) {
    md.kx = freq(rng);
    md.ky = freq(rng);
    for (int c = 0; c < m; ++c) md.ph[c] = phase(rng);
  }

  Field out = f;
  par::for_rows(g.nj(), [&](int row) {
    const int j = g.j_lo() + row;
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      const long k = g.index(i, j);
      const Vec u = f.value(k);
      Vec v = Vec::Zero(m);
      for (const auto& md : table) {
        const double cy = std::cos(md.ky * M_PI * g.x2(j));
        for (int c = 0; c < m; ++c)
          v[c] += std::cos(md.kx * M_PI * g.x1(i) + md.ph[c]) * cy;
      }
      v *= amplitude / modes;
      v = target.tangent_projector(u) * v;
      Vec w = target.project(u + v);
      if (g.node_class(k) == NodeClass::free_boundary) w = pair.project_K(w);
      out.set_value(k, w);
    }
  });
  return out;
}

}  // namespace fbflow

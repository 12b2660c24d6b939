#include "fbflow/grid.hpp"

#include "fbflow/geometry.hpp"
#include "fbflow/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace fbflow {

std::shared_ptr<const GridGeom> GridGeom::build(double radius, double h, bool full) {
  if (!(radius > 0.0) || !(h > 0.0) || radius / h < 2.0)
    throw ConfigError("grid requires radius > 0 and h <= radius/2");
  auto g = std::shared_ptr<GridGeom>(new GridGeom());
  g->radius = radius;
  g->h = h;
  g->n = static_cast<int>(std::llround(radius / h));
  g->full = full;
  const int n = g->n;
  g->classes.assign(static_cast<size_t>(g->node_count()), NodeClass::outside);
  g->weights.assign(static_cast<size_t>(g->node_count()), 0.0);

  auto in_disc = [&](int i, int j) { return g->in_disc(i, j); };
  long count = 0;
  for (int j = g->j_lo(); j <= n; ++j) {
    for (int i = -n; i <= n; ++i) {
      if (!in_disc(i, j)) continue;
      ++count;
      const long k = g->index(i, j);
      // South neighbour must be a real lattice row: on the half-disk the
      // free row has none, which keeps it out of the interior class.
      const bool south_ok = full ? in_disc(i, j - 1) : (j - 1 >= 0 && in_disc(i, j - 1));
      const bool nb_all =
          in_disc(i + 1, j) && in_disc(i - 1, j) && in_disc(i, j + 1) && south_ok;
      NodeClass c = NodeClass::arc;
      if (!full && j == 0 && std::abs(i) < n)
        c = NodeClass::free_boundary;
      else if (nb_all && (full || j >= 1))
        c = NodeClass::interior;
      g->classes[static_cast<size_t>(k)] = c;
      g->weights[static_cast<size_t>(k)] =
          (c == NodeClass::interior) ? h * h : 0.5 * h * h;
    }
  }
  g->mask_count_ = count;
  return g;
}

std::shared_ptr<const GridGeom> GridGeom::half_disk(double radius, double h) {
  return build(radius, h, false);
}

std::shared_ptr<const GridGeom> GridGeom::full_disk(double radius, double h) {
  return build(radius, h, true);
}

Field make_field(std::shared_ptr<const GridGeom> grid, int m, std::string pair_name) {
  Field f;
  f.grid = std::move(grid);
  f.m = m;
  f.pair_name = std::move(pair_name);
  f.data.assign(static_cast<size_t>(f.grid->node_count()) * m, 0.0);
  return f;
}

Region region_all(const GridGeom& g) {
  Region r(static_cast<size_t>(g.node_count()), 0);
  for (long k = 0; k < g.node_count(); ++k)
    r[static_cast<size_t>(k)] = g.classes[static_cast<size_t>(k)] != NodeClass::outside;
  return r;
}

Region region_ball(const GridGeom& g, const double x0[2], double r) {
  Region out(static_cast<size_t>(g.node_count()), 0);
  const double r2 = r * r + 1e-14;  // keep nodes on the rim despite rounding
  for (int j = g.j_lo(); j <= g.n; ++j) {
    const double dy = g.x2(j) - x0[1];
    for (int i = -g.n; i <= g.n; ++i) {
      const long k = g.index(i, j);
      if (g.classes[static_cast<size_t>(k)] == NodeClass::outside) continue;
      const double dx = g.x1(i) - x0[0];
      if (dx * dx + dy * dy <= r2) out[static_cast<size_t>(k)] = 1;
    }
  }
  return out;
}

void region_subtract(Region& a, const Region& b) {
  for (size_t k = 0; k < a.size(); ++k)
    if (b[k]) a[k] = 0;
}

void region_intersect(Region& a, const Region& b) {
  for (size_t k = 0; k < a.size(); ++k)
    if (!b[k]) a[k] = 0;
}

long region_count(const Region& a) {
  long c = 0;
  for (unsigned char v : a) c += v;
  return c;
}

void node_gradient(const Field& f, int i, int j, double* out) {
  const GridGeom& g = *f.grid;
  const int m = f.m;
  if (!g.in_disc(i, j)) {
    std::fill(out, out + 2 * m, 0.0);
    return;
  }
  const double h = g.h;
  const double* uc = f.at(g.index(i, j));
  const bool e = g.in_disc(i + 1, j), w = g.in_disc(i - 1, j);
  const bool nn = g.in_disc(i, j + 1), s = g.in_disc(i, j - 1);
  const double* ue = e ? f.at(g.index(i + 1, j)) : nullptr;
  const double* uw = w ? f.at(g.index(i - 1, j)) : nullptr;
  const double* un = nn ? f.at(g.index(i, j + 1)) : nullptr;
  const double* us = s ? f.at(g.index(i, j - 1)) : nullptr;
  for (int c = 0; c < m; ++c) {
    double gx = 0.0;
    if (e && w)
      gx = (ue[c] - uw[c]) / (2 * h);
    else if (e)
      gx = (ue[c] - uc[c]) / h;
    else if (w)
      gx = (uc[c] - uw[c]) / h;
    double gy = 0.0;
    if (nn && s)
      gy = (un[c] - us[c]) / (2 * h);
    else if (nn)
      gy = (un[c] - uc[c]) / h;
    else if (s)
      gy = (uc[c] - us[c]) / h;
    out[c] = gx;
    out[m + c] = gy;
  }
}

namespace {

inline double node_density(const Field& f, int i, int j) {
  double grad[16];
  node_gradient(f, i, j, grad);
  double e = 0.0;
  for (int c = 0; c < 2 * f.m; ++c) e += grad[c] * grad[c];
  return 0.5 * e;
}

}  // namespace

std::vector<double> energy_density(const Field& f) {
  const GridGeom& g = *f.grid;
  std::vector<double> dens(static_cast<size_t>(g.node_count()), 0.0);
  par::for_rows(g.nj(), [&](int row) {
    const int j = g.j_lo() + row;
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      dens[static_cast<size_t>(g.index(i, j))] = node_density(f, i, j);
    }
  });
  return dens;
}

double dirichlet_energy(const Field& f) {
  const GridGeom& g = *f.grid;
  return par::sum_rows(g.nj(), [&](int row) {
    const int j = g.j_lo() + row;
    double s = 0.0;
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      s += node_density(f, i, j) * g.weights[static_cast<size_t>(g.index(i, j))];
    }
    return s;
  });
}

double dirichlet_energy(const Field& f, const Region& region) {
  const GridGeom& g = *f.grid;
  return par::sum_rows(g.nj(), [&](int row) {
    const int j = g.j_lo() + row;
    double s = 0.0;
    for (int i = -g.n; i <= g.n; ++i) {
      const long k = g.index(i, j);
      if (!region[static_cast<size_t>(k)]) continue;
      if (g.classes[static_cast<size_t>(k)] == NodeClass::outside) continue;
      s += node_density(f, i, j) * g.weights[static_cast<size_t>(k)];
    }
    return s;
  });
}

double ball_energy(const Field& f, const double x0[2], double r) {
  const GridGeom& g = *f.grid;
  if (r < 2 * g.h) throw RadiusTooSmall("ball radius below 2h");
  const double r2 = r * r + 1e-14;
  const int i0 = std::max(-g.n, static_cast<int>(std::floor((x0[0] - r) / g.h)) - 1);
  const int i1 = std::min(g.n, static_cast<int>(std::ceil((x0[0] + r) / g.h)) + 1);
  const int j0 = std::max(g.j_lo(), static_cast<int>(std::floor((x0[1] - r) / g.h)) - 1);
  const int j1 = std::min(g.n, static_cast<int>(std::ceil((x0[1] + r) / g.h)) + 1);
  double s = 0.0;
  for (int j = j0; j <= j1; ++j) {
    const double dy = g.x2(j) - x0[1];
    for (int i = i0; i <= i1; ++i) {
      if (!g.in_disc(i, j)) continue;
      const double dx = g.x1(i) - x0[0];
      if (dx * dx + dy * dy > r2) continue;
      s += node_density(f, i, j) * g.weights[static_cast<size_t>(g.index(i, j))];
    }
  }
  return s;
}

double ball_energy_density(const Field& f, const std::vector<double>& density,
                           const double x0[2], double r) {
  const GridGeom& g = *f.grid;
  if (r < 2 * g.h) throw RadiusTooSmall("ball radius below 2h");
  const double r2 = r * r + 1e-14;
  const int i0 = std::max(-g.n, static_cast<int>(std::floor((x0[0] - r) / g.h)) - 1);
  const int i1 = std::min(g.n, static_cast<int>(std::ceil((x0[0] + r) / g.h)) + 1);
  const int j0 = std::max(g.j_lo(), static_cast<int>(std::floor((x0[1] - r) / g.h)) - 1);
  const int j1 = std::min(g.n, static_cast<int>(std::ceil((x0[1] + r) / g.h)) + 1);
  double s = 0.0;
  for (int j = j0; j <= j1; ++j) {
    const double dy = g.x2(j) - x0[1];
    for (int i = i0; i <= i1; ++i) {
      if (!g.in_disc(i, j)) continue;
      const double dx = g.x1(i) - x0[0];
      if (dx * dx + dy * dy > r2) continue;
      const long k = g.index(i, j);
      s += density[static_cast<size_t>(k)] * g.weights[static_cast<size_t>(k)];
    }
  }
  return s;
}

double oscillation(const Field& f, const Region& region) {
  const GridGeom& g = *f.grid;
  const int m = f.m;
  std::vector<long> nodes;
  nodes.reserve(1024);
  for (long k = 0; k < g.node_count(); ++k) {
    if (region[static_cast<size_t>(k)] &&
        g.classes[static_cast<size_t>(k)] != NodeClass::outside)
      nodes.push_back(k);
  }
  if (nodes.empty()) return 0.0;
  const long cnt = static_cast<long>(nodes.size());

  std::vector<double> vals(static_cast<size_t>(cnt) * m);
  for (long a = 0; a < cnt; ++a) {
    const double* v = f.at(nodes[static_cast<size_t>(a)]);
    std::memcpy(&vals[static_cast<size_t>(a) * m], v, sizeof(double) * m);
  }

  auto dist2 = [&](long a, long b) {
    const double* pa = &vals[static_cast<size_t>(a) * m];
    const double* pb = &vals[static_cast<size_t>(b) * m];
    double d = 0.0;
    for (int c = 0; c < m; ++c) {
      const double t = pa[c] - pb[c];
      d += t * t;
    }
    return d;
  };

  double best2 = 0.0;
  for (int seed = 0; seed < 2 * m; ++seed) {
    const int comp = seed % m;
    const double sign = seed < m ? 1.0 : -1.0;
    long p = 0;
    double pv = sign * vals[static_cast<size_t>(0) * m + comp];
    for (long a = 1; a < cnt; ++a) {
      const double v = sign * vals[static_cast<size_t>(a) * m + comp];
      if (v > pv) {
        pv = v;
        p = a;
      }
    }
    for (int it = 0; it < 4; ++it) {
      long far = 0;
      double fd = dist2(0, p);
      for (long a = 1; a < cnt; ++a) {
        const double d = dist2(a, p);
        if (d > fd) {
          fd = d;
          far = a;
        }
      }
      best2 = std::max(best2, fd);
      p = far;
    }
  }
  return std::sqrt(best2);
}

ManifoldDrift manifold_drift(const Field& f, const FreeBoundaryPair& pair) {
  const GridGeom& g = *f.grid;
  ManifoldDrift d;
  for (long k = 0; k < g.node_count(); ++k) {
    const NodeClass c = g.classes[static_cast<size_t>(k)];
    if (c == NodeClass::outside) continue;
    const Vec v = f.value(k);
    d.max_dist_target = std::max(d.max_dist_target, pair.target().distance(v));
    if (c == NodeClass::free_boundary)
      d.max_dist_K = std::max(d.max_dist_K, pair.distance_K(v));
  }
  return d;
}

}  // namespace fbflow

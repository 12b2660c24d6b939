#include "fbflow/analyze.hpp"

#include "fbflow/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace fbflow {

namespace {

// Sum of dens * weight over a region, row-major node order.
double region_energy(const GridGeom& g, const std::vector<double>& dens,
                     const Region& reg) {
  double s = 0.0;
  for (long k = 0; k < g.node_count(); ++k) {
    if (reg[static_cast<size_t>(k)])
      s += dens[static_cast<size_t>(k)] * g.weights[static_cast<size_t>(k)];
  }
  return s;
}

NeckPiece make_piece(const Field& f, const std::vector<double>& dens,
                     std::string name, Region nodes) {
  NeckPiece p;
  p.name = std::move(name);
  p.count = region_count(nodes);
  p.energy = region_energy(*f.grid, dens, nodes);
  p.oscillation = oscillation(f, nodes);
  p.nodes = std::move(nodes);
  return p;
}

void require_matching_grids(const Field& a, const Field& b, const char* what) {
  const GridGeom& ga = *a.grid;
  const GridGeom& gb = *b.grid;
  if (ga.h != gb.h || ga.radius != gb.radius || ga.full != gb.full ||
      a.m != b.m)
    throw ConfigError(std::string(what) + ": fields live on different grids");
}

// Radial balance integrand sum_c (u_r)_c^2 - energy density, with the radial
// direction taken from x0; weighted sum over the region nodes.
double radial_balance(const Field& f, const Region& reg, const double x0[2]) {
  const GridGeom& g = *f.grid;
  const int m = f.m;
  double grad[16];
  double s = 0.0;
  for (int j = g.j_lo(); j <= g.n; ++j) {
    for (int i = -g.n; i <= g.n; ++i) {
      const long k = g.index(i, j);
      if (!reg[static_cast<size_t>(k)]) continue;
      if (g.classes[static_cast<size_t>(k)] == NodeClass::outside) continue;
      const double dx = g.x1(i) - x0[0];
      const double dy = g.x2(j) - x0[1];
      const double rr = std::sqrt(dx * dx + dy * dy);
      const double cth = rr > 0 ? dx / rr : 0.0;
      const double sth = rr > 0 ? dy / rr : 0.0;
      node_gradient(f, i, j, grad);
      double ur2 = 0.0, e2 = 0.0;
      for (int c = 0; c < m; ++c) {
        const double ur = grad[c] * cth + grad[m + c] * sth;
        ur2 += ur * ur;
        e2 += grad[c] * grad[c] + grad[m + c] * grad[m + c];
      }
      s += (ur2 - 0.5 * e2) * g.weights[static_cast<size_t>(k)];
    }
  }
  return s;
}

// Nodal gradient arrays (d1 then d2, m doubles each per node), zero outside.
void nodal_gradients(const Field& f, std::vector<double>& gx,
                     std::vector<double>& gy) {
  const GridGeom& g = *f.grid;
  const int m = f.m;
  gx.assign(static_cast<size_t>(g.node_count()) * m, 0.0);
  gy.assign(static_cast<size_t>(g.node_count()) * m, 0.0);
  par::for_rows(g.nj(), [&](int row) {
    const int j = g.j_lo() + row;
    double grad[16];
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      node_gradient(f, i, j, grad);
      const size_t k = static_cast<size_t>(g.index(i, j)) * m;
      for (int c = 0; c < m; ++c) {
        gx[k + c] = grad[c];
        gy[k + c] = grad[m + c];
      }
    }
  });
}

// Bilinear sample of a per-node scalar array at a physical point; entries at
// off-disc nodes are zero and cells outside the lattice sample as zero.
double bilerp(const GridGeom& g, const std::vector<double>& arr, int m, int c,
              double px, double py) {
  const double fx = (px + g.radius) / g.h;
  const double fy = py / g.h - g.j_lo();
  const int i0 = static_cast<int>(std::floor(fx));
  const int j0 = static_cast<int>(std::floor(fy));
  const double tx = fx - i0;
  const double ty = fy - j0;
  auto at = [&](int li, int lj) -> double {
    if (li < 0 || li >= g.ni() || lj < 0 || lj >= g.nj()) return 0.0;
    return arr[(static_cast<size_t>(lj) * g.ni() + li) * m + c];
  };
  return at(i0, j0) * (1 - tx) * (1 - ty) + at(i0 + 1, j0) * tx * (1 - ty) +
         at(i0, j0 + 1) * (1 - tx) * ty + at(i0 + 1, j0 + 1) * tx * ty;
}

void require_boundary_center(const Field& f, const double x0[2], double t,
                             double t_max, const char* op) {
  const GridGeom& g = *f.grid;
  if (g.full)
    throw BadCenter(std::string(op) + ": grid has no free-boundary line");
  if (std::abs(x0[1]) > 1e-12)
    throw BadCenter(std::string(op) + ": center off the free-boundary line");
  if (t < 4 * g.h - 1e-12)
    throw BadCenter(std::string(op) + ": radius below 4h");
  if (std::abs(x0[0]) + t > t_max + 1e-12)
    throw BadCenter(std::string(op) + ": radius reaches past the arc");
}

double clamp_dust(double e) { return (e < 0.0 && e > -1e-12) ? 0.0 : e; }

}  // namespace

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::interior: return "interior";
    case Regime::boundary_finite_a: return "boundary_finite_a";
    case Regime::boundary_infinite: return "boundary_infinite";
  }
  return "unknown";
}

std::vector<Detection> detect_concentration(const Field& f, double eps_sq,
                                            double r_det) {
  const GridGeom& g = *f.grid;
  if (r_det < 4 * g.h - 1e-12)
    throw ConfigError("detect_concentration: r_det below 4h");
  const std::vector<double> dens = energy_density(f);

  // Ball-energy landscape over all domain nodes.
  std::vector<double> be(static_cast<size_t>(g.node_count()), 0.0);
  par::for_rows(g.nj(), [&](int row) {
    const int j = g.j_lo() + row;
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      const double x0[2] = {g.x1(i), g.x2(j)};
      be[static_cast<size_t>(g.index(i, j))] =
          ball_energy_density(f, dens, x0, r_det);
    }
  });

  // Candidates: above threshold and not below any lattice neighbour.
  struct Cand {
    double energy;
    long k;
  };
  std::vector<Cand> cands;
  for (int j = g.j_lo(); j <= g.n; ++j) {
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      const long k = g.index(i, j);
      const double e = be[static_cast<size_t>(k)];
      if (e <= eps_sq) continue;
      bool peak = true;
      const int di[4] = {1, -1, 0, 0};
      const int dj[4] = {0, 0, 1, -1};
      for (int d = 0; d < 4 && peak; ++d) {
        const int ii = i + di[d], jj = j + dj[d];
        if (g.in_disc(ii, jj) &&
            be[static_cast<size_t>(g.index(ii, jj))] > e)
          peak = false;
      }
      if (peak) cands.push_back({e, k});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.energy != b.energy) return a.energy > b.energy;
    return a.k < b.k;
  });

  // Greedy peak picking with suppression radius r_det.
  std::vector<Detection> out;
  for (const Cand& c : cands) {
    const double cx = g.x1(g.i_of(c.k)), cy = g.x2(g.j_of(c.k));
    bool merged = false;
    for (const Detection& d : out) {
      const double dx = d.x[0] - cx, dy = d.x[1] - cy;
      if (dx * dx + dy * dy <= r_det * r_det + 1e-14) {
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back({{cx, cy}, c.energy});
  }
  return out;
}

ConcentrationPoint select_scale(const Field& f, const double x_hint[2],
                                double eps_sq, const SelectOptions& opts) {
  const GridGeom& g = *f.grid;
  const double h = g.h;
  const double target = eps_sq / 32.0;
  const double cap = opts.r_cap_factor * g.radius;
  const std::vector<double> dens = energy_density(f);

  auto ball = [&](double r) { return ball_energy_density(f, dens, x_hint, r); };

  // Coarse scan in h steps from the 4h floor up to the cap.
  double r = 4 * h;
  double e = ball(r);
  const bool saturated = e >= target;
  while (e < target && r < cap) {
    r += h;
    e = ball(r);
  }
  if (e < target)
    throw NoScale("select_scale: ball energy " + std::to_string(e) +
                  " below target " + std::to_string(target) +
                  " at cap radius " + std::to_string(r));

  if (opts.fine && !saturated) {
    // First h/16 step inside [r - h, r] that reaches the target.
    for (int k = 1; k <= 16; ++k) {
      const double rf = k == 16 ? r : r - h + k * (h / 16.0);
      const double ef = ball(rf);
      if (ef >= target) {
        r = rf;
        e = ef;
        break;
      }
    }
  }

  ConcentrationPoint c;
  c.x[0] = x_hint[0];
  c.x[1] = x_hint[1];
  c.r = r;
  c.d = std::abs(x_hint[1]);
  c.a = c.d / r;
  c.achieved = e;
  c.saturated = saturated;
  if (g.full)
    c.regime = Regime::interior;
  else
    c.regime = c.a <= opts.a_max ? Regime::boundary_finite_a
                                 : Regime::boundary_infinite;
  return c;
}

Field rescale(const Field& f, const ConcentrationPoint& c, double R,
              double h_out) {
  const GridGeom& g = *f.grid;
  if (c.r * R > g.radius + 1e-12)
    throw OutOfDomain("rescale: r*R exceeds the domain radius");
  const auto pair = make_pair(f.pair_name);

  const bool keep_line = !g.full && c.regime == Regime::boundary_finite_a &&
                         c.d < g.h / 2;
  auto out_grid = keep_line ? GridGeom::half_disk(R, h_out)
                            : GridGeom::full_disk(R, h_out);
  Field out = make_field(out_grid, f.m, f.pair_name);
  out.time = f.time;
  out.step = f.step;

  const int m = f.m;
  par::for_rows(out_grid->nj(), [&](int row) {
    const int j = out_grid->j_lo() + row;
    Vec v(m);
    for (int i = -out_grid->n; i <= out_grid->n; ++i) {
      if (!out_grid->in_disc(i, j)) continue;
      const double px = c.x[0] + c.r * out_grid->x1(i);
      const double py = c.x[1] + c.r * out_grid->x2(j);
      const double fx = (px + g.radius) / g.h;
      const double fy = py / g.h - g.j_lo();
      const int i0 = static_cast<int>(std::floor(fx));
      const int j0 = static_cast<int>(std::floor(fy));
      // Cells touching the complement of the source disc sample as zero.
      const int si0 = i0 - g.n, sj0 = j0 + g.j_lo();
      if (!g.in_disc(si0, sj0) || !g.in_disc(si0 + 1, sj0) ||
          !g.in_disc(si0, sj0 + 1) || !g.in_disc(si0 + 1, sj0 + 1))
        continue;
      const double tx = fx - i0, ty = fy - j0;
      const double* v00 = f.at(g.index(si0, sj0));
      const double* v10 = f.at(g.index(si0 + 1, sj0));
      const double* v01 = f.at(g.index(si0, sj0 + 1));
      const double* v11 = f.at(g.index(si0 + 1, sj0 + 1));
      double norm2 = 0.0;
      for (int cc = 0; cc < m; ++cc) {
        v[cc] = v00[cc] * (1 - tx) * (1 - ty) + v10[cc] * tx * (1 - ty) +
                v01[cc] * (1 - tx) * ty + v11[cc] * tx * ty;
        norm2 += v[cc] * v[cc];
      }
      if (norm2 > 1e-24) v = pair->target().project(v);
      double* dst = out.at(out_grid->index(i, j));
      for (int cc = 0; cc < m; ++cc) dst[cc] = v[cc];
    }
  });
  return out;
}

NeckDecomposition neck_decompose(const Field& f, const ConcentrationPoint& c,
                                 double delta, double R) {
  const GridGeom& g = *f.grid;
  if (2 * c.r * R >= delta / 2)
    throw ScaleOverlap("neck_decompose: 2 r R = " + std::to_string(2 * c.r * R) +
                       " reaches delta/2 = " + std::to_string(delta / 2));
  const std::vector<double> dens = energy_density(f);

  NeckDecomposition nd;
  nd.x[0] = c.x[0];
  nd.x[1] = c.x[1];
  nd.r = c.r;
  nd.d = c.d;
  nd.regime = c.regime;
  nd.delta = delta;
  nd.R = R;

  Region annulus = region_ball(g, c.x, delta);
  {
    const Region inner = region_ball(g, c.x, R * c.r);
    region_subtract(annulus, inner);
  }
  nd.annulus = annulus;
  nd.annulus_count = region_count(annulus);
  nd.annulus_energy = region_energy(g, dens, annulus);

  const double xp[2] = {c.x[0], 0.0};
  Region rest = annulus;
  auto carve = [&](double center[2], double radius) {
    Region piece = region_ball(g, center, radius);
    region_intersect(piece, rest);
    region_subtract(rest, piece);
    return piece;
  };

  std::vector<NeckPiece> pieces;
  if (c.regime == Regime::boundary_finite_a) {
    double xpm[2] = {xp[0], xp[1]};
    Region o3 = carve(xpm, 2 * R * c.r);
    Region o2 = carve(xpm, delta / 2);
    pieces.push_back(make_piece(f, dens, "omega1", rest));
    pieces.push_back(make_piece(f, dens, "omega2", std::move(o2)));
    pieces.push_back(make_piece(f, dens, "omega3", std::move(o3)));
  } else {
    double xc[2] = {c.x[0], c.x[1]};
    double xpm[2] = {xp[0], xp[1]};
    Region o4 = carve(xc, c.d);
    Region o3 = carve(xpm, 2 * c.d);
    Region o2 = carve(xpm, delta / 2);
    pieces.push_back(make_piece(f, dens, "omega1", rest));
    pieces.push_back(make_piece(f, dens, "omega2", std::move(o2)));
    pieces.push_back(make_piece(f, dens, "omega3", std::move(o3)));
    pieces.push_back(make_piece(f, dens, "omega4", std::move(o4)));
  }

  // Disjoint by construction (sequential carving); verify the cover exactly.
  long total = 0;
  std::vector<unsigned char> seen(annulus.size(), 0);
  bool overlap = false;
  for (const NeckPiece& p : pieces) {
    total += p.count;
    for (size_t k = 0; k < seen.size(); ++k) {
      if (!p.nodes[k]) continue;
      if (seen[k] || !annulus[k]) overlap = true;
      seen[k] = 1;
    }
  }
  nd.partition_exact = !overlap && total == nd.annulus_count;
  nd.pieces = std::move(pieces);
  return nd;
}

DyadicProfile dyadic_profile(const Field& f, const ConcentrationPoint& c,
                             double delta, double R) {
  const GridGeom& g = *f.grid;
  const double q = 2 * c.r * R;
  if (q >= delta / 2)
    throw ScaleOverlap("dyadic_profile: 2 r R = " + std::to_string(q) +
                       " reaches delta/2 = " + std::to_string(delta / 2));
  const std::vector<double> dens = energy_density(f);

  DyadicProfile p;
  p.center[0] = c.x[0];
  p.center[1] = 0.0;
  p.base_scale = q;
  p.m_n = static_cast<int>(std::floor(std::log2((delta / 2) / q) + 1e-9));

  for (int i = 0; i < p.m_n; ++i) {
    Region reg = region_ball(g, p.center, q * std::pow(2.0, i + 1));
    const Region inner = region_ball(g, p.center, q * std::pow(2.0, i));
    region_subtract(reg, inner);
    p.f.push_back(region_energy(g, dens, reg));
    p.defects.push_back(std::abs(radial_balance(f, reg, p.center)));
    p.covered_energy += p.f.back();
  }
  if (!p.f.empty()) {
    const size_t best =
        std::max_element(p.f.begin(), p.f.end()) - p.f.begin();
    p.max_at_ends = best == 0 || best + 1 == p.f.size();
  }
  return p;
}

double middle_third_max(const DyadicProfile& p) {
  const int m = p.m_n;
  const int lo = (m + 2) / 3;
  const int hi = (2 * m) / 3;
  double best = 0.0;
  for (int i = lo; i <= hi && i < m; ++i)
    best = std::max(best, p.f[static_cast<size_t>(i)]);
  return best;
}

EnergyLedger energy_ledger(const Field& u, const Field& base,
                           const std::vector<ConcentrationPoint>& bubbles,
                           double delta) {
  require_matching_grids(u, base, "energy_ledger");
  const GridGeom& g = *u.grid;
  const std::vector<double> dens_u = energy_density(u);
  const std::vector<double> dens_b = energy_density(base);

  EnergyLedger led;
  led.E_total = region_energy(g, dens_u, region_all(g));
  led.E_base = region_energy(g, dens_b, region_all(g));

  double neck = 0.0;
  for (const ConcentrationPoint& c : bubbles) {
    const double eb = ball_energy_density(u, dens_u, c.x, delta / 2) -
                      ball_energy_density(base, dens_b, c.x, delta / 2);
    led.bubble_energies.push_back(clamp_dust(eb));

    Region ann = region_ball(g, c.x, delta);
    const Region inner = region_ball(g, c.x, delta / 2);
    region_subtract(ann, inner);
    for (long k = 0; k < g.node_count(); ++k) {
      if (!ann[static_cast<size_t>(k)]) continue;
      neck += (dens_u[static_cast<size_t>(k)] - dens_b[static_cast<size_t>(k)]) *
              g.weights[static_cast<size_t>(k)];
    }
  }
  led.E_neck = clamp_dust(neck);

  double sum_bub = 0.0;
  for (double e : led.bubble_energies) sum_bub += e;
  led.residual = led.E_total - led.E_base - sum_bub - led.E_neck;
  return led;
}

double oscillation_neck(const Field& f, const NeckDecomposition& nd) {
  return oscillation(f, nd.annulus);
}

MassEstimate concentration_mass(const std::vector<Field>& history,
                                const double x0[2]) {
  if (history.size() < 2)
    throw MissingSnapshot("concentration_mass: need at least two snapshots");
  const Field& near = history[history.size() - 2];
  const Field& fin = history.back();
  require_matching_grids(near, fin, "concentration_mass");
  const GridGeom& g = *near.grid;

  const std::vector<double> dn = energy_density(near);
  const std::vector<double> df = energy_density(fin);
  MassEstimate est;
  const double rr[3] = {8 * g.h, 16 * g.h, 32 * g.h};
  for (int a = 0; a < 3; ++a) {
    est.radii[a] = rr[a];
    est.at[a] = ball_energy_density(near, dn, x0, rr[a]) -
                ball_energy_density(fin, df, x0, rr[a]);
  }
  est.value = (4 * est.at[2] - est.at[1]) / 3;
  return est;
}

PohozaevReport pohozaev_boundary(const Field& f, const std::vector<double>& tau,
                                 const double x0[2], double t) {
  const GridGeom& g = *f.grid;
  require_boundary_center(f, x0, t, g.radius - 2 * g.h, "pohozaev_boundary");
  const int m = f.m;
  if (tau.size() != static_cast<size_t>(g.node_count()) * m)
    throw ConfigError("pohozaev_boundary: tension array size mismatch");

  std::vector<double> gx, gy;
  nodal_gradients(f, gx, gy);

  // Half-circle quadrature at midpoint angles.
  const int ntheta =
      std::max(16, static_cast<int>(std::ceil(M_PI * t / g.h)) * 2);
  double lhs_sum = 0.0;
  for (int q = 0; q < ntheta; ++q) {
    const double th = (q + 0.5) * M_PI / ntheta;
    const double ct = std::cos(th), st = std::sin(th);
    const double px = x0[0] + t * ct;
    const double py = x0[1] + t * st;
    double ur2 = 0.0, g2 = 0.0;
    for (int c = 0; c < m; ++c) {
      const double gxs = bilerp(g, gx, m, c, px, py);
      const double gys = bilerp(g, gy, m, c, px, py);
      const double ur = gxs * ct + gys * st;
      ur2 += ur * ur;
      g2 += gxs * gxs + gys * gys;
    }
    lhs_sum += t * (ur2 - 0.5 * g2);
  }
  const double lhs = lhs_sum * (M_PI * t / ntheta);

  // Area quadrature of r u_r . tau over the half ball.
  double rhs = 0.0;
  for (int j = g.j_lo(); j <= g.n; ++j) {
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      const double dx = g.x1(i) - x0[0];
      const double dy = g.x2(j) - x0[1];
      const double rr = std::sqrt(dx * dx + dy * dy);
      if (rr > t) continue;
      const double cth = rr > 0 ? dx / rr : 0.0;
      const double sth = rr > 0 ? dy / rr : 0.0;
      const size_t k = static_cast<size_t>(g.index(i, j));
      double dot = 0.0;
      for (int c = 0; c < m; ++c) {
        const double urn = gx[k * m + c] * cth + gy[k * m + c] * sth;
        dot += urn * tau[k * m + c];
      }
      rhs += rr * dot * g.weights[k];
    }
  }
  return {lhs, rhs, std::abs(lhs - rhs)};
}

AnnulusReport pohozaev_annulus(const Field& f, const std::vector<double>& tau,
                               const double x0[2], double t) {
  const GridGeom& g = *f.grid;
  require_boundary_center(f, x0, t, g.radius, "pohozaev_annulus");
  if (2 * t > g.radius + 1e-12)
    throw BadCenter("pohozaev_annulus: outer radius 2t exceeds the domain");
  const int m = f.m;
  if (tau.size() != static_cast<size_t>(g.node_count()) * m)
    throw ConfigError("pohozaev_annulus: tension array size mismatch");

  double value = 0.0, grad_sq = 0.0, tau_sq = 0.0;
  double grad[16];
  for (int j = g.j_lo(); j <= g.n; ++j) {
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      const double dx = g.x1(i) - x0[0];
      const double dy = g.x2(j) - x0[1];
      const double rr = std::sqrt(dx * dx + dy * dy);
      if (rr > 2 * t) continue;
      const long k = g.index(i, j);
      const double w = g.weights[static_cast<size_t>(k)];
      node_gradient(f, i, j, grad);
      const double cth = rr > 0 ? dx / rr : 0.0;
      const double sth = rr > 0 ? dy / rr : 0.0;
      double ur2 = 0.0, g2 = 0.0, t2 = 0.0;
      for (int c = 0; c < m; ++c) {
        const double ur = grad[c] * cth + grad[m + c] * sth;
        ur2 += ur * ur;
        g2 += grad[c] * grad[c] + grad[m + c] * grad[m + c];
        const double tv = tau[static_cast<size_t>(k) * m + c];
        t2 += tv * tv;
      }
      grad_sq += g2 * w;
      tau_sq += t2 * w;
      if (rr > t) value += (ur2 - 0.5 * g2) * w;
    }
  }
  return {value, t * std::sqrt(grad_sq) * std::sqrt(tau_sq)};
}

}  // namespace fbflow

#include "fbflow/flow.hpp"

#include "fbflow/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace fbflow {

namespace {

enum class Kernel { sphere, flat, generic };

Kernel kernel_for(const FreeBoundaryPair& pair) {
  if (pair.name() == "sphere") return Kernel::sphere;
  if (pair.name() == "flat") return Kernel::flat;
  return Kernel::generic;
}

// Shared stencil: even reflection for neighbours missing past the arc, the
// involution ghost below the free row. `ghost` maps the north neighbour's
// value to the south ghost value.
template <class Ghost, class Project>
void laplacian_rows(const Field& f, std::vector<double>& lap, Ghost&& ghost,
                    Project&& tangent_project) {
  const GridGeom& g = *f.grid;
  const int m = f.m;
  const double inv_h2 = 1.0 / (g.h * g.h);
  par::for_rows(g.nj(), [&](int row) {
    const int j = g.j_lo() + row;
    double gh[8], l[8];
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      const long k = g.index(i, j);
      const double* uc = f.at(k);
      const bool e = g.in_disc(i + 1, j), w = g.in_disc(i - 1, j);
      const bool nn = g.in_disc(i, j + 1), s = g.in_disc(i, j - 1);
      const double* pe = e ? f.at(g.index(i + 1, j)) : (w ? f.at(g.index(i - 1, j)) : uc);
      const double* pw = w ? f.at(g.index(i - 1, j)) : (e ? f.at(g.index(i + 1, j)) : uc);
      const double* pn = nn ? f.at(g.index(i, j + 1)) : (s ? f.at(g.index(i, j - 1)) : uc);
      const double* ps = s ? f.at(g.index(i, j - 1)) : (nn ? f.at(g.index(i, j + 1)) : uc);
      if (!s && g.node_class(k) == NodeClass::free_boundary) {
        ghost(pn, gh);
        ps = gh;
      }
      for (int c = 0; c < m; ++c)
        l[c] = (pe[c] + pw[c] + pn[c] + ps[c] - 4.0 * uc[c]) * inv_h2;
      tangent_project(uc, l, lap.data() + static_cast<size_t>(k) * m);
    }
  });
}

}  // namespace

std::vector<double> tension_field(const Field& f, const FreeBoundaryPair& pair) {
  const GridGeom& g = *f.grid;
  const int m = f.m;
  std::vector<double> tau(static_cast<size_t>(g.node_count()) * m, 0.0);

  switch (kernel_for(pair)) {
    case Kernel::sphere:
      laplacian_rows(
          f, tau,
          [](const double* u, double* gh) {
            gh[0] = u[0];
            gh[1] = -u[1];
            gh[2] = u[2];
          },
          [](const double* u, const double* l, double* out) {
            const double ul = u[0] * l[0] + u[1] * l[1] + u[2] * l[2];
            out[0] = l[0] - ul * u[0];
            out[1] = l[1] - ul * u[1];
            out[2] = l[2] - ul * u[2];
          });
      break;
    case Kernel::flat:
      laplacian_rows(
          f, tau,
          [](const double* u, double* gh) {
            gh[0] = u[0];
            gh[1] = -u[1];
          },
          [](const double*, const double* l, double* out) {
            out[0] = l[0];
            out[1] = l[1];
          });
      break;
    case Kernel::generic:
      laplacian_rows(
          f, tau,
          [&](const double* u, double* gh) {
            Vec v = Eigen::Map<const Eigen::VectorXd>(u, m);
            Vec s;
            try {
              s = pair.involute(v);
            } catch (const OutsideTube& e) {
              throw LeftTube(e.what());
            }
            for (int c = 0; c < m; ++c) gh[c] = s[c];
          },
          [&](const double* u, const double* l, double* out) {
            Vec uu = Eigen::Map<const Eigen::VectorXd>(u, m);
            Vec ll = Eigen::Map<const Eigen::VectorXd>(l, m);
            Vec t = pair.target().tangent_projector(uu) * ll;
            for (int c = 0; c < m; ++c) out[c] = t[c];
          });
      break;
  }
  return tau;
}

double field_l2_norm(const GridGeom& g, const std::vector<double>& values, int m) {
  const double s = par::sum_rows(g.nj(), [&](int row) {
    const int j = g.j_lo() + row;
    double acc = 0.0;
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      const long k = g.index(i, j);
      const double* v = values.data() + static_cast<size_t>(k) * m;
      double q = 0.0;
      for (int c = 0; c < m; ++c) q += v[c] * v[c];
      acc += q * g.weights[static_cast<size_t>(k)];
    }
    return acc;
  });
  return std::sqrt(s);
}

void enforce_free_boundary(Field& f, const FreeBoundaryPair& pair) {
  const GridGeom& g = *f.grid;
  if (g.full) return;
  const Kernel kn = kernel_for(pair);
  const double width = pair.reflection_width();
  for (int i = -g.n; i <= g.n; ++i) {
    const long k = g.index(i, 0);
    if (!g.in_disc(i, 0) || g.node_class(k) != NodeClass::free_boundary) continue;
    double* u = f.at(k);
    if (kn == Kernel::sphere) {
      u[1] = 0.0;
      const double nrm = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
      u[0] /= nrm;
      u[2] /= nrm;
    } else if (kn == Kernel::flat) {
      u[1] = 0.0;
    } else {
      Vec v = f.value(k);
      if (pair.distance_K(v) >= width)
        throw LeftTube("free-boundary value outside the reflection tube");
      f.set_value(k, pair.project_K(v));
    }
  }
}

FlowState make_flow_state(Field u0, const FreeBoundaryPair& pair, double dt_factor) {
  if (!(dt_factor > 0.0) || dt_factor > kDtFactorCap)
    throw CflViolation("dt_factor must lie in (0, " + std::to_string(kDtFactorCap) +
                       "]");
  if (u0.pair_name != pair.name())
    throw ConfigError("flow state: field pair '" + u0.pair_name +
                      "' does not match '" + pair.name() + "'");
  FlowState s;
  s.dt = dt_factor * u0.grid->h * u0.grid->h;
  s.field = std::move(u0);
  s.energy = dirichlet_energy(s.field);
  return s;
}

void flow_step(FlowState& s, const FreeBoundaryPair& pair) {
  Field& f = s.field;
  const GridGeom& g = *f.grid;
  const int m = f.m;
  const double dt = s.dt;
  const Kernel kn = kernel_for(pair);

  const std::vector<double> tau = tension_field(f, pair);

  const double tau_sq = par::sum_rows(g.nj(), [&](int row) {
    const int j = g.j_lo() + row;
    double acc = 0.0;
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      const long k = g.index(i, j);
      const double* t = tau.data() + static_cast<size_t>(k) * m;
      double q = 0.0;
      for (int c = 0; c < m; ++c) q += t[c] * t[c];
      acc += q * g.weights[static_cast<size_t>(k)];
    }
    return acc;
  });
  s.kinetic += dt * tau_sq;

  par::for_rows(g.nj(), [&](int row) {
    const int j = g.j_lo() + row;
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      const long k = g.index(i, j);
      double* u = f.at(k);
      const double* t = tau.data() + static_cast<size_t>(k) * m;
      for (int c = 0; c < m; ++c) u[c] += dt * t[c];
      if (kn == Kernel::sphere) {
        const double nrm = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
        u[0] /= nrm;
        u[1] /= nrm;
        u[2] /= nrm;
      } else if (kn == Kernel::generic) {
        Vec v = Eigen::Map<const Eigen::VectorXd>(u, m);
        Vec p = pair.target().project(v);
        for (int c = 0; c < m; ++c) u[c] = p[c];
      }
    }
  });
  enforce_free_boundary(f, pair);

  s.step += 1;
  s.time = s.step * dt;
  f.time = s.time;
  f.step = s.step;
  const double e_new = dirichlet_energy(f);
  s.worst_violation = std::max(s.worst_violation, e_new - s.energy);
  s.energy = e_new;
  s.trace.push_back({s.time, e_new, std::sqrt(tau_sq), s.kinetic});
}

namespace {

// Concentration scan: maximal ball energy over a node sub-lattice with
// stride tied to the detection radius.
struct BallScan {
  double best = 0.0;
  double x[2] = {0.0, 0.0};
};

BallScan max_ball_energy(const Field& f, double r) {
  const GridGeom& g = *f.grid;
  const std::vector<double> dens = energy_density(f);
  const int stride = std::max(1, static_cast<int>(std::floor(r / g.h)) / 2);
  BallScan out;
  for (int j = g.j_lo(); j <= g.n; j += stride) {
    for (int i = -g.n; i <= g.n; i += stride) {
      if (!g.in_disc(i, j)) continue;
      const double x0[2] = {g.x1(i), g.x2(j)};
      const double e = ball_energy_density(f, dens, x0, r);
      if (e > out.best) {
        out.best = e;
        out.x[0] = x0[0];
        out.x[1] = x0[1];
      }
    }
  }
  return out;
}

}  // namespace

FlowResult run_flow(const Field& u0, const FreeBoundaryPair& pair,
                    const FlowParams& params) {
  FlowState s = make_flow_state(u0, pair, params.dt_factor);
  FlowResult r;
  r.E0 = s.energy;
  const long nsteps = static_cast<long>(std::ceil(params.t_end / s.dt));
  const double r_det = params.stop_radius_factor * u0.grid->h;

  auto snapshot = [&]() {
    r.snapshots.push_back(s.field);
    r.snapshot_kinetic.push_back(s.kinetic);
  };

  for (long k = 0; k < nsteps; ++k) {
    flow_step(s, pair);
    if (params.snapshot_every > 0 && s.step % params.snapshot_every == 0) snapshot();
    if (!std::isfinite(s.energy) || s.energy > 50.0 * r.E0 + 50.0) {
      r.blew_up = true;
      break;
    }
    if (std::isfinite(params.stop_eps2) && params.stop_check_every > 0 &&
        s.step % params.stop_check_every == 0) {
      const BallScan scan = max_ball_energy(s.field, r_det);
      if (scan.best > params.stop_eps2) {
        r.event.fired = true;
        r.event.time = s.time;
        r.event.step = s.step;
        r.event.x[0] = scan.x[0];
        r.event.x[1] = scan.x[1];
        r.event.ball_energy = scan.best;
        r.event.radius = r_det;
        break;
      }
    }
  }

  if (r.snapshots.empty() || r.snapshots.back().step != s.step) snapshot();
  r.E_final = s.energy;
  r.kinetic = s.kinetic;
  r.worst_violation = s.worst_violation;
  r.tension_l2_final = s.trace.empty() ? 0.0 : s.trace.back().tension_l2;
  r.steps = s.step;
  if (params.keep_trace) r.trace = std::move(s.trace);
  r.max_drift = manifold_drift(s.field, pair).max_dist_target;
  return r;
}

TwoBallReport two_ball_check(const FlowResult& result, const double x0[2], double R,
                             size_t snap_t, size_t snap_s, double c_max) {
  if (snap_t >= result.snapshots.size() || snap_s >= result.snapshots.size())
    throw MissingSnapshot("two_ball_check: snapshot index out of range");
  if (snap_t > snap_s) std::swap(snap_t, snap_s);
  const Field& ft = result.snapshots[snap_t];
  const Field& fs = result.snapshots[snap_s];
  const double t = ft.time, sT = fs.time;
  const double E0 = result.E0;
  const double kin =
      result.snapshot_kinetic[snap_s] - result.snapshot_kinetic[snap_t];

  TwoBallReport rep;
  const double et_R = ball_energy(ft, x0, R);
  const double et_2R = ball_energy(ft, x0, 2 * R);
  const double es_R = ball_energy(fs, x0, R);
  const double es_2R = ball_energy(fs, x0, 2 * R);
  const double dt_term = (sT - t) / (R * R) * E0;

  rep.lhs_forward = es_R;
  rep.rhs_forward_base = et_2R;
  rep.c_forward = dt_term > 0.0 ? std::max(0.0, (es_R - et_2R) / dt_term) : 0.0;

  rep.lhs_backward = et_R;
  rep.rhs_backward_base = es_2R;
  const double denom = kin + dt_term;
  rep.c_backward = denom > 0.0 ? std::max(0.0, (et_R - es_2R) / denom) : 0.0;

  rep.violation = rep.c_forward > c_max || rep.c_backward > c_max;
  return rep;
}

}  // namespace fbflow

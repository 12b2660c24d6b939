#include "fbflow/reflect.hpp"

#include "fbflow/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace fbflow {

namespace {

using MatMap = Eigen::Map<Eigen::MatrixXd>;
using CMatMap = Eigen::Map<const Eigen::MatrixXd>;

// Difference of node-valued data along one lattice direction with the same
// stencil as grid gradients: central where both neighbours exist, one-sided
// where one does, zero where isolated. q[4] holds E, W, N, S values.
template <class T>
T stencil_diff(const bool ok[4], const T q[4], const T& qc, int dir, double h) {
  const int fwd = dir == 0 ? 0 : 2, bwd = dir == 0 ? 1 : 3;
  if (ok[fwd] && ok[bwd]) return (q[fwd] - q[bwd]) / (2.0 * h);
  if (ok[fwd]) return (q[fwd] - qc) / h;
  if (ok[bwd]) return (qc - q[bwd]) / h;
  return T(0.0 * qc);
}

constexpr int kDi[4] = {1, -1, 0, 0};
constexpr int kDj[4] = {0, 0, 1, -1};

double antisym_defect(const Mat& x) {
  return (x + Mat(x.transpose())).cwiseAbs().maxCoeff();
}

}  // namespace

Vec ghost_value(const FreeBoundaryPair& pair, const Vec& u_inner) {
  if (pair.distance_K(u_inner) >= pair.reflection_width())
    throw LeftTube("mirror value lies outside the involution tube");
  try {
    return pair.involute(u_inner);
  } catch (const OutsideTube& e) {
    throw LeftTube(e.what());
  }
}

ReflectedField extend(const Field& f, const FreeBoundaryPair& pair) {
  const GridGeom& gh = *f.grid;
  if (gh.full) throw ConfigError("extend expects a half-disk field");
  auto gf = GridGeom::full_disk(gh.radius, gh.h);

  ReflectedField rf;
  rf.field = make_field(gf, f.m, f.pair_name);
  rf.field.time = f.time;
  rf.field.step = f.step;
  rf.half = f.grid;
  rf.provenance.assign(static_cast<size_t>(gf->node_count()), 0);

  const double width = pair.reflection_width();
  for (int j = -gf->n; j <= gf->n; ++j) {
    for (int i = -gf->n; i <= gf->n; ++i) {
      if (!gf->in_disc(i, j)) continue;
      const long k = gf->index(i, j);
      if (j >= 0) {
        rf.field.set_value(k, f.value(gh.index(i, j)));
        rf.provenance[static_cast<size_t>(k)] = 1;
      } else {
        const Vec u = f.value(gh.index(i, -j));
        if (pair.distance_K(u) >= width)
          throw LeftTube("field value outside the involution tube at (" +
                         std::to_string(i) + "," + std::to_string(-j) + ")");
        try {
          rf.field.set_value(k, pair.involute(u));
        } catch (const OutsideTube& e) {
          throw LeftTube(e.what());
        }
        rf.provenance[static_cast<size_t>(k)] = -1;
      }
    }
  }
  return rf;
}

double trace_gap(const Field& f, const FreeBoundaryPair& pair) {
  const GridGeom& g = *f.grid;
  double gap = 0.0;
  for (int i = -g.n; i <= g.n; ++i) {
    if (!g.in_disc(i, 0)) continue;
    const long k = g.index(i, 0);
    if (g.node_class(k) != NodeClass::free_boundary) continue;
    const Vec u = f.value(k);
    gap = std::max(gap, (pair.involute(u) - u).norm());
  }
  return gap;
}

PotentialAssembly assemble_potentials(const ReflectedField& rf,
                                      const FreeBoundaryPair& pair) {
  const Field& f = rf.field;
  const GridGeom& g = *f.grid;
  const int m = f.m;
  const long nodes = g.node_count();
  const size_t mm = static_cast<size_t>(m) * m;

  PotentialAssembly pa;
  pa.m = m;
  pa.nodes = nodes;
  pa.Q.assign(static_cast<size_t>(nodes) * mm, 0.0);
  pa.Qtilde.assign(static_cast<size_t>(nodes) * mm, 0.0);
  pa.Qtilde_inv.assign(static_cast<size_t>(nodes) * mm, 0.0);
  pa.Omega.assign(static_cast<size_t>(nodes) * 2 * mm, 0.0);
  pa.Omega1.assign(static_cast<size_t>(nodes) * 2 * mm, 0.0);
  pa.Omega2.assign(static_cast<size_t>(nodes) * 2 * mm, 0.0);

  auto put = [&](std::vector<double>& a, size_t block, const Mat& x) {
    MatMap(a.data() + block * mm, m, m) = x;
  };

  const int nrows = g.nj();
  std::vector<double> row_defect(static_cast<size_t>(nrows), 0.0);

  par::for_rows(nrows, [&](int row) {
    const int j = g.j_lo() + row;
    double defect = 0.0;
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      const long k = g.index(i, j);
      const bool lower = j < 0;
      const Vec uc = f.value(k);

      bool ok[4];
      Vec unb[4];
      for (int d = 0; d < 4; ++d) {
        ok[d] = g.in_disc(i + kDi[d], j + kDj[d]);
        unb[d] = ok[d] ? f.value(g.index(i + kDi[d], j + kDj[d])) : uc;
      }

      Mat Qm, Qt, Qti, Pinv;
      ReflectionOperator R;
      if (!lower) {
        Qm = Mat::Identity(m, m);
        Qt = Mat::Identity(m, m);
        Qti = Mat::Identity(m, m);
        Pinv = Mat::Identity(m, m);
      } else {
        R = reflection_operator(pair, uc);
        Qm = R.P;
        Qt = R.Qtilde;
        Mat qti = R.O * R.lambda.cwiseSqrt().cwiseInverse().asDiagonal() *
                  R.O.transpose();
        Qti = 0.5 * (qti + Mat(qti.transpose()));
        Pinv = R.O * R.lambda.cwiseInverse().asDiagonal() * R.O.transpose() *
               R.P.transpose();
      }
      put(pa.Q, static_cast<size_t>(k), Qm);
      put(pa.Qtilde, static_cast<size_t>(k), Qt);
      put(pa.Qtilde_inv, static_cast<size_t>(k), Qti);

      // Omega_2 = sum_l (a_l b_l^T - b_l a_l^T): exactly antisymmetric.
      // a = Qtilde Q^{-1} grad(nu_l of the branch value), b = Qtilde^{-1} nu_l.
      Mat om2[2] = {Mat::Zero(m, m), Mat::Zero(m, m)};
      for (int l = 0; l < pair.normal_count(); ++l) {
        Vec nuc = pair.normal_vector(lower ? Vec(pair.involute(uc)) : uc, l);
        Vec nub[4];
        for (int d = 0; d < 4; ++d)
          nub[d] = ok[d]
                       ? Vec(pair.normal_vector(
                             lower ? Vec(pair.involute(unb[d])) : unb[d], l))
                       : nuc;
        const Vec b = lower ? Vec(Qti * pair.normal_vector(uc, l))
                            : pair.normal_vector(uc, l);
        for (int dir = 0; dir < 2; ++dir) {
          const Vec grad = stencil_diff(ok, nub, nuc, dir, g.h);
          const Vec a = lower ? Vec(Qt * (Pinv * grad)) : grad;
          om2[dir] += a * b.transpose() - b * a.transpose();
        }
      }

      Mat om[2];
      Mat om1[2] = {Mat::Zero(m, m), Mat::Zero(m, m)};
      if (!lower) {
        om[0] = om2[0];
        om[1] = om2[1];
      } else {
        // Frames and P at the stencil values, aligned against the centre
        // frame so the discrete frame derivative stays small.
        Mat pnb[4], onb[4];
        for (int d = 0; d < 4; ++d) {
          if (ok[d]) {
            const ReflectionOperator rn =
                reflection_operator(pair, unb[d], &R.O);
            pnb[d] = rn.P;
            onb[d] = rn.O;
          } else {
            pnb[d] = Qm;
            onb[d] = R.O;
          }
        }
        const Mat sx = R.lambda.cwiseSqrt().asDiagonal();
        const Mat sxi = R.lambda.cwiseSqrt().cwiseInverse().asDiagonal();
        for (int dir = 0; dir < 2; ++dir) {
          const Mat dQ = stencil_diff(ok, pnb, Qm, dir, g.h);
          const Mat mq = Qm.transpose() * dQ;
          const Mat aq = 0.5 * (mq - Mat(mq.transpose()));
          const Mat sandwich = Qti * aq * Qti;

          const Mat dO = stencil_diff(ok, onb, R.O, dir, g.h);
          const Mat b1 = 0.5 * R.O * sx * dO.transpose() * R.O * sxi *
                         R.O.transpose();
          om1[dir] = dO * R.O.transpose() + b1 - Mat(b1.transpose());
          om[dir] = om1[dir] + om2[dir] - sandwich;
        }
      }

      for (int dir = 0; dir < 2; ++dir) {
        put(pa.Omega, static_cast<size_t>(k) * 2 + dir, om[dir]);
        put(pa.Omega1, static_cast<size_t>(k) * 2 + dir, om1[dir]);
        put(pa.Omega2, static_cast<size_t>(k) * 2 + dir, om2[dir]);
        defect = std::max({defect, antisym_defect(om[dir]),
                           antisym_defect(om1[dir]), antisym_defect(om2[dir])});
      }
    }
    row_defect[static_cast<size_t>(row)] = defect;
  });
  pa.antisymmetry_max =
      *std::max_element(row_defect.begin(), row_defect.end());

  for (int i = -g.n; i <= g.n; ++i) {
    if (!g.in_disc(i, 0)) continue;
    const ReflectionOperator R =
        reflection_operator(pair, f.value(g.index(i, 0)));
    for (int c = 0; c < m; ++c)
      pa.lambda_deviation =
          std::max(pa.lambda_deviation, std::abs(R.lambda[c] - 1.0));
  }
  return pa;
}

std::vector<double> transported_force(const ReflectedField& rf,
                                      const FreeBoundaryPair& pair,
                                      const std::vector<double>& tau_half) {
  const Field& f = rf.field;
  const GridGeom& g = *f.grid;
  const GridGeom& gh = *rf.half;
  const int m = f.m;
  std::vector<double> out(static_cast<size_t>(g.node_count()) * m, 0.0);
  par::for_rows(g.nj(), [&](int row) {
    const int j = g.j_lo() + row;
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      const long k = g.index(i, j);
      const long kh = gh.index(i, std::abs(j));
      const double* tau = tau_half.data() + static_cast<size_t>(kh) * m;
      double* dst = out.data() + static_cast<size_t>(k) * m;
      if (j >= 0) {
        for (int c = 0; c < m; ++c) dst[c] = tau[c];
      } else {
        // sigma(uhat) below the interface is the mirrored original value.
        const Vec mirror = f.value(g.index(i, -j));
        const Mat p = reflection_operator(pair, mirror).P;
        const Vec v = p * Eigen::Map<const Eigen::VectorXd>(tau, m);
        for (int c = 0; c < m; ++c) dst[c] = v[c];
      }
    }
  });
  return out;
}

std::vector<double> divergence_form_residual_field(
    const ReflectedField& rf, const PotentialAssembly& pa,
    const std::vector<double>& tau_half) {
  const Field& f = rf.field;
  const GridGeom& g = *f.grid;
  const GridGeom& gh = *rf.half;
  const int m = f.m;
  const size_t mm = static_cast<size_t>(m) * m;
  std::vector<double> res(static_cast<size_t>(g.node_count()) * m, 0.0);
  const double inv_h2 = 1.0 / (g.h * g.h), inv_2h = 1.0 / (2.0 * g.h);

  par::for_rows(g.nj(), [&](int row) {
    const int j = g.j_lo() + row;
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      const long k = g.index(i, j);
      if (g.node_class(k) != NodeClass::interior) continue;

      const Vec uc = f.value(k);
      const long ke = g.index(i + 1, j), kw = g.index(i - 1, j);
      const long kn = g.index(i, j + 1), ks = g.index(i, j - 1);
      const Vec lap = (f.value(ke) + f.value(kw) + f.value(kn) + f.value(ks) -
                       4.0 * uc) *
                      inv_h2;
      const Vec d[2] = {(f.value(ke) - f.value(kw)) * inv_2h,
                        (f.value(kn) - f.value(ks)) * inv_2h};

      const CMatMap Qm(pa.q(k), m, m), Qt(pa.qt(k), m, m), Qti(pa.qti(k), m, m);
      Vec r = Qt * lap;
      if (j < 0) {
        // Product-rule divergence: the Qtilde gradient stencils the stored
        // case-split blocks (Id at the interface row, which matches the
        // lower-half formula exactly for interface values on K).
        const CMatMap qe(pa.qt(ke), m, m), qw(pa.qt(kw), m, m);
        const CMatMap qn(pa.qt(kn), m, m), qs(pa.qt(ks), m, m);
        r += (qe - qw) * inv_2h * d[0] + (qn - qs) * inv_2h * d[1];
      }
      for (int dir = 0; dir < 2; ++dir) {
        const CMatMap om(pa.omega(k, dir), m, m);
        r -= om * (Qt * d[dir]);
      }
      const long kh = gh.index(i, std::abs(j));
      const Vec force =
          Eigen::Map<const Eigen::VectorXd>(tau_half.data() + kh * m, m);
      r -= Qti * (Qm.transpose() * force);
      for (int c = 0; c < m; ++c) res[static_cast<size_t>(k) * m + c] = r[c];
    }
  });
  (void)mm;
  return res;
}

namespace {

double residual_l2(const GridGeom& g, const std::vector<double>& res, int m) {
  const double s = par::sum_rows(g.nj(), [&](int row) {
    const int j = g.j_lo() + row;
    double acc = 0.0;
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      const long k = g.index(i, j);
      if (g.node_class(k) != NodeClass::interior) continue;
      double q = 0.0;
      for (int c = 0; c < m; ++c) {
        const double v = res[static_cast<size_t>(k) * m + c];
        q += v * v;
      }
      acc += q * g.weight(k);
    }
    return acc;
  });
  return std::sqrt(s);
}

}  // namespace

double divergence_form_residual(const ReflectedField& rf,
                                const PotentialAssembly& pa,
                                const std::vector<double>& tau_half) {
  return residual_l2(*rf.field.grid,
                     divergence_form_residual_field(rf, pa, tau_half),
                     rf.field.m);
}

std::vector<double> global_form_residual_field(const ReflectedField& rf,
                                               const FreeBoundaryPair& pair,
                                               const std::vector<double>& f_hat) {
  const Field& f = rf.field;
  const GridGeom& g = *f.grid;
  const int m = f.m;
  std::vector<double> res(static_cast<size_t>(g.node_count()) * m, 0.0);
  const double inv_h2 = 1.0 / (g.h * g.h), inv_2h = 1.0 / (2.0 * g.h);
  const EmbeddedTarget& target = pair.target();

  par::for_rows(g.nj(), [&](int row) {
    const int j = g.j_lo() + row;
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      const long k = g.index(i, j);
      if (g.node_class(k) != NodeClass::interior) continue;

      const Vec uc = f.value(k);
      const Vec ue = f.value(g.index(i + 1, j)), uw = f.value(g.index(i - 1, j));
      const Vec un = f.value(g.index(i, j + 1)), us = f.value(g.index(i, j - 1));
      Vec r = (ue + uw + un + us - 4.0 * uc) * inv_h2;
      const Vec d[2] = {(ue - uw) * inv_2h, (un - us) * inv_2h};

      if (j >= 0) {
        for (int dir = 0; dir < 2; ++dir)
          r += target.second_fundamental(uc, d[dir], d[dir]);
      } else {
        const Mat p = reflection_operator(pair, uc).P;
        const Vec w = pair.involute(uc);
        for (int dir = 0; dir < 2; ++dir) {
          const Vec pd = p * d[dir];
          r -= pair.d2_sigma_proj(w, pd, pd);
        }
      }
      for (int c = 0; c < m; ++c)
        r[c] -= f_hat[static_cast<size_t>(k) * m + c];
      for (int c = 0; c < m; ++c) res[static_cast<size_t>(k) * m + c] = r[c];
    }
  });
  return res;
}

GlobalFormReport global_form_residual(const ReflectedField& rf,
                                      const FreeBoundaryPair& pair,
                                      const std::vector<double>& f_hat,
                                      const std::vector<double>& tau_half) {
  const Field& f = rf.field;
  const GridGeom& g = *f.grid;
  const GridGeom& gh = *rf.half;
  const int m = f.m;

  GlobalFormReport rep;
  rep.residual =
      residual_l2(g, global_form_residual_field(rf, pair, f_hat), m);

  double fhat_sq = 0.0;
  for (int j = -g.n; j <= g.n; ++j) {
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      const long k = g.index(i, j);
      double q = 0.0;
      for (int c = 0; c < m; ++c) {
        const double v = f_hat[static_cast<size_t>(k) * m + c];
        q += v * v;
      }
      fhat_sq += q * g.weight(k);
    }
  }
  double tau_sq = 0.0;
  for (int j = 0; j <= gh.n; ++j) {
    for (int i = -gh.n; i <= gh.n; ++i) {
      if (!gh.in_disc(i, j)) continue;
      const long k = gh.index(i, j);
      double q = 0.0;
      for (int c = 0; c < m; ++c) {
        const double v = tau_half[static_cast<size_t>(k) * m + c];
        q += v * v;
      }
      tau_sq += q * gh.weight(k);
    }
  }
  rep.f_hat_ratio = tau_sq > 0.0 ? std::sqrt(fhat_sq / tau_sq) : 0.0;

  const EmbeddedTarget& target = pair.target();
  const double inv_2h = 1.0 / (2.0 * g.h);
  double bound = 0.0;
  for (int j = -g.n; j <= g.n; ++j) {
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      const long k = g.index(i, j);
      if (g.node_class(k) != NodeClass::interior) continue;
      const Vec uc = f.value(k);
      const Vec d[2] = {
          (f.value(g.index(i + 1, j)) - f.value(g.index(i - 1, j))) * inv_2h,
          (f.value(g.index(i, j + 1)) - f.value(g.index(i, j - 1))) * inv_2h};
      const double g2 = d[0].squaredNorm() + d[1].squaredNorm();
      if (g2 < 1e-30) continue;
      Vec ups = Vec::Zero(m);
      if (j >= 0) {
        for (int dir = 0; dir < 2; ++dir)
          ups += target.second_fundamental(uc, d[dir], d[dir]);
      } else {
        const Mat p = reflection_operator(pair, uc).P;
        const Vec w = pair.involute(uc);
        for (int dir = 0; dir < 2; ++dir) {
          const Vec pd = p * d[dir];
          ups -= pair.d2_sigma_proj(w, pd, pd);
        }
      }
      bound = std::max(bound, ups.norm() / g2);
    }
  }
  rep.upsilon_bound = bound;
  return rep;
}

double upper_half_equivalence_defect(const ReflectedField& rf,
                                     const PotentialAssembly& pa,
                                     const FreeBoundaryPair& pair,
                                     const std::vector<double>& tau_half) {
  const Field& f = rf.field;
  const GridGeom& g = *f.grid;
  const GridGeom& gh = *rf.half;
  const int m = f.m;
  const std::vector<double> div_res =
      divergence_form_residual_field(rf, pa, tau_half);
  const double inv_h2 = 1.0 / (g.h * g.h), inv_2h = 1.0 / (2.0 * g.h);

  std::vector<double> partial(static_cast<size_t>(g.nj()), 0.0);
  par::for_rows(g.nj(), [&](int row) {
    const int j = g.j_lo() + row;
    double worst = 0.0;
    if (j < 0) return;
    for (int i = -g.n; i <= g.n; ++i) {
      if (!g.in_disc(i, j)) continue;
      const long k = g.index(i, j);
      if (g.node_class(k) != NodeClass::interior) continue;

      const Vec uc = f.value(k);
      const Vec ue = f.value(g.index(i + 1, j)), uw = f.value(g.index(i - 1, j));
      const Vec un = f.value(g.index(i, j + 1)), us = f.value(g.index(i, j - 1));
      Vec r = (ue + uw + un + us - 4.0 * uc) * inv_h2;
      const Vec d[2] = {(ue - uw) * inv_2h, (un - us) * inv_2h};
      // Curvature term as the normal-frame commutator contraction
      // sum_l [ nu_l (Dnu_l . du) - Dnu_l (nu_l . du) ] per direction.
      for (int l = 0; l < pair.normal_count(); ++l) {
        const Vec nc = pair.normal_vector(uc, l);
        const Vec dn[2] = {
            (pair.normal_vector(ue, l) - pair.normal_vector(uw, l)) * inv_2h,
            (pair.normal_vector(un, l) - pair.normal_vector(us, l)) * inv_2h};
        for (int dir = 0; dir < 2; ++dir)
          r += nc * dn[dir].dot(d[dir]) - dn[dir] * nc.dot(d[dir]);
      }
      const long kh = gh.index(i, j);
      for (int c = 0; c < m; ++c) {
        const double diff = r[c] - tau_half[static_cast<size_t>(kh) * m + c] -
                            div_res[static_cast<size_t>(k) * m + c];
        worst = std::max(worst, std::abs(diff));
      }
    }
    partial[static_cast<size_t>(row)] = worst;
  });
  double defect = 0.0;
  for (double w : partial) defect = std::max(defect, w);
  return defect;
}

}  // namespace fbflow

#pragma once
// Blow-up analysis toolkit: concentration detection, maximal-ball scale
// selection, rescaling, neck decomposition, dyadic energy profiles,
// Pohozaev-type radial balances, and the bubbling energy ledger.

#include "fbflow/flow.hpp"
#include "fbflow/geometry.hpp"
#include "fbflow/grid.hpp"

#include <string>
#include <vector>

namespace fbflow {

struct NoScale : Error { using Error::Error; };
struct ScaleOverlap : Error { using Error::Error; };
struct OutOfDomain : Error { using Error::Error; };
struct BadCenter : Error { using Error::Error; };

// How a concentration center sits relative to the free-boundary line, judged
// by the ratio a = d/r of center distance to selected scale.
enum class Regime { interior, boundary_finite_a, boundary_infinite };
const char* regime_name(Regime r);

struct Detection {
  double x[2];
  double ball_energy;
};

// Nodes whose r_det-ball energy exceeds eps_sq, reduced to peak
// representatives: 4-neighbour local maxima merged within distance r_det,
// strongest first. eps_sq is the squared small-energy threshold.
std::vector<Detection> detect_concentration(const Field& f, double eps_sq,
                                            double r_det);

struct ConcentrationPoint {
  double x[2] = {0.0, 0.0};
  double r = 0.0;         // selected scale
  double d = 0.0;         // distance from x to the free-boundary line
  double a = 0.0;         // d / r
  Regime regime = Regime::interior;
  double achieved = 0.0;  // ball energy at (x, r)
  bool saturated = false; // target already met at the 4h radius floor
};

struct SelectOptions {
  bool fine = true;            // refine the radius in h/16 steps
  double a_max = 100.0;        // finite-a threshold on d/r
  double r_cap_factor = 0.5;   // give up at r = factor * domain radius
};

// Smallest radius r >= 4h at x_hint whose ball energy reaches eps_sq / 32.
// Coarse search steps by h; with opts.fine the last step is refined to h/16
// so the achieved energy lands within 5% of the target (unless saturated at
// the 4h floor). Throws NoScale when the cap radius is reached short of the
// target.
ConcentrationPoint select_scale(const Field& f, const double x_hint[2],
                                double eps_sq, const SelectOptions& opts = {});

// v(x) = u(x_n + r_n x) on a radius-R grid, bilinearly interpolated; sample
// cells touching the complement of the disc give exact zero (the rescaled
// domain B_n clipped to the source disc). Nonzero values are projected back
// to the target. The output grid keeps the free-boundary row only when the
// center sits on the line (regime boundary_finite_a with d below h/2);
// otherwise the blown-up domain no longer meets the line inside radius R and
// a full-disk grid is used.
Field rescale(const Field& f, const ConcentrationPoint& c, double R,
              double h_out = 1.0 / 32);

struct NeckPiece {
  std::string name;
  Region nodes;
  long count = 0;
  double energy = 0.0;
  double oscillation = 0.0;
};

struct NeckDecomposition {
  double x[2] = {0.0, 0.0};
  double r = 0.0;
  double d = 0.0;
  Regime regime = Regime::interior;
  double delta = 0.0;
  double R = 0.0;
  Region annulus;
  long annulus_count = 0;
  double annulus_energy = 0.0;
  std::vector<NeckPiece> pieces;
  bool partition_exact = false;  // pieces disjoint and cover the annulus
};

// Partition of the annulus D_delta(x) \ D_{rR}(x) into the boundary-regime
// three pieces (around the boundary projection x' = (x1, 0)) or the
// large-a / interior four pieces with the extra cut at distance d from x.
// Requires 2 r R < delta / 2, else ScaleOverlap.
NeckDecomposition neck_decompose(const Field& f, const ConcentrationPoint& c,
                                 double delta, double R);

struct DyadicProfile {
  double center[2] = {0.0, 0.0};  // boundary projection x'
  double base_scale = 0.0;        // q = 2 r R
  int m_n = 0;
  std::vector<double> f;        // energy in annulus q 2^i < |x - x'| <= q 2^{i+1}
  std::vector<double> defects;  // |radial balance| per annulus
  double covered_energy = 0.0;  // energy of the union of the annuli
  bool max_at_ends = true;      // largest f(i) sits at i = 0 or i = m_n - 1
};

// Dyadic annulus energies around the boundary projection, i = 0..m_n-1 with
// m_n = floor(log2((delta/2) / (2rR))). Throws ScaleOverlap like
// neck_decompose.
DyadicProfile dyadic_profile(const Field& f, const ConcentrationPoint& c,
                             double delta, double R);

// Largest f(i) over the middle third of the annulus indices
// (ceil(m/3) <= i <= floor(2m/3)); 0 when that range is empty.
double middle_third_max(const DyadicProfile& p);

struct EnergyLedger {
  double E_total = 0.0;
  double E_base = 0.0;
  double E_neck = 0.0;
  std::vector<double> bubble_energies;
  double residual = 0.0;  // E_total - E_base - sum(bubbles) - E_neck
};

// Bubble energies are measured in the delta/2 ball around each center with
// the base energy subtracted; the neck entry collects the excess over the
// base in the delta/2..delta annuli. Negative rounding dust (magnitude below
// 1e-12) in the nonnegative entries is clamped to zero; larger negatives are
// kept visible as a diagnostic.
EnergyLedger energy_ledger(const Field& u, const Field& base,
                           const std::vector<ConcentrationPoint>& bubbles,
                           double delta);

// Oscillation of the map over the full neck annulus.
double oscillation_neck(const Field& f, const NeckDecomposition& nd);

struct MassEstimate {
  double radii[3] = {0.0, 0.0, 0.0};
  double at[3] = {0.0, 0.0, 0.0};  // m(r) per radius
  double value = 0.0;              // Richardson extrapolation r -> 0
};

// Energy mass lost at x0 between the second-to-last and final snapshots:
// m(r) = E(near; B_r(x0)) - E(final; B_r(x0)) at r = 8h, 16h, 32h, then
// extrapolated by (4 m(32h) - m(16h)) / 3. Throws MissingSnapshot when
// fewer than two snapshots are given.
MassEstimate concentration_mass(const std::vector<Field>& history,
                                const double x0[2]);

struct PohozaevReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double defect = 0.0;
};

// Radial balance on the half-circle of radius t around x0 on the boundary
// line: lhs is the arc quadrature of r(|u_r|^2 - 0.5 |grad u|^2), rhs the
// area quadrature of r u_r . tau over the half ball. tau is the tension
// array of f (m doubles per node).
PohozaevReport pohozaev_boundary(const Field& f, const std::vector<double>& tau,
                                 const double x0[2], double t);

struct AnnulusReport {
  double value = 0.0;
  double bound = 0.0;
};

// Radial balance over the half annulus t < |x - x0| <= 2t against the bound
// t ||grad u|| ||tau|| on the 2t half ball.
AnnulusReport pohozaev_annulus(const Field& f, const std::vector<double>& tau,
                               const double x0[2], double t);

}  // namespace fbflow

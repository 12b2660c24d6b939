#pragma once
// Explicit-Euler heat flow for maps into the catalogue targets with the free
// boundary enforced by pointwise projection to K. The discrete Laplacian
// closes missing neighbours by even reflection on the curved arc and by the
// reflection ghost value across x2 = 0, which realizes the Neumann-type
// boundary condition of the continuous problem.

#include "fbflow/geometry.hpp"
#include "fbflow/grid.hpp"

#include <limits>
#include <vector>

namespace fbflow {

struct CflViolation : Error { using Error::Error; };
struct MissingSnapshot : Error { using Error::Error; };

// tau = Tan(u) Lap_h u per node (m doubles each). Tangent to the target by
// construction: the normal component is pure rounding.
std::vector<double> tension_field(const Field& f, const FreeBoundaryPair& pair);

// L2 norm of a per-node m-vector array under the grid quadrature weights.
double field_l2_norm(const GridGeom& g, const std::vector<double>& values, int m);

// Project free-boundary node values onto K; throws LeftTube when a value
// is outside the tube where the involution is defined.
void enforce_free_boundary(Field& f, const FreeBoundaryPair& pair);

struct TraceRow {
  double t;
  double energy;
  double tension_l2;
  double kinetic;
};

struct ConcentrationEvent {
  bool fired = false;
  double time = 0.0;
  long step = 0;
  double x[2] = {0.0, 0.0};
  double ball_energy = 0.0;
  double radius = 0.0;
};

struct FlowParams {
  double dt_factor = 0.2;  // dt = dt_factor * h^2
  double t_end = 1.0;
  long snapshot_every = 0;      // steps between stored snapshots; 0 = none
  long stop_check_every = 64;   // steps between concentration checks
  double stop_eps2 = std::numeric_limits<double>::infinity();
  double stop_radius_factor = 8.0;  // detection radius = factor * h
  bool keep_trace = true;
};

struct FlowState {
  Field field;
  double time = 0.0;
  long step = 0;
  double dt = 0.0;
  double energy = 0.0;
  double kinetic = 0.0;
  double worst_violation = 0.0;  // max over steps of E(t+dt) - E(t)
  std::vector<TraceRow> trace;
};

// dt_factor beyond this is rejected outright; values between the default 0.2
// and the cap are allowed so fault-injection experiments can run unstable
// schemes on purpose.
inline constexpr double kDtFactorCap = 1.0;

FlowState make_flow_state(Field u0, const FreeBoundaryPair& pair, double dt_factor);

// One explicit Euler step + projection; appends to the trace.
void flow_step(FlowState& s, const FreeBoundaryPair& pair);

struct FlowResult {
  double E0 = 0.0;
  double E_final = 0.0;
  double kinetic = 0.0;
  double worst_violation = 0.0;
  double tension_l2_final = 0.0;
  double max_drift = 0.0;  // post-run distance to the target manifold
  long steps = 0;
  bool blew_up = false;
  ConcentrationEvent event;
  std::vector<TraceRow> trace;
  std::vector<Field> snapshots;       // fields carry their time/step
  std::vector<double> snapshot_kinetic;
};

FlowResult run_flow(const Field& u0, const FreeBoundaryPair& pair,
                    const FlowParams& params);

// Localized energy comparison between two stored snapshots: reports, for the
// two-ball inequalities
//   E(u(s); B_R)  <= E(u(t); B_2R) + C (s-t)/R^2 E0          (forward)
//   E(u(t); B_R)  <= E(u(s); B_2R) + C [kin(t,s) + (s-t)/R^2 E0]  (backward)
// the left side, the C-free right side, and the minimal C making each hold.
struct TwoBallReport {
  double lhs_forward = 0.0, rhs_forward_base = 0.0, c_forward = 0.0;
  double lhs_backward = 0.0, rhs_backward_base = 0.0, c_backward = 0.0;
  bool violation = false;
};

TwoBallReport two_ball_check(const FlowResult& result, const double x0[2], double R,
                             size_t snap_t, size_t snap_s, double c_max = 100.0);

}  // namespace fbflow

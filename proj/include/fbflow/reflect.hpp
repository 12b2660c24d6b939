#pragma once
// Extension of half-disk fields across the free-boundary segment by the
// geodesic involution, and assembly of the reflection potentials: per-node
// matrices Q, Qtilde and the antisymmetric connection forms Omega_1, Omega_2,
// Omega that close the extended field's divergence-form and global-form
// equations. Residual evaluators measure how well a field satisfies them.

#include "fbflow/geometry.hpp"
#include "fbflow/grid.hpp"

#include <vector>

namespace fbflow {

// sigma(u_inner): the mirror value used for ghost nodes below the free row.
// Throws LeftTube if u_inner is outside the involution's tube.
Vec ghost_value(const FreeBoundaryPair& pair, const Vec& u_inner);

// Half-disk field extended to the mirrored full disk: values are copied on
// x2 >= 0 and set to sigma(u(x1, -x2)) on x2 < 0.
struct ReflectedField {
  Field field;                              // on the mirrored full-disk grid
  std::shared_ptr<const GridGeom> half;     // source half-disk grid
  std::vector<signed char> provenance;      // +1 copied, -1 reflected, 0 unused
};

ReflectedField extend(const Field& f, const FreeBoundaryPair& pair);

// Largest gap between the copied and reflected limits of the extension at the
// shared interface nodes, max_i |sigma(u(i,0)) - u(i,0)|. Zero exactly when
// the free row lies on K.
double trace_gap(const Field& f, const FreeBoundaryPair& pair);

// Per-node matrices of the extended equation. Blocks are column-major m x m,
// indexed by full-grid node; Omega-type blocks carry one matrix per
// derivative direction. Upper-half nodes (x2 >= 0) have Q = Qtilde = Id and
// Omega = Omega_2.
struct PotentialAssembly {
  int m = 0;
  long nodes = 0;

  std::vector<double> Q;           // nodes * m*m
  std::vector<double> Qtilde;      // nodes * m*m, symmetric positive-definite
  std::vector<double> Qtilde_inv;  // nodes * m*m
  std::vector<double> Omega;       // nodes * 2 * m*m
  std::vector<double> Omega1;      // nodes * 2 * m*m
  std::vector<double> Omega2;      // nodes * 2 * m*m

  // max over nodes/directions of ||X + X^T||_inf for X in {Omega, Omega1,
  // Omega2}; the assembly builds each block as T - T^T, so this measures
  // floating-point defects only.
  double antisymmetry_max = 0.0;
  // max |lambda_i(P^T P) - 1| over interface-row values (must vanish on K).
  double lambda_deviation = 0.0;

  const double* q(long k) const { return Q.data() + static_cast<size_t>(k) * m * m; }
  const double* qt(long k) const { return Qtilde.data() + static_cast<size_t>(k) * m * m; }
  const double* qti(long k) const { return Qtilde_inv.data() + static_cast<size_t>(k) * m * m; }
  const double* omega(long k, int dir) const {
    return Omega.data() + (static_cast<size_t>(k) * 2 + dir) * m * m;
  }
};

PotentialAssembly assemble_potentials(const ReflectedField& rf,
                                      const FreeBoundaryPair& pair);

// Force transported to the full disk: tau on the upper half, P(sigma(uhat))
// applied to the mirrored tension below. tau_half holds m values per
// half-grid node.
std::vector<double> transported_force(const ReflectedField& rf,
                                      const FreeBoundaryPair& pair,
                                      const std::vector<double>& tau_half);

// Node residuals of div(Qtilde grad uhat) = Omega . Qtilde grad uhat
//   + Qtilde^{-1} Q^T tau(rho'(x)), evaluated at full-disk interior nodes
// (five-point divergence with product-rule Qtilde gradients). Nodes outside
// that set hold zeros.
std::vector<double> divergence_form_residual_field(
    const ReflectedField& rf, const PotentialAssembly& pa,
    const std::vector<double>& tau_half);

// Discrete L2 norm of the above over interior full-disk nodes.
double divergence_form_residual(const ReflectedField& rf,
                                const PotentialAssembly& pa,
                                const std::vector<double>& tau_half);

// Node residuals of Lap uhat + Upsilon_uhat(grad uhat, grad uhat) = F_hat,
// where Upsilon is the second fundamental form on the upper half and the
// reflected Hessian form -D^2(sigma o Pi)|_{sigma(uhat)}(P ., P .) below.
std::vector<double> global_form_residual_field(const ReflectedField& rf,
                                               const FreeBoundaryPair& pair,
                                               const std::vector<double>& f_hat);

struct GlobalFormReport {
  double residual = 0.0;       // L2 over interior full-disk nodes
  double f_hat_ratio = 0.0;    // ||F_hat||_L2(D) / ||tau||_L2(D+)
  double upsilon_bound = 0.0;  // max node |Upsilon(grad,grad)| / |grad|^2
};

GlobalFormReport global_form_residual(const ReflectedField& rf,
                                      const FreeBoundaryPair& pair,
                                      const std::vector<double>& f_hat,
                                      const std::vector<double>& tau_half);

// Above the interface Q = Qtilde = Id, so the divergence-form equation must
// collapse to the plain tension equation with the curvature term written as
// the normal-frame commutator contraction. This evaluates that direct
// residual independently of the assembled matrix blocks and returns the max
// node difference against divergence_form_residual_field on the upper half:
// pure rounding when the assembly is correct.
double upper_half_equivalence_defect(const ReflectedField& rf,
                                     const PotentialAssembly& pa,
                                     const FreeBoundaryPair& pair,
                                     const std::vector<double>& tau_half);

}  // namespace fbflow

#pragma once
// Compact embedded targets N in R^m carrying a totally geodesic reflection
// submanifold K: nearest-point projection, tangent projectors, second
// fundamental form, the reflection involution about K with its linearization,
// and the reflection operator used to extend maps across the free boundary.

#include "fbflow/types.hpp"

#include <memory>
#include <string>

namespace fbflow {

class EmbeddedTarget {
 public:
  virtual ~EmbeddedTarget() = default;

  virtual int ambient_dim() const = 0;
  virtual int intrinsic_dim() const = 0;
  // Nearest-point projection is well defined within this ambient distance.
  virtual double tube_radius() const = 0;
  virtual double distance(const Vec& y) const = 0;
  // Nearest point on N; throws OutsideTube beyond tube_radius().
  virtual Vec project(const Vec& y) const = 0;
  // Orthogonal projector onto T_pN for p on N.
  virtual Mat tangent_projector(const Vec& p) const = 0;
  // Second fundamental form A(p)(xi, eta), inputs projected to T_pN first.
  // Sign convention: Lap u + A(u)(du, du) is tangent along u, i.e. it equals
  // the tangential projection of Lap u for maps into N.
  virtual Vec second_fundamental(const Vec& p, const Vec& xi, const Vec& eta) const = 0;
};

class FreeBoundaryPair {
 public:
  virtual ~FreeBoundaryPair() = default;

  virtual const EmbeddedTarget& target() const = 0;
  virtual std::string name() const = 0;
  virtual int boundary_dim() const = 0;
  // The involution is defined on the K-tube of this (geodesic) width. The
  // catalogue involutions are global isometries, so this is +infinity there.
  virtual double reflection_width() const = 0;
  virtual double distance_K(const Vec& y) const = 0;
  virtual Vec project_K(const Vec& y) const = 0;
  // Geodesic reflection sigma about K; throws OutsideTube outside the tube.
  virtual Vec involute(const Vec& y) const = 0;
  // Ambient m x m matrix whose restriction to T_yN is the differential of
  // the involution.
  virtual Mat d_sigma(const Vec& y) const = 0;
  // Orthonormal frame of normals to N near y; count is the codimension.
  virtual int normal_count() const = 0;
  virtual Vec normal_vector(const Vec& p, int l) const = 0;
  // Hessian of (sigma o nearest-point-projection) at w applied to (xi, eta).
  virtual Vec d2_sigma_proj(const Vec& w, const Vec& xi, const Vec& eta) const = 0;

  int ambient_dim() const { return target().ambient_dim(); }
};

// Reflection operator at a point y of N: the differential of the involution
// on T_yN extended by sending each normal nu_l(y) to nu_l(sigma(y)), together
// with the spectral data of P^T P used to symmetrize the extension.
struct ReflectionOperator {
  Mat P;
  Vec lambda;  // eigenvalues of P^T P, descending
  Mat O;       // orthonormal eigenvector columns
  Mat Qtilde;  // O diag(sqrt(lambda)) O^T, symmetric square root of P^T P
};

// prev_frame, when given, fixes eigenvector signs against a neighbouring
// node's frame so that discrete derivatives of O stay small along fields.
// When P^T P is the identity to machine precision (both catalogue pairs),
// the frame is pinned to the identity exactly.
ReflectionOperator reflection_operator(const FreeBoundaryPair& pair, const Vec& y,
                                       const Mat* prev_frame = nullptr);

// Catalogue: the unit 2-sphere with its equatorial great circle {y2 = 0},
// and the flat plane with the horizontal axis.
std::shared_ptr<const FreeBoundaryPair> make_sphere_pair();
std::shared_ptr<const FreeBoundaryPair> make_flat_pair();
std::shared_ptr<const FreeBoundaryPair> make_pair(const std::string& name);

}  // namespace fbflow

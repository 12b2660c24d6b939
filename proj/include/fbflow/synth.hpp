#pragma once
// Synthetic exact solutions and bubbling families: inverse stereographic
// bubbles on the sphere, wide background caps, quintic collar gluing, ladder
// sequences of shrinking scales, and deterministic smooth tangential noise.

#include "fbflow/geometry.hpp"
#include "fbflow/grid.hpp"

#include <memory>
#include <vector>

namespace fbflow {

struct BubbleSpec {
  std::string kind = "boundary_disk";  // "interior_sphere" | "boundary_disk"
  double center[2] = {0.0, 0.0};
  double lambda = 0.25;
  // Orientation: rotation angle of the image sphere in the (y1, y3)-plane,
  // the family of rotations preserving the equator {y2 = 0}.
  double theta = 0.0;
};

// Degree-1 conformal map of the plane onto S^2: the disk center goes to the
// south pole, infinity to the north pole, and the real axis into the great
// circle {y2 = 0}. theta rotates the image in the (y1, y3)-plane.
Vec inverse_stereographic(double x1, double x2, double lambda, const double center[2],
                          double theta = 0.0);

// Sample a single bubble over a grid (no background).
Field bubble_field(std::shared_ptr<const GridGeom> grid, const BubbleSpec& spec);

// Wide background cap: inverse stereographic at scale Lambda rotated so that
// its value at `center` is the north pole while the free-boundary row stays
// on the equator (theta = pi composition).
Field cap_base(std::shared_ptr<const GridGeom> grid, double Lambda,
               const double center[2]);

// Constant background at a fixed target value.
Field constant_base(std::shared_ptr<const GridGeom> grid, const Vec& value,
                    const std::string& pair_name);

// Quintic-smoothstep gluing of a bubble into a background over the collar
// [neck_width, 2 neck_width] around spec.center, projected back to the target
// and pinned to K on the free-boundary row. neck_width defaults to 8*lambda.
// Throws MismatchAtInfinity when the bubble's value at infinity differs from
// the background at the bubble center.
Field glue(const Field& base, const FreeBoundaryPair& pair, const BubbleSpec& spec,
           double neck_width = 0.0);

// Family of glued fields with fixed base and strictly decreasing scales.
std::vector<Field> bubbling_sequence(const Field& base, const FreeBoundaryPair& pair,
                                     const BubbleSpec& spec,
                                     const std::vector<double>& scales);

// Deterministic low-frequency noise: a few random cosine products, projected
// tangentially along the field, then re-projected to the target and K.
// Same seed + same grid => same field.
Field add_smooth_noise(const Field& f, const FreeBoundaryPair& pair, double amplitude,
                       unsigned long seed, int modes = 4);

}  // namespace fbflow

#pragma once
// Node-classified Cartesian lattices masked to the half-disk (free-boundary
// row on x2 = 0) or the full disk (for reflected extensions), and R^m-valued
// fields on them: discrete gradients, energy densities, region energies, and
// value-set oscillation. The free boundary lies exactly on the lattice line
// x2 = 0; the curved arc is a staircase with half-weight quadrature nodes.

#include "fbflow/types.hpp"

#include <memory>
#include <string>
#include <vector>

namespace fbflow {

enum class NodeClass : unsigned char { outside = 0, interior, free_boundary, arc };

class GridGeom {
 public:
  static std::shared_ptr<const GridGeom> half_disk(double radius, double h);
  static std::shared_ptr<const GridGeom> full_disk(double radius, double h);

  double radius = 1.0;
  double h = 1.0 / 64;
  int n = 64;        // lattice index bound: nodes at (i*h, j*h), i^2 + j^2 <= n^2
  bool full = false; // full disk vs upper half

  int ni() const { return 2 * n + 1; }
  int nj() const { return full ? 2 * n + 1 : n + 1; }
  int j_lo() const { return full ? -n : 0; }
  long node_count() const { return static_cast<long>(ni()) * nj(); }

  long index(int i, int j) const {
    return static_cast<long>(j - j_lo()) * ni() + (i + n);
  }
  int i_of(long k) const { return static_cast<int>(k % ni()) - n; }
  int j_of(long k) const { return static_cast<int>(k / ni()) + j_lo(); }
  double x1(int i) const { return i * h; }
  double x2(int j) const { return j * h; }

  bool in_disc(int i, int j) const {
    if (j < j_lo() || j > n || i < -n || i > n) return false;
    return static_cast<long>(i) * i + static_cast<long>(j) * j <=
           static_cast<long>(n) * n;
  }

  NodeClass node_class(long k) const { return classes[static_cast<size_t>(k)]; }
  double weight(long k) const { return weights[static_cast<size_t>(k)]; }
  long mask_count() const { return mask_count_; }

  std::vector<NodeClass> classes;  // bounding-lattice node classes
  std::vector<double> weights;     // h^2 interior, h^2/2 boundary, 0 outside

 private:
  GridGeom() = default;
  static std::shared_ptr<const GridGeom> build(double radius, double h, bool full);
  long mask_count_ = 0;
};

// Values live on the bounding lattice, m doubles per node, zero outside the
// disk mask. time/step carry flow metadata for snapshots.
struct Field {
  std::shared_ptr<const GridGeom> grid;
  int m = 0;
  std::string pair_name;
  double time = 0.0;
  long step = 0;
  std::vector<double> data;

  double* at(long k) { return data.data() + static_cast<size_t>(k) * m; }
  const double* at(long k) const { return data.data() + static_cast<size_t>(k) * m; }
  Vec value(long k) const {
    return Eigen::Map<const Eigen::VectorXd>(at(k), m);
  }
  void set_value(long k, const Vec& v) {
    for (int c = 0; c < m; ++c) at(k)[c] = v[c];
  }
};

Field make_field(std::shared_ptr<const GridGeom> grid, int m, std::string pair_name);

// Node subset indicator over the bounding lattice.
using Region = std::vector<unsigned char>;

Region region_all(const GridGeom& g);
Region region_ball(const GridGeom& g, const double x0[2], double r);
void region_subtract(Region& a, const Region& b);
void region_intersect(Region& a, const Region& b);
long region_count(const Region& a);

// Discrete gradient of one node: central difference where both lattice
// neighbours are inside the disk, one-sided where only one is, zero where
// isolated. out = [d1 u (m), d2 u (m)].
void node_gradient(const Field& f, int i, int j, double* out);

// Per-node energy density e = 0.5 (|d1 u|^2 + |d2 u|^2).
std::vector<double> energy_density(const Field& f);

double dirichlet_energy(const Field& f);
double dirichlet_energy(const Field& f, const Region& region);

// Energy of D_r(x0) ∩ domain; throws RadiusTooSmall if r < 2h.
double ball_energy(const Field& f, const double x0[2], double r);
double ball_energy_density(const Field& f, const std::vector<double>& density,
                           const double x0[2], double r);

// Diameter of the value set over a region, computed by an iterated
// farthest-point sweep (2m axis-extreme seeds, 4 refinement rounds). This is
// a lower bound on the exact diameter that is tight for the smooth fields
// handled here, and deterministic in node order.
double oscillation(const Field& f, const Region& region);

// Max over in-mask nodes of ambient distance to the target, and over
// free-boundary nodes of distance to K (diagnostic for Field invariants).
struct ManifoldDrift {
  double max_dist_target = 0.0;
  double max_dist_K = 0.0;
};
class FreeBoundaryPair;
ManifoldDrift manifold_drift(const Field& f, const FreeBoundaryPair& pair);

}  // namespace fbflow

#include "fbflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fbflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// --- unit sphere S^2 with equator K = {y2 = 0} -----------------------------

class SphereTarget final : public EmbeddedTarget {
 public:
  int ambient_dim() const override { return 3; }
  int intrinsic_dim() const override { return 2; }
  double tube_radius() const override { return 0.9; }

  double distance(const Vec& y) const override { return std::abs(y.norm() - 1.0); }

  Vec project(const Vec& y) const override {
    const double r = y.norm();
    if (std::abs(r - 1.0) >= tube_radius())
      throw OutsideTube("sphere projection undefined at |y| = " + std::to_string(r));
    return y / r;
  }

  Mat tangent_projector(const Vec& p) const override {
    const Vec q = p / p.norm();
    return Mat::Identity(3, 3) - q * q.transpose();
  }

  Vec second_fundamental(const Vec& p, const Vec& xi, const Vec& eta) const override {
    const Vec q = p / p.norm();
    const Vec xt = xi - q * q.dot(xi);
    const Vec et = eta - q * q.dot(eta);
    return xt.dot(et) * q;
  }
};

class SpherePair final : public FreeBoundaryPair {
 public:
  const EmbeddedTarget& target() const override { return target_; }
  std::string name() const override { return "sphere"; }
  int boundary_dim() const override { return 1; }
  double reflection_width() const override { return kInf; }

  double distance_K(const Vec& y) const override {
    const double r = y.norm();
    if (r == 0.0) return 0.0;
    return std::asin(std::clamp(std::abs(y[1]) / r, 0.0, 1.0));
  }

  Vec project_K(const Vec& y) const override {
    Vec p = y;
    p[1] = 0.0;
    const double r = p.norm();
    if (r < 1e-12)
      throw OutsideTube("projection to the equator is ambiguous at a pole");
    return p / r;
  }

  Vec involute(const Vec& y) const override {
    if (target_.distance(y) >= target_.tube_radius())
      throw OutsideTube("involution argument too far from the sphere");
    Vec s = y;
    s[1] = -s[1];
    return s;
  }

  Mat d_sigma(const Vec&) const override {
    Mat s = Mat::Identity(3, 3);
    s(1, 1) = -1.0;
    return s;
  }

  int normal_count() const override { return 1; }

  Vec normal_vector(const Vec& p, int l) const override {
    if (l != 0) throw FrameUnavailable("sphere has a single normal direction");
    const double r = p.norm();
    if (r < 0.1) throw FrameUnavailable("no smooth normal frame near the origin");
    return p / r;
  }

  Vec d2_sigma_proj(const Vec& w, const Vec& xi, const Vec& eta) const override {
    const double r = w.norm();
    if (r < 0.1) throw OutsideTube("projection Hessian undefined near the origin");
    const double r3 = r * r * r, r5 = r3 * r * r;
    const double a = w.dot(xi), b = w.dot(eta), c = xi.dot(eta);
    Vec hess = -(xi * b + eta * a + w * c) / r3 + w * (3.0 * a * b / r5);
    hess[1] = -hess[1];  // compose with the ambient-linear involution
    return hess;
  }

 private:
  SphereTarget target_;
};

// --- flat plane R^2 with K = horizontal axis --------------------------------

class FlatTarget final : public EmbeddedTarget {
 public:
  int ambient_dim() const override { return 2; }
  int intrinsic_dim() const override { return 2; }
  double tube_radius() const override { return kInf; }
  double distance(const Vec&) const override { return 0.0; }
  Vec project(const Vec& y) const override { return y; }
  Mat tangent_projector(const Vec&) const override { return Mat::Identity(2, 2); }
  Vec second_fundamental(const Vec&, const Vec&, const Vec&) const override {
    return Vec::Zero(2);
  }
};

class FlatPair final : public FreeBoundaryPair {
 public:
  const EmbeddedTarget& target() const override { return target_; }
  std::string name() const override { return "flat"; }
  int boundary_dim() const override { return 1; }
  double reflection_width() const override { return kInf; }
  double distance_K(const Vec& y) const override { return std::abs(y[1]); }

  Vec project_K(const Vec& y) const override {
    Vec p = y;
    p[1] = 0.0;
    return p;
  }

  Vec involute(const Vec& y) const override {
    Vec s = y;
    s[1] = -s[1];
    return s;
  }

  Mat d_sigma(const Vec&) const override {
    Mat s = Mat::Identity(2, 2);
    s(1, 1) = -1.0;
    return s;
  }

  int normal_count() const override { return 0; }

  Vec normal_vector(const Vec&, int) const override {
    throw FrameUnavailable("flat pair has no ambient normal directions");
  }

  Vec d2_sigma_proj(const Vec&, const Vec&, const Vec&) const override {
    return Vec::Zero(2);
  }

 private:
  FlatTarget target_;
};

}  // namespace

ReflectionOperator reflection_operator(const FreeBoundaryPair& pair, const Vec& y,
                                       const Mat* prev_frame) {
  const int m = pair.ambient_dim();
  const Mat tan = pair.target().tangent_projector(y);
  Mat p = pair.d_sigma(y) * tan;
  const Vec sy = pair.involute(y);
  for (int l = 0; l < pair.normal_count(); ++l) {
    const Vec nu_y = pair.normal_vector(y, l);
    const Vec nu_sy = pair.normal_vector(sy, l);
    p += nu_sy * nu_y.transpose();
  }

  ReflectionOperator op;
  op.P = p;
  Mat gram = p.transpose() * p;
  gram = 0.5 * (gram + Mat(gram.transpose()));

  if ((gram - Mat::Identity(m, m)).cwiseAbs().maxCoeff() <= 1e-12) {
    // Isometric reflection: pin the eigenframe to the identity so discrete
    // derivatives of the frame vanish identically along fields.
    op.lambda = Vec::Ones(m);
    op.O = Mat::Identity(m, m);
    op.Qtilde = Mat::Identity(m, m);
    return op;
  }

  Eigen::SelfAdjointEigenSolver<Mat> es(gram);
  if (es.info() != Eigen::Success)
    throw SingularP("eigendecomposition of P^T P failed");
  // Eigen returns ascending eigenvalues; store descending.
  Vec lam(m);
  Mat frame(m, m);
  for (int c = 0; c < m; ++c) {
    lam[c] = es.eigenvalues()[m - 1 - c];
    frame.col(c) = es.eigenvectors().col(m - 1 - c);
  }
  if (lam[m - 1] <= 1e-12)
    throw SingularP("reflection operator is singular: min eigenvalue " +
                    std::to_string(lam[m - 1]));
  for (int c = 0; c < m; ++c) {
    if (prev_frame) {
      if (frame.col(c).dot(prev_frame->col(c)) < 0.0) frame.col(c) = -frame.col(c);
    } else {
      int imax = 0;
      frame.col(c).cwiseAbs().maxCoeff(&imax);
      if (frame(imax, c) < 0.0) frame.col(c) = -frame.col(c);
    }
  }
  op.lambda = lam;
  op.O = frame;
  Mat qt = frame * lam.cwiseSqrt().asDiagonal() * frame.transpose();
  op.Qtilde = 0.5 * (qt + Mat(qt.transpose()));
  return op;
}

std::shared_ptr<const FreeBoundaryPair> make_sphere_pair() {
  return std::make_shared<SpherePair>();
}

std::shared_ptr<const FreeBoundaryPair> make_flat_pair() {
  return std::make_shared<FlatPair>();
}

std::shared_ptr<const FreeBoundaryPair> make_pair(const std::string& name) {
  if (name == "sphere") return make_sphere_pair();
  if (name == "flat") return make_flat_pair();
  throw ConfigError("unknown target pair '" + name + "' (expected sphere|flat)");
}

}  // namespace fbflow

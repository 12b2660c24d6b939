#include "doctest.h"

#include <cmath>

#include "fbflow/geometry.hpp"
#include "fbflow/types.hpp"

using fbflow::Mat;
using fbflow::Vec;

namespace {

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("pair factory knows the catalogue and rejects the rest") {
  CHECK(fbflow::make_pair("sphere")->name() == "sphere");
  CHECK(fbflow::make_pair("flat")->name() == "flat");
  CHECK_THROWS_AS(fbflow::make_pair("torus"), fbflow::ConfigError);
}

TEST_CASE("sphere projection and tangent projector") {
  auto pair = fbflow::make_pair("sphere");
  const auto& target = pair->target();
  CHECK(target.ambient_dim() == 3);
  CHECK(target.intrinsic_dim() == 2);

  Vec y = v3(0.3, -0.2, 0.8);
  Vec p = target.project(y);
  CHECK(std::abs(p.norm() - 1.0) < 1e-14);
  CHECK((p - y / y.norm()).norm() < 1e-14);
  CHECK(target.distance(y) == doctest::Approx(std::abs(y.norm() - 1.0)).epsilon(1e-12));

  // Beyond the tube the nearest-point projection refuses.
  CHECK_THROWS_AS(target.project(v3(0.0, 0.0, 2.0)), fbflow::OutsideTube);

  Mat P = target.tangent_projector(p);
  CHECK((P * p).norm() < 1e-14);          // kills the normal direction
  CHECK((P * P - P).norm() < 1e-13);      // idempotent
  CHECK((P - P.transpose()).norm() < 1e-14);
}

TEST_CASE("sphere second fundamental form points along the normal") {
  auto pair = fbflow::make_pair("sphere");
  const auto& target = pair->target();
  Vec p = v3(0.6, 0.48, 0.64);  // exactly unit
  Vec xi = v3(1.0, 0.5, -0.25);
  Vec eta = v3(-0.3, 2.0, 0.7);

  Vec a = target.second_fundamental(p, xi, eta);
  // Collinear with p, so the tension Lap u + A(u)(du,du) stays tangent.
  CHECK((a - (a.dot(p)) * p).norm() < 1e-13);
  // Quadratic form in one argument is nonnegative along +p.
  Vec aq = target.second_fundamental(p, xi, xi);
  CHECK(aq.dot(p) >= 0.0);
  // Symmetric in its arguments.
  Vec a_swapped = target.second_fundamental(p, eta, xi);
  CHECK((a - a_swapped).norm() < 1e-13);
}

TEST_CASE("sphere involution is the isometric reflection about the equator") {
  auto pair = fbflow::make_pair("sphere");
  Vec p = v3(0.6, 0.48, 0.64);
  Vec s = pair->involute(p);
  CHECK(s[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(s[1] == doctest::Approx(-0.48).epsilon(1e-15));
  CHECK(s[2] == doctest::Approx(0.64).epsilon(1e-15));

  // Involution: applying twice returns the point.
  CHECK((pair->involute(s) - p).norm() < 1e-15);

  // Fixes the equator pointwise.
  Vec k = v3(0.8, 0.0, 0.6);
  CHECK((pair->involute(k) - k).norm() == 0.0);

  // Refuses far from the target.
  CHECK_THROWS_AS(pair->involute(v3(0.0, 0.0, 2.0)), fbflow::OutsideTube);

  // Constant differential: reflection of the second coordinate.
  Mat D = pair->d_sigma(p);
  CHECK((D * p - s).norm() < 1e-15);
  Mat expected(3, 3);
  expected << 1, 0, 0, 0, -1, 0, 0, 0, 1;
  CHECK((D - expected).norm() == 0.0);
}

TEST_CASE("sphere distance to and projection onto the equator") {
  auto pair = fbflow::make_pair("sphere");
  CHECK(pair->boundary_dim() == 1);
  CHECK(pair->distance_K(v3(1.0, 0.0, 0.0)) == 0.0);
  // Geodesic distance from the pole of the equator is a quarter turn.
  CHECK(pair->distance_K(v3(0.0, 1.0, 0.0)) ==
        doctest::Approx(std::asin(1.0)).epsilon(1e-14));

  Vec q = pair->project_K(v3(0.6, 0.1, 0.64));
  CHECK(q[1] == 0.0);
  CHECK(std::abs(q.norm() - 1.0) < 1e-15);

  // The pole has no nearest equator point.
  CHECK_THROWS_AS(pair->project_K(v3(0.0, 1.0, 0.0)), fbflow::OutsideTube);
}

TEST_CASE("sphere unit normal frame") {
  auto pair = fbflow::make_pair("sphere");
  CHECK(pair->normal_count() == 1);
  Vec y = v3(0.3, -0.2, 0.8);
  Vec nu = pair->normal_vector(y, 0);
  CHECK((nu - y / y.norm()).norm() < 1e-15);
  CHECK_THROWS_AS(pair->normal_vector(y, 1), fbflow::FrameUnavailable);
  CHECK_THROWS_AS(pair->normal_vector(v3(1e-3, 0.0, 0.0), 0),
                  fbflow::FrameUnavailable);
}

TEST_CASE("reflected-projection Hessian matches finite differences") {
  auto pair = fbflow::make_pair("sphere");
  Vec w = v3(0.55, 0.35, 0.75);  // off-sphere point inside the tube
  Vec xi = v3(0.4, -1.1, 0.6);
  Vec eta = v3(1.3, 0.2, -0.5);

  auto g = [&](const Vec& z) { return pair->involute(pair->target().project(z)); };
  const double eps = 1e-4;
  Vec fd = (g(w + eps * xi + eps * eta) - g(w + eps * xi - eps * eta) -
            g(w - eps * xi + eps * eta) + g(w - eps * xi - eps * eta)) /
           (4.0 * eps * eps);
  Vec closed = pair->d2_sigma_proj(w, xi, eta);
  CHECK((closed - fd).norm() < 1e-5);

  // Bilinear symmetry.
  Vec swapped = pair->d2_sigma_proj(w, eta, xi);
  CHECK((closed - swapped).norm() < 1e-12);
}

TEST_CASE("reflection operator is an exact isometry with identity frame") {
  auto pair = fbflow::make_pair("sphere");
  Vec y = v3(0.6, 0.48, 0.64);
  auto R = fbflow::reflection_operator(*pair, y);

  Mat I = Mat::Identity(3, 3);
  CHECK((R.P.transpose() * R.P - I).norm() < 1e-12);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(R.lambda[i] - 1.0) < 1e-12);
  // Catalogue pairs pin the spectral frame to the identity exactly.
  CHECK((R.O - I).norm() == 0.0);
  CHECK((R.Qtilde - I).norm() == 0.0);

  // P agrees with the involution differential on tangent vectors.
  Mat T = pair->target().tangent_projector(y);
  Vec xi = T * v3(0.2, -0.7, 0.4);
  CHECK((R.P * xi - pair->d_sigma(y) * xi).norm() < 1e-13);
}

TEST_CASE("flat pair: plane target with reflection about the axis") {
  auto pair = fbflow::make_pair("flat");
  const auto& target = pair->target();
  CHECK(target.ambient_dim() == 2);
  CHECK(pair->normal_count() == 0);

  Vec y = v2(1.7, -0.4);
  CHECK(target.distance(y) == 0.0);
  CHECK((target.project(y) - y).norm() == 0.0);
  CHECK(target.second_fundamental(y, v2(1, 2), v2(3, 4)).norm() == 0.0);

  Vec s = pair->involute(y);
  CHECK(s[0] == 1.7);
  CHECK(s[1] == 0.4);
  CHECK(pair->distance_K(y) == doctest::Approx(0.4).epsilon(1e-15));
  Vec q = pair->project_K(y);
  CHECK(q[0] == 1.7);
  CHECK(q[1] == 0.0);

  Mat expected(2, 2);
  expected << 1, 0, 0, -1;
  CHECK((pair->d_sigma(y) - expected).norm() == 0.0);
  CHECK(pair->d2_sigma_proj(y, v2(1, 0), v2(0, 1)).norm() == 0.0);

  auto R = fbflow::reflection_operator(*pair, y);
  CHECK((R.P - expected).norm() == 0.0);
  CHECK((R.Qtilde - Mat::Identity(2, 2)).norm() == 0.0);
}

#include "doctest.h"

#include "qcgeom/qhyper.hpp"

#include <cmath>
#include <random>

using namespace qcgeom;

namespace {

Point pt(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

Domain unit_disk(int L) {
  return voxelize([](const Point& p) { return p.squaredNorm() < 1.0; }, unit_box(2, -1.0, 2.0), L);
}

}  // namespace

TEST_CASE("disk: center to near-boundary point") {
  const auto d = unit_disk(11);
  const auto path = qh_distance(d, pt(0, 0), pt(1.0 - std::ldexp(1.0, -6), 0));
  CHECK(path.length_qh == doctest::Approx(6.0 * std::log(2.0)).epsilon(0.05));
  CHECK(path.length_euclid >= 1.0 - std::ldexp(1.0, -6) - 2 * d.pitch());
  CHECK(path.vertices.size() >= 2);
}

TEST_CASE("half plane: vertical segment gives log ratio") {
  const auto d = voxelize([](const Point& p) { return p[1] > 0.0; }, unit_box(2, -1.0, 2.0), 11);
  const auto path = qh_distance(d, pt(0, std::ldexp(1.0, -6)), pt(0, std::ldexp(1.0, -3)));
  CHECK(path.length_qh == doctest::Approx(std::log(8.0)).epsilon(0.05));
}

TEST_CASE("identical points have zero distance") {
  const auto d = unit_disk(9);
  const auto path = qh_distance(d, pt(0.1, 0.2), pt(0.1, 0.2));
  CHECK(path.length_qh == 0.0);
  CHECK(path.vertices.size() == 1);
}

TEST_CASE("metric properties on random interior points") {
  const auto d = unit_disk(9);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  std::vector<Point> pts;
  while (pts.size() < 6) {
    auto p = pt(u(rng), u(rng));
    if (p.norm() < 0.85) pts.push_back(p);
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const double dij = qh_distance(d, pts[i], pts[j]).length_qh;
      const double dji = qh_distance(d, pts[j], pts[i]).length_qh;
      CHECK(dij == doctest::Approx(dji).epsilon(1e-9));
      // lower bound |log(d(x1)/d(x2))|, discretized distances
      const double di = 1.0 - pts[i].norm();
      const double dj = 1.0 - pts[j].norm();
      CHECK(dij >= std::abs(std::log(di / dj)) - 0.05);
      for (std::size_t k = 0; k < pts.size(); ++k) {
        const double dik = qh_distance(d, pts[i], pts[k]).length_qh;
        const double dkj = qh_distance(d, pts[k], pts[j]).length_qh;
        CHECK(dij <= dik + dkj + 1e-9);
      }
    }
  }
}

TEST_CASE("grid refinement changes the distance by at most 3%") {
  const auto a = qh_distance(unit_disk(10), pt(-0.5, 0.1), pt(0.9, 0.0)).length_qh;
  const auto b = qh_distance(unit_disk(11), pt(-0.5, 0.1), pt(0.9, 0.0)).length_qh;
  CHECK(std::abs(a - b) <= 0.03 * b);
}

TEST_CASE("unreachable and precision errors") {
  const auto two = voxelize(
      [](const Point& p) { return (p - pt(-0.5, 0)).norm() < 0.3 || (p - pt(0.5, 0)).norm() < 0.3; },
      unit_box(2, -1.0, 2.0), 9);
  CHECK_THROWS_AS(qh_distance(two, pt(-0.5, 0), pt(0.5, 0)), UnreachableError);
  CHECK_THROWS_AS(qh_distance(two, pt(0.0, 0.0), pt(0.5, 0)), DomainError);
  CHECK_THROWS_AS(qh_distance(two, pt(-0.5, 0.299), pt(0.5, 0)), PrecisionError);

  // two disks joined by a two-voxel neck
  const auto neck = voxelize(
      [&](const Point& p) {
        return (p - pt(-0.5, 0)).norm() < 0.3 || (p - pt(0.5, 0)).norm() < 0.3 ||
               (std::abs(p[1]) < 2.0 / 512 && std::abs(p[0]) < 0.3);
      },
      unit_box(2, -1.0, 2.0), 9);
  CHECK_THROWS_AS(qh_distance(neck, pt(-0.5, 0), pt(0.5, 0)), PrecisionError);
}

TEST_CASE("distance field agrees with point queries") {
  const auto d = unit_disk(9);
  const auto field = qh_distance_field(d, pt(0, 0));
  const auto target = pt(0.6, -0.3);
  const auto cell = *d.locate(target);
  CHECK(field[cell] == doctest::Approx(qh_distance(d, pt(0, 0), target).length_qh).epsilon(1e-12));
  const auto euclid = qh_distance_field(d, pt(0, 0), {}, EdgeWeight::Euclidean);
  CHECK(euclid[cell] == doctest::Approx(target.norm()).epsilon(0.1));
  std::int64_t outside = *d.locate(pt(0.99, 0.99));
  CHECK(std::isinf(field[outside]));
}

TEST_CASE("whitney chain") {
  const auto d = unit_disk(11);
  const auto w = whitney_decompose(d, 9);
  CHECK(qh_whitney_chain(w, pt(0.01, 0.01), pt(0.02, 0.02)) == 1);
  const auto far = pt(1.0 - std::ldexp(1.0, -6), 0.0);
  const int chain = qh_whitney_chain(w, pt(0, 0), far);
  const double qh = qh_distance(d, pt(0, 0), far).length_qh;
  CHECK(chain >= 2);
  CHECK(chain <= 8.0 * (qh / std::log(2.0) + 1.0));
  CHECK(chain >= 0.125 * qh / std::log(2.0));
  CHECK_THROWS_AS(qh_whitney_chain(w, pt(0.99, 0.99), pt(0, 0)), DomainError);
}

TEST_CASE("3d ball") {
  const auto d = voxelize([](const Point& p) { return p.squaredNorm() < 1.0; }, unit_box(3, -1.0, 2.0), 7);
  Point a(3), b(3);
  a << 0, 0, 0;
  b << 1.0 - 0.125, 0, 0;
  const auto path = qh_distance(d, a, b);
  CHECK(path.length_qh == doctest::Approx(3.0 * std::log(2.0)).epsilon(0.08));
  const auto w = whitney_decompose(d, 5);
  CHECK(qh_whitney_chain(w, a, b) >= 2);
}

#include "doctest.h"

#include "qcgeom/porosity.hpp"

#include <cmath>
#include <random>

using namespace qcgeom;

namespace {

Point pt(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

PorosityParams simple_params(int shift, std::int64_t lambda, int k_max = 20, int j0 = 2) {
  return PorosityParams::from_functions([&](int k) { return std::ldexp(1.0, -k - shift); },
                                        [&](int) { return lambda; }, k_max, j0);
}

// Whitney cubes of the plane minus the segment [0,1]x{0}, inside [-2,2]^2.
CubeCollection segment_whitney(int max_level) {
  CubeCollection q;
  q.bounds = unit_box(2, -2.0, 4.0);
  std::vector<DyadicCube> stack{{0, Index::Zero(2)}};
  while (!stack.empty()) {
    auto c = stack.back();
    stack.pop_back();
    const Point lo = cube_lo(q.bounds, c);
    const double s = cube_side(q.bounds, c.level);
    const double dx = std::max({0.0 - (lo[0] + s), lo[0] - 1.0, 0.0});
    const double dy = std::max({0.0 - (lo[1] + s), lo[1], 0.0});
    const double dist = std::hypot(dx, dy);
    if (dist >= s * std::sqrt(2.0)) {
      q.cubes.push_back(c);
      continue;
    }
    if (c.level >= max_level) continue;
    for (int i = 0; i < 4; ++i) {
      DyadicCube ch{c.level + 1, Index(2)};
      ch.coords << 2 * c.coords[0] + (i & 1), 2 * c.coords[1] + (i >> 1);
      stack.push_back(ch);
    }
  }
  return q;
}

CubeCollection random_scene(std::mt19937& rng, int count) {
  CubeCollection q;
  q.bounds = unit_box(2, -1.0, 2.0);
  std::uniform_int_distribution<int> level(2, 7);
  while (static_cast<int>(q.cubes.size()) < count) {
    DyadicCube c{level(rng), Index(2)};
    std::uniform_int_distribution<std::int64_t> coord(0, (std::int64_t{1} << c.level) - 1);
    c.coords << coord(rng), coord(rng);
    auto trial = q.cubes;
    trial.push_back(c);
    if (overlapping_pairs(2, trial).empty()) q.cubes = std::move(trial);
  }
  return q;
}

}  // namespace

TEST_CASE("chi_k worked examples") {
  const int k = 3;
  const double r = std::ldexp(1.0, -k);
  CubeCollection q;
  q.bounds = unit_box(2, -1.0, 2.0);
  // side r/4 cube whose center is 1.5 r from x
  DyadicCube c{k + 3, Index(2)};
  c.coords << 40, 30;
  const Point center = cube_center(q.bounds, c);
  const Point x = center - pt(1.5 * r, 0.0);
  q.cubes.push_back(c);
  auto p = simple_params(4, 1);
  CHECK(chi_brute(x, k, q, p) == 1);
  CHECK(AnnulusIndex(q, p).chi(x, k) == 1);
  CHECK(AnnulusIndex(q, simple_params(4, 2)).chi(x, k) == 0);
  CubeCollection empty{q.bounds, {}};
  CHECK(AnnulusIndex(empty, p).chi(pt(0, 0), k) == 0);
  // a touching cube does not count
  CHECK(!cube_in_annulus(q.bounds, c, center - pt(r + r / 8, 0.0), k));
}

TEST_CASE("segment complement is porous") {
  const auto q = segment_whitney(14);
  validate_disjoint(q);
  const auto p = simple_params(4, 1, 10, 2);
  AnnulusIndex index(q, p);
  std::vector<Point> E;
  for (int i = 0; i <= 10; ++i) E.push_back(pt(0.1 * i, 0.0));
  const auto res = porosity_test(E, index, 8);
  CHECK(res.verdict);
  for (const auto& prof : res.profiles)
    for (std::size_t j = 0; j < prof.S.size(); ++j) CHECK(prof.S[j] == static_cast<int>(j) + kAnnulusFirst);
}

TEST_CASE("porosity_test trivial cases") {
  CubeCollection empty{unit_box(2, -1.0, 2.0), {}};
  const auto p = simple_params(4, 1);
  AnnulusIndex index(empty, p);
  CHECK(porosity_test({}, index, 8).verdict);
  const auto res = porosity_test({pt(0, 0)}, index, 8);
  CHECK(!res.verdict);
  CHECK(res.profiles[0].first_failure == 2);
  CHECK_THROWS_AS(porosity_test({pt(0, 0)}, index, 1), DomainError);
}

TEST_CASE("accelerated chi equals exhaustive scan on random scenes") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> shift(1, 6), lam(1, 3), kk(1, 9);
  for (int scene = 0; scene < 40; ++scene) {
    const auto q = random_scene(rng, 60 + scene * 3);
    const auto p = simple_params(shift(rng), lam(rng), 10);
    AnnulusIndex index(q, p);
    for (int t = 0; t < 50; ++t) {
      const Point x = pt(u(rng), u(rng));
      const int k = kk(rng);
      CHECK(index.chi(x, k) == chi_brute(x, k, q, p));
    }
  }
}

TEST_CASE("monotone in the cube set and in lambda") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto big = random_scene(rng, 150);
  CubeCollection small{big.bounds, {big.cubes.begin(), big.cubes.begin() + 60}};
  const auto p2 = simple_params(3, 2, 10);
  const auto p1 = simple_params(3, 1, 10);
  AnnulusIndex ib(big, p2), is(small, p2), ib1(big, p1);
  for (int t = 0; t < 200; ++t) {
    const Point x = pt(u(rng), u(rng));
    for (int k = 1; k <= 8; ++k) {
      CHECK(is.chi(x, k) <= ib.chi(x, k));
      CHECK(ib.chi(x, k) <= ib1.chi(x, k));
    }
  }
}

TEST_CASE("scaling by one half shifts chi by one level") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto q = random_scene(rng, 120);
  CubeCollection half{unit_box(2, -0.5, 1.0), q.cubes};
  const auto p = simple_params(3, 1, 12);
  AnnulusIndex a(q, p), b(half, p);
  for (int t = 0; t < 200; ++t) {
    const Point x = pt(u(rng), u(rng));
    for (int k = 1; k <= 9; ++k) CHECK(a.chi(x, k) == b.chi(0.5 * x, k + 1));
  }
}

TEST_CASE("porous series") {
  const auto p = simple_params(4, 1);
  auto s = porous_series(p, 2, 2, 10);
  CHECK(s.sum == doctest::Approx(9.0 / 256));
  CHECK(s.non_increasing);
  CHECK(porous_series(simple_params(4, 16), 2, 2, 2).sum == doctest::Approx(1.0 / 16));
  CHECK(porous_series(p, 2, 5, 5).sum == doctest::Approx(1.0 / 256));
  CHECK(porous_series(p, 3, 5, 5).sum == doctest::Approx(std::pow(16.0, -3)));
  for (int m = 2; m < 10; ++m)
    CHECK(s.sum == doctest::Approx(porous_series(p, 2, 2, m).sum + porous_series(p, 2, m + 1, 10).sum));
  auto growing = PorosityParams::from_functions([](int k) { return std::ldexp(1.0, -k - 4); },
                                                [](int k) { return std::int64_t{1} + k; }, 10, 2);
  CHECK(!porous_series(growing, 2, 2, 8).non_increasing);
  CHECK_THROWS_AS(porous_series(p, 2, 5, 4), DomainError);
}

TEST_CASE("predicted gauge bound") {
  const auto p = simple_params(4, 16);
  const auto h = predicted_gauge_bound(p, 2, 1.0, 1.0, 2, 20);
  for (int j = 2; j <= 20; ++j)
    CHECK(eval_phi(h, std::ldexp(1.0, -j)) ==
          doctest::Approx(std::ldexp(1.0, -2 * j) * std::exp((j - 2 + 1) / 16.0)).epsilon(1e-9));
  const auto tiny = simple_params(40, 1);
  const auto h0 = predicted_gauge_bound(tiny, 2, 1.0, 1.0, 2, 20);
  CHECK(eval_phi(h0, std::ldexp(1.0, -10)) == doctest::Approx(std::ldexp(1.0, -20)).epsilon(1e-9));
}

TEST_CASE("params from gauge and validation") {
  const auto g = GaugeFunction::power(2.0);
  const auto p = params_from_gauge(g, 1.0, 12, 2);
  validate_params(p);
  for (int k = 1; k <= 12; ++k) {
    CHECK(p.lambda_at(k) == static_cast<std::int64_t>(std::ceil(std::ldexp(1.0, -k) / p.alpha_at(k))));
    CHECK(p.lambda_at(k) >= 1);
  }
  auto bad = simple_params(4, 1);
  bad.alpha[5] = 1.0;
  CHECK_THROWS_AS(validate_params(bad), ValidationError);
  bad = simple_params(4, 1);
  bad.lambda[3] = 0;
  CHECK_THROWS_AS(validate_params(bad), ValidationError);
}

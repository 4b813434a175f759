#include "doctest.h"

#include "qcgeom/construction.hpp"

#include <cmath>
#include <map>
#include <random>
#include <set>

using namespace qcgeom;

namespace {

ConstructionParams params(int depth, int L, int n = 2) {
  ConstructionParams p;
  p.gauge = GaugeFunction::power(2.0);
  p.c = 1.0;
  p.depth = depth;
  p.L = L;
  p.n = n;
  return p;
}

std::int64_t occupied(const Domain& d) { return d.occupied_count(); }

// Re-derives the stage of a voxel from the analytic arms, the wall rule and the
// recorded gates.
class StageOracle {
 public:
  explicit StageOracle(const ConstructionTree& t) : t_(t), p_(t.params) {
    for (const auto& lv : t.levels) {
      alpha_.push_back(lv.alpha);
      pruned_.emplace_back(lv.pruned.begin(), lv.pruned.end());
    }
  }

  int stage(const Index& c) { return below(c, p_.depth + 1); }

 private:
  bool in_grid(const Index& c) const {
    for (int a = 0; a < p_.n; ++a)
      if (c[a] < 0 || c[a] >= (std::int64_t{1} << p_.L)) return false;
    return true;
  }

  bool in_gate(const Index& c, int k) const {
    for (const auto& g : t_.levels[k - 1].gates) {
      bool inside = true;
      for (int a = 0; a < p_.n; ++a) inside = inside && c[a] >= g.lo[a] && c[a] <= g.hi[a];
      if (inside) return true;
    }
    return false;
  }

  // Stage of c if it is below k, else 0.
  int below(const Index& c, int k) {
    std::vector<std::int64_t> key(c.data(), c.data() + p_.n);
    key.push_back(k);
    const auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    int result = 0;
    const Point x = (c.cast<double>().array() + 0.5).matrix() * std::ldexp(1.0, -p_.L) -
                    Point::Constant(p_.n, 0.5);
    for (int j = 1; j < k && result == 0; ++j) {
      if (!in_arm(p_, alpha_, j, x)) continue;
      bool touches = false;
      const int span = p_.n == 3 ? 27 : 9;
      for (int o = 0; o < span && !touches; ++o) {
        Index nb = c;
        int r = o;
        bool zero = true;
        for (int a = 0; a < p_.n; ++a) {
          nb[a] += r % 3 - 1;
          zero = zero && r % 3 == 1;
          r /= 3;
        }
        if (zero || !in_grid(nb)) continue;
        touches = below(nb, j) != 0;
      }
      if (pruned_[j - 1].count(t_.domain.linear(c))) continue;
      if (!touches || in_gate(c, j)) result = j;
    }
    memo_[key] = result;
    return result;
  }

  const ConstructionTree& t_;
  ConstructionParams p_;
  std::vector<Dyadic> alpha_;
  std::vector<std::set<std::int64_t>> pruned_;
  std::map<std::vector<std::int64_t>, int> memo_;
};

}  // namespace

TEST_CASE("depth one cross has the closed-form area") {
  const auto t = build_domain_2d(params(1, 10));
  const double a = std::ldexp(1.0, -5);
  const double h = t.domain.pitch();
  CHECK(static_cast<double>(occupied(t.domain)) * h * h == doctest::Approx(4 * a - 4 * a * a).epsilon(1e-12));
  CHECK(t.components == 1);
  CHECK(t.holes == 0);
  // perimeter of the cross is 4
  CHECK(static_cast<double>(boundary_voxels(t.domain).size()) * h == doctest::Approx(4.0).epsilon(0.05));
  CHECK(boundary_set(t, 0).size() == 1);
}

TEST_CASE("depth two: four components joined by gates") {
  const auto t = build_domain_2d(params(2, 10));
  REQUIRE(t.levels.size() == 2);
  CHECK(t.levels[0].alpha.exponent == 5);
  CHECK(t.levels[1].alpha.exponent == 6);
  CHECK(t.levels[1].components_before_gating == 4);
  CHECK(t.levels[1].gates.size() == 4);
  CHECK(t.levels[1].squares.size() == 4);
  CHECK(t.components == 1);
  CHECK(t.holes == 0);
  for (const auto& g : t.levels[1].gates) {
    CHECK(g.to_stage == 1);
    CHECK(g.cells == 16);  // alpha(1/4) = 2^-6 is 16 voxels at L = 10
  }
}

TEST_CASE("guards") {
  CHECK_THROWS_AS(build_domain_2d(params(2, 6)), ResolutionError);
  CHECK_THROWS_AS(build_domain_2d(params(8, 11)), ResolutionError);
  auto p = params(2, 10);
  p.c = 1e-30;
  CHECK_THROWS_AS(build_domain_2d(p), UnderflowError);
  CHECK_THROWS_AS(build_domain_3d(params(2, 10)), ResolutionError);
}

TEST_CASE("connected, simply connected and nested at every depth") {
  std::vector<std::uint8_t> prev;
  for (int depth = 1; depth <= 6; ++depth) {
    const auto t = build_domain_2d(params(depth, 12));
    CHECK(t.components == 1);
    CHECK(t.holes == 0);
    for (const auto& lv : t.levels) CHECK(lv.ungated == 0);
    const auto& mask = t.domain.mask();
    std::size_t changed = 0;
    for (std::size_t i = 0; i < prev.size(); ++i)
      if (prev[i] && mask[i] != prev[i]) ++changed;
    CHECK(changed == 0);
    prev = mask;
  }
}

TEST_CASE("voxel mask matches the analytic construction") {
  for (const int n : {2, 3}) {
    const auto t = n == 2 ? build_domain_2d(params(5, 11)) : build_domain_3d(params(3, 8, 3));
    StageOracle oracle(t);
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<std::int64_t> cell(0, t.domain.size() - 1);
    int checked = 0;
    int inside = 0;
    while (checked < 1000) {
      // half the draws near the occupied set so the walls get exercised
      std::int64_t i = cell(rng);
      if (checked % 2 == 0) {
        for (int tries = 0; tries < 200 && !t.domain.occupied(i); ++tries) i = cell(rng);
      }
      const Index c = t.domain.unravel(i);
      CHECK(oracle.stage(c) == t.domain.mask()[i]);
      inside += t.domain.occupied(i) ? 1 : 0;
      ++checked;
    }
    CHECK(inside > 300);
  }
}

TEST_CASE("slivers along earlier edges are pruned") {
  const auto t = build_domain_2d(params(8, 13));
  CHECK(t.components == 1);
  CHECK(t.holes == 0);
  CHECK(t.levels[7].pruned.size() > 0);
  for (const auto& lv : t.levels) {
    CHECK(lv.ungated == 0);
    for (const auto i : lv.pruned) CHECK_FALSE(t.domain.occupied(i));
  }
}

TEST_CASE("3d construction") {
  const auto one = build_domain_3d(params(1, 7, 3));
  const double a = std::ldexp(1.0, -5);
  const double h = one.domain.pitch();
  const double volume = 20 * a * a - 32 * a * a * a;
  CHECK(static_cast<double>(occupied(one.domain)) * h * h * h == doctest::Approx(volume).epsilon(1e-12));
  CHECK(one.components == 1);

  const auto two = build_domain_3d(params(2, 8, 3));
  CHECK(two.levels[1].components_before_gating == 8);
  CHECK(two.components == 1);
  const auto three = build_domain_3d(params(3, 8, 3));
  CHECK(three.components == 1);
}

TEST_CASE("frostman measure") {
  const auto t = build_domain_2d(params(3, 10));
  const auto maps = frostman_measure(t);
  REQUIRE(maps.size() == 3);
  CHECK(maps[2].codes.size() == 16);
  for (const auto m : maps[2].mass) CHECK(m == 1.0 / 16);
  for (const auto& m : maps) CHECK(m.total() == 1.0);
  // parent mass is the sum of its children, exactly
  for (std::size_t j = 1; j < maps.size(); ++j) {
    std::map<std::int64_t, double> sum;
    const std::int64_t side = std::int64_t{1} << j;
    for (std::size_t c = 0; c < maps[j].codes.size(); ++c) {
      const auto code = maps[j].codes[c];
      const auto parent = ((code / side) >> 1) * (side >> 1) + ((code % side) >> 1);
      sum[parent] += maps[j].mass[c];
    }
    for (std::size_t c = 0; c < maps[j - 1].codes.size(); ++c)
      CHECK(sum[maps[j - 1].codes[c]] == maps[j - 1].mass[c]);
  }
  const auto psi = GaugeFunction::power(2.0);
  CHECK(frostman_sup_ratio(maps, psi) == doctest::Approx(1.0));
}

TEST_CASE("realized gauge") {
  const auto t = build_domain_2d(params(4, 10));
  const auto g = realized_gauge(t);
  // alpha(y) = y / 16 gives u(y) = y^16
  for (int k = 1; k <= 6; ++k)
    CHECK(g.log_u(-k * std::log(2.0)) == doctest::Approx(-16.0 * k * std::log(2.0)).epsilon(1e-9));
  CHECK(eval_phi(g, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("growth condition") {
  const auto t = build_domain_2d(params(4, 11));
  const auto empty = verify_growth_condition(t, 0);
  CHECK(empty.pass);
  CHECK(empty.samples.empty());
  GrowthOptions opt;
  opt.internal_diameter = true;
  const auto rep = verify_growth_condition(t, 120, opt);
  CHECK(rep.samples.size() == 120);
  CHECK(rep.pass);
  CHECK(rep.feasible_fraction >= 0.99);
  CHECK(rep.C_slope <= 10.0);
  CHECK(rep.oracle_ratio_median > 0.1);
  CHECK(rep.oracle_ratio_median < 10.0);
  CHECK(rep.internal_diameter > 1.0);
  CHECK(rep.internal_diameter < 20.0);
  // near-origin points need almost nothing
  for (const auto& s : rep.samples)
    if (s.stage == 1 && s.x.norm() < 0.05) CHECK(s.k < 2.0);
  const auto again = verify_growth_condition(t, 120, opt);
  CHECK(again.C == rep.C);
}

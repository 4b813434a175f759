#include "doctest.h"

#include "qcgeom/gauge.hpp"

#include <cmath>
#include <numbers>

using namespace qcgeom;

namespace {
const double ln2 = std::numbers::ln2;

std::vector<GaugeFunction> builtin_families() {
  return {GaugeFunction::power(1.0),          GaugeFunction::power(2.0),
          GaugeFunction::jones_makarov(1, 2), GaugeFunction::jones_makarov(1, 3),
          GaugeFunction::log_power(2.0, 1.0), psi_from_phi(GaugeFunction::jones_makarov(1, 2), 2, 1, 1, 0.25)};
}
}  // namespace

TEST_CASE("eval_phi closed forms") {
  CHECK(eval_phi(GaugeFunction::power(1.0), 0.25) == doctest::Approx(0.25));
  CHECK(eval_phi(GaugeFunction::jones_makarov(1, 2), std::exp(-9.0)) == doctest::Approx(std::exp(-3.0)));
  const auto lp = GaugeFunction::log_power(2.0, 1.0);
  CHECK(eval_phi(lp, std::ldexp(1.0, -8)) == doctest::Approx(std::ldexp(1.0, -16) * 8 * ln2).epsilon(1e-12));
  CHECK_THROWS_AS(eval_phi(GaugeFunction::power(1.0, 0.5), 0.75), DomainError);
  CHECK_THROWS_AS(eval_phi(GaugeFunction::power(1.0), 0.0), DomainError);
}

TEST_CASE("eval_u and u prime") {
  CHECK(eval_u(GaugeFunction::power(2.0), 0.25) == doctest::Approx(0.5));
  const auto jm = GaugeFunction::jones_makarov(1, 2);
  CHECK(eval_u(jm, std::exp(-3.0)) == doctest::Approx(std::exp(-9.0)).epsilon(1e-12));
  CHECK(eval_u_prime(jm, std::exp(-3.0)) == doctest::Approx(std::exp(-9.0) * 6.0 * std::exp(3.0)).epsilon(1e-12));
  CHECK(eval_u_prime(GaugeFunction::power(2.0), 0.25) == doctest::Approx(1.0));
  CHECK_THROWS_AS(eval_u(GaugeFunction::power(2.0, 0.5), 0.5), DomainError);
  // phi'(t) u'(phi(t)) = 1
  const double t = 1e-5;
  CHECK(eval_phi_prime(jm, t) * eval_u_prime(jm, eval_phi(jm, t)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("monotone and inverse round trip on every built-in kind") {
  for (const auto& g : builtin_families()) {
    const bool tab = g.kind() == GaugeKind::Tabulated;
    double prev_phi = 0.0;
    double prev_u = 0.0;
    const double lo = std::log(1e-15);
    const double hi = std::log(g.t_max());
    for (int i = 0; i < 1000; ++i) {
      const double t = std::exp(lo + (hi - lo) * i / 999.0);
      const double p = eval_phi(g, t);
      CHECK(p > prev_phi);
      prev_phi = p;
      const double back = eval_u(g, std::min(p, eval_phi(g, g.t_max())));
      CHECK(std::abs(back - t) <= (tab ? 1e-3 : 1e-6) * t);
      const double y = std::exp(std::log(eval_phi(g, 1e-15)) + (std::log(eval_phi(g, g.t_max())) - std::log(eval_phi(g, 1e-15))) * i / 999.0);
      const double u = eval_u(g, std::min(y, eval_phi(g, g.t_max())));
      CHECK(u > prev_u);
      prev_u = u;
    }
  }
}

TEST_CASE("check_conditions") {
  const auto r2 = check_conditions(GaugeFunction::jones_makarov(1, 2), 2, 200);
  CHECK(r2.prop1_holds);
  CHECK(r2.prop2_holds);
  CHECK(r2.prop3_holds);
  CHECK(r2.prop3_beta_hat == doctest::Approx(4.0).epsilon(1e-9));
  const auto r3 = check_conditions(GaugeFunction::jones_makarov(1, 3), 2, 200);
  CHECK(r3.prop3_beta_hat == doctest::Approx(8.0).epsilon(1e-9));
  const auto p1 = check_conditions(GaugeFunction::power(1.0), 2, 64);
  CHECK(p1.prop2_holds);
  CHECK(p1.prop1_holds);
  CHECK(p1.doubling_estimate == doctest::Approx(2.0));
  CHECK_THROWS_AS(check_conditions(GaugeFunction::power(1.0), 2, 8), DomainError);
}

TEST_CASE("divergence integral closed forms") {
  const double r = std::ldexp(1.0, -20);
  const double r0 = std::ldexp(1.0, -10);
  CHECK(divergence_integral(GaugeFunction::power(1.0), 2, r, r0) == doctest::Approx(10 * ln2).epsilon(0.01));
  // antiderivative (1/2) log log 1/t
  CHECK(divergence_integral(GaugeFunction::jones_makarov(1, 2), 2, r, r0) == doctest::Approx(0.5 * ln2).epsilon(0.02));
  CHECK(divergence_integral(GaugeFunction::jones_makarov(1, 3), 2, std::ldexp(1.0, -40), r) <= 0.05);
  // (c/s) L^{-p} with p = (s-1)(n-1) integrates to (c/s)(L^{1-p})/(1-p)
  auto oracle = [](double c, double s, int n, double La, double Lb) {
    const double p = (s - 1) * (n - 1);
    return std::pow(c / s, n - 1) * (std::pow(Lb, 1 - p) - std::pow(La, 1 - p)) / (1 - p);
  };
  const double got = divergence_integral(GaugeFunction::jones_makarov(2.0, 1.25), 3, std::ldexp(1.0, -30), std::ldexp(1.0, -3));
  CHECK(got == doctest::Approx(oracle(2.0, 1.25, 3, 3 * ln2, 30 * ln2)).epsilon(1e-4));
  CHECK_THROWS_AS(divergence_integral(GaugeFunction::power(1.0), 2, 0.5, 0.25), DomainError);
}

TEST_CASE("divergence integral is non-increasing in r and converges under refinement") {
  for (const auto& g : builtin_families()) {
    double prev = 0.0;
    for (int j = 2; j <= 40; j += 2) {
      const double v = divergence_integral(g, 2, std::ldexp(1.0, -j - 4), std::ldexp(1.0, -4));
      CHECK(v >= prev * (1 - 1e-12));
      prev = v;
    }
    const double a = divergence_integral(g, 2, std::ldexp(1.0, -30), std::ldexp(1.0, -4));
    const double b = divergence_integral(g, 2, std::ldexp(1.0, -30), std::ldexp(1.0, -4), {128});
    CHECK(std::abs(a - b) <= 0.005 * std::abs(b));
  }
}

TEST_CASE("classify_divergence examples") {
  CHECK(classify_divergence(GaugeFunction::jones_makarov(1, 2), 2, 64).verdict == Divergence::Divergent);
  CHECK(classify_divergence(GaugeFunction::jones_makarov(1, 2.5), 2, 64).verdict == Divergence::Convergent);
  const auto p3 = classify_divergence(GaugeFunction::power(3.0), 3, 64);
  CHECK(p3.verdict == Divergence::Divergent);
  CHECK(p3.blocks[0] == doctest::Approx(9 * 16 * ln2).epsilon(1e-6));
  for (double b : classify_divergence(GaugeFunction::jones_makarov(1, 2), 2, 64).blocks)
    CHECK(b == doctest::Approx(0.5 * ln2).epsilon(1e-3));
  CHECK_THROWS_AS(classify_divergence(GaugeFunction::power(1.0), 2, 10), DomainError);
}

TEST_CASE("threshold flips exactly at s = n/(n-1)") {
  for (int n : {2, 3}) {
    const double thr = n / (n - 1.0);
    for (int i = -8; i <= 8; ++i) {
      const double s = thr + 0.125 * i;
      if (s < 1.0) continue;
      const auto v = classify_divergence(GaugeFunction::jones_makarov(1, s), n, 64).verdict;
      if (s <= thr + 1e-12) {
        CHECK_MESSAGE(v == Divergence::Divergent, "n=" << n << " s=" << s);
      } else if (s - thr >= 0.25 - 1e-12) {
        CHECK_MESSAGE(v == Divergence::Convergent, "n=" << n << " s=" << s);
      } else {
        CHECK(v != Divergence::Divergent);
      }
    }
  }
}

TEST_CASE("Jones integral examples and n=2 equivalence") {
  const double r = std::ldexp(1.0, -20);
  const double r0 = std::ldexp(1.0, -10);
  CHECK(jones_integral(GaugeFunction::power(1.0), r, r0) == doctest::Approx(10 * ln2).epsilon(1e-4));
  const auto jb = classify_jones(GaugeFunction::jones_makarov(1, 2), 64);
  for (double b : jb.blocks) CHECK(b == doctest::Approx(ln2).epsilon(1e-3));
  const auto jm3 = GaugeFunction::jones_makarov(1, 3);
  // integrand L^{-4/3}, antiderivative -3 L^{-1/3}
  auto tail = [](double a, double b) { return 3 * (std::pow(a * ln2, -1.0 / 3) - std::pow(b * ln2, -1.0 / 3)); };
  CHECK(jones_integral(jm3, std::ldexp(1.0, -40), r) == doctest::Approx(tail(20, 40)).epsilon(1e-4));
  CHECK(jones_integral(jm3, r, r0) == doctest::Approx(tail(10, 20)).epsilon(1e-4));
  CHECK_THROWS_AS(jones_integral(GaugeFunction::power(1.0), 0.1, 0.5), DomainError);

  const std::vector<GaugeFunction> fams = {GaugeFunction::power(1.0), GaugeFunction::power(2.0),
                                           GaugeFunction::jones_makarov(1, 1.5), GaugeFunction::jones_makarov(1, 2),
                                           GaugeFunction::jones_makarov(1, 2.5), GaugeFunction::jones_makarov(1, 3),
                                           GaugeFunction::log_power(2.0, 1.0)};
  for (const auto& g : fams) {
    CHECK(classify_divergence(g, 2, 64).verdict == classify_jones(g, 64).verdict);
  }
}

TEST_CASE("psi_from_phi") {
  const auto psi = psi_from_phi(GaugeFunction::power(1.0), 2, 1.0, 1.0, 0.5);
  for (int j = 2; j <= 50; j += 7) {
    const double r = std::ldexp(1.0, -j);
    CHECK(eval_phi(psi, r) == doctest::Approx(r * 0.5).epsilon(1e-3));
  }
  const auto flat = psi_from_phi(GaugeFunction::jones_makarov(1, 3), 2, 3.0, 0.0, 0.5);
  CHECK(eval_phi(flat, std::ldexp(1.0, -9)) == doctest::Approx(3.0 * std::ldexp(1.0, -18)).epsilon(1e-9));
  // borderline family: psi(r) = C1 r^2 (L_r / L_r0)^{C2 c / 2}
  const double C2 = 3.0;
  const auto jm = psi_from_phi(GaugeFunction::jones_makarov(1, 2), 2, 1.0, C2, 0.25);
  for (int j = 5; j <= 55; j += 10) {
    const double r = std::ldexp(1.0, -j);
    const double expect = r * r * std::pow(j / 2.0, C2 / 2.0);
    CHECK(eval_phi(jm, r) == doctest::Approx(expect).epsilon(0.02));
  }
  CHECK_THROWS_AS(psi_from_phi(GaugeFunction::power(2.0), 2, 1.0, 2.0, 0.5), DomainError);
}

TEST_CASE("tabulated gauge breakpoint spacing") {
  const auto sparse = GaugeFunction::tabulated({{-10, -20}, {-4, -8}, {-1, -2}});
  CHECK(eval_phi(sparse, std::ldexp(1.0, -4)) == doctest::Approx(std::ldexp(1.0, -8)));
  CHECK_THROWS_AS(eval_u_prime(sparse, std::ldexp(1.0, -8)), DomainError);
  const auto dense = GaugeFunction::tabulated({{-3, -6}, {-2, -4}, {-1, -2}});
  CHECK(eval_u_prime(dense, 0.0625) == doctest::Approx(2.0));
  CHECK_THROWS_AS(GaugeFunction::tabulated({{-3, -6}, {-2, -7}}), DomainError);
}

TEST_CASE("tech lemma check") {
  const std::vector<double> rs = {std::ldexp(1.0, -10), std::ldexp(1.0, -20), std::ldexp(1.0, -40)};
  const auto pn = tech_lemma_check(GaugeFunction::power(2.0), 2, rs);
  for (double q : pn.ratio) CHECK(q == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(pn.stable);
  const auto p1 = tech_lemma_check(GaugeFunction::power(1.0), 2, rs);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const double expect = std::log(2.0 * std::sqrt(rs[i])) / std::log(rs[i]);
    CHECK(p1.ratio[i] == doctest::Approx(expect).epsilon(1e-5));
  }
  // int_0^r exp(-sqrt(L)/2) dL/.. = (4v + 8) e^{-v/2}, v = sqrt(log 1/r)
  const std::vector<double> deep = {std::ldexp(1.0, -400), std::ldexp(1.0, -700), std::ldexp(1.0, -1000)};
  const auto jm = tech_lemma_check(GaugeFunction::jones_makarov(1, 2), 2, deep);
  for (std::size_t i = 0; i < deep.size(); ++i) {
    const double v = std::sqrt(-std::log(deep[i]));
    CHECK(jm.log_integral[i] == doctest::Approx(std::log(4 * v + 8) - v / 2).epsilon(1e-5));
  }
  CHECK(jm.c_hat >= 0.2);
  CHECK(jm.stable);
}

TEST_CASE("alpha_from_gauge") {
  CHECK(alpha_from_gauge(GaugeFunction::power(2.0), 1.0, 4).exponent == 8);
  CHECK(alpha_from_gauge(GaugeFunction::jones_makarov(1, 2), 1.0, 8).exponent == 12);
  CHECK(alpha_from_gauge(GaugeFunction::power(1.0), 1.0 / 64, 1).exponent == 7);
  CHECK(alpha_from_gauge(GaugeFunction::power(1.0), std::ldexp(1.0, -10), 1, 30).exponent == 11);
  CHECK_THROWS_AS(alpha_from_gauge(GaugeFunction::power(1.0), std::ldexp(1.0, -40), 1, 30), UnderflowError);
  for (int k = 1; k < 30; ++k) {
    const auto a = alpha_from_gauge(GaugeFunction::jones_makarov(1, 2), 0.5, k);
    CHECK(a.value() <= std::ldexp(1.0, -k - 4));
  }
}

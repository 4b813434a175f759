#include "qcgeom/porosity.hpp"

#include <algorithm>
#include <cmath>

namespace qcgeom {

namespace {

constexpr std::int64_t kKeyBase = std::int64_t{1} << 20;

std::int64_t bucket_key(const std::int64_t* b, int n) {
  std::int64_t key = 0;
  for (int a = n - 1; a >= 0; --a) key = key * (2 * kKeyBase) + (b[a] + kKeyBase);
  return key;
}

// Cubes that can fit an annulus of level k have side < 2^{1-k} and diam >= alpha_k.
bool size_fits(int n, double side, int k, double alpha) {
  return side < std::ldexp(1.0, 1 - k) && static_cast<double>(n) * side * side >= alpha * alpha;
}

}  // namespace

double PorosityParams::alpha_at(int k) const {
  if (k < 0 || k > k_max()) throw DomainError("porosity parameters do not cover level " + std::to_string(k));
  return alpha[k];
}

std::int64_t PorosityParams::lambda_at(int k) const {
  if (k < 0 || k >= static_cast<int>(lambda.size()))
    throw DomainError("porosity parameters do not cover level " + std::to_string(k));
  return lambda[k];
}

PorosityParams PorosityParams::from_functions(const std::function<double(int)>& alpha,
                                              const std::function<std::int64_t(int)>& lambda, int k_max, int j0) {
  PorosityParams p;
  p.j0 = j0;
  for (int k = 0; k <= k_max; ++k) {
    p.alpha.push_back(alpha(k));
    p.lambda.push_back(lambda(k));
  }
  return p;
}

void validate_params(const PorosityParams& p) {
  if (p.alpha.empty() || p.alpha.size() != p.lambda.size())
    throw ValidationError("alpha and lambda must have the same nonzero length");
  for (int k = 0; k <= p.k_max(); ++k) {
    if (!(p.alpha[k] > 0.0)) throw ValidationError("alpha must be positive");
    if (p.lambda[k] < 1) throw ValidationError("lambda must be at least 1");
    // alpha(t)/t at t = 2^{-k} is alpha_k 2^k; t decreases with k
    if (k > 0 && std::ldexp(p.alpha[k], k) > std::ldexp(p.alpha[k - 1], k - 1) * (1 + 1e-12))
      throw ValidationError("alpha(t)/t must be non-decreasing in t");
  }
}

PorosityParams params_from_gauge(const GaugeFunction& g, double c, int k_max, int j0, double kappa) {
  PorosityParams p;
  p.j0 = j0;
  for (int k = 0; k <= k_max; ++k) {
    // level 0 only closes the table; it keeps alpha(t)/t flat there
    const double a = k == 0 ? 2.0 * alpha_from_gauge(g, c, 1).value() : alpha_from_gauge(g, c, k).value();
    p.alpha.push_back(a);
    const double ratio = kappa * std::ldexp(1.0, -k) / a;
    p.lambda.push_back(std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(ratio))));
  }
  return p;
}

bool cube_in_annulus(const Box& bounds, const DyadicCube& q, const Point& x, int k) {
  const int n = bounds.dim();
  const double s = cube_side(bounds, q.level);
  double lo2 = 0.0;
  double hi2 = 0.0;
  for (int a = 0; a < n; ++a) {
    const double lo = bounds.lo[a] + s * static_cast<double>(q.coords[a]);
    const double hi = lo + s;
    const double near = x[a] < lo ? lo - x[a] : (x[a] > hi ? x[a] - hi : 0.0);
    const double far = std::max(std::abs(x[a] - lo), std::abs(x[a] - hi));
    lo2 += near * near;
    hi2 += far * far;
  }
  const double r = std::ldexp(1.0, -k);
  return lo2 > r * r && hi2 < 4.0 * r * r;
}

int chi_brute(const Point& x, int k, const CubeCollection& q, const PorosityParams& p) {
  const int n = q.bounds.dim();
  const double alpha = p.alpha_at(k);
  std::int64_t count = 0;
  for (const auto& c : q.cubes) {
    const double s = cube_side(q.bounds, c.level);
    if (static_cast<double>(n) * s * s >= alpha * alpha && cube_in_annulus(q.bounds, c, x, k)) ++count;
  }
  return count >= p.lambda_at(k) ? 1 : 0;
}

AnnulusIndex::AnnulusIndex(const CubeCollection& q, const PorosityParams& p) : q_(q), p_(p) {
  validate_disjoint(q_);
  validate_params(p_);
  const int n = q_.bounds.dim();
  buckets_.resize(p_.k_max() + 1);
  for (std::size_t i = 0; i < q_.cubes.size(); ++i) {
    const auto& c = q_.cubes[i];
    const double s = cube_side(q_.bounds, c.level);
    const Point center = cube_center(q_.bounds, c);
    for (int k = kAnnulusFirst; k <= p_.k_max(); ++k) {
      if (!size_fits(n, s, k, p_.alpha[k])) continue;
      const double bs = std::ldexp(1.0, 1 - k);
      std::int64_t b[3];
      for (int a = 0; a < n; ++a) b[a] = static_cast<std::int64_t>(std::floor((center[a] - q_.bounds.lo[a]) / bs));
      buckets_[k][bucket_key(b, n)].push_back(static_cast<std::uint32_t>(i));
    }
  }
}

int AnnulusIndex::chi(const Point& x, int k) const {
  if (k < kAnnulusFirst || k > p_.k_max()) throw DomainError("annulus level outside the parameter range");
  const std::int64_t need = p_.lambda[k];
  const int n = q_.bounds.dim();
  const double bs = std::ldexp(1.0, 1 - k);
  std::int64_t base[3] = {0, 0, 0};
  for (int a = 0; a < n; ++a) base[a] = static_cast<std::int64_t>(std::floor((x[a] - q_.bounds.lo[a]) / bs));
  // cube centers lie within (2 + sqrt(3)/2) 2^{-k} < 2 bucket sides of x
  const int span = 5;
  int total = 1;
  for (int a = 0; a < n; ++a) total *= span;
  std::int64_t count = 0;
  const auto& level = buckets_[k];
  for (int t = 0; t < total; ++t) {
    std::int64_t b[3];
    int r = t;
    for (int a = 0; a < n; ++a) {
      b[a] = base[a] + (r % span) - 2;
      r /= span;
    }
    const auto it = level.find(bucket_key(b, n));
    if (it == level.end()) continue;
    for (const auto i : it->second) {
      if (cube_in_annulus(q_.bounds, q_.cubes[i], x, k) && ++count >= need) return 1;
    }
  }
  return 0;
}

PorosityResult porosity_test(const std::vector<Point>& E, const AnnulusIndex& index, int j_max) {
  const auto& p = index.params();
  if (j_max < p.j0) throw DomainError("j_max must be at least j0");
  PorosityResult res;
  res.j0 = p.j0;
  res.j_max = j_max;
  std::size_t passing = 0;
  for (const auto& x : E) {
    PorosityProfile prof;
    prof.point = x;
    int S = 0;
    for (int k = kAnnulusFirst; k <= j_max; ++k) {
      const int c = index.chi(x, k);
      prof.chi.push_back(static_cast<std::uint8_t>(c));
      S += c;
      prof.S.push_back(S);
      if (k >= p.j0 && 2 * S <= k && prof.passes) {
        prof.passes = false;
        prof.first_failure = k;
      }
    }
    if (prof.passes) ++passing;
    res.verdict = res.verdict && prof.passes;
    res.profiles.push_back(std::move(prof));
  }
  res.pass_fraction = E.empty() ? 1.0 : static_cast<double>(passing) / static_cast<double>(E.size());
  return res;
}

SeriesResult porous_series(const PorosityParams& p, int n, int j0, int j) {
  if (j < j0) throw DomainError("porous_series needs j >= j0");
  SeriesResult res;
  double prev = 0.0;
  for (int k = j0; k <= j; ++k) {
    const double term = static_cast<double>(p.lambda_at(k)) * std::pow(std::ldexp(p.alpha_at(k), k), n);
    if (k > j0 && term > prev * (1 + 1e-12)) res.non_increasing = false;
    res.sum += term;
    prev = term;
  }
  return res;
}

GaugeFunction predicted_gauge_bound(const PorosityParams& p, int n, double M, double C, int j0, int j_max) {
  if (j_max <= j0) throw DomainError("predicted_gauge_bound needs j_max > j0");
  if (!(M > 0.0) || !(C > 0.0)) throw DomainError("M and C must be positive");
  std::vector<std::array<double, 2>> pts;
  for (int j = j_max; j >= j0; --j) {
    const double series = porous_series(p, n, j0, j).sum;
    pts.push_back({static_cast<double>(-j), std::log2(M) - static_cast<double>(j * n) + C * series / std::log(2.0)});
  }
  return GaugeFunction::tabulated(std::move(pts));
}

}  // namespace qcgeom

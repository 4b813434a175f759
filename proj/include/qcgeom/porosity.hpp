#pragma once

#include "qcgeom/dyadic.hpp"
#include "qcgeom/gauge.hpp"

#include <functional>
#include <unordered_map>
#include <vector>

namespace qcgeom {

// alpha[k] = alpha(2^{-k}) and lambda[k] for k = 0..k_max.
struct PorosityParams {
  std::vector<double> alpha;
  std::vector<std::int64_t> lambda;
  int j0 = 1;

  int k_max() const { return static_cast<int>(alpha.size()) - 1; }
  double alpha_at(int k) const;
  std::int64_t lambda_at(int k) const;

  static PorosityParams from_functions(const std::function<double(int)>& alpha,
                                       const std::function<std::int64_t(int)>& lambda, int k_max, int j0);
};

// Throws ValidationError unless alpha(t)/t is non-decreasing in t and lambda >= 1.
void validate_params(const PorosityParams& p);

// alpha from alpha_from_gauge and lambda(k) = max(1, ceil(kappa 2^{-k} / alpha(2^{-k}))).
PorosityParams params_from_gauge(const GaugeFunction& g, double c, int k_max, int j0, double kappa = 1.0);

inline constexpr int kAnnulusFirst = 1;

// Counts cubes inside the open annulus 2^{-k} < |x - y| < 2^{-k+1}.
class AnnulusIndex {
 public:
  // Validates that the cubes are pairwise disjoint.
  AnnulusIndex(const CubeCollection& q, const PorosityParams& p);

  int chi(const Point& x, int k) const;
  const CubeCollection& cubes() const { return q_; }
  const PorosityParams& params() const { return p_; }

 private:
  CubeCollection q_;
  PorosityParams p_;
  std::vector<std::unordered_map<std::int64_t, std::vector<std::uint32_t>>> buckets_;
};

bool cube_in_annulus(const Box& bounds, const DyadicCube& q, const Point& x, int k);

// Exhaustive scan over every cube.
int chi_brute(const Point& x, int k, const CubeCollection& q, const PorosityParams& p);

struct PorosityProfile {
  Point point;
  std::vector<std::uint8_t> chi;  // chi[k - kAnnulusFirst]
  std::vector<int> S;             // S[j - kAnnulusFirst]
  bool passes = true;
  int first_failure = -1;
};

struct PorosityResult {
  std::vector<PorosityProfile> profiles;
  bool verdict = true;
  int j0 = 0;
  int j_max = 0;
  double pass_fraction = 1.0;
};

PorosityResult porosity_test(const std::vector<Point>& E, const AnnulusIndex& index, int j_max);

struct SeriesResult {
  double sum = 0.0;
  bool non_increasing = true;
};

// Sum over k in [j0, j] of lambda(k) (alpha(2^{-k}) 2^k)^n.
SeriesResult porous_series(const PorosityParams& p, int n, int j0, int j);

// h(2^{-j}) = M 2^{-jn} exp(C porous_series(p, n, j0, j)) tabulated for j in [j0, j_max].
GaugeFunction predicted_gauge_bound(const PorosityParams& p, int n, double M, double C, int j0, int j_max);

}  // namespace qcgeom

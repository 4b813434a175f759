#include "qcgeom/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qcgeom {

namespace {

std::int64_t coarsen_code(std::int64_t code, int n, int from, int to) {
  const std::int64_t m = std::int64_t{1} << from;
  const int shift = from - to;
  const std::int64_t mt = std::int64_t{1} << to;
  std::int64_t out = 0;
  std::int64_t mul = 1;
  for (int a = 0; a < n; ++a) {
    out += ((code % m) >> shift) * mul;
    code /= m;
    mul *= mt;
  }
  return out;
}

double log_gauge_at(const GaugeFunction& g, double side, int n) {
  return g.log_phi(std::log(side * std::sqrt(static_cast<double>(n))));
}

}  // namespace

CellSet coarsen(const CellSet& s, int level) {
  if (level > s.level || level < 0) throw DomainError("coarsen needs 0 <= level <= set level");
  CellSet out{s.bounds, level, {}};
  out.codes.reserve(s.codes.size());
  for (const auto c : s.codes) out.codes.push_back(coarsen_code(c, s.dim(), s.level, level));
  std::sort(out.codes.begin(), out.codes.end());
  out.codes.erase(std::unique(out.codes.begin(), out.codes.end()), out.codes.end());
  return out;
}

CellSet cells_of_points(const std::vector<Point>& pts, const Box& bounds, int level) {
  CellSet out{bounds, level, {}};
  const std::int64_t m = std::int64_t{1} << level;
  const double side = cube_side(bounds, level);
  for (const auto& p : pts) {
    std::int64_t code = 0;
    for (int a = bounds.dim() - 1; a >= 0; --a) {
      auto c = static_cast<std::int64_t>(std::floor((p[a] - bounds.lo[a]) / side));
      if (c < 0 || c > m) throw DomainError("point outside the bounds");
      c = std::min(c, m - 1);
      code = code * m + c;
    }
    out.codes.push_back(code);
  }
  std::sort(out.codes.begin(), out.codes.end());
  out.codes.erase(std::unique(out.codes.begin(), out.codes.end()), out.codes.end());
  return out;
}

CellSet cells_of_domain(const Domain& d) {
  CellSet out{d.bounds(), d.level(), {}};
  for (std::int64_t i = 0; i < d.size(); ++i)
    if (d.occupied(i)) out.codes.push_back(i);
  return out;
}

double covering_sum(const CellSet& s, const GaugeFunction& g, int j) {
  if (j > s.level) throw DomainError("covering level finer than the set resolution");
  const auto c = j == s.level ? s : coarsen(s, j);
  if (c.empty()) return 0.0;
  return std::exp(std::log(static_cast<double>(c.size())) + log_gauge_at(g, cube_side(s.bounds, j), s.dim()));
}

const char* to_string(Trend t) {
  switch (t) {
    case Trend::ToZero: return "ToZero";
    case Trend::BoundedAway: return "BoundedAway";
    case Trend::Increasing: return "Increasing";
    case Trend::Flat: return "Flat";
  }
  return "?";
}

Trend classify_trend(const std::vector<int>& js, const std::vector<double>& sums, double* slope,
                     const TrendOptions& opt) {
  if (js.size() != sums.size() || js.size() < 2) throw DomainError("trend needs at least two levels");
  double mx = 0.0;
  double my = 0.0;
  const double k = static_cast<double>(js.size());
  std::vector<double> ys;
  for (std::size_t i = 0; i < js.size(); ++i) {
    const double y = sums[i] > 0.0 ? std::log(sums[i]) : -std::numeric_limits<double>::infinity();
    ys.push_back(y);
    mx += js[i];
    my += y;
  }
  mx /= k;
  my /= k;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < js.size(); ++i) {
    sxy += (js[i] - mx) * (ys[i] - my);
    sxx += (js[i] - mx) * (js[i] - mx);
  }
  const double b = sxy / sxx;
  if (slope) *slope = b;
  if (!std::isfinite(b)) return Trend::ToZero;
  if (b <= -opt.slope_threshold) return Trend::ToZero;
  if (b >= opt.slope_threshold) return Trend::Increasing;
  if (*std::min_element(sums.begin(), sums.end()) >= opt.floor) return Trend::BoundedAway;
  return Trend::Flat;
}

GaugeProfile gauge_profile(const CellSet& s, const GaugeFunction& g, int j_lo, int j_hi, const TrendOptions& opt) {
  if (j_hi > s.level || j_lo < 0 || j_lo >= j_hi) throw DomainError("bad profile level range");
  GaugeProfile p;
  for (int j = j_lo; j <= j_hi; ++j) {
    p.js.push_back(j);
    p.scales.push_back(cube_side(s.bounds, j));
    p.sums.push_back(covering_sum(s, g, j));
  }
  p.trend = classify_trend(p.js, p.sums, &p.slope, opt);
  return p;
}

double MassMap::total() const {
  double t = 0.0;
  for (const auto m : mass) t += m;
  return t;
}

double frostman_lower_bound(const MassMap& m, const GaugeFunction& g) {
  double worst = 0.0;
  for (const auto v : m.mass) {
    if (v < 0.0 || !std::isfinite(v)) throw ValidationError("mass must be finite and nonnegative");
    worst = std::max(worst, v);
  }
  if (worst == 0.0) return 0.0;
  // same gauge value for every cell of the level
  const double lg = log_gauge_at(g, cube_side(m.bounds, m.level), m.bounds.dim());
  return m.total() / std::exp(std::log(worst) - lg);
}

FrostmanProfile frostman_profile(const std::vector<MassMap>& maps, const GaugeFunction& g) {
  FrostmanProfile p;
  p.min_bound = std::numeric_limits<double>::infinity();
  for (const auto& m : maps) {
    p.levels.push_back(m.level);
    p.bounds.push_back(frostman_lower_bound(m, g));
    p.min_bound = std::min(p.min_bound, p.bounds.back());
  }
  if (maps.empty()) p.min_bound = 0.0;
  return p;
}

}  // namespace qcgeom

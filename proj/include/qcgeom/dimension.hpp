#pragma once

#include "qcgeom/dyadic.hpp"
#include "qcgeom/gauge.hpp"

#include <vector>

namespace qcgeom {

// Set of dyadic cells of one level, as sorted linear codes (axis 0 fastest).
struct CellSet {
  Box bounds;
  int level = 0;
  std::vector<std::int64_t> codes;

  int dim() const { return bounds.dim(); }
  std::size_t size() const { return codes.size(); }
  bool empty() const { return codes.empty(); }
};

CellSet coarsen(const CellSet& s, int level);
CellSet cells_of_points(const std::vector<Point>& pts, const Box& bounds, int level);
// Occupied cells of a domain at the voxel level.
CellSet cells_of_domain(const Domain& d);

// N_j g(sqrt(n) side 2^{-j}), evaluated in log space.
double covering_sum(const CellSet& s, const GaugeFunction& g, int j);

enum class Trend { ToZero, BoundedAway, Increasing, Flat };

const char* to_string(Trend t);

struct TrendOptions {
  double slope_threshold = 0.1;
  double floor = 1e-3;
};

struct GaugeProfile {
  std::vector<int> js;
  std::vector<double> scales;
  std::vector<double> sums;
  double slope = 0.0;
  Trend trend = Trend::Flat;
};

// Least-squares slope of log sum against j.
Trend classify_trend(const std::vector<int>& js, const std::vector<double>& sums, double* slope = nullptr,
                     const TrendOptions& opt = {});

GaugeProfile gauge_profile(const CellSet& s, const GaugeFunction& g, int j_lo, int j_hi,
                           const TrendOptions& opt = {});

struct MassMap {
  Box bounds;
  int level = 0;
  std::vector<std::int64_t> codes;
  std::vector<double> mass;

  double total() const;
};

// total / max over cells of mass / g(side sqrt(n)).
double frostman_lower_bound(const MassMap& m, const GaugeFunction& g);

struct FrostmanProfile {
  std::vector<int> levels;
  std::vector<double> bounds;
  double min_bound = 0.0;
};

FrostmanProfile frostman_profile(const std::vector<MassMap>& maps, const GaugeFunction& g);

}  // namespace qcgeom

#pragma once

#include "qcgeom/dimension.hpp"
#include "qcgeom/dyadic.hpp"
#include "qcgeom/gauge.hpp"
#include "qcgeom/qhyper.hpp"

#include <cstdint>
#include <vector>

namespace qcgeom {

struct ConstructionParams {
  GaugeFunction gauge = GaugeFunction::power(2.0);
  double c = 1.0;
  int depth = 1;
  int n = 2;
  int L = 10;
  // gate width at level k is gate_scale * alpha(2^{-k})
  double gate_scale = 1.0;
  int depth_cap = 60;
};

// Axis-aligned slit of wall cells opened between a level-k component and an
// earlier stage. Cell boxes are inclusive voxel index ranges.
struct Gate {
  int level = 0;
  int to_stage = 0;
  Index lo;
  Index hi;
  std::int64_t cells = 0;
};

struct ConstructionLevel {
  int k = 0;
  Dyadic alpha;
  // dyadic level k - 1 subdivision of Q1
  std::vector<DyadicCube> squares;
  int components_before_gating = 0;
  int ungated = 0;
  std::int64_t cells = 0;
  std::vector<Gate> gates;
  // voxels of sliver components dropped for lack of a gate at least 2 voxels wide
  std::vector<std::int64_t> pruned;
};

struct ConstructionTree {
  ConstructionParams params;
  std::vector<ConstructionLevel> levels;
  // mask values are the stage index (1..depth), 0 outside
  Domain domain;
  int components = 0;
  int holes = -1;  // 2D only
};

// Q1 = [-1/2, 1/2]^n.
Box unit_cell(int n);

ConstructionTree build_domain(const ConstructionParams& p);
ConstructionTree build_domain_2d(ConstructionParams p);
ConstructionTree build_domain_3d(ConstructionParams p);

// Analytic membership of the voxel center in a level-k arm (no walls).
bool in_arm(const ConstructionParams& p, const std::vector<Dyadic>& alpha, int k, const Point& x);

// Connected components (8/26-connected) of the occupied cells.
int count_components(const Domain& d);
// 4/6-connected components of the unoccupied cells that avoid the grid border.
int count_holes(const Domain& d);

// Occupied voxels with a face neighbor that is unoccupied or outside the grid.
CellSet boundary_voxels(const Domain& d);
CellSet boundary_set(const ConstructionTree& t, int level);

// maps[k - 1] holds the level-k masses (dyadic level k - 1 of Q1).
std::vector<MassMap> frostman_measure(const ConstructionTree& t);
// sup over cells of mass / psi(side).
double frostman_sup_ratio(const std::vector<MassMap>& maps, const GaugeFunction& psi);

// Gauge whose u solves c u / u' = alpha(y) on the built levels with u(1) = 1.
GaugeFunction realized_gauge(const ConstructionTree& t);

struct GrowthSample {
  Point x;
  int stage = 0;
  double k = 0.0;
  double dist = 0.0;
  double phi = 0.0;
  double oracle = 0.0;
  double residual = 0.0;
};

struct GrowthReport {
  std::vector<GrowthSample> samples;
  double c = 1.0;
  double C = 0.0;
  double C_slope = 0.0;
  double C_offset = 0.0;
  double feasible_fraction = 1.0;
  double oracle_ratio_median = 0.0;
  double internal_diameter = 0.0;
  bool pass = true;
};

struct GrowthOptions {
  std::uint64_t seed = 1;
  double quantile = 0.99;
  double slope_limit = 10.0;  // in units of 1/c
  bool internal_diameter = false;
};

GrowthReport verify_growth_condition(const ConstructionTree& t, int sample_count, const GrowthOptions& opt = {});

}  // namespace qcgeom

#pragma once

#include "qcgeom/common.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qcgeom {

// Cubical bounds [lo, lo + side)^n.
struct Box {
  Point lo;
  double side = 1.0;
  int dim() const { return static_cast<int>(lo.size()); }
};

Box unit_box(int n, double lo = 0.0, double side = 1.0);

// Dyadic cube of the bounds: lo + side 2^{-level} [coords, coords + 1).
struct DyadicCube {
  int level = 0;
  Index coords;
  int dim() const { return static_cast<int>(coords.size()); }
  friend bool operator==(const DyadicCube& a, const DyadicCube& b) {
    return a.level == b.level && a.coords == b.coords;
  }
};

bool operator<(const DyadicCube& a, const DyadicCube& b);

double cube_side(const Box& bounds, int level);
double cube_diam(const Box& bounds, int level);
Point cube_lo(const Box& bounds, const DyadicCube& q);
Point cube_center(const Box& bounds, const DyadicCube& q);
DyadicCube parent(const DyadicCube& q);

// Cube collection sharing one frame, e.g. the refined family used for porosity.
struct CubeCollection {
  Box bounds;
  std::vector<DyadicCube> cubes;
};

// Throws ValidationError if two cubes overlap (exact, integer arithmetic).
void validate_disjoint(const CubeCollection& q);
std::vector<std::pair<std::size_t, std::size_t>> overlapping_pairs(int n, const std::vector<DyadicCube>& cubes);

void check_voxel_guard(int n, int L);

// Occupancy grid with the exact Euclidean distance from each cell center to
// the nearest unoccupied cell center. Cells outside the bounds count as
// unoccupied. Distances are stored squared in voxel units.
class Domain {
 public:
  Domain(Box bounds, int L, std::vector<std::uint8_t> mask);

  int dim() const { return bounds_.dim(); }
  int level() const { return L_; }
  const Box& bounds() const { return bounds_; }
  double pitch() const { return bounds_.side / static_cast<double>(per_axis_); }
  std::int64_t per_axis() const { return per_axis_; }
  std::int64_t size() const { return static_cast<std::int64_t>(mask_.size()); }

  bool occupied(std::int64_t i) const { return mask_[i] != 0; }
  std::uint32_t sqdist(std::int64_t i) const { return sqdist_[i]; }
  double dist(std::int64_t i) const;
  const std::vector<std::uint8_t>& mask() const { return mask_; }
  const std::vector<std::uint32_t>& sqdist_field() const { return sqdist_; }

  std::int64_t linear(const Index& c) const;
  Index unravel(std::int64_t i) const;
  Point center(std::int64_t i) const;
  // Cell whose closure holds p (upper faces included at the far boundary).
  std::optional<std::int64_t> locate(const Point& p) const;
  std::int64_t occupied_count() const;

 private:
  Box bounds_;
  int L_;
  std::int64_t per_axis_;
  std::vector<std::uint8_t> mask_;
  std::vector<std::uint32_t> sqdist_;
};

// Squared distance (voxel units) to the nearest zero cell, with virtual zero
// cells just outside the grid on every side.
std::vector<std::uint32_t> distance_transform_sq(int n, std::int64_t per_axis, const std::vector<std::uint8_t>& mask);

Domain voxelize(const std::function<bool(const Point&)>& pred, const Box& bounds, int L);

struct WhitneyDecomposition {
  Box bounds;
  int L = 0;
  int min_level = 0;
  int max_level = 0;
  std::vector<DyadicCube> cubes;
  std::vector<bool> truncated;
};

WhitneyDecomposition whitney_decompose(const Domain& d, int max_level);

struct WhitneyViolation {
  enum class Kind { Overlap, Outside, Lower, Upper };
  Kind kind;
  std::size_t cube;
  std::string detail;
};

const char* to_string(WhitneyViolation::Kind k);

struct WhitneyReport {
  std::vector<WhitneyViolation> violations;
  std::int64_t eligible = 0;
  std::int64_t covered = 0;
  std::size_t truncated = 0;
  double coverage = 1.0;
};

WhitneyReport verify_whitney(const Domain& d, const WhitneyDecomposition& w);

struct RefineOptions {
  int max_relative_depth = 4;
  int max_level = 62;
};

// Whitney decomposition of each open cube Q relative to its own boundary.
CubeCollection whitney_refined(const WhitneyDecomposition& w, const RefineOptions& opt = {});

// Whitney cubes of the open cube q at relative depth r, index space [0, 2^r)^n.
bool refined_accepts(int n, int r, const Index& sub);

}  // namespace qcgeom

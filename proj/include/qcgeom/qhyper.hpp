#pragma once

#include "qcgeom/dyadic.hpp"

#include <vector>

namespace qcgeom {

struct QhPath {
  std::vector<Point> vertices;
  double length_qh = 0.0;
  double length_euclid = 0.0;
};

struct QhOptions {
  // cells closer than this many pitches to the boundary are excluded from paths
  double min_dist_voxels = 2.0;
};

// Shortest path on the cell-center graph (8- or 26-connected) with edge weight
// step * (1/dist(a) + 1/dist(b)) / 2.
QhPath qh_distance(const Domain& d, const Point& x1, const Point& x2, const QhOptions& opt = {});

enum class EdgeWeight { Quasihyperbolic, Euclidean };

// Single-source distances to every cell; +inf where unreachable.
std::vector<double> qh_distance_field(const Domain& d, const Point& source, const QhOptions& opt = {},
                                      EdgeWeight weight = EdgeWeight::Quasihyperbolic);

// Minimal number of Whitney cubes in a face/edge-adjacent chain joining the
// cubes that hold x1 and x2.
int qh_whitney_chain(const WhitneyDecomposition& w, const Point& x1, const Point& x2);

}  // namespace qcgeom

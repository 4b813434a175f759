#include "qcgeom/qhyper.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <queue>

namespace qcgeom {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Neighbor {
  std::int64_t offset[3];
  double length;
};

std::vector<Neighbor> neighbor_stencil(int n) {
  std::vector<Neighbor> out;
  const int count = n == 2 ? 9 : 27;
  for (int c = 0; c < count; ++c) {
    Neighbor nb{{0, 0, 0}, 0.0};
    int r = c;
    int nonzero = 0;
    for (int a = 0; a < n; ++a) {
      nb.offset[a] = r % 3 - 1;
      r /= 3;
      if (nb.offset[a] != 0) ++nonzero;
    }
    if (nonzero == 0) continue;
    nb.length = std::sqrt(static_cast<double>(nonzero));
    out.push_back(nb);
  }
  return out;
}

std::int64_t locate_cell(const Domain& d, const Point& x) {
  const auto cell = d.locate(x);
  if (!cell || !d.occupied(*cell)) throw DomainError("point is not in an occupied cell");
  return *cell;
}

template <typename Visit>
void for_each_neighbor(const Domain& d, const std::vector<Neighbor>& stencil, std::int64_t cell, Visit&& visit) {
  const int n = d.dim();
  const std::int64_t m = d.per_axis();
  std::int64_t c[3] = {0, 0, 0};
  std::int64_t r = cell;
  for (int a = 0; a < n; ++a) {
    c[a] = r % m;
    r /= m;
  }
  for (const auto& nb : stencil) {
    std::int64_t lin = 0;
    std::int64_t mul = 1;
    bool inside = true;
    for (int a = 0; a < n; ++a) {
      const std::int64_t x = c[a] + nb.offset[a];
      if (x < 0 || x >= m) {
        inside = false;
        break;
      }
      lin += x * mul;
      mul *= m;
    }
    if (inside) visit(lin, nb.length);
  }
}

struct Search {
  std::vector<double> dist;
  std::vector<std::uint32_t> prev;
};

Search dijkstra(const Domain& d, std::int64_t source, std::int64_t target, const QhOptions& opt, EdgeWeight weight,
                bool track) {
  const auto stencil = neighbor_stencil(d.dim());
  const double min_sq = opt.min_dist_voxels * opt.min_dist_voxels;
  auto allowed = [&](std::int64_t i) { return d.occupied(i) && static_cast<double>(d.sqdist(i)) >= min_sq; };
  Search s;
  s.dist.assign(d.size(), kInf);
  if (track) s.prev.assign(d.size(), std::numeric_limits<std::uint32_t>::max());
  using Entry = std::pair<double, std::int64_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  s.dist[source] = 0.0;
  pq.push({0.0, source});
  const double h = d.pitch();
  while (!pq.empty()) {
    auto [du, u] = pq.top();
    pq.pop();
    if (du > s.dist[u]) continue;
    if (u == target) break;
    const double inv_u = 1.0 / std::sqrt(static_cast<double>(d.sqdist(u)));
    for_each_neighbor(d, stencil, u, [&](std::int64_t v, double len) {
      if (!allowed(v)) return;
      double w;
      if (weight == EdgeWeight::Quasihyperbolic)
        w = len * 0.5 * (inv_u + 1.0 / std::sqrt(static_cast<double>(d.sqdist(v))));
      else
        w = len * h;
      const double nd = du + w;
      if (nd < s.dist[v]) {
        s.dist[v] = nd;
        if (track) s.prev[v] = static_cast<std::uint32_t>(u);
        pq.push({nd, v});
      }
    });
  }
  return s;
}

bool connected(const Domain& d, std::int64_t a, std::int64_t b) {
  const auto stencil = neighbor_stencil(d.dim());
  std::vector<std::uint8_t> seen(d.size(), 0);
  std::deque<std::int64_t> queue{a};
  seen[a] = 1;
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    if (u == b) return true;
    for_each_neighbor(d, stencil, u, [&](std::int64_t v, double) {
      if (!seen[v] && d.occupied(v)) {
        seen[v] = 1;
        queue.push_back(v);
      }
    });
  }
  return false;
}

}  // namespace

QhPath qh_distance(const Domain& d, const Point& x1, const Point& x2, const QhOptions& opt) {
  const auto a = locate_cell(d, x1);
  const auto b = locate_cell(d, x2);
  const double min_sq = opt.min_dist_voxels * opt.min_dist_voxels;
  if (static_cast<double>(d.sqdist(a)) < min_sq || static_cast<double>(d.sqdist(b)) < min_sq)
    throw PrecisionError("endpoint closer than the minimum distance to the boundary");
  QhPath path;
  if (a == b) {
    path.vertices = {d.center(a)};
    return path;
  }
  auto s = dijkstra(d, a, b, opt, EdgeWeight::Quasihyperbolic, true);
  if (!std::isfinite(s.dist[b])) {
    if (connected(d, a, b)) throw PrecisionError("every path passes cells closer than the minimum distance");
    throw UnreachableError("points lie in different components");
  }
  path.length_qh = s.dist[b];
  std::vector<std::int64_t> cells{b};
  while (cells.back() != a) cells.push_back(s.prev[cells.back()]);
  for (auto it = cells.rbegin(); it != cells.rend(); ++it) path.vertices.push_back(d.center(*it));
  for (std::size_t i = 1; i < path.vertices.size(); ++i)
    path.length_euclid += (path.vertices[i] - path.vertices[i - 1]).norm();
  return path;
}

std::vector<double> qh_distance_field(const Domain& d, const Point& source, const QhOptions& opt, EdgeWeight weight) {
  const auto a = locate_cell(d, source);
  if (static_cast<double>(d.sqdist(a)) < opt.min_dist_voxels * opt.min_dist_voxels)
    throw PrecisionError("source closer than the minimum distance to the boundary");
  return dijkstra(d, a, -1, opt, weight, false).dist;
}

int qh_whitney_chain(const WhitneyDecomposition& w, const Point& x1, const Point& x2) {
  const int n = w.bounds.dim();
  const int top = w.max_level;
  const std::int64_t m = std::int64_t{1} << top;
  std::int64_t total = 1;
  for (int a = 0; a < n; ++a) total *= m;
  std::vector<std::int32_t> owner(total, -1);
  auto lin = [&](const std::int64_t* c) {
    std::int64_t i = 0;
    for (int a = n - 1; a >= 0; --a) i = i * m + c[a];
    return i;
  };
  std::vector<std::array<std::int64_t, 3>> lo(w.cubes.size()), hi(w.cubes.size());
  for (std::size_t k = 0; k < w.cubes.size(); ++k) {
    const auto& q = w.cubes[k];
    const std::int64_t span = std::int64_t{1} << (top - q.level);
    lo[k] = {0, 0, 0};
    hi[k] = {1, 1, 1};
    for (int a = 0; a < n; ++a) {
      lo[k][a] = q.coords[a] * span;
      hi[k][a] = lo[k][a] + span;
    }
    std::int64_t c[3];
    for (c[2] = lo[k][2]; c[2] < hi[k][2]; ++c[2])
      for (c[1] = lo[k][1]; c[1] < hi[k][1]; ++c[1])
        for (c[0] = lo[k][0]; c[0] < hi[k][0]; ++c[0]) owner[lin(c)] = static_cast<std::int32_t>(k);
  }
  auto find = [&](const Point& x) {
    std::int64_t c[3] = {0, 0, 0};
    for (int a = 0; a < n; ++a) {
      const double t = (x[a] - w.bounds.lo[a]) / cube_side(w.bounds, top);
      if (!(t >= 0.0) || t >= static_cast<double>(m)) throw DomainError("point outside the decomposition bounds");
      c[a] = static_cast<std::int64_t>(std::floor(t));
    }
    const auto k = owner[lin(c)];
    if (k < 0) throw DomainError("point is not inside an accepted cube");
    return k;
  };
  const auto s = find(x1);
  const auto t = find(x2);
  std::vector<int> depth(w.cubes.size(), -1);
  std::deque<std::int32_t> queue{s};
  depth[s] = 1;
  while (!queue.empty()) {
    const auto k = queue.front();
    queue.pop_front();
    if (k == t) return depth[k];
    // shell cells whose contact with the cube has dimension >= 1
    std::int64_t c[3] = {0, 0, 0};
    const int zlo = n == 3 ? static_cast<int>(lo[k][2] - 1) : 0;
    const int zhi = n == 3 ? static_cast<int>(hi[k][2] + 1) : 1;
    for (std::int64_t z = zlo; z < zhi; ++z) {
      for (std::int64_t y = lo[k][1] - 1; y < hi[k][1] + 1; ++y) {
        const int outside_yz = (y < lo[k][1] || y >= hi[k][1]) + (n == 3 && (z < lo[k][2] || z >= hi[k][2]));
        if (outside_yz >= n) continue;
        for (std::int64_t x = lo[k][0] - 1; x < hi[k][0] + 1; ++x) {
          const bool out_x = x < lo[k][0] || x >= hi[k][0];
          if (outside_yz == 0 && !out_x) {
            x = hi[k][0] - 1;
            continue;
          }
          if (outside_yz + out_x > n - 1) continue;
          c[0] = x;
          c[1] = y;
          c[2] = z;
          bool in_grid = true;
          for (int a = 0; a < n; ++a) in_grid &= c[a] >= 0 && c[a] < m;
          if (!in_grid) continue;
          const auto nb = owner[lin(c)];
          if (nb >= 0 && depth[nb] < 0) {
            depth[nb] = depth[k] + 1;
            queue.push_back(nb);
          }
        }
      }
    }
  }
  throw UnreachableError("no chain of Whitney cubes joins the points");
}

}  // namespace qcgeom

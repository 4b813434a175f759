#include "qcgeom/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace qcgeom {

namespace {

struct CubeKey {
  int level;
  std::int64_t c[3];
  bool operator==(const CubeKey& o) const {
    return level == o.level && c[0] == o.c[0] && c[1] == o.c[1] && c[2] == o.c[2];
  }
};

struct CubeKeyHash {
  std::size_t operator()(const CubeKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.level) * 0x9E3779B97F4A7C15ULL;
    for (auto v : k.c) h = (h ^ static_cast<std::uint64_t>(v)) * 0xBF58476D1CE4E5B9ULL + (h >> 29);
    return static_cast<std::size_t>(h);
  }
};

CubeKey key_of(const DyadicCube& q) {
  CubeKey k{q.level, {0, 0, 0}};
  for (int a = 0; a < q.dim(); ++a) k.c[a] = q.coords[a];
  return k;
}

// Visits linear indices of the voxel box [lo, hi) in row-major order (axis 0 fastest).
template <typename F>
void for_each_in_box(int n, std::int64_t per_axis, const std::int64_t* lo, const std::int64_t* hi, F&& f) {
  std::int64_t idx[3] = {lo[0], n > 1 ? lo[1] : 0, n > 2 ? lo[2] : 0};
  const std::int64_t stride1 = per_axis;
  const std::int64_t stride2 = per_axis * per_axis;
  if (n == 2) {
    for (idx[1] = lo[1]; idx[1] < hi[1]; ++idx[1])
      for (idx[0] = lo[0]; idx[0] < hi[0]; ++idx[0]) f(idx[0] + idx[1] * stride1);
  } else {
    for (idx[2] = lo[2]; idx[2] < hi[2]; ++idx[2])
      for (idx[1] = lo[1]; idx[1] < hi[1]; ++idx[1])
        for (idx[0] = lo[0]; idx[0] < hi[0]; ++idx[0]) f(idx[0] + idx[1] * stride1 + idx[2] * stride2);
  }
}

// Lower envelope of parabolas (q - v)^2 + f(v), with zero sites at -1 and m.
void envelope_1d(const std::int64_t* f, std::int64_t m, std::int64_t* out, std::vector<std::int64_t>& v,
                 std::vector<double>& z, std::vector<std::int64_t>& fv) {
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();
  v.resize(m + 2);
  z.resize(m + 3);
  fv.resize(m + 2);
  std::int64_t k = 0;
  v[0] = -1;
  fv[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  auto push = [&](std::int64_t q, std::int64_t fq) {
    double s;
    for (;;) {
      const std::int64_t vk = v[k];
      s = static_cast<double>((fq + q * q) - (fv[k] + vk * vk)) / static_cast<double>(2 * (q - vk));
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[k] = q;
    fv[k] = fq;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  };
  for (std::int64_t q = 0; q < m; ++q)
    if (f[q] != kInf) push(q, f[q]);
  push(m, 0);
  std::int64_t j = 0;
  for (std::int64_t q = 0; q < m; ++q) {
    while (z[j + 1] < static_cast<double>(q)) ++j;
    const std::int64_t d = q - v[j];
    out[q] = d * d + fv[j];
  }
}

}  // namespace

Box unit_box(int n, double lo, double side) {
  Box b;
  b.lo = Point::Constant(n, lo);
  b.side = side;
  return b;
}

bool operator<(const DyadicCube& a, const DyadicCube& b) {
  if (a.level != b.level) return a.level < b.level;
  for (int i = a.dim() - 1; i >= 0; --i)
    if (a.coords[i] != b.coords[i]) return a.coords[i] < b.coords[i];
  return false;
}

double cube_side(const Box& bounds, int level) { return std::ldexp(bounds.side, -level); }
double cube_diam(const Box& bounds, int level) { return cube_side(bounds, level) * std::sqrt(bounds.dim()); }

Point cube_lo(const Box& bounds, const DyadicCube& q) {
  return bounds.lo + q.coords.cast<double>() * cube_side(bounds, q.level);
}

Point cube_center(const Box& bounds, const DyadicCube& q) {
  return cube_lo(bounds, q) + Point::Constant(q.dim(), 0.5 * cube_side(bounds, q.level));
}

DyadicCube parent(const DyadicCube& q) {
  DyadicCube p{q.level - 1, q.coords};
  for (int a = 0; a < q.dim(); ++a) p.coords[a] = q.coords[a] >> 1;
  return p;
}

std::vector<std::pair<std::size_t, std::size_t>> overlapping_pairs(int n, const std::vector<DyadicCube>& cubes) {
  std::unordered_map<CubeKey, std::size_t, CubeKeyHash> seen;
  seen.reserve(cubes.size() * 2);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    if (cubes[i].dim() != n) throw ValidationError("cube dimension mismatch");
    auto [it, inserted] = seen.emplace(key_of(cubes[i]), i);
    if (!inserted) out.emplace_back(it->second, i);
  }
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    DyadicCube q = cubes[i];
    while (q.level > 0) {
      q = parent(q);
      auto it = seen.find(key_of(q));
      if (it != seen.end()) out.emplace_back(it->second, i);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void validate_disjoint(const CubeCollection& q) {
  const auto pairs = overlapping_pairs(q.bounds.dim(), q.cubes);
  if (!pairs.empty())
    throw ValidationError("cube collection has overlapping cubes " + std::to_string(pairs[0].first) + " and " +
                          std::to_string(pairs[0].second));
}

void check_voxel_guard(int n, int L) {
  if (n != 2 && n != 3) throw ValidationError("dimension must be 2 or 3");
  if (L < 0 || (n == 2 && L > 14) || (n == 3 && L > 9))
    throw ResolutionError("voxel level " + std::to_string(L) + " exceeds the memory guard for n=" + std::to_string(n));
}

std::vector<std::uint32_t> distance_transform_sq(int n, std::int64_t m, const std::vector<std::uint8_t>& mask) {
  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();
  constexpr std::uint32_t kInf32 = std::numeric_limits<std::uint32_t>::max();
  std::int64_t total = 1;
  for (int a = 0; a < n; ++a) total *= m;
  if (static_cast<std::int64_t>(mask.size()) != total) throw ValidationError("mask size mismatch");
  std::vector<std::uint32_t> g(total);
  for (std::int64_t i = 0; i < total; ++i) g[i] = mask[i] ? kInf32 : 0;
  std::vector<std::int64_t> line(m), out(m), v, fv;
  std::vector<double> z;
  for (int axis = 0; axis < n; ++axis) {
    std::int64_t stride = 1;
    for (int a = 0; a < axis; ++a) stride *= m;
    const std::int64_t lines = total / m;
    for (std::int64_t l = 0; l < lines; ++l) {
      const std::int64_t inner = l % stride;
      const std::int64_t outer = l / stride;
      const std::int64_t base = inner + outer * stride * m;
      for (std::int64_t q = 0; q < m; ++q) {
        const std::uint32_t x = g[base + q * stride];
        line[q] = x == kInf32 ? kInf : static_cast<std::int64_t>(x);
      }
      envelope_1d(line.data(), m, out.data(), v, z, fv);
      for (std::int64_t q = 0; q < m; ++q) g[base + q * stride] = static_cast<std::uint32_t>(out[q]);
    }
  }
  return g;
}

Domain::Domain(Box bounds, int L, std::vector<std::uint8_t> mask)
    : bounds_(std::move(bounds)), L_(L), per_axis_(std::int64_t{1} << L), mask_(std::move(mask)) {
  check_voxel_guard(bounds_.dim(), L_);
  if (!(bounds_.side > 0.0)) throw ValidationError("bounds side must be positive");
  sqdist_ = distance_transform_sq(dim(), per_axis_, mask_);
}

double Domain::dist(std::int64_t i) const { return std::sqrt(static_cast<double>(sqdist_[i])) * pitch(); }

std::int64_t Domain::linear(const Index& c) const {
  std::int64_t i = 0;
  for (int a = dim() - 1; a >= 0; --a) i = i * per_axis_ + c[a];
  return i;
}

Index Domain::unravel(std::int64_t i) const {
  Index c(dim());
  for (int a = 0; a < dim(); ++a) {
    c[a] = i % per_axis_;
    i /= per_axis_;
  }
  return c;
}

Point Domain::center(std::int64_t i) const {
  return bounds_.lo + (unravel(i).cast<double>().array() + 0.5).matrix() * pitch();
}

std::optional<std::int64_t> Domain::locate(const Point& p) const {
  if (p.size() != dim()) throw DomainError("point dimension mismatch");
  Index c(dim());
  for (int a = 0; a < dim(); ++a) {
    const double x = (p[a] - bounds_.lo[a]) / pitch();
    if (!(x >= 0.0) || x > static_cast<double>(per_axis_)) return std::nullopt;
    c[a] = std::min<std::int64_t>(per_axis_ - 1, static_cast<std::int64_t>(std::floor(x)));
  }
  return linear(c);
}

std::int64_t Domain::occupied_count() const {
  return std::count_if(mask_.begin(), mask_.end(), [](std::uint8_t v) { return v != 0; });
}

Domain voxelize(const std::function<bool(const Point&)>& pred, const Box& bounds, int L) {
  check_voxel_guard(bounds.dim(), L);
  const int n = bounds.dim();
  const std::int64_t m = std::int64_t{1} << L;
  std::int64_t total = 1;
  for (int a = 0; a < n; ++a) total *= m;
  std::vector<std::uint8_t> mask(total);
  const double h = bounds.side / static_cast<double>(m);
  Point p(n);
  for (std::int64_t i = 0; i < total; ++i) {
    std::int64_t r = i;
    for (int a = 0; a < n; ++a) {
      p[a] = bounds.lo[a] + (static_cast<double>(r % m) + 0.5) * h;
      r /= m;
    }
    mask[i] = pred(p) ? 1 : 0;
  }
  return Domain(bounds, L, std::move(mask));
}

WhitneyDecomposition whitney_decompose(const Domain& d, int max_level) {
  if (max_level < 0 || max_level > d.level() - 2)
    throw DomainError("whitney max_level must lie in [0, L - 2]");
  const int n = d.dim();
  const int children = 1 << n;
  // minimum squared distance and any-occupied flag per dyadic cell, levels 0..max_level
  std::vector<std::vector<std::uint32_t>> minp(max_level + 1);
  std::vector<std::vector<std::uint8_t>> anyp(max_level + 1);
  {
    std::vector<std::uint32_t> cur_min = d.sqdist_field();
    std::vector<std::uint8_t> cur_any = d.mask();
    for (int lv = d.level() - 1; lv >= 0; --lv) {
      const std::int64_t m = std::int64_t{1} << lv;
      const std::int64_t fine = m * 2;
      std::int64_t total = 1;
      for (int a = 0; a < n; ++a) total *= m;
      std::vector<std::uint32_t> nmin(total, std::numeric_limits<std::uint32_t>::max());
      std::vector<std::uint8_t> nany(total, 0);
      std::int64_t fine_total = total * children;
      for (std::int64_t i = 0; i < fine_total; ++i) {
        std::int64_t r = i;
        std::int64_t ci = 0;
        std::int64_t mul = 1;
        for (int a = 0; a < n; ++a) {
          ci += ((r % fine) >> 1) * mul;
          r /= fine;
          mul *= m;
        }
        nmin[ci] = std::min(nmin[ci], cur_min[i]);
        nany[ci] |= cur_any[i];
      }
      cur_min = std::move(nmin);
      cur_any = std::move(nany);
      if (lv <= max_level) {
        minp[lv] = cur_min;
        anyp[lv] = cur_any;
      }
    }
  }
  WhitneyDecomposition w;
  w.bounds = d.bounds();
  w.L = d.level();
  w.max_level = max_level;
  const double h = d.pitch();
  const double half_diag = 0.5 * h * std::sqrt(static_cast<double>(n));
  std::vector<DyadicCube> stack{DyadicCube{0, Index::Zero(n)}};
  std::vector<std::pair<DyadicCube, bool>> accepted;
  while (!stack.empty()) {
    DyadicCube q = stack.back();
    stack.pop_back();
    const std::int64_t m = std::int64_t{1} << q.level;
    std::int64_t li = 0;
    for (int a = n - 1; a >= 0; --a) li = li * m + q.coords[a];
    if (!anyp[q.level][li]) continue;
    const std::uint32_t mn = minp[q.level][li];
    const bool full = mn > 0;
    if (full) {
      const double dist_lb = std::sqrt(static_cast<double>(mn)) * h - half_diag;
      if (cube_diam(d.bounds(), q.level) <= dist_lb) {
        accepted.emplace_back(q, false);
        continue;
      }
      if (q.level == max_level) {
        accepted.emplace_back(q, true);
        continue;
      }
    }
    if (q.level == max_level) continue;
    for (int c = 0; c < children; ++c) {
      DyadicCube child{q.level + 1, Index(n)};
      for (int a = 0; a < n; ++a) child.coords[a] = 2 * q.coords[a] + ((c >> a) & 1);
      stack.push_back(child);
    }
  }
  std::sort(accepted.begin(), accepted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  w.cubes.reserve(accepted.size());
  w.truncated.reserve(accepted.size());
  w.min_level = accepted.empty() ? 0 : accepted.front().first.level;
  for (auto& [q, t] : accepted) {
    w.cubes.push_back(q);
    w.truncated.push_back(t);
  }
  return w;
}

const char* to_string(WhitneyViolation::Kind k) {
  switch (k) {
    case WhitneyViolation::Kind::Overlap: return "overlap";
    case WhitneyViolation::Kind::Outside: return "outside";
    case WhitneyViolation::Kind::Lower: return "lower";
    case WhitneyViolation::Kind::Upper: return "upper";
  }
  return "?";
}

WhitneyReport verify_whitney(const Domain& d, const WhitneyDecomposition& w) {
  WhitneyReport rep;
  const int n = d.dim();
  if (w.bounds.dim() != n || w.L != d.level()) throw ValidationError("decomposition does not match the domain");
  for (auto [a, b] : overlapping_pairs(n, w.cubes))
    rep.violations.push_back({WhitneyViolation::Kind::Overlap, b, "overlaps cube " + std::to_string(a)});
  const double h = d.pitch();
  const double tol = h * std::sqrt(static_cast<double>(n));
  std::vector<std::uint8_t> covered(d.size(), 0);
  for (std::size_t i = 0; i < w.cubes.size(); ++i) {
    const auto& q = w.cubes[i];
    if (q.level > d.level()) {
      rep.violations.push_back({WhitneyViolation::Kind::Outside, i, "finer than the voxel grid"});
      continue;
    }
    const std::int64_t span = std::int64_t{1} << (d.level() - q.level);
    std::int64_t lo[3], hi[3];
    for (int a = 0; a < n; ++a) {
      lo[a] = q.coords[a] * span;
      hi[a] = lo[a] + span;
    }
    bool inside = true;
    std::uint32_t mn = std::numeric_limits<std::uint32_t>::max();
    for_each_in_box(n, d.per_axis(), lo, hi, [&](std::int64_t li) {
      if (!d.occupied(li)) inside = false;
      mn = std::min(mn, d.sqdist(li));
      covered[li] = 1;
    });
    if (w.truncated[i]) ++rep.truncated;
    if (!inside) {
      rep.violations.push_back({WhitneyViolation::Kind::Outside, i, "cube meets unoccupied cells"});
      continue;
    }
    const double dq = std::sqrt(static_cast<double>(mn)) * h;
    const double diam = cube_diam(d.bounds(), q.level);
    if (!w.truncated[i] && diam > dq + tol)
      rep.violations.push_back({WhitneyViolation::Kind::Lower, i, "diam exceeds dist"});
    if (dq > 4.0 * diam + tol) rep.violations.push_back({WhitneyViolation::Kind::Upper, i, "dist exceeds 4 diam"});
  }
  const double threshold = cube_diam(d.bounds(), w.max_level);
  for (std::int64_t i = 0; i < d.size(); ++i) {
    if (d.occupied(i) && d.dist(i) > threshold) {
      ++rep.eligible;
      if (covered[i]) ++rep.covered;
    }
  }
  rep.coverage = rep.eligible == 0 ? 1.0 : static_cast<double>(rep.covered) / static_cast<double>(rep.eligible);
  return rep;
}

bool refined_accepts(int n, int r, const Index& sub) {
  const std::int64_t m = std::int64_t{1} << r;
  std::int64_t k = m;
  for (int a = 0; a < n; ++a) k = std::min({k, sub[a], m - 1 - sub[a]});
  // diam = s sqrt(n) <= dist = s k
  return k * k >= n;
}

CubeCollection whitney_refined(const WhitneyDecomposition& w, const RefineOptions& opt) {
  CubeCollection out;
  out.bounds = w.bounds;
  const int n = w.bounds.dim();
  const int children = 1 << n;
  struct Item {
    int r;
    Index sub;
  };
  std::vector<Item> stack;
  for (const auto& q : w.cubes) {
    stack.clear();
    stack.push_back({0, Index::Zero(n)});
    while (!stack.empty()) {
      Item it = stack.back();
      stack.pop_back();
      if (it.r > 0 && refined_accepts(n, it.r, it.sub)) {
        DyadicCube c{q.level + it.r, Index(n)};
        for (int a = 0; a < n; ++a) c.coords[a] = (q.coords[a] << it.r) + it.sub[a];
        out.cubes.push_back(std::move(c));
        continue;
      }
      if (it.r >= opt.max_relative_depth || q.level + it.r >= opt.max_level) continue;
      for (int c = 0; c < children; ++c) {
        Item child{it.r + 1, Index(n)};
        for (int a = 0; a < n; ++a) child.sub[a] = 2 * it.sub[a] + ((c >> a) & 1);
        stack.push_back(std::move(child));
      }
    }
  }
  std::sort(out.cubes.begin(), out.cubes.end());
  return out;
}

}  // namespace qcgeom

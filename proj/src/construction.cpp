#include "qcgeom/construction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace qcgeom {

namespace {

constexpr std::uint8_t kWall = 255;
constexpr std::uint8_t kVisited = 254;
constexpr std::uint8_t kContact = 253;

struct Grid {
  int n;
  int L;
  std::int64_t m;
  std::int64_t total;

  Grid(int n_, int L_) : n(n_), L(L_), m(std::int64_t{1} << L_), total(1) {
    for (int a = 0; a < n; ++a) total *= m;
  }

  void decode(std::int64_t i, std::int64_t* c) const {
    c[2] = 0;
    for (int a = 0; a < n; ++a) c[a] = (i >> (a * L)) & (m - 1);
  }
  std::int64_t encode(const std::int64_t* c) const {
    std::int64_t i = 0;
    for (int a = n - 1; a >= 0; --a) i = (i << L) | c[a];
    return i;
  }

  // Chebyshev neighbors (8 in 2D, 26 in 3D) inside the grid.
  template <typename F>
  void chebyshev(std::int64_t i, F&& f) const {
    std::int64_t c[3];
    decode(i, c);
    const int zr = n == 3 ? 1 : 0;
    for (int dz = -zr; dz <= zr; ++dz) {
      if (c[2] + dz < 0 || c[2] + dz >= (n == 3 ? m : 1)) continue;
      for (int dy = -1; dy <= 1; ++dy) {
        if (c[1] + dy < 0 || c[1] + dy >= m) continue;
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0 && dz == 0) continue;
          if (c[0] + dx < 0 || c[0] + dx >= m) continue;
          f(i + dx + dy * m + dz * m * m);
        }
      }
    }
  }

  // Face neighbors; returns false through f(-1) for sides on the grid border.
  template <typename F>
  void faces(std::int64_t i, F&& f) const {
    std::int64_t c[3];
    decode(i, c);
    std::int64_t stride = 1;
    for (int a = 0; a < n; ++a) {
      f(c[a] > 0 ? i - stride : -1);
      f(c[a] + 1 < m ? i + stride : -1);
      stride *= m;
    }
  }
};

struct ArmBox {
  std::int64_t lo[3];
  std::int64_t hi[3];  // inclusive
};

// Voxel boxes of the arms of one level-k square; S = side, A = alpha in voxels.
std::vector<ArmBox> arm_boxes(const Grid& g, const std::int64_t* idx, std::int64_t S, std::int64_t A) {
  std::int64_t C[3] = {0, 0, 0};
  for (int a = 0; a < g.n; ++a) C[a] = S * idx[a] + S / 2;
  std::vector<ArmBox> out;
  auto tube = [&](int axis, const std::int64_t* offset) {
    ArmBox b{{0, 0, 0}, {0, 0, 0}};
    for (int a = 0; a < g.n; ++a) {
      if (a == axis) {
        b.lo[a] = C[a] - S / 2;
        b.hi[a] = C[a] + S / 2 - 1;
        // interior faces keep a one-voxel layer so same-level arms stay apart
        if (g.n == 3) {
          if (b.lo[a] != 0) ++b.lo[a];
          if (b.hi[a] != g.m - 1) --b.hi[a];
        }
      } else {
        b.lo[a] = C[a] + offset[a] - A;
        b.hi[a] = C[a] + offset[a] + A - 1;
      }
    }
    out.push_back(b);
  };
  const std::int64_t zero[3] = {0, 0, 0};
  for (int a = 0; a < g.n; ++a) tube(a, zero);
  if (g.n == 3) {
    for (const std::int64_t sgn : {-1, 1}) {
      const std::int64_t off[3] = {0, sgn * S / 4, 0};
      tube(0, off);
    }
  }
  return out;
}

template <typename F>
void for_box(const Grid& g, const ArmBox& b, F&& f) {
  std::int64_t c[3] = {0, 0, 0};
  const std::int64_t zlo = g.n == 3 ? b.lo[2] : 0;
  const std::int64_t zhi = g.n == 3 ? b.hi[2] : 0;
  for (c[2] = zlo; c[2] <= zhi; ++c[2])
    for (c[1] = b.lo[1]; c[1] <= b.hi[1]; ++c[1])
      for (c[0] = b.lo[0]; c[0] <= b.hi[0]; ++c[0]) f(g.encode(c));
}

std::vector<Dyadic> level_alphas(const ConstructionParams& p) {
  std::vector<Dyadic> out;
  for (int k = 1; k <= p.depth; ++k) out.push_back(alpha_from_gauge(p.gauge, p.c, k, p.depth_cap));
  return out;
}

struct ContactGroup {
  int stage = 0;
  std::vector<std::int64_t> cells;
  std::int64_t lo[3];
  std::int64_t hi[3];
  std::array<double, 3> mid;
};

// Component with no 2^n block of its own cells.
bool thin(const Grid& g, const std::vector<std::int64_t>& comp) {
  const std::unordered_set<std::int64_t> in(comp.begin(), comp.end());
  for (const auto i : comp) {
    std::int64_t c[3];
    g.decode(i, c);
    bool full = true;
    for (int o = 1; o < (1 << g.n) && full; ++o) {
      std::int64_t d[3] = {c[0], c[1], c[2]};
      for (int a = 0; a < g.n; ++a) d[a] += (o >> a) & 1;
      bool ok = true;
      for (int a = 0; a < g.n; ++a) ok = ok && d[a] < g.m;
      full = ok && in.count(g.encode(d)) > 0;
    }
    if (full) return false;
  }
  return true;
}

enum class GateResult { Opened, NoContact, Pruned };

// Opens one gate for the component. Thin slivers without a usable contact are removed.
GateResult open_gate(const Grid& g, std::vector<std::uint8_t>& stage, const std::vector<std::int64_t>& comp, int k,
               std::int64_t G, ConstructionLevel& level) {
  std::vector<std::int64_t> walls;
  for (const auto i : comp) {
    g.chebyshev(i, [&](std::int64_t j) {
      if (stage[j] == kWall) {
        stage[j] = kContact;
        walls.push_back(j);
      }
    });
  }
  for (const auto w : walls) stage[w] = kWall;
  for (const auto i : comp) stage[i] = kVisited;
  // a gate cell may touch only this component and a single earlier stage
  std::vector<std::uint32_t> bits(walls.size(), 0);
  std::uint32_t any = 0;
  for (std::size_t w = 0; w < walls.size(); ++w) {
    bool foreign = false;
    g.chebyshev(walls[w], [&](std::int64_t j) {
      const int s = stage[j];
      if (s >= 1 && s < k) bits[w] |= 1u << s;
      if (s == k) foreign = true;
    });
    if (foreign || (bits[w] & (bits[w] - 1)) != 0) bits[w] = 0;
    any |= bits[w];
  }
  for (const auto i : comp) stage[i] = static_cast<std::uint8_t>(k);
  if (any == 0) return GateResult::NoContact;

  std::vector<ContactGroup> groups;
  for (int target = k - 1; target >= 1; --target) {
    if (!(any & (1u << target))) continue;
    std::unordered_map<std::int64_t, std::size_t> where;
    for (std::size_t w = 0; w < walls.size(); ++w)
      if (bits[w] & (1u << target)) where.emplace(walls[w], w);
    std::vector<bool> seen(walls.size(), false);
    for (const auto& [cell, w0] : where) {
      if (seen[w0]) continue;
      ContactGroup grp;
      grp.stage = target;
      std::vector<std::int64_t> queue{cell};
      seen[w0] = true;
      while (!queue.empty()) {
        const auto u = queue.back();
        queue.pop_back();
        grp.cells.push_back(u);
        g.chebyshev(u, [&](std::int64_t v) {
          const auto it = where.find(v);
          if (it != where.end() && !seen[it->second]) {
            seen[it->second] = true;
            queue.push_back(v);
          }
        });
      }
      std::sort(grp.cells.begin(), grp.cells.end());
      for (int x = 0; x < 3; ++x) {
        grp.lo[x] = std::numeric_limits<std::int64_t>::max();
        grp.hi[x] = std::numeric_limits<std::int64_t>::min();
      }
      for (const auto u : grp.cells) {
        std::int64_t c[3];
        g.decode(u, c);
        for (int x = 0; x < g.n; ++x) {
          grp.lo[x] = std::min(grp.lo[x], c[x]);
          grp.hi[x] = std::max(grp.hi[x], c[x]);
        }
      }
      grp.mid = {0.0, 0.0, 0.0};
      for (int x = 0; x < g.n; ++x) grp.mid[x] = 0.5 * static_cast<double>(grp.lo[x] + grp.hi[x] + 1);
      groups.push_back(std::move(grp));
    }
  }

  auto long_axes = [&](const ContactGroup& grp) {
    std::vector<int> axes(g.n);
    for (int x = 0; x < g.n; ++x) axes[x] = x;
    std::stable_sort(axes.begin(), axes.end(),
                     [&](int x, int y) { return grp.hi[x] - grp.lo[x] > grp.hi[y] - grp.lo[y]; });
    axes.pop_back();
    return axes;
  };
  auto window = [&](const ContactGroup& grp) {
    const auto axes = long_axes(grp);
    Gate gate;
    gate.level = k;
    gate.to_stage = grp.stage;
    gate.lo = Index::Constant(g.n, std::numeric_limits<std::int64_t>::max());
    gate.hi = Index::Constant(g.n, std::numeric_limits<std::int64_t>::min());
    for (const auto u : grp.cells) {
      std::int64_t c[3];
      g.decode(u, c);
      bool inside = true;
      for (const int a : axes) inside = inside && std::abs(static_cast<double>(c[a]) + 0.5 - grp.mid[a]) < 0.5 * G;
      if (!inside) continue;
      ++gate.cells;
      for (int a = 0; a < g.n; ++a) {
        gate.lo[a] = std::min(gate.lo[a], c[a]);
        gate.hi[a] = std::max(gate.hi[a], c[a]);
      }
    }
    std::int64_t width = gate.cells == 0 ? 0 : std::numeric_limits<std::int64_t>::max();
    for (const int a : axes)
      if (gate.cells > 0) width = std::min(width, gate.hi[a] - gate.lo[a] + 1);
    return std::make_pair(gate, width);
  };
  std::vector<std::pair<Gate, std::int64_t>> windows;
  for (const auto& grp : groups) windows.push_back(window(grp));
  // full width first, then the parent stage, then the most recent stage, then the widest
  auto rank = [&](std::size_t i) {
    const auto w = windows[i].second;
    return std::make_tuple(w >= G ? 0 : 1, groups[i].stage == k - 1 ? 0 : 1, -groups[i].stage, -w, groups[i].mid);
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < groups.size(); ++i)
    if (rank(i) < rank(best)) best = i;
  const auto& [gate, width] = windows[best];
  if (width < 2 && thin(g, comp)) {
    for (const auto i : comp) stage[i] = 0;
    level.pruned.insert(level.pruned.end(), comp.begin(), comp.end());
    return GateResult::Pruned;
  }
  if (width < 2) {
    std::string where = "(";
    for (int b = 0; b < g.n; ++b) where += (b ? "," : "") + std::to_string(groups[best].lo[b]);
    throw ResolutionError("gate at level " + std::to_string(k) + " near voxel " + where +
                          ") is narrower than 2 voxels; component has " + std::to_string(comp.size()) +
                          " cells, contact " + std::to_string(groups[best].cells.size()));
  }
  for (const auto u : groups[best].cells) {
    std::int64_t c[3];
    g.decode(u, c);
    bool inside = true;
    for (int a = 0; a < g.n; ++a) inside = inside && c[a] >= gate.lo[a] && c[a] <= gate.hi[a];
    if (inside) stage[u] = static_cast<std::uint8_t>(k);
  }
  level.gates.push_back(gate);
  return GateResult::Opened;
}

std::int64_t parent_code(std::int64_t code, int n, int level) {
  const std::int64_t m = std::int64_t{1} << level;
  const std::int64_t mp = m >> 1;
  std::int64_t out = 0;
  std::int64_t mul = 1;
  for (int a = 0; a < n; ++a) {
    out += ((code % m) >> 1) * mul;
    code /= m;
    mul *= mp;
  }
  return out;
}

}  // namespace

Box unit_cell(int n) { return unit_box(n, -0.5, 1.0); }

ConstructionTree build_domain(const ConstructionParams& p) {
  if (p.n != 2 && p.n != 3) throw ValidationError("construction dimension must be 2 or 3");
  if (p.depth < 1) throw ValidationError("depth must be at least 1");
  if (!(p.gate_scale > 0.0)) throw ValidationError("gate_scale must be positive");
  check_voxel_guard(p.n, p.L);
  const auto alphas = level_alphas(p);
  const Grid g(p.n, p.L);

  std::vector<ConstructionLevel> levels;
  for (int k = 1; k <= p.depth; ++k) {
    const int e = alphas[k - 1].exponent;
    if (e > p.L || p.L - e < 0)
      throw ResolutionError("alpha(2^-" + std::to_string(k) + ") is below the voxel pitch");
    const std::int64_t A = std::int64_t{1} << (p.L - e);
    const auto G = static_cast<std::int64_t>(std::floor(p.gate_scale * static_cast<double>(A)));
    if (2 * A < 2) throw ResolutionError("corridor at level " + std::to_string(k) + " is narrower than 2 voxels");
    if (G < 2) throw ResolutionError("gate at level " + std::to_string(k) + " is narrower than 2 voxels");
    if (p.L - k + 1 < 2) throw ResolutionError("level-" + std::to_string(k) + " squares are too small for the grid");
  }

  std::vector<std::uint8_t> stage(g.total, 0);
  for (int k = 1; k <= p.depth; ++k) {
    ConstructionLevel level;
    level.k = k;
    level.alpha = alphas[k - 1];
    const std::int64_t A = std::int64_t{1} << (p.L - alphas[k - 1].exponent);
    const auto G = static_cast<std::int64_t>(std::floor(p.gate_scale * static_cast<double>(A)));
    const std::int64_t S = std::int64_t{1} << (p.L - k + 1);
    const std::int64_t per = std::int64_t{1} << (k - 1);
    std::int64_t count = 1;
    for (int a = 0; a < p.n; ++a) count *= per;

    std::vector<std::int64_t> candidates;
    for (std::int64_t q = 0; q < count; ++q) {
      std::int64_t idx[3] = {0, 0, 0};
      std::int64_t r = q;
      DyadicCube cube{k - 1, Index(p.n)};
      for (int a = 0; a < p.n; ++a) {
        idx[a] = r % per;
        r /= per;
        cube.coords[a] = idx[a];
      }
      level.squares.push_back(cube);
      for (const auto& box : arm_boxes(g, idx, S, A)) {
        for_box(g, box, [&](std::int64_t i) {
          if (stage[i] == 0) {
            stage[i] = static_cast<std::uint8_t>(k);
            candidates.push_back(i);
          }
        });
      }
    }
    // cells touching earlier stages become one-voxel walls
    std::vector<std::int64_t> kept;
    std::vector<std::int64_t> walls;
    for (const auto i : candidates) {
      bool touches = false;
      g.chebyshev(i, [&](std::int64_t j) {
        if (stage[j] >= 1 && stage[j] < k) touches = true;
      });
      (touches ? walls : kept).push_back(i);
    }
    for (const auto w : walls) stage[w] = kWall;

    std::vector<std::vector<std::int64_t>> comps;
    for (const auto s : kept) {
      if (stage[s] != k) continue;
      std::vector<std::int64_t> comp{s};
      stage[s] = kVisited;
      for (std::size_t h = 0; h < comp.size(); ++h) {
        g.chebyshev(comp[h], [&](std::int64_t j) {
          if (stage[j] == k) {
            stage[j] = kVisited;
            comp.push_back(j);
          }
        });
      }
      comps.push_back(std::move(comp));
    }
    for (const auto& comp : comps)
      for (const auto i : comp) stage[i] = static_cast<std::uint8_t>(k);
    level.components_before_gating = static_cast<int>(comps.size());

    if (k > 1) {
      for (const auto& comp : comps)
        if (open_gate(g, stage, comp, k, G, level) == GateResult::NoContact) ++level.ungated;
    }
    for (const auto w : walls)
      if (stage[w] == kWall) stage[w] = 0;
    for (const auto i : candidates)
      if (stage[i] == k) ++level.cells;
    levels.push_back(std::move(level));
  }

  Domain d(unit_cell(p.n), p.L, std::move(stage));
  ConstructionTree t{p, std::move(levels), std::move(d), 0, -1};
  t.components = count_components(t.domain);
  if (p.n == 2) t.holes = count_holes(t.domain);
  return t;
}

ConstructionTree build_domain_2d(ConstructionParams p) {
  p.n = 2;
  return build_domain(p);
}

ConstructionTree build_domain_3d(ConstructionParams p) {
  p.n = 3;
  return build_domain(p);
}

bool in_arm(const ConstructionParams& p, const std::vector<Dyadic>& alpha, int k, const Point& x) {
  const int n = p.n;
  const double s = std::ldexp(1.0, 1 - k);
  const double h = std::ldexp(1.0, -p.L);
  const double a = alpha[k - 1].value();
  Point c(n);
  for (int i = 0; i < n; ++i) {
    if (x[i] < -0.5 || x[i] >= 0.5) return false;
    c[i] = -0.5 + (std::floor((x[i] + 0.5) / s) + 0.5) * s;
  }
  auto tube = [&](int axis, double y_offset) {
    for (int b = 0; b < n; ++b) {
      if (b == axis) continue;
      const double target = c[b] + (b == 1 ? y_offset : 0.0);
      if (!(std::abs(x[b] - target) < a)) return false;
    }
    if (n == 3 && std::abs(x[axis] - c[axis]) > s / 2 - h) {
      const double face = x[axis] > c[axis] ? c[axis] + s / 2 : c[axis] - s / 2;
      if (std::abs(face) != 0.5) return false;
    }
    return true;
  };
  for (int axis = 0; axis < n; ++axis)
    if (tube(axis, 0.0)) return true;
  if (n == 3 && (tube(0, s / 4) || tube(0, -s / 4))) return true;
  return false;
}

int count_components(const Domain& d) {
  const Grid g(d.dim(), d.level());
  std::vector<std::uint8_t> seen(g.total, 0);
  std::vector<std::int64_t> queue;
  int comps = 0;
  for (std::int64_t s = 0; s < g.total; ++s) {
    if (!d.occupied(s) || seen[s]) continue;
    ++comps;
    queue.assign(1, s);
    seen[s] = 1;
    while (!queue.empty()) {
      const auto u = queue.back();
      queue.pop_back();
      g.chebyshev(u, [&](std::int64_t v) {
        if (d.occupied(v) && !seen[v]) {
          seen[v] = 1;
          queue.push_back(v);
        }
      });
    }
  }
  return comps;
}

int count_holes(const Domain& d) {
  const Grid g(d.dim(), d.level());
  std::vector<std::uint8_t> seen(g.total, 0);
  std::vector<std::int64_t> queue;
  int holes = 0;
  for (std::int64_t s = 0; s < g.total; ++s) {
    if (d.occupied(s) || seen[s]) continue;
    bool border = false;
    queue.assign(1, s);
    seen[s] = 1;
    while (!queue.empty()) {
      const auto u = queue.back();
      queue.pop_back();
      g.faces(u, [&](std::int64_t v) {
        if (v < 0) {
          border = true;
        } else if (!d.occupied(v) && !seen[v]) {
          seen[v] = 1;
          queue.push_back(v);
        }
      });
    }
    if (!border) ++holes;
  }
  return holes;
}

CellSet boundary_voxels(const Domain& d) {
  const Grid g(d.dim(), d.level());
  CellSet out{d.bounds(), d.level(), {}};
  for (std::int64_t i = 0; i < g.total; ++i) {
    if (!d.occupied(i)) continue;
    bool edge = false;
    g.faces(i, [&](std::int64_t j) { edge = edge || j < 0 || !d.occupied(j); });
    if (edge) out.codes.push_back(i);
  }
  return out;
}

CellSet boundary_set(const ConstructionTree& t, int level) {
  if (level > t.domain.level() || level < 0) throw DomainError("boundary level outside [0, L]");
  const auto b = boundary_voxels(t.domain);
  return level == b.level ? b : coarsen(b, level);
}

std::vector<MassMap> frostman_measure(const ConstructionTree& t) {
  const int n = t.params.n;
  const auto b = boundary_voxels(t.domain);
  std::vector<MassMap> maps;
  if (b.empty()) return maps;
  maps.push_back(MassMap{b.bounds, 0, {0}, {1.0}});
  for (int j = 1; j < t.params.depth; ++j) {
    const auto children = coarsen(b, j);
    const auto& prev = maps.back();
    std::vector<int> counts(prev.codes.size(), 0);
    std::vector<std::size_t> parent_of(children.codes.size());
    for (std::size_t c = 0; c < children.codes.size(); ++c) {
      const auto pc = parent_code(children.codes[c], n, j);
      const auto it = std::lower_bound(prev.codes.begin(), prev.codes.end(), pc);
      parent_of[c] = static_cast<std::size_t>(it - prev.codes.begin());
      ++counts[parent_of[c]];
    }
    MassMap next{b.bounds, j, children.codes, std::vector<double>(children.codes.size())};
    for (std::size_t c = 0; c < children.codes.size(); ++c)
      next.mass[c] = prev.mass[parent_of[c]] / counts[parent_of[c]];
    maps.push_back(std::move(next));
  }
  return maps;
}

double frostman_sup_ratio(const std::vector<MassMap>& maps, const GaugeFunction& psi) {
  double sup = 0.0;
  for (const auto& m : maps) {
    double worst = 0.0;
    for (const auto v : m.mass) worst = std::max(worst, v);
    if (worst > 0.0) sup = std::max(sup, std::exp(std::log(worst) - psi.log_phi(std::log(cube_side(m.bounds, m.level)))));
  }
  return sup;
}

GaugeFunction realized_gauge(const ConstructionTree& t) {
  const auto& p = t.params;
  const int extra = 4;
  std::vector<double> q;
  for (int k = 1; k <= p.depth + extra; ++k) {
    const auto& a = t.levels[std::min(k, p.depth) - 1].alpha;
    const double alpha = k <= p.depth ? a.value() : std::ldexp(a.value(), p.depth - k);
    q.push_back(p.c * std::ldexp(1.0, -k) / alpha);
  }
  // walk down from y = 1; log2 u drops by q_k over [2^{-k}, 2^{-k+1}]
  std::vector<std::array<double, 2>> pts{{0.0, 0.0}};
  double lu = 0.0;
  for (int k = 1; k <= static_cast<int>(q.size()); ++k) {
    const int steps = std::max(1, static_cast<int>(std::ceil(q[k - 1])));
    for (int s = 1; s <= steps; ++s) {
      const double f = static_cast<double>(s) / steps;
      pts.push_back({lu - f * q[k - 1], -(k - 1) - f});
    }
    lu -= q[k - 1];
  }
  std::reverse(pts.begin(), pts.end());
  return GaugeFunction::tabulated(std::move(pts));
}

GrowthReport verify_growth_condition(const ConstructionTree& t, int sample_count, const GrowthOptions& opt) {
  GrowthReport rep;
  rep.c = t.params.c;
  if (sample_count <= 0) return rep;
  const auto& d = t.domain;
  const int depth = t.params.depth;
  const Point origin = Point::Zero(d.dim());
  const auto field = qh_distance_field(d, origin);
  const auto oc = *d.locate(origin);
  const double d0 = d.dist(oc);
  const auto gauge = realized_gauge(t);

  std::vector<std::vector<std::int64_t>> by_stage(depth + 1);
  for (std::int64_t i = 0; i < d.size(); ++i)
    if (std::isfinite(field[i])) by_stage[d.mask()[i]].push_back(i);
  std::mt19937_64 rng(opt.seed);
  std::vector<std::int64_t> picks;
  int deficit = 0;
  for (int s = 1; s <= depth; ++s) {
    const int quota = sample_count / depth + (s - 1 < sample_count % depth ? 1 : 0) + deficit;
    const int take = std::min<int>(quota, static_cast<int>(by_stage[s].size()));
    deficit = quota - take;
    std::sample(by_stage[s].begin(), by_stage[s].end(), std::back_inserter(picks), take, rng);
  }

  std::vector<double> oracle(depth + 1, 0.0);
  for (int s = 1; s <= depth; ++s)
    oracle[s] = oracle[s - 1] + std::ldexp(1.0, -s) / t.levels[s - 1].alpha.value();

  std::vector<double> needed;
  std::vector<double> ratios;
  for (const auto i : picks) {
    GrowthSample gs;
    gs.x = d.center(i);
    gs.stage = d.mask()[i];
    gs.k = field[i];
    gs.dist = d.dist(i);
    const double ratio = std::min(1.0, gs.dist / d0);
    gs.phi = std::max(0.0, -gauge.log_u(std::log(ratio)));
    gs.oracle = oracle[gs.stage];
    ratios.push_back(gs.k / gs.oracle);
    needed.push_back(gs.k / (gs.phi / rep.c + 1.0));
    rep.samples.push_back(gs);
  }
  if (rep.samples.empty()) return rep;
  auto sorted = needed;
  std::sort(sorted.begin(), sorted.end());
  const auto at = static_cast<std::size_t>(std::ceil(opt.quantile * static_cast<double>(sorted.size()))) - 1;
  rep.C = sorted[std::min(at, sorted.size() - 1)];
  rep.C_slope = rep.C / rep.c;
  rep.C_offset = rep.C;
  std::size_t ok = 0;
  for (auto& gs : rep.samples) {
    gs.residual = rep.C_slope * gs.phi + rep.C_offset - gs.k;
    if (gs.residual >= 0.0) ++ok;
  }
  rep.feasible_fraction = static_cast<double>(ok) / static_cast<double>(rep.samples.size());
  std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
  rep.oracle_ratio_median = ratios[ratios.size() / 2];
  rep.pass = rep.C_slope <= opt.slope_limit / rep.c && rep.feasible_fraction >= opt.quantile;
  if (opt.internal_diameter) {
    const auto euclid = qh_distance_field(d, origin, {}, EdgeWeight::Euclidean);
    double radius = 0.0;
    for (const auto v : euclid)
      if (std::isfinite(v)) radius = std::max(radius, v);
    rep.internal_diameter = 2.0 * radius;
  }
  return rep;
}

}  // namespace qcgeom

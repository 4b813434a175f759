#include "qcgeom/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

namespace qcgeom {

namespace {

constexpr char kMagic[4] = {'Q', 'C', 'G', 'D'};
constexpr std::uint32_t kDomainVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_f64(std::vector<std::uint8_t>& out, double x) {
  const auto v = std::bit_cast<std::uint64_t>(x);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : b_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(b_[pos_++]) << (8 * b);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(b_[pos_++]) << (8 * b);
    return std::bit_cast<double>(v);
  }
  const std::uint8_t* take(std::size_t count) {
    need(count);
    const auto* p = b_.data() + pos_;
    pos_ += count;
    return p;
  }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  void need(std::size_t count) const {
    if (b_.size() - pos_ < count) throw IoError("domain file is truncated");
  }
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

double number(const Json& j, const char* what) {
  if (!j.is_number()) throw ValidationError(std::string("gauge ") + what + " must be a number");
  return j.get<double>();
}

void write_point(std::ostream& os, const Point& p) {
  for (int a = 0; a < p.size(); ++a) os << (a ? "," : "") << p[a];
}

std::string axis_header(const char* prefix, int n) {
  std::string s;
  for (int a = 0; a < n; ++a) s += (a ? "," : "") + std::string(prefix) + std::to_string(a);
  return s;
}

Json index_json(const Index& c) {
  Json a = Json::array();
  for (int i = 0; i < c.size(); ++i) a.push_back(c[i]);
  return a;
}

}  // namespace

Json gauge_to_json(const GaugeFunction& g) {
  Json j;
  j["kind"] = to_string(g.kind());
  switch (g.kind()) {
    case GaugeKind::Power: j["params"] = {{"a", g.param(0)}}; break;
    case GaugeKind::JonesMakarov: j["params"] = {{"c", g.param(0)}, {"s", g.param(1)}}; break;
    case GaugeKind::LogPower: j["params"] = {{"n", g.param(0)}, {"C", g.param(1)}}; break;
    case GaugeKind::Tabulated: {
      Json pts = Json::array();
      for (const auto& p : g.breakpoints()) pts.push_back({p[0], p[1]});
      j["params"] = pts;
      break;
    }
  }
  j["t_max"] = g.t_max();
  return j;
}

GaugeFunction gauge_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw ValidationError("gauge needs a string field 'kind'");
  for (const auto& [key, _] : j.items())
    if (key != "kind" && key != "params" && key != "t_max") throw ValidationError("unknown gauge field '" + key + "'");
  const auto kind = j["kind"].get<std::string>();
  const Json params = j.value("params", Json::object());
  const bool has_t = j.contains("t_max");
  auto field = [&](const char* name) {
    if (!params.is_object() || !params.contains(name))
      throw ValidationError("gauge " + kind + " needs params." + name);
    return number(params[name], name);
  };
  auto check_fields = [&](std::initializer_list<const char*> names) {
    for (const auto& [key, _] : params.items())
      if (std::none_of(names.begin(), names.end(), [&](const char* n) { return key == n; }))
        throw ValidationError("unknown gauge parameter '" + key + "'");
  };
  if (kind == "Power") {
    check_fields({"a"});
    return GaugeFunction::power(field("a"), has_t ? number(j["t_max"], "t_max") : 1.0);
  }
  if (kind == "JonesMakarov") {
    check_fields({"c", "s"});
    return GaugeFunction::jones_makarov(field("c"), field("s"), has_t ? number(j["t_max"], "t_max") : 1.0);
  }
  if (kind == "LogPower") {
    check_fields({"n", "C"});
    std::optional<double> t;
    if (has_t) t = number(j["t_max"], "t_max");
    return GaugeFunction::log_power(field("n"), field("C"), t);
  }
  if (kind == "Tabulated") {
    if (!params.is_array()) throw ValidationError("Tabulated params must be an array of [log2 t, log2 phi] pairs");
    std::vector<std::array<double, 2>> pts;
    for (const auto& p : params) {
      if (!p.is_array() || p.size() != 2) throw ValidationError("Tabulated breakpoint must be a pair");
      pts.push_back({number(p[0], "breakpoint"), number(p[1], "breakpoint")});
    }
    auto g = GaugeFunction::tabulated(std::move(pts));
    if (has_t && number(j["t_max"], "t_max") != g.t_max())
      throw ValidationError("Tabulated t_max must equal the last abscissa");
    return g;
  }
  throw ValidationError("unknown gauge kind '" + kind + "'");
}

std::vector<std::uint8_t> encode_domain(const Domain& d) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_u32(out, kDomainVersion);
  put_u32(out, static_cast<std::uint32_t>(d.dim()));
  put_u32(out, static_cast<std::uint32_t>(d.level()));
  for (int a = 0; a < d.dim(); ++a) put_f64(out, d.bounds().lo[a]);
  for (int a = 0; a < d.dim(); ++a) put_f64(out, d.bounds().lo[a] + d.bounds().side);
  const std::size_t header = out.size();
  out.resize(header + (static_cast<std::size_t>(d.size()) + 7) / 8, 0);
  for (std::int64_t i = 0; i < d.size(); ++i)
    if (d.occupied(i)) out[header + static_cast<std::size_t>(i >> 3)] |= static_cast<std::uint8_t>(1u << (i & 7));
  return out;
}

Domain decode_domain(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (std::memcmp(r.take(4), kMagic, 4) != 0) throw IoError("not a domain file");
  if (r.u32() != kDomainVersion) throw IoError("unsupported domain file version");
  const auto n = static_cast<int>(r.u32());
  const auto L = static_cast<int>(r.u32());
  if (n != 2 && n != 3) throw IoError("domain file has dimension " + std::to_string(n));
  if (L < 0 || L > 20) throw IoError("domain file has level " + std::to_string(L));
  std::vector<double> lo(n), hi(n);
  for (auto& v : lo) v = r.f64();
  for (auto& v : hi) v = r.f64();
  Box b{Eigen::Map<const Eigen::VectorXd>(lo.data(), n), hi[0] - lo[0]};
  for (int a = 1; a < n; ++a)
    if (hi[a] - lo[a] != b.side) throw IoError("domain bounds are not a cube");
  check_voxel_guard(n, L);
  std::int64_t total = 1;
  for (int a = 0; a < n; ++a) total <<= L;
  const auto count = static_cast<std::size_t>((total + 7) / 8);
  if (r.remaining() != count) throw IoError("domain bitmask has the wrong length");
  const auto* bits = r.take(count);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(total));
  for (std::int64_t i = 0; i < total; ++i) mask[i] = (bits[i >> 3] >> (i & 7)) & 1u;
  return Domain(b, L, std::move(mask));
}

void write_domain(const Domain& d, const std::string& path) {
  const auto bytes = encode_domain(d);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed for " + path);
}

Domain read_domain(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_domain(bytes);
}

void write_cubes_csv(std::ostream& os, const std::vector<DyadicCube>& cubes) {
  const int n = cubes.empty() ? 2 : cubes.front().dim();
  os << "level," << axis_header("c", n) << "\n";
  for (const auto& q : cubes) {
    os << q.level;
    for (int a = 0; a < q.dim(); ++a) os << "," << q.coords[a];
    os << "\n";
  }
}

void write_path_csv(std::ostream& os, const QhPath& path) {
  const int n = path.vertices.empty() ? 2 : static_cast<int>(path.vertices.front().size());
  os << axis_header("x", n) << "\n" << std::setprecision(17);
  for (const auto& v : path.vertices) {
    write_point(os, v);
    os << "\n";
  }
}

void write_porosity_csv(std::ostream& os, const PorosityResult& r) {
  const int n = r.profiles.empty() ? 2 : static_cast<int>(r.profiles.front().point.size());
  os << "point," << axis_header("x", n) << ",j,S_j,S_j_over_j\n" << std::setprecision(17);
  for (std::size_t i = 0; i < r.profiles.size(); ++i) {
    const auto& p = r.profiles[i];
    for (std::size_t s = 0; s < p.S.size(); ++s) {
      const int j = static_cast<int>(s) + kAnnulusFirst;
      os << i << ",";
      write_point(os, p.point);
      os << "," << j << "," << p.S[s] << "," << static_cast<double>(p.S[s]) / j << "\n";
    }
  }
}

void write_gauge_profile_csv(std::ostream& os, const GaugeProfile& p) {
  os << "j,scale,sum\n" << std::setprecision(17);
  for (std::size_t i = 0; i < p.js.size(); ++i) os << p.js[i] << "," << p.scales[i] << "," << p.sums[i] << "\n";
}

Json whitney_report_to_json(const WhitneyReport& r) {
  Json v = Json::array();
  for (const auto& x : r.violations) v.push_back({{"kind", to_string(x.kind)}, {"cube", x.cube}, {"detail", x.detail}});
  return {{"violations", v},
          {"eligible", r.eligible},
          {"covered", r.covered},
          {"truncated", r.truncated},
          {"coverage", r.coverage}};
}

Json porosity_to_json(const PorosityResult& r) {
  std::int64_t passing = 0;
  Json failures = Json::array();
  for (std::size_t i = 0; i < r.profiles.size(); ++i) {
    if (r.profiles[i].passes) ++passing;
    else failures.push_back({{"point", i}, {"first_failure", r.profiles[i].first_failure}});
  }
  return {{"verdict", r.verdict},
          {"j0", r.j0},
          {"j_max", r.j_max},
          {"points", r.profiles.size()},
          {"passing", passing},
          {"pass_fraction", r.pass_fraction},
          {"failures", failures}};
}

Json gauge_profile_to_json(const GaugeProfile& p) {
  return {{"js", p.js}, {"scales", p.scales}, {"sums", p.sums}, {"slope", p.slope}, {"trend", to_string(p.trend)}};
}

Json frostman_to_json(const FrostmanProfile& p) {
  return {{"levels", p.levels}, {"bounds", p.bounds}, {"min_bound", p.min_bound}};
}

Json growth_to_json(const GrowthReport& r) {
  return {{"samples", r.samples.size()},
          {"c", r.c},
          {"C", r.C},
          {"C_slope", r.C_slope},
          {"C_offset", r.C_offset},
          {"feasible_fraction", r.feasible_fraction},
          {"oracle_ratio_median", r.oracle_ratio_median},
          {"internal_diameter", r.internal_diameter},
          {"pass", r.pass}};
}

Json conditions_to_json(const ConditionReport& r) {
  return {{"prop1_holds", r.prop1_holds},
          {"prop1_direction", r.prop1_direction},
          {"prop2_holds", r.prop2_holds},
          {"prop3_holds", r.prop3_holds},
          {"prop3_beta_hat", std::isfinite(r.prop3_beta_hat) ? Json(r.prop3_beta_hat) : Json(nullptr)},
          {"doubling_estimate", r.doubling_estimate},
          {"t_lo", r.t_lo},
          {"t_hi", r.t_hi},
          {"samples", r.samples},
          {"warnings", r.warnings}};
}

Json blocks_to_json(const BlockClassification& b) {
  return {{"verdict", to_string(b.verdict)}, {"js", b.js}, {"blocks", b.blocks}};
}

Json tree_to_json(const ConstructionTree& t, bool with_masses) {
  const auto& p = t.params;
  Json j;
  j["params"] = {{"gauge", gauge_to_json(p.gauge)}, {"c", p.c},       {"depth", p.depth},
                 {"n", p.n},                        {"L", p.L},       {"gate_scale", p.gate_scale}};
  j["components"] = t.components;
  j["holes"] = t.holes >= 0 ? Json(t.holes) : Json(nullptr);
  Json levels = Json::array();
  for (const auto& lv : t.levels) {
    Json squares = Json::array();
    for (const auto& q : lv.squares) squares.push_back(index_json(q.coords));
    Json gates = Json::array();
    for (const auto& g : lv.gates)
      gates.push_back({{"to_stage", g.to_stage}, {"lo", index_json(g.lo)}, {"hi", index_json(g.hi)}, {"cells", g.cells}});
    levels.push_back({{"k", lv.k},
                      {"alpha_exponent", lv.alpha.exponent},
                      {"alpha", lv.alpha.value()},
                      {"square_level", lv.k - 1},
                      {"squares", squares},
                      {"components_before_gating", lv.components_before_gating},
                      {"ungated", lv.ungated},
                      {"pruned_cells", lv.pruned.size()},
                      {"cells", lv.cells},
                      {"gates", gates}});
  }
  j["levels"] = levels;
  if (with_masses) {
    Json masses = Json::array();
    for (const auto& m : frostman_measure(t)) masses.push_back({{"level", m.level}, {"codes", m.codes}, {"mass", m.mass}});
    j["masses"] = masses;
  }
  return j;
}

void write_svg(std::ostream& os, const Domain& d, const SvgOptions& opt) {
  if (d.dim() != 2) throw DomainError("SVG output is 2D only");
  if (opt.max_pixels < 1) throw ValidationError("max_pixels must be positive");
  const std::int64_t m = d.per_axis();
  std::int64_t block = 1;
  while (m / block > opt.max_pixels) block *= 2;
  const std::int64_t px = m / block;
  std::vector<std::uint8_t> img(static_cast<std::size_t>(px * px), 0);
  for (std::int64_t i = 0; i < d.size(); ++i) {
    const auto v = d.mask()[i];
    if (!v) continue;
    const auto x = (i % m) / block;
    const auto y = (i / m) / block;
    auto& c = img[static_cast<std::size_t>(y * px + x)];
    c = std::max(c, v);
  }
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << px << " " << px << "\" width=\"" << px
     << "\" height=\"" << px << "\">\n";
  os << "<rect width=\"" << px << "\" height=\"" << px << "\" fill=\"white\"/>\n";
  // one rect per horizontal run; y is flipped so that axis 1 points up
  for (std::int64_t y = 0; y < px; ++y) {
    std::int64_t x = 0;
    while (x < px) {
      const auto v = img[static_cast<std::size_t>(y * px + x)];
      std::int64_t e = x + 1;
      while (e < px && img[static_cast<std::size_t>(y * px + e)] == v) ++e;
      if (v)
        os << "<rect x=\"" << x << "\" y=\"" << px - 1 - y << "\" width=\"" << e - x << "\" height=\"1\" fill=\""
           << palette[(v - 1) % 10] << "\"/>\n";
      x = e;
    }
  }
  const double scale = static_cast<double>(px) / d.bounds().side;
  for (const auto& q : opt.cubes) {
    const Point lo = cube_lo(d.bounds(), q);
    const double s = cube_side(d.bounds(), q.level) * scale;
    const double x = (lo[0] - d.bounds().lo[0]) * scale;
    const double y = static_cast<double>(px) - (lo[1] - d.bounds().lo[1]) * scale - s;
    os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << s << "\" height=\"" << s
       << "\" fill=\"none\" stroke=\"black\" stroke-width=\"0.25\"/>\n";
  }
  for (const auto& path : opt.paths) {
    os << "<polyline fill=\"none\" stroke=\"red\" stroke-width=\"1\" points=\"";
    for (std::size_t i = 0; i < path.vertices.size(); ++i) {
      const auto& v = path.vertices[i];
      os << (i ? " " : "") << (v[0] - d.bounds().lo[0]) * scale << ","
         << static_cast<double>(px) - (v[1] - d.bounds().lo[1]) * scale;
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw IoError("write failed for " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace qcgeom

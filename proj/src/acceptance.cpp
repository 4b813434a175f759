#include "qcgeom/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <optional>
#include <random>

namespace qcgeom {

namespace {

// tolerances and budgets
constexpr int kDivergenceJMax = 64;
constexpr double kBlockTolerance = 0.05;
constexpr double kQhTolerance = 0.05;
constexpr double kWhitneyCoverage = 0.99;
constexpr double kPorosityPassFraction = 0.95;
constexpr int kPorosityJ0 = 2;
constexpr int kPorosityMaxCpShift = 16;
constexpr double kFrostmanFloor = 1e-2;
constexpr double kGrowthFeasible = 0.99;
constexpr int kEdtMasks = 50;
constexpr int kChiScenes = 100;

const double kLn2 = std::log(2.0);

double now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

Point pt(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  std::string out(static_cast<std::size_t>(std::snprintf(nullptr, 0, f, args...)), '\0');
  std::snprintf(out.data(), out.size() + 1, f, args...);
  return out;
}

struct Calibration {
  double c_p = 1.0;
  double kappa = 0.0;
  bool found = false;
};

class Context {
 public:
  explicit Context(const AcceptanceOptions& opt) : opt_(opt) {}

  const ConstructionTree& big_tree() {
    if (!tree_) {
      ConstructionParams p;
      p.depth = opt_.depth;
      p.L = opt_.L;
      tree_ = std::make_unique<ConstructionTree>(build_domain_2d(p));
    }
    return *tree_;
  }

  const AcceptanceOptions& opt() const { return opt_; }

  std::optional<Calibration> calibration;
  std::optional<std::vector<double>> frostman_minima;

 private:
  AcceptanceOptions opt_;
  std::unique_ptr<ConstructionTree> tree_;
};

CriterionResult divergence_threshold(Context&) {
  CriterionResult r{1, "divergence threshold", true, 0, 1.0, "", Json::object()};
  struct Case {
    int n;
    double s;
  };
  const Case cases[] = {{2, 1.5}, {2, 2.0}, {2, 2.5}, {2, 3.0}, {3, 1.25}, {3, 1.5}, {3, 1.75}};
  Json rows = Json::array();
  int wrong = 0;
  for (const auto& c : cases) {
    const auto b = classify_divergence(GaugeFunction::jones_makarov(1.0, c.s), c.n, kDivergenceJMax);
    const bool expect = c.s <= static_cast<double>(c.n) / (c.n - 1);
    const bool ok = (b.verdict == Divergence::Divergent) == expect && b.verdict != Divergence::Inconclusive;
    if (!ok) ++wrong;
    rows.push_back({{"n", c.n}, {"s", c.s}, {"verdict", to_string(b.verdict)}, {"expected_divergent", expect}});
  }
  r.pass = wrong == 0;
  r.metrics["cases"] = rows;
  r.summary = fmt("%d/7 classified as expected", 7 - wrong);
  return r;
}

CriterionResult borderline_block(Context&) {
  CriterionResult r{2, "borderline block value", true, 0, 1.0, "", Json::object()};
  const auto g = GaugeFunction::jones_makarov(1.0, 2.0);
  const double target = 0.5 * kLn2;
  double worst = 0.0;
  for (const int j : {10, 20}) {
    const double v = divergence_integral_log(g, 2, -2.0 * j * kLn2, -1.0 * j * kLn2);
    const double rel = std::abs(v / target - 1.0);
    worst = std::max(worst, rel);
    r.metrics["j" + std::to_string(j)] = v;
  }
  r.metrics["target"] = target;
  r.metrics["max_relative_error"] = worst;
  r.pass = worst <= kBlockTolerance;
  r.summary = fmt("max relative error %.2e vs (1/2) ln 2", worst);
  return r;
}

CriterionResult qh_oracle(Context&) {
  CriterionResult r{3, "quasihyperbolic oracle", true, 0, 30.0, "", Json::object()};
  const auto disk = voxelize([](const Point& p) { return p.squaredNorm() < 1.0; }, unit_box(2, -1.0, 2.0), 11);
  const double a = qh_distance(disk, pt(0, 0), pt(1.0 - std::ldexp(1.0, -6), 0)).length_qh;
  const double a_ref = 6.0 * kLn2;
  const auto half = voxelize([](const Point& p) { return p[1] > 0.0; }, unit_box(2, -1.0, 2.0), 11);
  const double b = qh_distance(half, pt(0, std::ldexp(1.0, -6)), pt(0, std::ldexp(1.0, -3))).length_qh;
  const double b_ref = std::log(8.0);
  const double ea = std::abs(a / a_ref - 1.0);
  const double eb = std::abs(b / b_ref - 1.0);
  r.metrics = {{"disk", a}, {"disk_ref", a_ref}, {"half_plane", b}, {"half_plane_ref", b_ref}};
  r.pass = ea <= kQhTolerance && eb <= kQhTolerance;
  r.summary = fmt("disk %.4f vs %.4f (%.1f%%), half-plane %.4f vs %.4f (%.1f%%)", a, a_ref, 100 * ea, b, b_ref,
                  100 * eb);
  return r;
}

CriterionResult whitney_soundness(Context&) {
  CriterionResult r{4, "whitney soundness", true, 0, 60.0, "", Json::object()};
  const auto disk = voxelize([](const Point& p) { return p.squaredNorm() < 1.0; }, unit_box(2, -1.0, 2.0), 11);
  const auto wd = whitney_decompose(disk, 9);
  const auto rd = verify_whitney(disk, wd);
  ConstructionParams p;
  p.depth = 6;
  p.L = 12;
  const auto t = build_domain_2d(p);
  const auto wt = whitney_decompose(t.domain, 10);
  const auto rt = verify_whitney(t.domain, wt);
  r.metrics = {{"disk", whitney_report_to_json(rd)}, {"construction", whitney_report_to_json(rt)}};
  r.metrics["disk"].erase("violations");
  r.metrics["construction"].erase("violations");
  r.metrics["disk"]["violation_count"] = rd.violations.size();
  r.metrics["construction"]["violation_count"] = rt.violations.size();
  r.pass = rd.violations.empty() && rt.violations.empty() && rd.coverage >= kWhitneyCoverage &&
           rt.coverage >= kWhitneyCoverage;
  r.summary = fmt("disk %zu cubes, %zu violations, coverage %.4f; depth-6 %zu cubes, %zu violations, coverage %.4f",
                  wd.cubes.size(), rd.violations.size(), rd.coverage, wt.cubes.size(), rt.violations.size(),
                  rt.coverage);
  return r;
}

CriterionResult porosity(Context& ctx) {
  CriterionResult r{5, "porosity of the constructed boundary", true, 0, 300.0, "", Json::object()};
  const auto& t = ctx.big_tree();
  const auto& d = t.domain;
  std::vector<std::uint8_t> comp(static_cast<std::size_t>(d.size()));
  for (std::int64_t i = 0; i < d.size(); ++i) comp[i] = d.occupied(i) ? 0 : 1;
  const Domain complement(d.bounds(), d.level(), std::move(comp));
  const auto w = whitney_decompose(complement, d.level() - 3);
  RefineOptions ro;
  ro.max_relative_depth = 3;
  const auto q = whitney_refined(w, ro);

  const auto boundary = boundary_voxels(d);
  std::mt19937_64 rng(ctx.opt().seed);
  std::uniform_int_distribution<std::size_t> pick(0, boundary.codes.size() - 1);
  std::vector<Point> E;
  for (int i = 0; i < ctx.opt().porosity_samples; ++i) E.push_back(d.center(boundary.codes[pick(rng)]));

  const int j_max = t.params.depth;
  Json sweep = Json::array();
  Calibration cal;
  PorosityResult best;
  // shrink the alpha constant until some kappa passes, then take the largest passing kappa
  for (int shift = 0; shift <= kPorosityMaxCpShift && !cal.found; ++shift) {
    const double c_p = std::ldexp(t.params.c, -shift);
    for (const double kappa : {0.25, 0.5, 1.0}) {
      const auto params = params_from_gauge(t.params.gauge, c_p, j_max, kPorosityJ0, kappa);
      const AnnulusIndex index(q, params);
      auto res = porosity_test(E, index, j_max);
      std::vector<double> rate(j_max, 0.0);
      for (const auto& prof : res.profiles)
        for (int k = kAnnulusFirst; k <= j_max; ++k) rate[k - kAnnulusFirst] += prof.chi[k - kAnnulusFirst];
      for (auto& v : rate) v /= static_cast<double>(res.profiles.size());
      sweep.push_back({{"c_p", c_p}, {"kappa", kappa}, {"pass_fraction", res.pass_fraction}, {"chi_rate", rate}});
      if (res.pass_fraction < kPorosityPassFraction) break;
      cal = {c_p, kappa, true};
      best = std::move(res);
    }
  }
  ctx.calibration = cal;
  r.metrics = {{"whitney_cubes", w.cubes.size()},
               {"refined_cubes", q.cubes.size()},
               {"samples", E.size()},
               {"j0", kPorosityJ0},
               {"j_max", j_max},
               {"sweep", sweep}};
  r.pass = cal.found;
  if (cal.found) {
    r.metrics["c_p"] = cal.c_p;
    r.metrics["kappa"] = cal.kappa;
    r.metrics["pass_fraction"] = best.pass_fraction;
    r.summary = fmt("passes %.1f%% of %zu points at kappa %.2f, c_p 2^%d", 100 * best.pass_fraction, E.size(),
                    cal.kappa, static_cast<int>(std::lround(std::log2(cal.c_p))));
  } else {
    r.summary = "no (c_p, kappa) reached the pass fraction";
  }
  return r;
}

std::vector<MassMap> frostman_levels(const ConstructionTree& t) {
  // construction levels 3..depth are dyadic levels 2..depth-1
  auto maps = frostman_measure(t);
  maps.erase(maps.begin(), maps.begin() + std::min<std::size_t>(2, maps.size()));
  return maps;
}

CriterionResult frostman(Context& ctx) {
  CriterionResult r{6, "frostman positivity", true, 0, 60.0, "", Json::object()};
  const auto& t = ctx.big_tree();
  const auto maps = frostman_levels(t);
  const auto realized = realized_gauge(t);
  Json rows = Json::array();
  std::vector<double> minima;
  for (const double C2 : {1.0, 2.0, 4.0, 8.0}) {
    const auto psi = psi_from_phi(realized, t.params.n, 1.0, C2, 0.5);
    const auto prof = frostman_profile(maps, psi);
    minima.push_back(prof.min_bound);
    auto row = frostman_to_json(prof);
    row["C2"] = C2;
    rows.push_back(row);
  }
  ctx.frostman_minima = minima;
  r.metrics["sweep"] = rows;
  r.pass = minima.back() >= kFrostmanFloor;
  r.summary = fmt("min bound over levels 3..%d: %.3g %.3g %.3g %.3g for C2 = 1 2 4 8", t.params.depth, minima[0],
                  minima[1], minima[2], minima[3]);
  return r;
}

CriterionResult decay_direction(Context& ctx) {
  CriterionResult r{7, "decay direction", true, 0, 120.0, "", Json::object()};
  const auto& t = ctx.big_tree();
  const int n = t.params.n;
  const int j_lo = t.params.depth;
  const int j_hi = t.params.L;
  const auto b = boundary_set(t, j_hi);
  const auto lebesgue = gauge_profile(b, GaugeFunction::power(n), j_lo, j_hi);
  r.metrics["power_profile"] = gauge_profile_to_json(lebesgue);

  if (!ctx.calibration) porosity(ctx);
  const auto cal = *ctx.calibration;
  bool h_ok = false;
  Json hs = Json::array();
  if (cal.found) {
    const auto params = params_from_gauge(t.params.gauge, cal.c_p, j_hi, kPorosityJ0, cal.kappa);
    for (const double C : {1.0, 2.0, 4.0}) {
      const auto h = predicted_gauge_bound(params, n, 1.0, C, kPorosityJ0, j_hi);
      const auto prof = gauge_profile(b, h, j_lo, j_hi);
      auto row = gauge_profile_to_json(prof);
      row["C"] = C;
      hs.push_back(row);
      if (C == 1.0) h_ok = prof.trend == Trend::ToZero || prof.trend == Trend::Flat;
    }
  }
  r.metrics["predicted_bound"] = hs;

  if (!ctx.frostman_minima) frostman(ctx);
  const auto& minima = *ctx.frostman_minima;
  const bool positive = std::all_of(minima.begin(), minima.end(), [](double v) { return v > 0.0; });
  r.metrics["frostman_minima"] = minima;
  r.pass = lebesgue.trend == Trend::ToZero && h_ok && positive;
  r.summary = fmt("Power(%d) %s (slope %.3f), h %s, Frostman minima %s over j in [%d, %d]", n,
                  to_string(lebesgue.trend), lebesgue.slope,
                  hs.empty() ? "n/a" : hs[0]["trend"].get<std::string>().c_str(), positive ? "positive" : "not positive",
                  j_lo, j_hi);
  return r;
}

CriterionResult growth(Context& ctx) {
  CriterionResult r{8, "growth condition", true, 0, 300.0, "", Json::object()};
  ConstructionParams p;
  p.depth = ctx.opt().growth_depth;
  p.L = ctx.opt().growth_L;
  const auto t = build_domain_2d(p);
  GrowthOptions go;
  go.seed = ctx.opt().seed;
  const auto rep = verify_growth_condition(t, ctx.opt().growth_samples, go);
  r.metrics = growth_to_json(rep);
  r.pass = rep.pass && rep.feasible_fraction >= kGrowthFeasible;
  r.summary = fmt("C_slope %.3f, C_offset %.3f, feasible %.1f%% of %zu", rep.C_slope, rep.C_offset,
                  100 * rep.feasible_fraction, rep.samples.size());
  return r;
}

std::vector<std::uint32_t> brute_edt(std::int64_t m, const std::vector<std::uint8_t>& mask) {
  std::vector<std::pair<std::int64_t, std::int64_t>> zeros;
  for (std::int64_t i = 0; i < m * m; ++i)
    if (!mask[i]) zeros.emplace_back(i % m, i / m);
  std::vector<std::uint32_t> out(static_cast<std::size_t>(m * m), 0);
  for (std::int64_t i = 0; i < m * m; ++i) {
    if (!mask[i]) continue;
    const std::int64_t x = i % m;
    const std::int64_t y = i / m;
    std::int64_t best = std::min({(x + 1) * (x + 1), (m - x) * (m - x), (y + 1) * (y + 1), (m - y) * (m - y)});
    for (const auto& [zx, zy] : zeros) best = std::min(best, (zx - x) * (zx - x) + (zy - y) * (zy - y));
    out[i] = static_cast<std::uint32_t>(best);
  }
  return out;
}

CriterionResult micro_oracles(Context& ctx) {
  CriterionResult r{9, "exhaustive micro-oracles", true, 0, 30.0, "", Json::object()};
  std::mt19937_64 rng(ctx.opt().seed);
  int edt_bad = 0;
  for (int s = 0; s < kEdtMasks; ++s) {
    std::bernoulli_distribution on(0.3 + 0.6 * s / kEdtMasks);
    std::vector<std::uint8_t> mask(64 * 64);
    for (auto& v : mask) v = on(rng) ? 1 : 0;
    if (distance_transform_sq(2, 64, mask) != brute_edt(64, mask)) ++edt_bad;
  }
  int chi_bad = 0;
  std::int64_t queries = 0;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> level(2, 7), shift(1, 6), lam(1, 3), kk(1, 9), count(20, 200);
  for (int s = 0; s < kChiScenes; ++s) {
    CubeCollection q{unit_box(2, -1.0, 2.0), {}};
    const int target = count(rng);
    for (int tries = 0; static_cast<int>(q.cubes.size()) < target && tries < 20 * target; ++tries) {
      DyadicCube c{level(rng), Index(2)};
      std::uniform_int_distribution<std::int64_t> coord(0, (std::int64_t{1} << c.level) - 1);
      c.coords << coord(rng), coord(rng);
      bool clash = false;
      for (const auto& o : q.cubes) {
        const int lv = std::min(o.level, c.level);
        clash = clash || ((o.coords[0] >> (o.level - lv)) == (c.coords[0] >> (c.level - lv)) &&
                          (o.coords[1] >> (o.level - lv)) == (c.coords[1] >> (c.level - lv)));
      }
      if (!clash) q.cubes.push_back(c);
    }
    const int sh = shift(rng);
    const std::int64_t l = lam(rng);
    const auto p = PorosityParams::from_functions([&](int k) { return std::ldexp(1.0, -k - sh); },
                                                  [&](int) { return l; }, 10, 1);
    const AnnulusIndex index(q, p);
    for (int t = 0; t < 50; ++t) {
      const Point x = pt(u(rng), u(rng));
      const int k = kk(rng);
      ++queries;
      if (index.chi(x, k) != chi_brute(x, k, q, p)) ++chi_bad;
    }
  }
  r.metrics = {{"edt_masks", kEdtMasks}, {"edt_mismatches", edt_bad}, {"chi_scenes", kChiScenes},
               {"chi_queries", queries}, {"chi_mismatches", chi_bad}};
  r.pass = edt_bad == 0 && chi_bad == 0;
  r.summary = fmt("EDT %d/%d masks exact, chi %lld/%lld queries exact", kEdtMasks - edt_bad, kEdtMasks,
                  static_cast<long long>(queries - chi_bad), static_cast<long long>(queries));
  return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  using Fn = CriterionResult (*)(Context&);
  const Fn all[] = {divergence_threshold, borderline_block, qh_oracle,  whitney_soundness, porosity,
                    frostman,             decay_direction,  growth,     micro_oracles};
  const char* titles[] = {"divergence threshold", "borderline block value", "quasihyperbolic oracle",
                          "whitney soundness", "porosity of the constructed boundary", "frostman positivity",
                          "decay direction", "growth condition", "exhaustive micro-oracles"};
  const double budgets[] = {1, 1, 30, 60, 300, 60, 120, 300, 30};
  Context ctx(opt);
  std::vector<CriterionResult> out;
  for (int id = 1; id <= 9; ++id) {
    if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end()) continue;
    const double t0 = now();
    CriterionResult r;
    try {
      r = all[id - 1](ctx);
    } catch (const Error& e) {
      r.pass = false;
      r.summary = std::string(to_string(e.kind())) + ": " + e.what();
    } catch (const std::exception& e) {
      r.pass = false;
      r.summary = e.what();
    }
    r.id = id;
    r.title = titles[id - 1];
    r.budget_seconds = budgets[id - 1];
    r.seconds = now() - t0;
    if (r.seconds > r.budget_seconds) {
      r.pass = false;
      r.summary += " [over time budget]";
    }
    out.push_back(r);
    if (on_result) on_result(out.back());
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  return fmt("%s  %d  %-38s %8.2f s / %.0f s  ", r.pass ? "PASS" : "FAIL", r.id, r.title.c_str(), r.seconds,
             r.budget_seconds) +
         r.summary;
}

Json acceptance_to_json(const std::vector<CriterionResult>& results, bool with_timing) {
  Json rows = Json::array();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.pass;
    Json row = {{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"summary", r.summary}, {"metrics", r.metrics}};
    if (with_timing) {
      row["seconds"] = r.seconds;
      row["budget_seconds"] = r.budget_seconds;
    }
    rows.push_back(row);
  }
  return {{"all_pass", all}, {"criteria", rows}};
}

}  // namespace qcgeom

#include "qcgeom/acceptance.hpp"
#include "qcgeom/io.hpp"
#include "qcgeom/schema.hpp"
#include "qcgeom/schema_text.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

using namespace qcgeom;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCriteria = 1;
constexpr int kExitValidation = 2;
constexpr int kExitGuard = 3;

const SchemaValidator& schema() {
  static const SchemaValidator v(Json::parse(kSchemaText));
  return v;
}

struct Run {
  std::string command;
  Json config;
  fs::path out;
};

Json header(const Run& run, const char* kind) {
  return {{"schema_version", kSchemaVersion}, {"toolkit_version", kVersion}, {"kind", kind}, {"config", run.config}};
}

void write_json(const fs::path& p, const Json& j) { write_text(p.string(), j.dump(2) + "\n"); }

template <typename F>
void write_stream(const fs::path& p, F&& f) {
  std::ostringstream os;
  f(os);
  write_text(p.string(), os.str());
}

template <typename T>
T get_or(const Json& block, const char* key, T fallback) {
  return block.contains(key) ? block[key].get<T>() : fallback;
}

Point point_of(const Json& a) {
  Point p(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) p[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return p;
}

ConstructionParams construction_of(const Json& b) {
  ConstructionParams p;
  if (b.contains("gauge")) p.gauge = gauge_from_json(b["gauge"]);
  p.c = get_or(b, "c", p.c);
  p.depth = b["depth"].get<int>();
  p.n = get_or(b, "n", p.n);
  p.L = b["L"].get<int>();
  p.gate_scale = get_or(b, "gate_scale", p.gate_scale);
  return p;
}

Domain domain_of(const Json& b) {
  const auto kind = b["kind"].get<std::string>();
  if (kind == "disk") {
    const int n = get_or(b, "n", 2);
    return voxelize([](const Point& p) { return p.squaredNorm() < 1.0; }, unit_box(n, -1.0, 2.0), b["L"].get<int>());
  }
  if (kind == "halfplane")
    return voxelize([](const Point& p) { return p[1] > 0.0; }, unit_box(2, -1.0, 2.0), b["L"].get<int>());
  if (kind == "file") return read_domain(b["path"].get<std::string>());
  return build_domain(construction_of(b["construction"])).domain;
}

int cmd_gauge(const Run& run) {
  const auto& b = run.config["gauge"];
  const auto g = gauge_from_json(b["gauge"]);
  const int n = get_or(b, "n", 2);
  const int j_max = get_or(b, "j_max", 64);
  auto out = header(run, "gauge_report");
  out["gauge"] = gauge_to_json(g);
  out["conditions"] = conditions_to_json(check_conditions(g, n, get_or(b, "samples", 200)));
  const auto div = classify_divergence(g, n, j_max);
  out["divergence"] = blocks_to_json(div);
  out["jones"] = blocks_to_json(classify_jones(g, j_max));
  if (b.contains("psi")) {
    const auto& ps = b["psi"];
    const auto psi = psi_from_phi(g, n, get_or(ps, "C1", 1.0), ps["C2"].get<double>(),
                                  get_or(ps, "r0", std::min(0.5, g.t_max())), get_or(ps, "j_max", 60));
    out["psi"] = gauge_to_json(psi);
  }
  if (b.contains("tech_lemma_r")) {
    const auto rs = b["tech_lemma_r"].get<std::vector<double>>();
    const auto rep = tech_lemma_check(g, n, rs);
    out["tech_lemma"] = {{"r", rep.r},
                         {"log_integral", rep.log_integral},
                         {"ratio", rep.ratio},
                         {"c_hat", rep.c_hat},
                         {"stable", rep.stable}};
  }
  write_json(run.out / "gauge.json", out);
  std::cout << "divergence " << to_string(div.verdict) << "\n";
  return kExitOk;
}

int cmd_build(const Run& run) {
  const auto& b = run.config["build"];
  const auto t = build_domain(construction_of(b["construction"]));
  Json files = {{"domain", "domain.bin"}};
  write_domain(t.domain, (run.out / "domain.bin").string());
  if (t.params.n == 2 && get_or(b, "svg", true)) {
    SvgOptions so;
    so.max_pixels = get_or(b, "svg_pixels", 1024);
    write_stream(run.out / "domain.svg", [&](std::ostream& os) { write_svg(os, t.domain, so); });
    files["svg"] = "domain.svg";
  }
  auto out = header(run, "build_report");
  out["tree"] = tree_to_json(t, get_or(b, "masses", true));
  out["files"] = files;
  write_json(run.out / "build.json", out);
  std::cout << "components " << t.components << ", occupied " << t.domain.occupied_count() << "\n";
  return kExitOk;
}

int cmd_whitney(const Run& run) {
  const auto& b = run.config["whitney"];
  const auto d = domain_of(b["domain"]);
  const auto w = whitney_decompose(d, get_or(b, "max_level", d.level() - 2));
  write_stream(run.out / "cubes.csv", [&](std::ostream& os) { write_cubes_csv(os, w.cubes); });
  auto out = header(run, "whitney_report");
  out["cubes"] = w.cubes.size();
  out["min_level"] = w.min_level;
  out["max_level"] = w.max_level;
  Json files = {{"cubes", "cubes.csv"}};
  bool ok = true;
  if (get_or(b, "verify", true)) {
    const auto rep = verify_whitney(d, w);
    out["verify"] = whitney_report_to_json(rep);
    ok = rep.violations.empty();
  }
  if (d.dim() == 2 && get_or(b, "svg", false)) {
    SvgOptions so;
    so.cubes = w.cubes;
    write_stream(run.out / "whitney.svg", [&](std::ostream& os) { write_svg(os, d, so); });
    files["svg"] = "whitney.svg";
  }
  out["files"] = files;
  write_json(run.out / "whitney.json", out);
  std::cout << w.cubes.size() << " cubes" << (ok ? "" : ", violations found") << "\n";
  return kExitOk;
}

int cmd_qhdist(const Run& run) {
  const auto& b = run.config["qhdist"];
  const auto d = domain_of(b["domain"]);
  QhOptions qo;
  qo.min_dist_voxels = get_or(b, "min_dist_voxels", qo.min_dist_voxels);
  const Point x1 = point_of(b["from"]);
  const Point x2 = point_of(b["to"]);
  if (x1.size() != d.dim() || x2.size() != d.dim()) throw ValidationError("qhdist points must match the domain dimension");
  const auto path = qh_distance(d, x1, x2, qo);
  write_stream(run.out / "path.csv", [&](std::ostream& os) { write_path_csv(os, path); });
  auto out = header(run, "qhdist_report");
  out["length_qh"] = path.length_qh;
  out["length_euclid"] = path.length_euclid;
  out["vertices"] = path.vertices.size();
  if (b.contains("whitney_max_level"))
    out["whitney_chain"] = qh_whitney_chain(whitney_decompose(d, b["whitney_max_level"].get<int>()), x1, x2);
  Json files = {{"path", "path.csv"}};
  if (d.dim() == 2 && get_or(b, "svg", false)) {
    SvgOptions so;
    so.paths = {path};
    write_stream(run.out / "qhdist.svg", [&](std::ostream& os) { write_svg(os, d, so); });
    files["svg"] = "qhdist.svg";
  }
  out["files"] = files;
  write_json(run.out / "qhdist.json", out);
  std::printf("k = %.17g\n", path.length_qh);
  return kExitOk;
}

int cmd_porosity(const Run& run) {
  const auto& b = run.config["porosity"];
  const auto t = build_domain(construction_of(b["construction"]));
  const auto& d = t.domain;
  std::vector<std::uint8_t> comp(static_cast<std::size_t>(d.size()));
  for (std::int64_t i = 0; i < d.size(); ++i) comp[i] = d.occupied(i) ? 0 : 1;
  const Domain complement(d.bounds(), d.level(), std::move(comp));
  const auto w = whitney_decompose(complement, get_or(b, "whitney_max_level", std::max(0, d.level() - 3)));
  RefineOptions ro;
  ro.max_relative_depth = get_or(b, "refine_depth", 3);
  const auto q = whitney_refined(w, ro);

  const auto boundary = boundary_voxels(d);
  std::vector<Point> E;
  const int samples = get_or(b, "samples", 500);
  if (!boundary.empty()) {
    std::mt19937_64 rng(get_or<std::uint64_t>(run.config, "seed", 1));
    std::uniform_int_distribution<std::size_t> pick(0, boundary.codes.size() - 1);
    for (int i = 0; i < samples; ++i) E.push_back(d.center(boundary.codes[pick(rng)]));
  }
  const int j_max = get_or(b, "j_max", t.params.depth);
  const int j0 = get_or(b, "j0", 2);
  if (j_max < j0) throw ValidationError("porosity needs j_max >= j0");
  const auto params = params_from_gauge(t.params.gauge, get_or(b, "c_p", t.params.c), j_max, j0, get_or(b, "kappa", 1.0));
  const AnnulusIndex index(q, params);
  const auto res = porosity_test(E, index, j_max);
  write_stream(run.out / "porosity.csv", [&](std::ostream& os) { write_porosity_csv(os, res); });
  auto out = header(run, "porosity_report");
  out["result"] = porosity_to_json(res);
  out["params"] = {{"alpha", params.alpha}, {"lambda", params.lambda}, {"j0", params.j0}};
  out["cubes"] = {{"whitney", w.cubes.size()}, {"refined", q.cubes.size()}};
  out["files"] = {{"profiles", "porosity.csv"}};
  write_json(run.out / "porosity.json", out);
  std::printf("pass fraction %.4f\n", res.pass_fraction);
  return kExitOk;
}

int cmd_dim(const Run& run) {
  const auto& b = run.config["dim"];
  const auto t = build_domain(construction_of(b["construction"]));
  const int L = t.domain.level();
  const auto s = boundary_set(t, L);
  const int j_lo = get_or(b, "j_lo", 0);
  const int j_hi = get_or(b, "j_hi", L);
  auto out = header(run, "dim_report");
  Json profiles = Json::array();
  Json files = Json::object();
  int i = 0;
  for (const auto& gj : b["gauges"]) {
    const auto g = gauge_from_json(gj);
    const auto prof = gauge_profile(s, g, j_lo, j_hi);
    auto row = gauge_profile_to_json(prof);
    row["gauge"] = gauge_to_json(g);
    profiles.push_back(row);
    const auto name = "profile_" + std::to_string(i++) + ".csv";
    write_stream(run.out / name, [&](std::ostream& os) { write_gauge_profile_csv(os, prof); });
    files[name] = row["trend"];
    std::cout << gj.dump() << " " << to_string(prof.trend) << "\n";
  }
  out["profiles"] = profiles;
  if (b.contains("frostman_psi")) {
    const auto& ps = b["frostman_psi"];
    const auto realized = realized_gauge(t);
    const auto psi = psi_from_phi(realized, t.params.n, get_or(ps, "C1", 1.0), ps["C2"].get<double>(),
                                  get_or(ps, "r0", 0.5), get_or(ps, "j_max", 60));
    const auto fp = frostman_profile(frostman_measure(t), psi);
    out["frostman"] = frostman_to_json(fp);
    out["frostman"]["psi"] = gauge_to_json(psi);
  }
  out["files"] = files;
  write_json(run.out / "dim.json", out);
  return kExitOk;
}

int cmd_report(const Run& run) {
  const Json b = run.config.value("report", Json::object());
  AcceptanceOptions opt;
  opt.seed = get_or<std::uint64_t>(run.config, "seed", 1);
  opt.only = get_or(b, "criteria", std::vector<int>{});
  opt.depth = get_or(b, "depth", opt.depth);
  opt.L = get_or(b, "L", opt.L);
  opt.porosity_samples = get_or(b, "porosity_samples", opt.porosity_samples);
  opt.growth_depth = get_or(b, "growth_depth", opt.growth_depth);
  opt.growth_L = get_or(b, "growth_L", opt.growth_L);
  opt.growth_samples = get_or(b, "growth_samples", opt.growth_samples);
  const auto results = run_acceptance(opt, [](const CriterionResult& r) {
    std::cout << format_result(r) << std::endl;
  });
  auto out = header(run, "acceptance_report");
  const auto body = acceptance_to_json(results);
  out["all_pass"] = body["all_pass"];
  out["criteria"] = body["criteria"];
  write_json(run.out / "report.json", out);
  return body["all_pass"].get<bool>() ? kExitOk : kExitCriteria;
}

Json load_config(const std::string& path, const std::string& command) {
  Json cfg;
  try {
    cfg = Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  const auto errors = schema().validate(cfg);
  if (!errors.empty()) {
    std::string msg = "config does not match the schema";
    for (std::size_t i = 0; i < errors.size() && i < 8; ++i) msg += "; " + errors[i];
    throw ValidationError(msg);
  }
  if (cfg.contains("command") && cfg["command"] != command)
    throw ValidationError("config is for command '" + cfg["command"].get<std::string>() + "', not '" + command + "'");
  if (command != "report" && !cfg.contains(command))
    throw ValidationError("config has no '" + command + "' block");
  return cfg;
}

void diagnose(const char* kind, const std::string& message, int code) {
  const Json d = {{"error", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << d.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qcgeom: gauges, dyadic domains, porosity and dimension experiments"};
  app.set_version_flag("--version", std::string("qcgeom ") + kVersion + " (config schema " +
                                        std::to_string(kSchemaVersion) + ")");
  bool print_schema = false;
  app.add_flag("--schema", print_schema, "Print the config JSON schema and exit");
  app.require_subcommand(0, 1);

  using Handler = int (*)(const Run&);
  const std::pair<const char*, Handler> commands[] = {
      {"gauge", cmd_gauge},     {"build", cmd_build}, {"whitney", cmd_whitney}, {"qhdist", cmd_qhdist},
      {"porosity", cmd_porosity}, {"dim", cmd_dim},   {"report", cmd_report}};
  const char* help[] = {"Gauge conditions, divergence and Jones classification, psi synthesis",
                        "Build the 2D/3D construction, tree JSON, voxel file and SVG",
                        "Whitney decomposition and its verification",
                        "Quasihyperbolic distance between two points",
                        "Weak mean porosity test on the construction boundary",
                        "Gauge covering profiles and Frostman bounds",
                        "Run the acceptance criteria"};
  std::string config_path;
  std::string out_dir;
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(commands); ++i) {
    auto* sub = app.add_subcommand(commands[i].first, help[i]);
    sub->add_option("-c,--config", config_path, "JSON config file")->required();
    sub->add_option("-o,--output-dir", out_dir, "Directory for artifacts (overrides output_dir)");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    diagnose("Usage", e.what(), kExitValidation);
    return kExitValidation;
  }

  if (print_schema) {
    std::cout << schema().root().dump(2) << "\n";
    return kExitOk;
  }
  std::size_t chosen = std::size(commands);
  for (std::size_t i = 0; i < subs.size(); ++i)
    if (subs[i]->parsed()) chosen = i;
  if (chosen == std::size(commands)) {
    std::cout << app.help();
    return kExitValidation;
  }

  try {
    Run run;
    run.command = commands[chosen].first;
    run.config = load_config(config_path, run.command);
    run.out = out_dir.empty() ? fs::path(run.config.value("output_dir", "qcgeom_out")) : fs::path(out_dir);
    fs::create_directories(run.out);
    return commands[chosen].second(run);
  } catch (const Error& e) {
    const int code = e.numeric_guard() ? kExitGuard : kExitValidation;
    diagnose(to_string(e.kind()), e.what(), code);
    return code;
  } catch (const fs::filesystem_error& e) {
    diagnose("Io", e.what(), kExitValidation);
    return kExitValidation;
  } catch (const Json::exception& e) {
    diagnose("Validation", e.what(), kExitValidation);
    return kExitValidation;
  }
}

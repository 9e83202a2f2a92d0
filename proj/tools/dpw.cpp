// dpw: configuration-driven front end.
//
//   dpw <subcommand> [--config PATH] [--out DIR] [--dry-run] [--threads K]
//                    [--samples N] [--tol X] [--grid WxH]
//
// Exit codes: 0 ok, 1 configuration error, 2 parameter gate, 3 numeric failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

#include "CLI11.hpp"
#include "dpw/config.hpp"
#include "dpw/error.hpp"
#include "dpw/selftest.hpp"
#include "dpw/surface.hpp"
#include "dpw/sym.hpp"
#include "dpw/unitarize.hpp"

using namespace dpw;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kConfig = 1, kGate = 2, kNumeric = 3 };

struct Gate {
  std::string name;
  double margin;
};

struct Check {
  std::string name;
  double value;
  double threshold;
  bool pass() const { return value < threshold; }
};

// Thrown after the artifacts are written when a gated residual is too large.
struct NumericFailure {
  std::string message;
};

json gates_json(const std::vector<Gate>& gates) {
  json a = json::array();
  for (const auto& g : gates) a.push_back({{"name", g.name}, {"margin", g.margin}, {"pass", g.margin >= 0}});
  return a;
}

json checks_json(const std::vector<Check>& checks) {
  json a = json::array();
  for (const auto& c : checks)
    a.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass()}});
  return a;
}

void print_gates(const std::vector<Gate>& gates) {
  for (const auto& g : gates)
    std::printf("gate  %-28s margin %12.4e  %s\n", g.name.c_str(), g.margin, g.margin >= 0 ? "ok" : "FAIL");
}

void print_checks(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    std::printf("check %-28s %12.4e < %-10.3e %s\n", c.name.c_str(), c.value, c.threshold, c.pass() ? "ok" : "FAIL");
}

void enforce(const std::vector<Gate>& gates) {
  std::string failed;
  for (const auto& g : gates)
    if (g.margin < 0) failed += " [" + g.name + " margin " + std::to_string(g.margin) + "]";
  if (!failed.empty()) throw Error(ErrorCode::ParameterGate, "parameters rejected:" + failed);
}

void enforce(const std::vector<Check>& checks) {
  std::string failed;
  for (const auto& c : checks)
    if (!c.pass()) failed += " [" + c.name + " = " + std::to_string(c.value) + "]";
  if (!failed.empty()) throw NumericFailure{"residual above threshold:" + failed};
}

// ------------------------------------------------------------------ gates

std::vector<Gate> weight_gates(const WeightBounds& b, double w, const std::string& what) {
  std::vector<Gate> g;
  if (std::isfinite(b.lower)) g.push_back({what + " >= lower bound", w - b.lower});
  if (std::isfinite(b.upper)) g.push_back({what + " <= upper bound", b.upper - w});
  return g;
}

std::vector<Gate> delaunay_gates(const RunConfig& c) {
  std::vector<Gate> gates;
  const double H = c.H.value_or(c.space == Spaceform::H3 ? 2.0 : 1.0);
  if (c.space == Spaceform::H3) gates.push_back({"|H| > 1 (H3)", std::abs(H) - 1.0});
  if (H == 0.0) gates.push_back({"H nonzero", -1.0});
  enforce(gates);
  if (c.w) {
    const auto wg = weight_gates(delaunay_weight_bounds(H, c.space), *c.w, "w");
    gates.insert(gates.end(), wg.begin(), wg.end());
    enforce(gates);
  }
  delaunay_params(c);  // throws ParameterGate for (a, b) off the closing line
  if (!c.w) gates.push_back({"closing a + b = 1/2", 1e-12 - std::abs(*c.a + *c.b - 0.5)});
  return gates;
}

std::vector<Gate> trinoid_gates(const RunConfig& c) {
  const TrinoidParams p = trinoid_params(c);
  std::vector<Gate> gates;
  for (int k = 0; k < 3; ++k) {
    const char* names[3] = {"v_0 nonzero", "v_1 nonzero", "v_inf nonzero"};
    gates.push_back({names[k], std::abs(c.v[k]) > 0 ? std::abs(c.v[k]) : -1.0});
  }
  const double s = std::abs(p.lambda0);
  switch (c.space) {
    case Spaceform::R3:
      gates.push_back({"|lambda0| = 1", 1e-12 - std::abs(s - 1.0)});
      gates.push_back({"H nonzero", std::abs(p.H) > 0 ? std::abs(p.H) : -1.0});
      break;
    case Spaceform::S3:
      gates.push_back({"|lambda0| = 1", 1e-12 - std::abs(s - 1.0)});
      gates.push_back({"lambda0^2 != 1", std::abs(p.lambda0 * p.lambda0 - 1.0) - 1e-6});
      break;
    case Spaceform::H3:
      gates.push_back({"lambda0 real positive", p.lambda0.real() > 0 ? 1e-12 - std::abs(p.lambda0.imag()) : -1.0});
      gates.push_back({"|lambda0| >= r", s - c.r});
      gates.push_back({"|lambda0| < 1", 1.0 - s});
      break;
  }
  if (c.space != Spaceform::R3 && c.H)
    throw Error(ErrorCode::ConfigParseError, "'H' is fixed by lambda0 for S3/H3 trinoids; remove it");
  enforce(gates);
  const auto ineq = trinoid_inequalities(p);
  for (const auto& [name, m] : ineq.margins) gates.push_back({name, m});
  const auto ew = formal_end_weights(p);
  static const char* ends[3] = {"w_0", "w_1", "w_inf"};
  for (int k = 0; k < 3; ++k) {
    const auto wg = weight_gates(ew.bounds, ew.w[k], ends[k]);
    gates.insert(gates.end(), wg.begin(), wg.end());
  }
  return gates;
}

// ------------------------------------------------------------- artifacts

std::filesystem::path artifact(const RunConfig& c, const std::string& suffix) {
  std::filesystem::create_directories(c.out_dir);
  return std::filesystem::path(c.out_dir) / (c.name + suffix);
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IOError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IOError, "write failed: " + path.string());
  std::printf("wrote %s\n", path.string().c_str());
}

json geometry_json(const GeometryReport& r) {
  return {{"target_H", r.target_H},
          {"interior_vertices", r.interior_vertices},
          {"conformality", {{"median", r.conformality_median}, {"p90", r.conformality_p90}, {"max", r.conformality_max}}},
          {"h_error", {{"median", r.h_error_median}, {"p90", r.h_error_p90}, {"max", r.h_error_max}}},
          {"ambient_drift", r.ambient_drift},
          {"branch_points", r.branch_points}};
}

void export_surface(const RunConfig& c, SurfaceMesh& m) {
  m.metadata["config"] = to_json(c);
  const bool obj = c.format == "obj";
  const auto path = artifact(c, obj ? ".obj" : ".ply");
  export_mesh(m, obj ? MeshFormat::OBJ : MeshFormat::PLY, path.string());
  std::printf("wrote %s%s\n", path.string().c_str(), obj ? " (+ .json)" : "");
}

std::vector<Check> geometry_checks(const RunConfig& c, const GeometryReport& g) {
  std::vector<Check> checks{{"discrete H relative error", g.h_error_max, c.h_tol}};
  if (c.space != Spaceform::R3) checks.push_back({"ambient constraint drift", g.ambient_drift, 1e-9});
  return checks;
}

// ------------------------------------------------------------ subcommands

int run_delaunay(const RunConfig& c, const std::vector<Gate>& gates) {
  const DelaunayParams p = delaunay_params(c);
  DelaunaySurfaceInfo info;
  SurfaceMesh m = build_delaunay_surface(p, grid_spec(c), &info);
  const GeometryReport g = verify_geometry(m, p.H, c.h_tol);
  std::vector<Check> checks{{"closure residual", info.closure_residual, 1e-6}};
  const auto gc = geometry_checks(c, g);
  checks.insert(checks.end(), gc.begin(), gc.end());
  print_checks(checks);
  std::printf("profile radii %.6f .. %.6f%s\n", info.min_radius, info.max_radius, info.nodoid ? " (nodoid)" : "");
  export_surface(c, m);
  write_json(artifact(c, ".report.json"),
             {{"config", to_json(c)},
              {"gates", gates_json(gates)},
              {"params", {{"a", p.a}, {"b", p.b}, {"H", p.H}}},
              {"surface",
               {{"closure_residual", info.closure_residual},
                {"min_radius", info.min_radius},
                {"max_radius", info.max_radius},
                {"nodoid", info.nodoid}}},
              {"geometry", geometry_json(g)},
              {"checks", checks_json(checks)}});
  enforce(checks);
  return kOk;
}

json closing_json(const ClosingReport& r) {
  json ends = json::array();
  for (const auto& e : r.ends)
    ends.push_back({{"sign", e.sign},
                    {"identity_residual", e.identity_residual},
                    {"derivative", e.derivative},
                    {"pair_residual", e.pair_residual}});
  return {{"ends", ends}, {"max_residual", r.max_residual}};
}

json unitarizer_json(const TrinoidSurfaceInfo& info, const Loop& C) {
  json coeffs = json::array();
  for (int k = 0; k < std::min(C.size() / 2, 16); ++k) {
    const Mat2 ck = C.laurent_coefficient(k);
    json m = json::array();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m.push_back({ck(i, j).real(), ck(i, j).imag()});
    coeffs.push_back(m);
  }
  const auto& u = info.unitarizer;
  return {{"residual", u.residual},
          {"tail", u.tail},
          {"certified_radius", u.certified_radius},
          {"birkhoff_residual", u.birkhoff_residual},
          {"exceptional_samples", u.exceptional},
          {"C_leading_coefficients", coeffs}};
}

std::vector<Check> trinoid_checks(const RunConfig& c, const TrinoidSurfaceInfo& info) {
  return {{"trace identity", info.trace_identity, 1e-6},
          {"unitarizer residual", info.unitarizer.residual, c.tol},
          {"closing residual", info.closing.max_residual, 1e-6}};
}

int run_trinoid(const RunConfig& c, const std::vector<Gate>& gates) {
  const TrinoidParams p = trinoid_params(c);
  TrinoidSurfaceInfo info;
  SurfaceMesh m;
  try {
    m = build_trinoid_surface(p, grid_spec(c), &info, c.period_tol, c.tol);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::PeriodResidualTooLarge) throw;
    throw NumericFailure{e.what()};
  }
  const GeometryReport g = verify_geometry(m, trinoid_mean_curvature(p), c.h_tol);
  std::vector<Check> checks = trinoid_checks(c, info);
  checks.push_back({"period residual", info.max_period_residual, c.period_tol});
  const auto gc = geometry_checks(c, g);
  checks.insert(checks.end(), gc.begin(), gc.end());
  print_checks(checks);
  export_surface(c, m);
  write_json(artifact(c, ".report.json"), {{"config", to_json(c)},
                                           {"gates", gates_json(gates)},
                                           {"H", trinoid_mean_curvature(p)},
                                           {"unitarizer", unitarizer_json(info, info.unitarizer.C)},
                                           {"closing", closing_json(info.closing)},
                                           {"period_residual", info.period_residual},
                                           {"geometry", geometry_json(g)},
                                           {"formal_end_weights", m.metadata["formal_end_weights"]},
                                           {"checks", checks_json(checks)}});
  enforce(checks);
  return kOk;
}

int run_unitarize(const RunConfig& c, const std::vector<Gate>& gates) {
  const TrinoidParams p = trinoid_params(c);
  TrinoidSurfaceInfo info;
  const TrinoidFrame f = prepare_trinoid(p, grid_spec(c), &info, c.tol);
  const auto& mono = info.monodromy;
  const double goldman = goldman_positive_fraction(mono.H0, mono.H1, mono.Hinf);
  std::vector<Check> checks = trinoid_checks(c, info);
  checks.push_back({"Goldman T <= 0 fraction", 1.0 - goldman, 0.01});
  print_checks(checks);
  write_json(artifact(c, ".json"), {{"config", to_json(c)},
                                    {"gates", gates_json(gates)},
                                    {"monodromy",
                                     {{"product_residual", mono.product_residual},
                                      {"det_drift", mono.det_drift},
                                      {"trace_identity", info.trace_identity},
                                      {"goldman_positive_fraction", goldman}}},
                                    {"unitarizer", unitarizer_json(info, f.C)},
                                    {"closing", closing_json(info.closing)},
                                    {"checks", checks_json(checks)}});
  enforce(checks);
  return kOk;
}

int run_verify(const RunConfig& c, const std::vector<Gate>& gates) {
  std::vector<Check> checks;
  json frames = json::array();
  auto audit = [&](const std::string& label, const std::function<Loop(cplx)>& F, cplx z) {
    const auto r = verify_frame_structure(F, z);
    const double mc = r.alpha_scale > 0 ? r.maurer_cartan / r.alpha_scale : 0.0;
    checks.push_back({label + " structure", r.structure_residual, 1e-6});
    checks.push_back({label + " Maurer-Cartan", mc, 1e-5});
    frames.push_back({{"at", {z.real(), z.imag()}}, {"structure", r.structure_residual}, {"maurer_cartan", mc}});
  };
  json report{{"config", to_json(c)}, {"gates", gates_json(gates)}};
  SurfaceMesh m;
  double H = 1.0;
  if (c.wants_trinoid()) {
    const TrinoidParams p = trinoid_params(c);
    TrinoidSurfaceInfo info;
    m = build_trinoid_surface(p, grid_spec(c), &info, std::numeric_limits<double>::infinity(), c.tol);
    H = trinoid_mean_curvature(p);
    const TrinoidFrame f = prepare_trinoid(p, grid_spec(c), nullptr, c.tol);
    for (cplx z : {cplx(0.3, 0.4), cplx(0.8, -0.3), cplx(-0.6, 0.5)})
      audit("frame", [&](cplx w) { return f.unitary(w); }, z);
    const auto tc = trinoid_checks(c, info);
    checks.insert(checks.end(), tc.begin(), tc.end());
    checks.push_back({"period residual", info.max_period_residual, c.period_tol});
    report["closing"] = closing_json(info.closing);
  } else {
    const DelaunayParams p = delaunay_params(c);
    DelaunaySurfaceInfo info;
    m = build_delaunay_surface(p, grid_spec(c), &info);
    H = p.H;
    for (cplx z : {cplx(0.1, 0.7), cplx(-0.4, 2.0)})
      audit("frame", [&](cplx w) { return delaunay_explicit_frame(p, w.real(), w.imag(), 1.0, c.samples).F; }, z);
    const Loop M = delaunay_monodromy(p, 1.0, c.samples);
    const auto cr = closing_check({M}, sym_target(p));
    checks.push_back({"closing residual", cr.max_residual, 1e-6});
    checks.push_back({"closure residual", info.closure_residual, 1e-6});
    report["closing"] = closing_json(cr);
  }
  const GeometryReport g = verify_geometry(m, H, c.h_tol);
  const auto gc = geometry_checks(c, g);
  checks.insert(checks.end(), gc.begin(), gc.end());
  checks.push_back({"conformality median", g.conformality_median, 0.05});
  print_checks(checks);
  report["frame_structure"] = frames;
  report["geometry"] = geometry_json(g);
  report["checks"] = checks_json(checks);
  write_json(artifact(c, ".verify.json"), report);
  enforce(checks);
  return kOk;
}

int run_selftest(const RunConfig& c) {
  const auto rows = factorization_selftest(c.trials);
  std::printf("%-34s %6s %12s %10s\n", "check", "trials", "residual", "threshold");
  json a = json::array();
  bool ok = true;
  for (const auto& r : rows) {
    std::printf("%-34s %6d %12.3e %10.1e %s\n", r.name.c_str(), r.trials, r.value, r.threshold,
                r.pass() ? "ok" : "FAIL");
    a.push_back({{"name", r.name}, {"trials", r.trials}, {"residual", r.value}, {"threshold", r.threshold}});
    ok = ok && r.pass();
  }
  write_json(artifact(c, ".json"), {{"config", to_json(c)}, {"rows", a}});
  if (!ok) throw NumericFailure{"factorization self-test failed"};
  return kOk;
}

int dispatch(const RunConfig& c, bool dry_run) {
  std::vector<Gate> gates;
  // every failure while checking the gates is a parameter problem
  try {
    if (c.subcommand == "delaunay" || (c.subcommand == "verify" && !c.wants_trinoid())) {
      if (!c.has_delaunay) throw Error(ErrorCode::ConfigParseError, "a 'delaunay' section is required");
      gates = delaunay_gates(c);
    } else if (c.subcommand != "factor-selftest") {
      gates = trinoid_gates(c);
    }
    print_gates(gates);
    enforce(gates);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigParseError || e.code() == ErrorCode::ParameterGate) throw;
    throw Error(ErrorCode::ParameterGate, e.what());
  }
  if (dry_run) {
    std::printf("dry run: all gates pass\n");
    return kOk;
  }
  if (c.subcommand == "delaunay") return run_delaunay(c, gates);
  if (c.subcommand == "trinoid") return run_trinoid(c, gates);
  if (c.subcommand == "unitarize") return run_unitarize(c, gates);
  if (c.subcommand == "verify") return run_verify(c, gates);
  return run_selftest(c);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CMC surfaces from holomorphic potentials via loop group factorization"};
  std::string subcommand, config_path, out_dir, grid;
  bool dry_run = false;
  std::optional<int> threads, samples;
  std::optional<double> tol;
  app.add_option("subcommand", subcommand, "delaunay | trinoid | unitarize | verify | factor-selftest");
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--dry-run", dry_run, "check the parameter gates only");
  app.add_option("--threads", threads, "worker threads (0 = available parallelism)");
  app.add_option("--samples", samples, "lambda samples (power of two)");
  app.add_option("--tol", tol, "unitarizer residual bound");
  app.add_option("--grid", grid, "mesh size WxH (around x along)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (!subcommand.empty()) {
      parse_config(json{{"subcommand", subcommand}});  // rejects unknown names
      c.subcommand = subcommand;  // the command line wins over the file
    }
    if (c.subcommand.empty()) throw Error(ErrorCode::ConfigParseError, "no subcommand given");
    if (!out_dir.empty()) c.out_dir = out_dir;
    if (threads) c.threads = *threads;
    if (samples) c.samples = *samples;
    if (tol) c.tol = *tol;
    if (!grid.empty()) std::tie(c.grid_around, c.grid_along) = parse_grid(grid);
    if (c.name.empty()) c.name = c.subcommand;
    validate_config(c);
    return dispatch(c, dry_run);
  } catch (const NumericFailure& f) {
    std::fflush(stdout);
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return kNumeric;
  } catch (const Error& e) {
    std::fflush(stdout);
    std::fprintf(stderr, "error: %s\n", e.what());
    if (e.code() == ErrorCode::ConfigParseError) return kConfig;
    if (e.code() == ErrorCode::ParameterGate) return kGate;
    return kNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNumeric;
  }
}

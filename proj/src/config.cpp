#include "dpw/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "dpw/error.hpp"

namespace dpw {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::ConfigParseError, msg); }

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) bad(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) bad("unknown key '" + (where.empty() ? k : where + "." + k) + "'");
}

double num(const json& j, const std::string& key) {
  if (!j.is_number()) bad("'" + key + "' must be a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& key) {
  if (!j.is_number_integer()) bad("'" + key + "' must be an integer");
  return j.get<int>();
}

std::string str(const json& j, const std::string& key) {
  if (!j.is_string()) bad("'" + key + "' must be a string");
  return j.get<std::string>();
}

cplx complex_value(const json& j, const std::string& key) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  bad("'" + key + "' must be a number or [re, im]");
}

const std::set<std::string> kSubcommands{"delaunay", "trinoid", "unitarize", "verify", "factor-selftest"};

}  // namespace

bool RunConfig::wants_trinoid() const {
  if (subcommand == "trinoid" || subcommand == "unitarize") return true;
  if (subcommand == "delaunay") return false;
  return has_trinoid || !has_delaunay;
}

RunConfig parse_config(const json& j) {
  RunConfig c;
  check_keys(j, "", {"subcommand", "space", "H", "delaunay", "trinoid", "numerics", "output"});
  if (j.contains("subcommand")) {
    c.subcommand = str(j["subcommand"], "subcommand");
    if (!kSubcommands.count(c.subcommand)) bad("unknown subcommand '" + c.subcommand + "'");
  }
  if (j.contains("space")) {
    const std::string s = str(j["space"], "space");
    if (s != "R3" && s != "S3" && s != "H3") bad("'space' must be R3, S3 or H3");
    c.space = spaceform_from_string(s);
  }
  if (j.contains("H")) c.H = num(j["H"], "H");
  if (j.contains("delaunay")) {
    const json& d = j["delaunay"];
    check_keys(d, "delaunay", {"w", "a", "b"});
    c.has_delaunay = true;
    if (d.contains("w")) c.w = num(d["w"], "delaunay.w");
    if (d.contains("a")) c.a = num(d["a"], "delaunay.a");
    if (d.contains("b")) c.b = num(d["b"], "delaunay.b");
    if (c.w && (c.a || c.b)) bad("delaunay: give either 'w' or 'a' and 'b'");
    if (!c.w && !(c.a && c.b)) bad("delaunay: 'w' or both 'a' and 'b' required");
  }
  if (j.contains("trinoid")) {
    const json& t = j["trinoid"];
    check_keys(t, "trinoid", {"v", "lambda0"});
    c.has_trinoid = true;
    if (t.contains("v")) {
      const json& v = t["v"];
      if (!v.is_array() || v.size() != 3) bad("'trinoid.v' must be [v0, v1, vinf]");
      for (int k = 0; k < 3; ++k) c.v[k] = num(v[k], "trinoid.v");
    }
    if (t.contains("lambda0")) c.lambda0 = complex_value(t["lambda0"], "trinoid.lambda0");
  }
  if (j.contains("numerics")) {
    const json& n = j["numerics"];
    check_keys(n, "numerics", {"samples", "tol", "period_tol", "h_tol", "grid", "end_cutoff", "row_grading", "x_range",
                               "r", "threads", "trials"});
    if (n.contains("samples")) c.samples = integer(n["samples"], "numerics.samples");
    if (n.contains("tol")) c.tol = num(n["tol"], "numerics.tol");
    if (n.contains("period_tol")) c.period_tol = num(n["period_tol"], "numerics.period_tol");
    if (n.contains("h_tol")) c.h_tol = num(n["h_tol"], "numerics.h_tol");
    if (n.contains("grid")) {
      const json& g = n["grid"];
      if (!g.is_array() || g.size() != 2) bad("'numerics.grid' must be [around, along]");
      c.grid_around = integer(g[0], "numerics.grid");
      c.grid_along = integer(g[1], "numerics.grid");
    }
    if (n.contains("end_cutoff")) c.end_cutoff = num(n["end_cutoff"], "numerics.end_cutoff");
    if (n.contains("row_grading")) c.row_grading = num(n["row_grading"], "numerics.row_grading");
    if (n.contains("x_range")) {
      const json& x = n["x_range"];
      if (!x.is_array() || x.size() != 2) bad("'numerics.x_range' must be [min, max]");
      c.x_min = num(x[0], "numerics.x_range");
      c.x_max = num(x[1], "numerics.x_range");
    }
    if (n.contains("r")) c.r = num(n["r"], "numerics.r");
    if (n.contains("threads")) c.threads = integer(n["threads"], "numerics.threads");
    if (n.contains("trials")) c.trials = integer(n["trials"], "numerics.trials");
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    check_keys(o, "output", {"dir", "format", "name"});
    if (o.contains("dir")) c.out_dir = str(o["dir"], "output.dir");
    if (o.contains("format")) c.format = str(o["format"], "output.format");
    if (o.contains("name")) c.name = str(o["name"], "output.name");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot read config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    bad(path + ": " + e.what());
  }
  return parse_config(j);
}

void validate_config(const RunConfig& c) {
  auto range = [](bool ok, const std::string& msg) {
    if (!ok) bad(msg);
  };
  range(c.samples >= 8 && c.samples <= 4096 && (c.samples & (c.samples - 1)) == 0,
        "samples must be a power of two in [8, 4096]");
  range(c.tol > 0 && c.tol <= 1e-2, "tol must be in (0, 1e-2]");
  range(c.period_tol > 0 && c.period_tol <= 1e-1, "period_tol must be in (0, 0.1]");
  range(c.h_tol > 0 && c.h_tol <= 1.0, "h_tol must be in (0, 1]");
  range(c.grid_around >= 4 && c.grid_around <= 4096 && c.grid_around % 2 == 0,
        "grid around must be even and in [4, 4096]");
  range(c.grid_along >= 3 && c.grid_along <= 4096, "grid along must be in [3, 4096]");
  range(c.end_cutoff >= 1e-8 && c.end_cutoff < 0.25, "end_cutoff must be in [1e-8, 0.25)");
  range(c.row_grading >= 0 && c.row_grading <= 10, "row_grading must be in [0, 10]");
  range(c.x_min < c.x_max, "x_range must be increasing");
  range(c.r > 0 && c.r < 1, "r must be in (0, 1)");
  range(c.threads >= 0 && c.threads <= 256, "threads must be in [0, 256]");
  range(c.trials >= 1 && c.trials <= 10000, "trials must be in [1, 10000]");
  range(c.format == "obj" || c.format == "ply", "output format must be obj or ply");
  range(!c.out_dir.empty(), "output dir must not be empty");
  if (c.H) range(std::isfinite(*c.H), "H must be finite");
}

json to_json(const RunConfig& c) {
  json j;
  j["subcommand"] = c.subcommand;
  j["space"] = std::string(to_string(c.space));
  if (c.H) j["H"] = *c.H;
  if (c.has_delaunay) {
    json d;
    if (c.w) d["w"] = *c.w;
    if (c.a) d["a"] = *c.a;
    if (c.b) d["b"] = *c.b;
    j["delaunay"] = d;
  }
  if (c.has_trinoid || (c.subcommand != "factor-selftest" && c.wants_trinoid())) {
    const cplx l0 = c.lambda0.value_or(default_lambda0(c.space));
    j["trinoid"] = {{"v", c.v}, {"lambda0", {l0.real(), l0.imag()}}};
  }
  j["numerics"] = {{"samples", c.samples},
                   {"tol", c.tol},
                   {"period_tol", c.period_tol},
                   {"h_tol", c.h_tol},
                   {"grid", {c.grid_around, c.grid_along}},
                   {"end_cutoff", c.end_cutoff},
                   {"row_grading", c.row_grading},
                   {"x_range", {c.x_min, c.x_max}},
                   {"r", c.r},
                   {"threads", resolved_threads(c)},
                   {"trials", c.trials}};
  j["output"] = {{"dir", c.out_dir}, {"format", c.format}, {"name", c.name}};
  return j;
}

std::pair<int, int> parse_grid(const std::string& s) {
  std::istringstream in(s);
  int w = 0, h = 0;
  char x = 0;
  if (!(in >> w >> x >> h) || (x != 'x' && x != 'X') || !in.eof()) bad("--grid expects WxH, got '" + s + "'");
  return {w, h};
}

int resolved_threads(const RunConfig& c) {
  if (c.threads > 0) return c.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

GridSpec grid_spec(const RunConfig& c) {
  GridSpec g;
  g.around = c.grid_around;
  g.along = c.grid_along;
  g.samples = c.samples;
  g.x_min = c.x_min;
  g.x_max = c.x_max;
  g.end_cutoff = c.end_cutoff;
  g.row_grading = c.row_grading;
  g.threads = resolved_threads(c);
  return g;
}

TrinoidParams trinoid_params(const RunConfig& c) {
  TrinoidParams p;
  p.v0 = c.v[0];
  p.v1 = c.v[1];
  p.vinf = c.v[2];
  p.space = c.space;
  p.lambda0 = c.lambda0.value_or(default_lambda0(c.space));
  if (c.space == Spaceform::R3) p.H = c.H.value_or(1.0);
  return p;
}

DelaunayParams delaunay_params(const RunConfig& c) {
  const double H = c.H.value_or(c.space == Spaceform::H3 ? 2.0 : 1.0);
  if (c.w) return delaunay_solve_weight(*c.w, H, c.space);
  if (c.space != Spaceform::R3) bad("delaunay: (a, b) input is only supported in R3; give 'w'");
  DelaunayParams p;
  p.a = *c.a;
  p.b = *c.b;
  p.H = H;
  // the monodromy about the profile circle is -Id at lambda = 1 iff a + b = 1/2
  const double margin = 1e-12 - std::abs(p.a + p.b - 0.5);
  if (margin < 0 || p.a == 0.0 || p.b == 0.0) {
    std::ostringstream os;
    os << "delaunay parameters rejected: [closing a + b = 1/2 margin " << margin << "]";
    if (p.a == 0.0 || p.b == 0.0) os << " [a, b nonzero]";
    throw Error(ErrorCode::ParameterGate, os.str());
  }
  return p;
}

}  // namespace dpw

#pragma once

#include <array>
#include <optional>
#include <string>

#include "dpw/potentials.hpp"
#include "dpw/surface.hpp"
#include "json.hpp"

namespace dpw {

// Run configuration.  JSON layout (every key optional unless noted, unknown
// keys rejected at every level):
//
//   {
//     "subcommand": "delaunay" | "trinoid" | "unitarize" | "verify" | "factor-selftest",
//     "space": "R3" | "S3" | "H3",
//     "H": number,                       Delaunay in all spaces, trinoid in R3
//     "delaunay": {"w": number} | {"a": number, "b": number},
//     "trinoid": {"v": [v0, v1, vinf], "lambda0": number | [re, im]},
//     "numerics": {"samples": 128, "tol": 1e-6, "period_tol": 1e-5, "h_tol": 0.02,
//                  "grid": [around, along], "end_cutoff": 1e-3, "row_grading": 2.5,
//                  "x_range": [-pi, pi], "r": 0.1, "threads": 0, "trials": 20},
//     "output": {"dir": "out", "format": "obj" | "ply", "name": string}
//   }
//
// "tol" is the unitarizer residual bound, "r" the smallest admissible
// |lambda0| for H3, "threads" 0 means the available parallelism.
struct RunConfig {
  std::string subcommand;
  Spaceform space = Spaceform::R3;
  std::optional<double> H;

  bool has_delaunay = false;
  std::optional<double> w, a, b;

  bool has_trinoid = false;
  std::array<double, 3> v{0.75, 0.75, 0.75};
  std::optional<cplx> lambda0;

  int samples = 128;
  double tol = 1e-6;
  double period_tol = 1e-5;
  double h_tol = 0.02;
  int grid_around = 36, grid_along = 28;
  double end_cutoff = 1e-3;
  double row_grading = 2.5;
  double x_min = -kPi, x_max = kPi;
  double r = 0.1;
  int threads = 0;
  int trials = 20;

  std::string out_dir = "out";
  std::string format = "obj";
  std::string name;

  // Which surface a "verify" or "unitarize" run refers to.
  bool wants_trinoid() const;
};

// Throws Error(ConfigParseError) naming the offending key.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
// Range checks on the numeric knobs (ConfigParseError).
void validate_config(const RunConfig& c);

// Resolved configuration, with every default filled in.
nlohmann::json to_json(const RunConfig& c);

// Parses "WxH".
std::pair<int, int> parse_grid(const std::string& s);

int resolved_threads(const RunConfig& c);
GridSpec grid_spec(const RunConfig& c);
TrinoidParams trinoid_params(const RunConfig& c);
// Sym points from delaunay_solve_weight, or (a, b) as given.
DelaunayParams delaunay_params(const RunConfig& c);

}  // namespace dpw

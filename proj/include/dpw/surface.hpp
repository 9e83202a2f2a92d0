#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "dpw/frame_ode.hpp"
#include "dpw/sym.hpp"
#include "dpw/unitarize.hpp"
#include "json.hpp"

namespace dpw {

// One rectangular chart of the mesh.  Vertex (i, j) has index
// first + i * cols + j; columns wrap around when `periodic` is set.  `t` is
// the conformal coordinate of each vertex in the chart.
struct ChartGrid {
  std::string name;
  int rows = 0;
  int cols = 0;
  bool periodic = true;
  int first = 0;
  std::vector<cplx> t;
  // Vertices in the part of the domain this chart is responsible for, when
  // charts overlap (empty: all).  Only these count as interior.
  std::vector<char> owned;

  int index(int i, int j) const;
};

struct VertexDiagnostics {
  double conformality = 0.0;   // relative defect of |f_x| = |f_y|, f_x . f_y = 0
  double mean_curvature = 0.0; // discrete estimate, NaN on chart boundaries
  bool branch_point = false;
  bool interior = false;
};

struct SurfaceMesh {
  Spaceform space = Spaceform::R3;
  double H = 1.0;
  std::vector<Vec4> vertices;  // ambient coordinates (R3 uses x[0..2])
  std::vector<Vec3> normals;   // normals of the exported R3 image
  std::vector<std::array<int, 3>> faces;
  std::vector<ChartGrid> charts;
  std::vector<VertexDiagnostics> diagnostics;
  nlohmann::json metadata;
};

struct GridSpec {
  int around = 36;    // columns (angular direction)
  int along = 28;     // rows
  int samples = 128;  // lambda samples
  double x_min = -kPi, x_max = kPi;  // Delaunay: range of Re log z
  double end_cutoff = 1e-3;          // trinoid: |z - puncture| at the innermost row
  double row_grading = 2.5;          // trinoid: 0 = rows uniform in log|u|
  int threads = 2;
  IntegrationOptions ode{};
};

struct DelaunaySurfaceInfo {
  double closure_residual = 0.0;  // first vs last column before wrapping
  double min_radius = 0.0, max_radius = 0.0;  // R3 profile radii per row
  bool nodoid = false;
};

SurfaceMesh build_delaunay_surface(const DelaunayParams& p, const GridSpec& g, DelaunaySurfaceInfo* info = nullptr);

struct TrinoidSurfaceInfo {
  MonodromyRep monodromy;
  UnitarizerResult unitarizer;
  ClosingReport closing;
  double trace_identity = 0.0;
  std::array<double, 3> period_residual{};  // per end, seam vertices along translated paths
  double max_period_residual = 0.0;
};

// Unitarized holomorphic frame C Phi of a trinoid, Phi(z0) = Id.
struct TrinoidFrame {
  TrinoidParams params;
  Potential xi;
  Loop C;
  cplx z0 = 0.5;
  IntegrationOptions ode{};

  // C Phi(z) along the straight segment from z0.
  Loop holomorphic(cplx z) const;
  Loop unitary(cplx z) const;
};

// Gate, monodromy and unitarizer.  Throws ParameterGate naming the failed
// margin, UnitarizationResidualTooLarge, ...
TrinoidFrame prepare_trinoid(const TrinoidParams& p, const GridSpec& g, TrinoidSurfaceInfo* info = nullptr,
                             double unitarizer_tol = 1e-6);

// Three annular end charts around 0, 1, infinity in log coordinates, each
// cut along one ray; together they cover the sphere with overlaps.  The two
// copies of the cut are reached along paths differing by a loop around the
// end, and their mismatch is the period residual.  Throws
// PeriodResidualTooLarge when it exceeds `period_tol`.
SurfaceMesh build_trinoid_surface(const TrinoidParams& p, const GridSpec& g, TrinoidSurfaceInfo* info = nullptr,
                                  double period_tol = 1e-5, double unitarizer_tol = 1e-6);

struct GeometryReport {
  double target_H = 0.0;
  int interior_vertices = 0;
  double conformality_median = 0.0, conformality_p90 = 0.0, conformality_max = 0.0;
  double h_error_median = 0.0, h_error_p90 = 0.0, h_error_max = 0.0;  // relative to |target_H|
  double ambient_drift = 0.0;  // S3: | |x|^2 - 1 |, H3: Minkowski norm defect
  int branch_points = 0;
  bool h_mismatch = false;  // h_error_max above h_tol
};

// Fills mesh.diagnostics and mesh.normals.
GeometryReport verify_geometry(SurfaceMesh& mesh, double target_H, double h_tol = 0.02);

enum class MeshFormat { OBJ, PLY };

// Coordinates of the exported R3 image: stereographic projection from
// (-1, 0, 0, 0) for S3, Poincare ball for H3.  Throws UnprojectablePoint.
std::vector<Vec3> projected_vertices(const SurfaceMesh& mesh);

// OBJ also writes `<path>.json` with the diagnostics; PLY carries the
// metadata as a one-line header comment.
void export_mesh(const SurfaceMesh& mesh, MeshFormat format, const std::string& path);
nlohmann::json diagnostics_json(const SurfaceMesh& mesh);

}  // namespace dpw

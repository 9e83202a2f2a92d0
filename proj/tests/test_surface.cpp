#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <Eigen/SVD>

#include "dpw/surface.hpp"

using namespace dpw;

namespace {

GridSpec small_grid(int around, int along, int samples = 64) {
  GridSpec g;
  g.around = around;
  g.along = along;
  g.samples = samples;
  g.threads = 1;
  return g;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("dpw_test_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 2x2 vertex square in the plane z = 0
SurfaceMesh flat_square() {
  SurfaceMesh m;
  m.vertices = {Vec4(0, 0, 0, 0), Vec4(1, 0, 0, 0), Vec4(0, 1, 0, 0), Vec4(1, 1, 0, 0)};
  m.faces = {{0, 1, 3}, {0, 3, 2}};
  return m;
}

// Residual of the best rigid motion (rotation, possibly improper, plus translation)
// taking a onto b, relative to the spread of b.
double procrustes_residual(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  Vec3 ca = Vec3::Zero(), cb = Vec3::Zero();
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca += a[i];
    cb += b[i];
  }
  ca /= double(a.size());
  cb /= double(b.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < a.size(); ++i) cov += (a[i] - ca) * (b[i] - cb).transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d R = svd.matrixV() * svd.matrixU().transpose();
  double err = 0.0, spread = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    err = std::max(err, (R * (a[i] - ca) + cb - b[i]).norm());
    spread = std::max(spread, (b[i] - cb).norm());
  }
  return err / spread;
}

}  // namespace

TEST_CASE("round cylinder") {
  DelaunaySurfaceInfo info;
  auto m = build_delaunay_surface(DelaunayParams{}, small_grid(200, 100), &info);
  CHECK(std::abs(info.min_radius - 0.5) < 1e-6);
  CHECK(std::abs(info.max_radius - 0.5) < 1e-6);
  CHECK(info.closure_residual < 1e-6);
  CHECK_FALSE(info.nodoid);
  const auto rep = verify_geometry(m, 1.0);
  CHECK(rep.interior_vertices > 0);
  CHECK(rep.h_error_max < 0.01);
  CHECK_FALSE(rep.h_mismatch);
  // negative control: wrong target curvature
  CHECK(verify_geometry(m, 1.3).h_mismatch);
}

TEST_CASE("unduloid and nodoid") {
  DelaunaySurfaceInfo info;
  auto m = build_delaunay_surface(delaunay_solve_weight(0.9, 1.0, Spaceform::R3), small_grid(36, 28), &info);
  CHECK(info.max_radius - info.min_radius > 0.1);
  CHECK(info.closure_residual < 1e-6);
  CHECK_FALSE(info.nodoid);
  CHECK(verify_geometry(m, 1.0).h_error_max < 0.02);

  build_delaunay_surface(delaunay_solve_weight(-0.5, 1.0, Spaceform::R3), small_grid(24, 16), &info);
  CHECK(info.nodoid);
}

TEST_CASE("near-sphere Delaunay surface") {
  auto m = build_delaunay_surface(delaunay_solve_weight(0.05, 1.0, Spaceform::R3), small_grid(36, 28));
  CHECK(verify_geometry(m, 1.0).h_error_max < 0.02);
}

TEST_CASE("Delaunay surfaces in S3 and H3 stay on the space form") {
  for (auto [space, H] : {std::pair{Spaceform::S3, 0.5}, std::pair{Spaceform::H3, 2.0}}) {
    const auto p = delaunay_solve_weight(0.5, H, space);
    auto m = build_delaunay_surface(p, small_grid(36, 28));
    const auto rep = verify_geometry(m, p.H);
    CHECK(rep.ambient_drift < 1e-9);
    CHECK(rep.h_error_max < 0.02);
    if (space == Spaceform::H3)
      for (const auto& v : projected_vertices(m)) CHECK(v.norm() < 1.0);
  }
}

TEST_CASE("property: halving the grid spacing reduces the conformality defect") {
  const auto p = delaunay_solve_weight(0.9, 1.0, Spaceform::R3);
  auto coarse = build_delaunay_surface(p, small_grid(36, 28));
  auto fine = build_delaunay_surface(p, small_grid(72, 56));
  const double c = verify_geometry(coarse, 1.0).conformality_median;
  const double f = verify_geometry(fine, 1.0).conformality_median;
  CHECK(c / f >= 3.0);
}

TEST_CASE("trinoid gate names the failed margin") {
  TrinoidParams p;
  p.v0 = p.v1 = 1.0;
  p.vinf = 3.0;
  try {
    prepare_trinoid(p, small_grid(8, 8, 128));
    FAIL("gate did not fire");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParameterGate);
    CHECK(std::string(e.what()).find("triangle |v_inf|") != std::string::npos);
  }
}

TEST_CASE("trinoid surface closes") {
  TrinoidParams p;
  TrinoidSurfaceInfo info;
  auto m = build_trinoid_surface(p, small_grid(16, 12, 128), &info);
  CHECK(info.max_period_residual < 1e-5);
  CHECK(m.charts.size() == 3);
  CHECK(m.vertices.size() == 3u * 16 * 12);
  CHECK(info.trace_identity < 1e-6);
}

TEST_CASE("trinoid with a negative end weight builds") {
  TrinoidParams p;
  p.vinf = -0.2;
  TrinoidSurfaceInfo info;
  build_trinoid_surface(p, small_grid(16, 12, 128), &info);
  CHECK(info.max_period_residual < 1e-5);
  CHECK(formal_end_weights(p).w[2] < 0);
}

TEST_CASE("property: trinoid with v0 = v1 is symmetric under z -> 1 - z") {
  TrinoidParams p;
  p.v0 = p.v1 = 0.6;
  p.vinf = 0.9;
  const auto frame = prepare_trinoid(p, small_grid(8, 8, 128));
  const auto target = sym_target(p);
  std::vector<Vec3> a, b;
  for (cplx z : {cplx(0.2, 0.3), cplx(0.7, -0.4), cplx(0.5, 0.9), cplx(-0.3, 0.1), cplx(0.35, -0.2)}) {
    a.push_back(sym(frame.unitary(z), target).x.head<3>());
    b.push_back(sym(frame.unitary(1.0 - z), target).x.head<3>());
  }
  CHECK(procrustes_residual(a, b) < 1e-4);
}

TEST_CASE("trinoid frame structure") {
  const auto frame = prepare_trinoid(TrinoidParams{}, small_grid(8, 8, 128));
  const auto rep = verify_frame_structure([&](cplx z) { return frame.unitary(z); }, cplx(0.3, 0.4));
  CHECK(rep.structure_residual < 1e-6);
  CHECK(rep.maurer_cartan / rep.alpha_scale < 1e-5);
  CHECK_FALSE(rep.flagged);
}

TEST_CASE("OBJ export of a flat square") {
  const auto path = temp_path("square.obj");
  export_mesh(flat_square(), MeshFormat::OBJ, path);
  std::ifstream in(path);
  int v = 0, f = 0;
  std::vector<Vec3> pts;
  for (std::string line; std::getline(in, line);) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Vec3 x;
      ls >> x[0] >> x[1] >> x[2];
      CHECK(ls);
      pts.push_back(x);
      ++v;
    }
    if (tag == "f") {
      int idx[3];
      ls >> idx[0] >> idx[1] >> idx[2];
      CHECK(ls);
      for (int i : idx) CHECK((i >= 1 && i <= 4));
      ++f;
    }
  }
  CHECK(v == 4);
  CHECK((f >= 1 && f <= 2));
  CHECK((pts[3] - Vec3(1, 1, 0)).norm() == 0.0);
  CHECK(std::filesystem::exists(path + ".json"));
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".json");
}

TEST_CASE("PLY export header and size") {
  auto m = flat_square();
  const auto path = temp_path("square.ply");
  export_mesh(m, MeshFormat::PLY, path);
  const std::string s = slurp(path);
  const auto end = s.find("end_header\n");
  REQUIRE(end != std::string::npos);
  CHECK(s.rfind("ply\nformat binary_little_endian 1.0\n", 0) == 0);
  CHECK(s.find("element vertex 4") != std::string::npos);
  CHECK(s.find("element face 2") != std::string::npos);
  // 8 floats + 1 byte per vertex, 1 byte + 3 ints per face
  CHECK(s.size() - end - 11 == 4 * 33 + 2 * 13);
  std::filesystem::remove(path);
}

TEST_CASE("S3 export refuses the projection pole") {
  auto m = flat_square();
  m.space = Spaceform::S3;
  m.vertices = {Vec4(1, 0, 0, 0), Vec4(0, 1, 0, 0), Vec4(-1, 0, 0, 0), Vec4(0, 0, 1, 0)};
  try {
    export_mesh(m, MeshFormat::OBJ, temp_path("pole.obj"));
    FAIL("pole not detected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnprojectablePoint);
    CHECK(std::string(e.what()).find("vertex 2") != std::string::npos);
  }
}

TEST_CASE("export is an error for an unwritable path") {
  CHECK_THROWS_AS(export_mesh(flat_square(), MeshFormat::OBJ, "/nonexistent/dir/x.obj"), Error);
}

TEST_CASE("property: diagnostics are deterministic") {
  const auto p = delaunay_solve_weight(0.7, 1.0, Spaceform::R3);
  std::string first;
  for (int threads : {1, 2}) {
    auto g = small_grid(20, 12);
    g.threads = threads;
    auto m = build_delaunay_surface(p, g);
    verify_geometry(m, 1.0);
    const std::string d = diagnostics_json(m).dump();
    if (first.empty())
      first = d;
    else
      CHECK(d == first);
  }
}

#include "dpw/surface.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>

#include "dpw/factorization.hpp"

namespace dpw {

int ChartGrid::index(int i, int j) const {
  if (periodic) j = ((j % cols) + cols) % cols;
  return first + i * cols + j;
}

namespace {

// Runs f(k) for k in [0, n) on up to `threads` workers, striding.
template <class F>
void parallel_for(int n, int threads, F&& f) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int k = 0; k < n; ++k) f(k);
    return;
  }
  std::vector<std::future<void>> jobs;
  for (int w = 0; w < threads; ++w)
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (int k = w; k < n; k += threads) f(k);
    }));
  for (auto& j : jobs) j.get();
}

void add_quad_faces(SurfaceMesh& m, const ChartGrid& c) {
  const int jmax = c.periodic ? c.cols : c.cols - 1;
  for (int i = 0; i + 1 < c.rows; ++i)
    for (int j = 0; j < jmax; ++j) {
      const int a = c.index(i, j), b = c.index(i + 1, j), d = c.index(i, j + 1), e = c.index(i + 1, j + 1);
      m.faces.push_back({a, b, e});
      m.faces.push_back({a, e, d});
    }
}

double vec_dist(const Vec4& a, const Vec4& b) { return (a - b).norm(); }

// Drops the negative-power coefficients, which are round-off for a plus loop,
// so that inward evaluation does not amplify them.
Loop plus_part(const Loop& B) {
  std::vector<Mat2> c = B.scaled_coefficients();
  for (int k = 0; k < B.size() / 2; ++k) c[k] = Mat2::Zero();
  return Loop::from_scaled_coefficients(B.radius(), std::move(c));
}

}  // namespace

// ---------------------------------------------------------------- Delaunay

SurfaceMesh build_delaunay_surface(const DelaunayParams& p, const GridSpec& g, DelaunaySurfaceInfo* info) {
  if (g.around < 3 || g.along < 2) throw Error(ErrorCode::InvalidArgument, "grid needs at least 3 x 2 vertices");
  const SymTarget target = sym_target(p);
  const int n = g.samples, rows = g.along, cols = g.around;
  const Loop A = delaunay_A_loop(p, 1.0, n);
  const bool h3 = p.space == Spaceform::H3;
  const Mat2 A0 = delaunay_A(p, p.lambda0);

  SurfaceMesh m;
  m.space = p.space;
  m.H = p.H;
  ChartGrid c;
  c.name = "cylinder";
  c.rows = rows;
  c.cols = cols;
  c.t.resize(rows * cols);
  m.vertices.resize(rows * cols);
  std::vector<Vec4> last(rows);  // y = 2 pi column, for the closure check

  parallel_for(rows, g.threads, [&](int i) {
    const double x = rows == 1 ? g.x_min : g.x_min + (g.x_max - g.x_min) * i / (rows - 1);
    const IwasawaPair fb = delaunay_explicit_frame(p, x, 0.0, 1.0, n);
    const Loop& E = fb.F;
    // H3: F(lambda0) = exp(z A(lambda0)) B(lambda0)^-1, continuing only the plus factor inward
    const Mat2 Binv0 = h3 ? Mat2(plus_part(fb.B).eval(p.lambda0).inverse()) : Mat2(identity2());
    for (int j = 0; j <= cols; ++j) {
      // exp((x + iy) A) = exp(iy A) exp(x A), exp(iy A) is unitary on the unit circle and B depends on x only
      const double y = 2.0 * kPi * j / cols;
      Vec4 pt;
      if (h3) {
        const Mat2 F0 = expm2(cplx(x, y) * A0) * Binv0;
        pt = sym_h3(Loop::constant(std::abs(p.lambda0), 8, F0), p.lambda0).x;
      } else {
        std::vector<Mat2> f(n);
        for (int s = 0; s < n; ++s) f[s] = expm2(kI * y * A[s]) * E[s];
        pt = sym(Loop(1.0, std::move(f)), target).x;
      }
      if (j == cols) {
        last[i] = pt;
      } else {
        m.vertices[i * cols + j] = pt;
        c.t[i * cols + j] = cplx(x, y);
      }
    }
  });
  m.charts.push_back(c);
  add_quad_faces(m, c);
  m.diagnostics.resize(m.vertices.size());

  DelaunaySurfaceInfo inf;
  inf.nodoid = p.a * p.b < 0;
  inf.min_radius = std::numeric_limits<double>::infinity();
  for (int i = 0; i < rows; ++i) {
    inf.closure_residual = std::max(inf.closure_residual, vec_dist(last[i], m.vertices[i * cols]));
    Vec4 centroid = Vec4::Zero();
    for (int j = 0; j < cols; ++j) centroid += m.vertices[i * cols + j];
    centroid /= cols;
    double r = 0.0;
    for (int j = 0; j < cols; ++j) r += vec_dist(m.vertices[i * cols + j], centroid);
    r /= cols;
    inf.min_radius = std::min(inf.min_radius, r);
    inf.max_radius = std::max(inf.max_radius, r);
  }
  m.metadata = {{"surface", "delaunay"},
                {"space", std::string(to_string(p.space))},
                {"a", p.a},
                {"b", p.b},
                {"H", p.H},
                {"lambda0", {p.lambda0.real(), p.lambda0.imag()}},
                {"lambda1", {p.lambda1.real(), p.lambda1.imag()}},
                {"grid", {{"around", cols}, {"along", rows}, {"samples", n}, {"x_min", g.x_min}, {"x_max", g.x_max}}},
                {"closure_residual", inf.closure_residual},
                {"profile_radius", {inf.min_radius, inf.max_radius}},
                {"nodoid", inf.nodoid}};
  if (info) *info = inf;
  return m;
}

// ----------------------------------------------------------------- trinoid

Loop TrinoidFrame::holomorphic(cplx z) const {
  PathSpec path;
  path.start = z0;
  path.description = "segment from the base point";
  if (z != z0) path.line_to(z);
  return integrate_frame(xi, path, C, ode).phi;
}

Loop TrinoidFrame::unitary(cplx z) const { return iwasawa(holomorphic(z)).F; }

TrinoidFrame prepare_trinoid(const TrinoidParams& p, const GridSpec& g, TrinoidSurfaceInfo* info,
                             double unitarizer_tol) {
  const auto gate = trinoid_inequalities(p);
  if (!gate.pass) {
    std::ostringstream os;
    os << "trinoid parameters rejected:";
    for (const auto& [name, margin] : gate.margins)
      if (margin < 0) os << " [" << name << " margin " << margin << "]";
    throw Error(ErrorCode::ParameterGate, os.str());
  }
  TrinoidFrame f;
  f.params = p;
  f.xi = trinoid_potential(p);
  f.ode = g.ode;
  TrinoidSurfaceInfo inf;
  inf.monodromy = trinoid_monodromy(f.xi, Loop::constant(1.0, g.samples, identity2()), f.z0, 0.45, g.ode,
                                    std::max(1, g.threads));
  inf.trace_identity = trace_identity_check(inf.monodromy, p);
  inf.unitarizer = unitarizer({inf.monodromy.H0, inf.monodromy.H1, inf.monodromy.Hinf}, unitarizer_tol);
  inf.closing = closing_check(inf.unitarizer.conjugated, sym_target(p));
  f.C = inf.unitarizer.C;
  if (info) *info = std::move(inf);
  return f;
}

namespace {

// End chart k: u = e^t, z = M^k(u) with M(u) = 1/(1 - u), which cycles the
// punctures 0 -> 1 -> infinity.  P = dz/dt.
struct EndChart {
  int k;
  cplx z(cplx t) const {
    const cplx u = std::exp(t);
    switch (k) {
      case 0: return u;
      case 1: return 1.0 / (1.0 - u);
      default: return 1.0 - 1.0 / u;
    }
  }
  cplx P(cplx t) const {
    const cplx u = std::exp(t);
    switch (k) {
      case 0: return u;
      case 1: return u / ((1.0 - u) * (1.0 - u));
      default: return 1.0 / u;
    }
  }
  // d log P / dt
  cplx L(cplx t) const {
    const cplx u = std::exp(t);
    switch (k) {
      case 0: return 1.0;
      case 1: return (1.0 + u) / (1.0 - u);
      default: return -1.0;
    }
  }
  // sqrt(P), analytic in t
  cplx sqrtP(cplx t) const {
    const cplx u = std::exp(t), h = std::exp(0.5 * t);
    switch (k) {
      case 0: return h;
      case 1: return h / (1.0 - u);
      default: return 1.0 / h;
    }
  }
  // Outer boundary in the u-plane: the circle about -1/2 through the seam
  // corners exp(+-i pi/3).  It contains the cell {|u| <= 1, Re u <= 1/2} of
  // points nearer to this end, so neighbouring charts overlap, and unlike the
  // cell boundary it has no corners (grid lines through a corner spoil the
  // cotan estimator).
  cplx u_of(cplx z) const {
    switch (k) {
      case 0: return z;
      case 1: return 1.0 - 1.0 / z;
      default: return 1.0 / (1.0 - z);
    }
  }
  // |dz/dt| at z: the grid of the chart with the smallest value is finest there
  double scale_at(cplx z) const {
    switch (k) {
      case 0: return std::abs(z);
      case 1: return std::abs(z * (z - 1.0));
      default: return std::abs(1.0 - z);
    }
  }
  bool covers(cplx z, double eps) const {
    const cplx u = u_of(z);
    return std::abs(u) >= eps && std::abs(u) <= r_max(std::arg(u));
  }
  static double r_max(double theta) {
    const double s = std::sin(theta);
    return -0.5 * std::cos(theta) + std::sqrt(1.75 - 0.25 * s * s);
  }
};

// Pullback to the t-plane gauged by diag(sqrt P, 1/sqrt P), which makes the
// potential bounded as t -> -infinity.
Potential chart_potential(const TrinoidParams& p, const EndChart& ch) {
  return Potential{[p, ch](cplx t, cplx l) -> Mat2 {
                     const cplx P = ch.P(t), L = ch.L(t);
                     return mat2(0.5 * L, 1.0 / l, l * trinoid_h(p, l) * trinoid_Q(p, ch.z(t)) * P * P, -0.5 * L);
                   },
                   {0.0, cplx(0.0, 2.0 * kPi), cplx(0.0, -2.0 * kPi)},
                   "trinoid end chart " + std::to_string(ch.k)};
}

// Largest pointwise condition number of Psi* Psi.  The finite-section
// residual of the factorization cannot be resolved below roundoff times this.
double gram_condition(const Loop& psi) {
  double k = 1.0;
  for (int s = 0; s < psi.size(); ++s) {
    const Eigen::JacobiSVD<Mat2> svd(psi[s]);
    const auto& sv = svd.singularValues();
    k = std::max(k, (sv[0] * sv[0]) / std::max(sv[1] * sv[1], 1e-300));
  }
  return k;
}
constexpr double kRoundoff = 1e-15;

Loop gauge_right(const Loop& phi, const Mat2& D) {
  std::vector<Mat2> out(phi.size());
  for (int s = 0; s < phi.size(); ++s) out[s] = phi[s] * D;
  return Loop(phi.radius(), std::move(out));
}

}  // namespace

SurfaceMesh build_trinoid_surface(const TrinoidParams& p, const GridSpec& g, TrinoidSurfaceInfo* info,
                                  double period_tol, double unitarizer_tol) {
  if (g.around < 4 || g.around % 2 != 0 || g.along < 2)
    throw Error(ErrorCode::InvalidArgument, "trinoid grid needs an even number >= 4 of columns and >= 2 rows");
  TrinoidSurfaceInfo inf;
  const TrinoidFrame tf = prepare_trinoid(p, g, &inf, unitarizer_tol);
  const SymTarget target = sym_target(p);
  const int cols = g.around, rows = g.along;
  const double log_eps = std::log(g.end_cutoff);

  SurfaceMesh m;
  m.space = p.space;
  m.H = target.H;

  // base points M^k(1/2) reached from z0 through the upper half plane
  // H3 evaluates F off the unit circle; the frame is also carried at the
  // single point lambda0 so that F(lambda0) = Psi(lambda0) B(lambda0)^-1 only
  // continues the plus factor B inward.
  const bool h3 = p.space == Spaceform::H3;
  struct Frames {
    Loop loop, point;
  };
  auto integrate = [&](const Potential& xi, const PathSpec& path, const Frames& f) {
    Frames out;
    out.loop = integrate_frame(xi, path, f.loop, g.ode).phi;
    if (h3) out.point = integrate_frame(xi, path, f.point, g.ode).phi;
    return out;
  };
  std::array<Frames, 3> base;
  base[0].loop = tf.C;
  // the smallest admissible loop on |lambda| = lambda0; node 0 is lambda0
  if (h3) base[0].point = Loop::from_function(target.lambda0.real(), 8, [&](cplx l) { return tf.C.eval(l); });
  {
    PathSpec to2;
    to2.start = tf.z0;
    to2.description = "z0 to 2";
    to2.arc(1.25, -kPi);
    PathSpec tom1;
    tom1.start = tf.z0;
    tom1.description = "z0 to -1";
    tom1.arc(-0.25, kPi);
    base[1] = integrate(tf.xi, to2, base[0]);
    base[2] = integrate(tf.xi, tom1, base[0]);
  }

  static const char* kNames[3] = {"end 0", "end 1", "end infinity"};
  double max_factor_tol = 0.0;
  for (int k = 0; k < 3; ++k) {
    const EndChart ch{k};
    const Potential eta = chart_potential(p, ch);
    // W + 1 columns, theta from -pi to pi; the last duplicates the first across the cut
    auto t_at = [&](int i, int j) {
      const double theta = -kPi + 2.0 * kPi * j / cols;
      // exponential grading: rows are denser toward the outer boundary
      const double x = double(i) / (rows - 1), b = g.row_grading;
      const double w = b == 0.0 ? x : std::expm1(b * x) / std::expm1(b);
      const double outer = std::log(EndChart::r_max(theta));
      return cplx(outer - w * (outer - log_eps), theta);
    };
    std::vector<Frames> psi((cols + 1) * rows);
    auto at = [&](int i, int j) -> Frames& { return psi[i * (cols + 1) + j]; };
    auto step = [&](const Frames& from, cplx t0, cplx t1) {
      if (t0 == t1) return from;
      PathSpec path;
      path.start = t0;
      path.line_to(t1);
      return integrate(eta, path, from);
    };
    // the base frames sit at u = 1/2; move along the real axis to the boundary
    const int mid = cols / 2;
    const cplx tb = std::log(0.5), d = ch.sqrtP(tb);
    Frames start;
    const Mat2 D = mat2(d, 0.0, 0.0, 1.0 / d);
    start.loop = gauge_right(base[k].loop, D);
    if (h3) start.point = gauge_right(base[k].point, D);
    at(0, mid) = step(start, tb, t_at(0, mid));
    // outer boundary in both directions, then each column inward
    auto walk_boundary = [&](int dir) {
      for (int j = mid + dir; j >= 0 && j <= cols; j += dir) at(0, j) = step(at(0, j - dir), t_at(0, j - dir), t_at(0, j));
    };
    if (g.threads > 1) {
      auto fut = std::async(std::launch::async, walk_boundary, 1);
      walk_boundary(-1);
      fut.get();
    } else {
      walk_boundary(1);
      walk_boundary(-1);
    }
    std::vector<Vec4> pts((cols + 1) * rows);
    std::vector<double> factor_tol((cols + 1) * rows, 0.0);
    parallel_for(cols + 1, g.threads, [&](int j) {
      for (int i = 1; i < rows; ++i) at(i, j) = step(at(i - 1, j), t_at(i - 1, j), t_at(i, j));
      for (int i = 0; i < rows; ++i) {
        try {
          const Loop& psi_ij = at(i, j).loop;
          const double kappa = gram_condition(psi_ij);
          const double tol = std::max(kFactorTolerance, kRoundoff * kappa);
          factor_tol[i * (cols + 1) + j] = tol;
          const auto fb = iwasawa(psi_ij, tol);
          if (h3) {
            const Mat2 F0 = at(i, j).point[0] * plus_part(fb.B).eval(target.lambda0).inverse();
            pts[i * (cols + 1) + j] = sym_h3(Loop::constant(target.lambda0.real(), 8, F0), target.lambda0).x;
          } else {
            pts[i * (cols + 1) + j] = sym(fb.F, target).x;
          }
        } catch (const Error& e) {
          std::ostringstream os;
          os << kNames[k] << " vertex (" << i << ", " << j << ") t = " << t_at(i, j) << ": " << e.what();
          throw Error(e.code(), os.str());
        }
        at(i, j) = Frames{};
      }
    });

    ChartGrid c;
    c.name = kNames[k];
    c.rows = rows;
    c.cols = cols;
    c.first = static_cast<int>(m.vertices.size());
    for (int i = 0; i < rows; ++i) {
      inf.period_residual[k] =
          std::max(inf.period_residual[k], vec_dist(pts[i * (cols + 1)], pts[i * (cols + 1) + cols]));
      for (int j = 0; j < cols; ++j) {
        m.vertices.push_back(pts[i * (cols + 1) + j]);
        c.t.push_back(t_at(i, j));
      }
    }
    m.charts.push_back(c);
    add_quad_faces(m, c);
    max_factor_tol = std::max(max_factor_tol, *std::max_element(factor_tol.begin(), factor_tol.end()));
  }
  // overlaps: a vertex counts for its chart when no other chart covering the
  // same point has a finer grid there
  for (auto& c : m.charts) {
    const int k = static_cast<int>(&c - m.charts.data());
    c.owned.resize(c.t.size());
    for (std::size_t v = 0; v < c.t.size(); ++v) {
      const cplx z = EndChart{k}.z(c.t[v]);
      bool own = true;
      for (int o = 0; o < 3 && own; ++o)
        if (o != k && EndChart{o}.covers(z, g.end_cutoff)) own = EndChart{k}.scale_at(z) <= EndChart{o}.scale_at(z);
      c.owned[v] = own;
    }
  }
  m.diagnostics.resize(m.vertices.size());
  inf.max_period_residual = *std::max_element(inf.period_residual.begin(), inf.period_residual.end());

  const auto ew = formal_end_weights(p);
  m.metadata = {{"surface", "trinoid"},
                {"space", std::string(to_string(p.space))},
                {"v", {p.v0, p.v1, p.vinf}},
                {"lambda0", {p.lambda0.real(), p.lambda0.imag()}},
                {"H", target.H},
                {"grid", {{"around", cols}, {"along", rows}, {"samples", g.samples}, {"end_cutoff", g.end_cutoff}}},
                {"trace_identity", inf.trace_identity},
                {"unitarizer_residual", inf.unitarizer.residual},
                {"certified_radius", inf.unitarizer.certified_radius},
                {"closing_residual", inf.closing.max_residual},
                {"max_factorization_tolerance", max_factor_tol},
                {"period_residual", inf.period_residual},
                {"formal_end_weights",
                 {{"w", ew.w},
                  {"lower_bound", ew.bounds.lower},
                  {"upper_bound", ew.bounds.upper},
                  {"lower_margin", ew.lower_margin},
                  {"upper_margin", ew.upper_margin}}}};
  if (info) *info = inf;
  if (inf.max_period_residual > period_tol) {
    std::ostringstream os;
    os << "seam mismatch " << inf.max_period_residual << " exceeds " << period_tol;
    throw Error(ErrorCode::PeriodResidualTooLarge, os.str());
  }
  return m;
}

// --------------------------------------------------------------- geometry

namespace {

// Ambient inner product: Euclidean, or Minkowski for H3.
double ip(Spaceform s, const Vec4& a, const Vec4& b) {
  return s == Spaceform::H3 ? -a[0] * b[0] + a.tail<3>().dot(b.tail<3>()) : a.dot(b);
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

}  // namespace

std::vector<Vec3> projected_vertices(const SurfaceMesh& mesh) {
  std::vector<Vec3> out(mesh.vertices.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Vec4& x = mesh.vertices[i];
    switch (mesh.space) {
      case Spaceform::R3: out[i] = x.head<3>(); break;
      case Spaceform::S3:
        if (1.0 + x[0] < 1e-9) {
          std::ostringstream os;
          os << "vertex " << i << " is the projection pole";
          throw Error(ErrorCode::UnprojectablePoint, os.str());
        }
        out[i] = x.tail<3>() / (1.0 + x[0]);
        break;
      case Spaceform::H3: out[i] = x.tail<3>() / (1.0 + x[0]); break;
    }
  }
  return out;
}

GeometryReport verify_geometry(SurfaceMesh& mesh, double target_H, double h_tol) {
  const Spaceform sp = mesh.space;
  const std::size_t nv = mesh.vertices.size();
  mesh.diagnostics.assign(nv, {});
  GeometryReport rep;
  rep.target_H = target_H;

  // cotan Laplacian with barycentric areas in the ambient metric
  std::vector<Vec4> lap(nv, Vec4::Zero());
  std::vector<double> area(nv, 0.0);
  for (const auto& f : mesh.faces) {
    double a2 = 0.0;
    for (int c = 0; c < 3; ++c) {
      const int i = f[c], j = f[(c + 1) % 3], k = f[(c + 2) % 3];
      const Vec4 e1 = mesh.vertices[j] - mesh.vertices[i], e2 = mesh.vertices[k] - mesh.vertices[i];
      const double d = ip(sp, e1, e2), cross2 = ip(sp, e1, e1) * ip(sp, e2, e2) - d * d;
      if (cross2 <= 0) continue;
      const double cot = d / std::sqrt(cross2);
      lap[j] += 0.5 * cot * (mesh.vertices[k] - mesh.vertices[j]);
      lap[k] += 0.5 * cot * (mesh.vertices[j] - mesh.vertices[k]);
      a2 = cross2;
    }
    const double a = 0.5 * std::sqrt(std::max(a2, 0.0));
    for (int c = 0; c < 3; ++c) area[f[c]] += a / 3.0;
  }

  std::vector<double> conf, herr;
  for (const auto& c : mesh.charts) {
    for (int i = 0; i < c.rows; ++i)
      for (int j = 0; j < c.cols; ++j) {
        const int v = c.index(i, j);
        auto& dg = mesh.diagnostics[v];
        dg.interior = i > 0 && i + 1 < c.rows && (c.periodic || (j > 0 && j + 1 < c.cols)) &&
                      (c.owned.empty() || c.owned[v - c.first]);
        // conformality from differences along both grid directions, mapped to the conformal coordinate
        const int i0 = std::max(i - 1, 0), i1 = std::min(i + 1, c.rows - 1);
        const int j0 = c.periodic ? j - 1 : std::max(j - 1, 0), j1 = c.periodic ? j + 1 : std::min(j + 1, c.cols - 1);
        auto tval = [&](int ii, int jj) {
          const int wraps = c.periodic ? (jj < 0 ? -1 : (jj >= c.cols ? 1 : 0)) : 0;
          return c.t[c.index(ii, jj) - c.first] + double(wraps) * cplx(0.0, 2.0 * kPi);
        };
        const Vec4 fa = mesh.vertices[c.index(i1, j)] - mesh.vertices[c.index(i0, j)];
        const Vec4 fb = mesh.vertices[c.index(i, j1)] - mesh.vertices[c.index(i, j0)];
        const cplx ta = tval(i1, j) - tval(i0, j), tb = tval(i, j1) - tval(i, j0);
        const double det = ta.real() * tb.imag() - ta.imag() * tb.real();
        const Vec4 fx = (tb.imag() * fa - ta.imag() * fb) / det;
        const Vec4 fy = (-tb.real() * fa + ta.real() * fb) / det;
        const double xx = ip(sp, fx, fx), yy = ip(sp, fy, fy), xy = ip(sp, fx, fy);
        dg.branch_point = xx + yy < 1e-20;
        dg.conformality = dg.branch_point ? 0.0 : std::max(std::abs(xx - yy), 2.0 * std::abs(xy)) / (xx + yy);
        if (dg.branch_point) ++rep.branch_points;

        dg.mean_curvature = std::numeric_limits<double>::quiet_NaN();
        if (!dg.interior || area[v] <= 0) continue;
        const Vec4& x = mesh.vertices[v];
        Vec4 d = lap[v] / area[v];
        // drop the component normal to the space form
        if (sp == Spaceform::S3) d -= d.dot(x) / x.squaredNorm() * x;
        if (sp == Spaceform::H3) d += ip(sp, d, x) * x;
        dg.mean_curvature = 0.5 * std::sqrt(std::max(ip(sp, d, d), 0.0));
        conf.push_back(dg.conformality);
        herr.push_back(std::abs(dg.mean_curvature - std::abs(target_H)) / std::abs(target_H));
        ++rep.interior_vertices;
      }
  }
  for (const auto& x : mesh.vertices) {
    if (sp == Spaceform::S3) rep.ambient_drift = std::max(rep.ambient_drift, std::abs(x.squaredNorm() - 1.0));
    if (sp == Spaceform::H3) rep.ambient_drift = std::max(rep.ambient_drift, std::abs(ip(sp, x, x) + 1.0));
  }
  rep.conformality_median = quantile(conf, 0.5);
  rep.conformality_p90 = quantile(conf, 0.9);
  rep.conformality_max = conf.empty() ? 0.0 : *std::max_element(conf.begin(), conf.end());
  rep.h_error_median = quantile(herr, 0.5);
  rep.h_error_p90 = quantile(herr, 0.9);
  rep.h_error_max = herr.empty() ? 0.0 : *std::max_element(herr.begin(), herr.end());
  rep.h_mismatch = rep.h_error_max > h_tol;

  // vertex normals of the exported image
  const auto P = projected_vertices(mesh);
  mesh.normals.assign(nv, Vec3::Zero());
  for (const auto& f : mesh.faces) {
    const Vec3 n = (P[f[1]] - P[f[0]]).cross(P[f[2]] - P[f[0]]);
    for (int c = 0; c < 3; ++c) mesh.normals[f[c]] += n;
  }
  for (auto& n : mesh.normals)
    if (n.norm() > 0) n.normalize();
  return rep;
}

// ----------------------------------------------------------------- export

nlohmann::json diagnostics_json(const SurfaceMesh& mesh) {
  std::vector<double> conf, hm;
  std::vector<int> branch;
  for (std::size_t i = 0; i < mesh.diagnostics.size(); ++i) {
    conf.push_back(mesh.diagnostics[i].conformality);
    hm.push_back(mesh.diagnostics[i].mean_curvature);
    if (mesh.diagnostics[i].branch_point) branch.push_back(static_cast<int>(i));
  }
  std::vector<double> conf_in, h_in;
  for (std::size_t i = 0; i < mesh.diagnostics.size(); ++i)
    if (mesh.diagnostics[i].interior) {
      conf_in.push_back(conf[i]);
      h_in.push_back(hm[i]);
    }
  nlohmann::json charts = nlohmann::json::array();
  for (const auto& c : mesh.charts)
    charts.push_back({{"name", c.name}, {"rows", c.rows}, {"cols", c.cols}, {"first", c.first}, {"periodic", c.periodic}});
  nlohmann::json j;
  j["metadata"] = mesh.metadata;
  j["vertices"] = mesh.vertices.size();
  j["faces"] = mesh.faces.size();
  j["charts"] = charts;
  j["residual_quantiles"] = {
      {"conformality", {{"median", quantile(conf_in, 0.5)}, {"p90", quantile(conf_in, 0.9)}, {"max", quantile(conf_in, 1.0)}}},
      {"mean_curvature", {{"min", quantile(h_in, 0.0)}, {"median", quantile(h_in, 0.5)}, {"max", quantile(h_in, 1.0)}}}};
  j["branch_points"] = branch;
  // NaN is not valid JSON; boundary vertices carry null
  nlohmann::json hj = nlohmann::json::array();
  for (double h : hm) hj.push_back(std::isfinite(h) ? nlohmann::json(h) : nlohmann::json(nullptr));
  j["per_vertex"] = {{"conformality", conf}, {"mean_curvature", hj}};
  return j;
}

void export_mesh(const SurfaceMesh& mesh, MeshFormat format, const std::string& path) {
  const auto P = projected_vertices(mesh);
  const bool have_normals = mesh.normals.size() == P.size();
  auto fail = [&](const std::string& what) { throw Error(ErrorCode::IOError, what + ": " + path); };
  if (format == MeshFormat::OBJ) {
    std::ofstream out(path);
    if (!out) fail("cannot open");
    out.precision(17);
    out << "# " << to_string(mesh.space) << " surface, " << P.size() << " vertices\n";
    for (const auto& v : P) out << "v " << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
    if (have_normals)
      for (const auto& n : mesh.normals) out << "vn " << n[0] << ' ' << n[1] << ' ' << n[2] << '\n';
    for (const auto& f : mesh.faces) {
      out << 'f';
      for (int c = 0; c < 3; ++c) {
        out << ' ' << f[c] + 1;
        if (have_normals) out << "//" << f[c] + 1;
      }
      out << '\n';
    }
    if (!out) fail("write failed");
    std::ofstream side(path + ".json");
    if (!side) fail("cannot open sidecar for");
    side << diagnostics_json(mesh).dump(2) << '\n';
    if (!side) fail("sidecar write failed for");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open");
  out << "ply\nformat binary_little_endian 1.0\n";
  if (!mesh.metadata.is_null()) out << "comment metadata " << mesh.metadata.dump() << '\n';
  out << "element vertex " << P.size() << '\n'
      << "property float x\nproperty float y\nproperty float z\n"
      << "property float nx\nproperty float ny\nproperty float nz\n"
      << "property float conformality\nproperty float mean_curvature\nproperty uchar branch_point\n"
      << "element face " << mesh.faces.size() << '\n'
      << "property list uchar int vertex_indices\nend_header\n";
  auto put = [&](auto v) {
    static_assert(std::endian::native == std::endian::little);
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  };
  for (std::size_t i = 0; i < P.size(); ++i) {
    const Vec3 n = have_normals ? mesh.normals[i] : Vec3::Zero();
    for (int c = 0; c < 3; ++c) put(static_cast<float>(P[i][c]));
    for (int c = 0; c < 3; ++c) put(static_cast<float>(n[c]));
    const VertexDiagnostics d = i < mesh.diagnostics.size() ? mesh.diagnostics[i] : VertexDiagnostics{};
    put(static_cast<float>(d.conformality));
    put(static_cast<float>(d.mean_curvature));
    put(static_cast<std::uint8_t>(d.branch_point));
  }
  for (const auto& f : mesh.faces) {
    put(std::uint8_t{3});
    for (int c = 0; c < 3; ++c) put(static_cast<std::int32_t>(f[c]));
  }
  if (!out) fail("write failed");
}

}  // namespace dpw

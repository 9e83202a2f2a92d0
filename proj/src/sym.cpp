#include "dpw/sym.hpp"

#include <cmath>
#include <sstream>

namespace dpw {

SymTarget sym_target(const DelaunayParams& p) {
  SymTarget t;
  t.space = p.space;
  t.H = p.H;
  t.lambda0 = p.lambda0;
  t.lambda1 = p.space == Spaceform::S3 ? p.lambda1 : p.lambda0;
  return t;
}

SymTarget sym_target(const TrinoidParams& p) {
  SymTarget t;
  t.space = p.space;
  t.H = trinoid_mean_curvature(p);
  switch (p.space) {
    case Spaceform::R3:
    case Spaceform::H3:
      t.lambda0 = t.lambda1 = p.lambda0;
      break;
    case Spaceform::S3:
      // evaluate at lambda0^-1 with mu lambda = lambda0
      t.lambda0 = 1.0 / p.lambda0;
      t.lambda1 = p.lambda0;
      break;
  }
  return t;
}

Vec4 hermitian_to_minkowski(const Mat2& f) {
  return Vec4(0.5 * (f(0, 0) + f(1, 1)).real(), f(0, 1).real(), -f(0, 1).imag(), 0.5 * (f(0, 0) - f(1, 1)).real());
}

Vec4 su2_to_s3(const Mat2& f) { return Vec4(f(0, 0).real(), f(0, 0).imag(), f(0, 1).real(), f(0, 1).imag()); }

AmbientPoint sym_r3(const Loop& F, double H, cplx lambda0, bool generalized) {
  if (H == 0.0) throw Error(ErrorCode::ZeroParameter, "mean curvature must be nonzero");
  const Mat2 f0 = F.eval(lambda0);
  const Mat2 df = d_lambda(F).eval(lambda0);
  Mat2 m = df * f0.inverse();
  if (generalized) m -= m.trace() * identity2();
  const Mat2 f = -2.0 * kI * lambda0 / H * m;
  AmbientPoint p;
  p.space = Spaceform::R3;
  p.x.head<3>() = su2_coordinates(f);
  p.degenerate = max_abs(df) < 1e-12 * std::max(1.0, max_abs(f0));
  return p;
}

AmbientPoint sym_s3(const Loop& F, cplx lambda0, cplx lambda1, bool generalized) {
  if (std::abs(lambda0 - lambda1) < 1e-12) throw Error(ErrorCode::SymPointsCoincide, "S3 Sym points coincide");
  const Mat2 a = F.eval(lambda0), b = F.eval(lambda1);
  Mat2 f = b * a.inverse();
  if (generalized) f *= std::sqrt((a * b.inverse()).determinant());
  AmbientPoint p;
  p.space = Spaceform::S3;
  p.x = su2_to_s3(f);
  p.drift = p.x.squaredNorm() - 1.0;
  return p;
}

AmbientPoint sym_h3(const Loop& F, cplx lambda0, bool generalized) {
  const Mat2 a = F.eval(lambda0);
  Mat2 f = a * a.adjoint();
  if (generalized) f /= std::abs(a.determinant());
  AmbientPoint p;
  p.space = Spaceform::H3;
  p.x = hermitian_to_minkowski(f);
  p.drift = p.x[0] * p.x[0] - p.x.tail<3>().squaredNorm() - 1.0;
  return p;
}

AmbientPoint sym(const Loop& F, const SymTarget& t, bool generalized) {
  switch (t.space) {
    case Spaceform::R3: return sym_r3(F, t.H, t.lambda0, generalized);
    case Spaceform::S3: return sym_s3(F, t.lambda0, t.lambda1, generalized);
    case Spaceform::H3: return sym_h3(F, t.lambda0, generalized);
  }
  return {};
}

ClosingReport closing_check(const std::vector<Loop>& H, const SymTarget& t) {
  ClosingReport rep;
  for (const auto& h : H) {
    ClosingEnd e;
    const Mat2 h0 = h.eval(t.lambda0);
    const cplx tr = h0.trace();
    e.sign = tr.real() >= 0 ? 1 : -1;
    e.identity_residual = max_abs(h0 - double(e.sign) * identity2());
    e.eigen_residual = std::abs(tr / 2.0 - double(e.sign));
    double r = e.identity_residual;
    if (t.space == Spaceform::R3) {
      e.derivative = max_abs(d_lambda(h).eval(t.lambda0));
      // tr H = m + 1/m, so at m = +-1 the second derivative is +-2 (dm)^2
      std::vector<cplx> ts(h.size());
      for (int j = 0; j < h.size(); ++j) ts[j] = h[j].trace();
      const ScalarLoop tl(h.radius(), std::move(ts));
      e.eigen_derivative = std::sqrt(std::abs(d_lambda(d_lambda(tl)).eval(t.lambda0)) / 2.0);
      r = std::max(r, e.derivative);
    } else if (t.space == Spaceform::S3) {
      e.pair_residual = max_abs(h0 - h.eval(t.lambda1));
      r = std::max(r, e.pair_residual);
    }
    rep.max_residual = std::max(rep.max_residual, r);
    rep.ends.push_back(e);
  }
  return rep;
}

FrameStructureReport verify_frame_structure(const std::function<Loop(cplx)>& frame, cplx z, double h, double tol) {
  // fourth-order central differences; second order leaves an O(h^2) Maurer-Cartan defect near 1e-5
  Loop F[5][5];
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) F[i][j] = frame(z + cplx((i - 2) * h, (j - 2) * h));
  const int n = F[2][2].size();
  auto diff = [&](const Mat2& m2, const Mat2& m1, const Mat2& p1, const Mat2& p2) {
    return Mat2((m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h));
  };
  // F[i][j] sits at z + h((i - 2) + (j - 2) i); alpha_x on row j, alpha_y on column i
  auto ax = [&](int j, int s) {
    return Mat2(F[2][j][s].inverse() * diff(F[0][j][s], F[1][j][s], F[3][j][s], F[4][j][s]));
  };
  auto ay = [&](int i, int s) {
    return Mat2(F[i][2][s].inverse() * diff(F[i][0][s], F[i][1][s], F[i][3][s], F[i][4][s]));
  };
  std::vector<Mat2> dz(n), dzb(n);
  FrameStructureReport rep;
  for (int s = 0; s < n; ++s) {
    const Mat2 x = ax(2, s), y = ay(2, s);
    dz[s] = 0.5 * (x - kI * y);
    dzb[s] = 0.5 * (x + kI * y);
    const Mat2 mc = diff(ay(0, s), ay(1, s), ay(3, s), ay(4, s)) - diff(ax(0, s), ax(1, s), ax(3, s), ax(4, s)) +
                    (x * y - y * x);
    rep.maurer_cartan = std::max(rep.maurer_cartan, max_abs(mc));
  }
  const Loop A1(F[2][2].radius(), std::move(dz)), A2(F[2][2].radius(), std::move(dzb));
  for (int k = -n / 2; k < n / 2; ++k) {
    const Mat2 c1 = A1.laurent_coefficient(k), c2 = A2.laurent_coefficient(k);
    rep.alpha_scale = std::max({rep.alpha_scale, max_abs(c1), max_abs(c2)});
    if (std::abs(k) >= 2) rep.higher_powers = std::max({rep.higher_powers, max_abs(c1), max_abs(c2)});
  }
  const Mat2 m1 = A1.laurent_coefficient(-1), p1 = A1.laurent_coefficient(1);
  const Mat2 m2 = A2.laurent_coefficient(-1), p2 = A2.laurent_coefficient(1);
  // dz part: lambda^-1 only in eps_+, no lambda^1; dzbar part: lambda^1 only in eps_-, no lambda^-1
  rep.slot_violation = std::max({std::abs(m1(0, 0)), std::abs(m1(1, 0)), std::abs(m1(1, 1)), max_abs(p1), max_abs(m2),
                                 std::abs(p2(0, 0)), std::abs(p2(0, 1)), std::abs(p2(1, 1))});
  const double scale = std::max(rep.alpha_scale, 1e-300);
  rep.structure_residual = std::max(rep.higher_powers, rep.slot_violation) / scale;
  rep.flagged = rep.alpha_scale > 0 && (rep.structure_residual > tol || rep.maurer_cartan / scale > tol);
  return rep;
}

}  // namespace dpw

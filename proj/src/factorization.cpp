#include "dpw/factorization.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dpw {

namespace {

bool on_unit_circle(double r) { return std::abs(r - 1.0) < 1e-15; }

ScalarLoop entry(const Loop& a, int i, int j) {
  std::vector<cplx> s(a.size());
  for (int k = 0; k < a.size(); ++k) s[k] = a[k](i, j);
  return ScalarLoop(a.radius(), std::move(s));
}

double hermitian_defect(const Loop& X) {
  double d = 0.0;
  for (int j = 0; j < X.size(); ++j) d = std::max(d, max_abs(X[j] - X[j].adjoint()));
  return d;
}

Loop hermitize(const Loop& X) {
  std::vector<Mat2> s(X.size());
  for (int j = 0; j < X.size(); ++j) s[j] = 0.5 * (X[j] + X[j].adjoint());
  return Loop(X.radius(), std::move(s));
}

double gram_defect(const Loop& W, const Loop& X) {
  double r = 0.0;
  for (int j = 0; j < W.size(); ++j) r = std::max(r, max_abs(W[j].adjoint() * X[j] * W[j] - Mat2::Identity()));
  return r;
}

}  // namespace

Mat2 cholesky_upper(const Mat2& E) {
  const double e11 = E(0, 0).real();
  if (!(e11 > 0.0)) throw Error(ErrorCode::NotSemidefinite, "Gram matrix not positive definite");
  const double b11 = std::sqrt(e11);
  const cplx b12 = E(0, 1) / b11;
  const double rest = E(1, 1).real() - std::norm(b12);
  if (!(rest > 0.0)) throw Error(ErrorCode::NotSemidefinite, "Gram matrix not positive definite");
  return mat2(b11, b12, 0.0, std::sqrt(rest));
}

namespace {

SpectralFactor spectral_factor_fixed(const Loop& X, double tol) {
  const int n = X.size();
  auto coeff = [&](int d) { return X.scaled_coefficient(d); };

  // Block Levinson-Whittle recursion on T_(kl) = X_(k-l).  A is the forward
  // predictor (A_0 = Id), Bk the backward one (last block Id).
  std::vector<Mat2> A{identity2()}, Bk{identity2()};
  Mat2 Ef = coeff(0), Eb = coeff(0);
  const std::vector<int> checkpoints{n / 8, n / 4, n / 2};
  SpectralFactor best{Loop::constant(1.0, n, identity2()), Loop::constant(1.0, n, identity2()),
                      std::numeric_limits<double>::infinity(), 0};

  std::size_t next_check = 0;
  for (int m = 1; m <= n / 2; ++m) {
    if (m == checkpoints[next_check]) {
      const Mat2 B0 = cholesky_upper(0.5 * (Ef + Ef.adjoint()));
      const Mat2 B0inv = B0.inverse();
      std::vector<Mat2> wc(static_cast<std::size_t>(n), Mat2::Zero());
      for (int l = 0; l < m; ++l) wc[l + n / 2] = A[l] * B0inv;
      Loop W = Loop::from_scaled_coefficients(1.0, std::move(wc));
      const double res = gram_defect(W, X);
      if (res < best.residual) best = SpectralFactor{W, inv(W), res, m};
      ++next_check;
      if (res < 0.1 * tol || next_check == checkpoints.size()) break;
    }
    // grow from m to m + 1 blocks
    Mat2 df = Mat2::Zero(), db = Mat2::Zero();
    for (int l = 0; l < m; ++l) {
      df += coeff(m - l) * A[l];
      db += coeff(-1 - l) * Bk[l];
    }
    const Mat2 alpha = -Eb.inverse() * df;
    const Mat2 beta = -Ef.inverse() * db;
    std::vector<Mat2> An(m + 1, Mat2::Zero()), Bn(m + 1, Mat2::Zero());
    for (int l = 0; l <= m; ++l) {
      if (l < m) An[l] += A[l];
      if (l >= 1) An[l] += Bk[l - 1] * alpha;
      if (l >= 1) Bn[l] += Bk[l - 1];
      if (l < m) Bn[l] += A[l] * beta;
    }
    Ef = Ef + db * alpha;
    Eb = Eb + df * beta;
    A = std::move(An);
    Bk = std::move(Bn);
  }
  return best;
}

Loop zero_pad(const Loop& X, int n) {
  std::vector<Mat2> c(static_cast<std::size_t>(n), Mat2::Zero());
  for (int k = -X.size() / 2; k < X.size() / 2; ++k) c[k + n / 2] = X.scaled_coefficient(k);
  return Loop::from_scaled_coefficients(X.radius(), std::move(c));
}

Loop every_other(const Loop& L, int step) {
  std::vector<Mat2> s(static_cast<std::size_t>(L.size() / step));
  for (std::size_t j = 0; j < s.size(); ++j) s[j] = L[static_cast<int>(j) * step];
  return Loop(L.radius(), std::move(s));
}

}  // namespace

SpectralFactor spectral_factor(const Loop& X_in, double tol) {
  if (!on_unit_circle(X_in.radius())) throw Error(ErrorCode::InvalidArgument, "spectral factor needs the unit circle");
  const Loop X = hermitize(X_in);
  SpectralFactor sf = spectral_factor_fixed(X, tol);
  // A nearly singular symbol has a slowly decaying inverse factor; a
  // band-limited symbol can be resampled on a finer grid without loss.
  int n = X.size();
  while (!(sf.residual <= 0.1 * tol) && 2 * n <= kMaxSamples && X.tail_ratio() < 1e-7) {
    n *= 2;
    SpectralFactor fine = spectral_factor_fixed(zero_pad(X, n), tol);
    if (!(fine.residual < sf.residual)) break;
    const int step = n / X.size();
    sf = SpectralFactor{every_other(fine.W, step), every_other(fine.B, step), fine.residual, fine.order};
  }
  return sf;
}

IwasawaPair iwasawa(const Loop& phi, double tol) {
  for (int j = 0; j < phi.size(); ++j) {
    const double s = std::max(phi[j].squaredNorm(), 1e-300);
    if (std::abs(phi[j].determinant()) <= 1e-14 * s) {
      std::ostringstream os;
      os << "det Phi vanishes at lambda_" << j << " = " << phi.node(j);
      throw Error(ErrorCode::SingularSample, os.str());
    }
  }
  const bool unit = on_unit_circle(phi.radius());
  const Loop phi1 = unit ? phi : phi.transfer(1.0, tol);
  const Loop X = mul(adjoint_samples(phi1), phi1);
  const SpectralFactor sf = spectral_factor(X, tol);
  if (!(sf.residual <= tol)) {
    std::ostringstream os;
    os << "finite-section residual " << sf.residual << " at order " << sf.order << " (N = " << phi.size() << ")";
    throw Error(ErrorCode::FactorizationDiverged, os.str());
  }
  IwasawaPair out{mul(phi1, sf.W), sf.B, {}};
  out.report.unitarity = sf.residual;
  out.report.negative_mass = sf.B.negative_mass();
  out.report.section_order = sf.order;
  if (!unit) {
    out.B = sf.B.transfer(phi.radius(), tol);
    out.F = mul(phi, inv(out.B));
  }
  out.report.reconstruction = max_distance(phi, mul(out.F, out.B));
  return out;
}

ScalarBirkhoff birkhoff_scalar(const ScalarLoop& f_in, double tol) {
  if (!on_unit_circle(f_in.radius())) throw Error(ErrorCode::InvalidArgument, "scalar Birkhoff needs the unit circle");
  const int n = f_in.size();
  double mx = 0.0, mn = 0.0;
  for (int j = 0; j < n; ++j) {
    mx = std::max(mx, f_in[j].real());
    mn = std::min(mn, f_in[j].real());
  }
  if (!(mx > tol)) throw Error(ErrorCode::IdenticallyZero, "f vanishes on the circle");
  if (mn < -tol * std::max(1.0, mx)) {
    std::ostringstream os;
    os << "min f = " << mn;
    throw Error(ErrorCode::NegativeValue, os.str());
  }
  std::vector<cplx> fs(n);
  for (int j = 0; j < n; ++j) fs[j] = std::max(f_in[j].real(), 0.0);
  const ScalarLoop f(1.0, fs);

  ScalarBirkhoff out{ScalarLoop::constant(1.0, n, 1.0), find_circle_zeros(f), 0.0};
  ScalarLoop g = f;
  for (const auto& z : out.zeros)
    for (int i = 0; i < z.order / 2; ++i) g = divide_by_abs2(g, z.point);

  std::vector<cplx> logg(n);
  for (int j = 0; j < n; ++j) {
    const double v = g[j].real();
    if (!(v > 0.0)) {
      std::ostringstream os;
      os << "deflated remainder not positive at lambda_" << j << " (" << v << ")";
      throw Error(ErrorCode::ZeroDetectionFailure, os.str());
    }
    logg[j] = std::log(v);
  }
  const ScalarLoop L(1.0, logg);
  std::vector<cplx> plus(static_cast<std::size_t>(n), 0.0);
  for (int k = 1; k < n / 2; ++k) plus[k + n / 2] = L.scaled_coefficient(k);
  const ScalarLoop lp = ScalarLoop::from_scaled_coefficients(1.0, std::move(plus));
  const double r0 = std::exp(L.scaled_coefficient(0).real());

  cplx h0 = std::sqrt(r0);
  for (const auto& z : out.zeros) h0 *= std::pow(-z.point, z.order / 2);
  const cplx phase = std::conj(h0) / std::abs(h0);

  std::vector<cplx> h(n);
  for (int j = 0; j < n; ++j) {
    cplx q = 1.0;
    const cplx l = f.node(j);
    for (const auto& z : out.zeros) q *= std::pow(l - z.point, z.order / 2);
    h[j] = phase * std::sqrt(r0) * std::exp(lp[j]) * q;
  }
  out.h = ScalarLoop(1.0, std::move(h));
  double res = 0.0;
  for (int j = 0; j < n; ++j) res = std::max(res, std::abs(std::norm(out.h[j]) - f[j].real()));
  out.residual = res / std::max(1.0, mx);
  return out;
}

MatrixBirkhoff birkhoff_matrix_semidefinite(const Loop& X_in, double tol) {
  if (!on_unit_circle(X_in.radius()))
    throw Error(ErrorCode::InvalidArgument, "matrix Birkhoff needs the unit circle");
  const int n = X_in.size();
  const double scale = std::max(1.0, X_in.max_norm());
  if (hermitian_defect(X_in) > tol * scale) {
    std::ostringstream os;
    os << "||X - X^H|| = " << hermitian_defect(X_in);
    throw Error(ErrorCode::NotHermitian, os.str());
  }
  const Loop X = hermitize(X_in);
  double max_det = 0.0;
  for (int j = 0; j < n; ++j) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(X[j], Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < -tol * scale) {
      std::ostringstream os;
      os << "eigenvalue " << es.eigenvalues()(0) << " at lambda_" << j;
      throw Error(ErrorCode::NotSemidefinite, os.str());
    }
    max_det = std::max(max_det, X[j].determinant().real());
  }
  if (!(max_det > tol * scale * scale)) throw Error(ErrorCode::DegenerateDeterminant, "det X vanishes identically");

  std::vector<cplx> x11s(n), dets(n);
  for (int j = 0; j < n; ++j) {
    x11s[j] = std::max(X[j](0, 0).real(), 0.0);
    dets[j] = std::max(X[j].determinant().real(), 0.0);
  }
  const ScalarLoop x11(1.0, x11s);
  const ScalarBirkhoff e = birkhoff_scalar(ScalarLoop(1.0, dets), tol);

  // Y = [[x11, x12], [0, e]] has Y* Y = x11 X on the circle.
  std::vector<Mat2> zs(n);
  for (int j = 0; j < n; ++j) {
    const Mat2 Y = mat2(x11[j], X[j](0, 1), 0.0, e.h[j]);
    zs[j] = Y.adjoint() * Y;
  }
  Loop Z(1.0, zs);

  // Boundary zeros of det Z = x11^2 det X with their orders.
  struct Site {
    cplx a;
    int order;
  };
  std::vector<Site> sites;
  auto add_site = [&](cplx a, int order) {
    for (auto& s : sites)
      if (std::abs(s.a - a) < 1e-8) {
        s.order += order;
        return;
      }
    sites.push_back({a, order});
  };
  for (const auto& z : e.zeros) add_site(z.point, z.order);
  for (const auto& z : find_circle_zeros(x11)) add_site(z.point, 2 * z.order);

  // Peel off one elementary factor E = (Id - P) + (lambda - a) P (or
  // (lambda - a) Id) at a time: Z = E* Z' E.
  struct Step {
    cplx a;
    bool full;
    Vec2 u;
  };
  std::vector<Step> steps;
  for (const auto& s : sites) {
    int remaining = s.order;
    while (remaining > 0) {
      Mat2 Za = Z.eval(s.a);
      Za = 0.5 * (Za + Za.adjoint());
      Eigen::SelfAdjointEigenSolver<Mat2> es(Za);
      const double zscale = Z.max_norm();
      if (remaining >= 4 && std::abs(es.eigenvalues()(1)) <= 1e-6 * zscale) {
        Z = divide_by_abs2(Z, s.a);
        steps.push_back({s.a, true, Vec2::Zero()});
        remaining -= 4;
        continue;
      }
      const Vec2 u = es.eigenvectors().col(0);
      const Vec2 v(-std::conj(u(1)), std::conj(u(0)));
      Mat2 U;
      U.col(0) = v;
      U.col(1) = u;
      std::vector<Mat2> rot(n);
      for (int j = 0; j < n; ++j) rot[j] = U.adjoint() * Z[j] * U;
      const Loop R(1.0, rot);
      const ScalarLoop z12 = divide_by_linear(entry(R, 0, 1), s.a);
      const ScalarLoop z21d = shift_up(divide_by_linear(entry(R, 1, 0), s.a));
      const ScalarLoop z22 = divide_by_abs2(entry(R, 1, 1), s.a);
      std::vector<Mat2> back(n);
      for (int j = 0; j < n; ++j) back[j] = U * mat2(R[j](0, 0), z12[j], -s.a * z21d[j], z22[j]) * U.adjoint();
      Z = hermitize(Loop(1.0, back));
      steps.push_back({s.a, false, u});
      remaining -= 2;
    }
  }

  const SpectralFactor sf = spectral_factor(Z, tol);
  Loop C = sf.B;
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    std::vector<Mat2> es(n);
    for (int j = 0; j < n; ++j) {
      const cplx l = C.node(j);
      if (it->full) {
        es[j] = (l - it->a) * identity2();
      } else {
        const Mat2 P = it->u * it->u.adjoint();
        es[j] = (identity2() - P) + (l - it->a) * P;
      }
    }
    C = mul(C, Loop(1.0, es));
  }
  const Mat2 C0 = C.scaled_coefficient(0);
  const Mat2 R0 = cholesky_upper(C0.adjoint() * C0);
  const Mat2 Q = C0 * R0.inverse();
  C = mul(Loop::constant(1.0, n, Q.adjoint()), C);

  double res = 0.0, fx = 0.0;
  for (int j = 0; j < n; ++j) {
    const Mat2 lhs = x11[j].real() * X[j];
    fx = std::max(fx, max_abs(lhs));
    res = std::max(res, max_abs(lhs - C[j].adjoint() * C[j]));
  }
  return MatrixBirkhoff{C, x11, res / std::max(1.0, fx)};
}

}  // namespace dpw

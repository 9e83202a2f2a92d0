#include <boost/math/interpolators/quintic_hermite.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>
#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "dpw/potentials.hpp"

namespace dpw {

ConformalFactor delaunay_conformal_factor(double a, double b, double x_max, int steps) {
  if (a == 0.0 || b == 0.0) throw Error(ErrorCode::ZeroParameter, "conformal factor needs a, b != 0");
  if (!(x_max >= 0.0) || steps < 2) throw Error(ErrorCode::InvalidArgument, "conformal factor range");
  namespace ode = boost::numeric::odeint;
  using State = std::array<double, 2>;
  const double k = 4.0 * (a * a + b * b);
  // v'' = -2 v^3 + 4 (a^2 + b^2) v is the derivative of the first integral;
  // integrating it avoids the turning points of v'^2 = ...
  auto rhs = [k](const State& s, State& d, double) {
    d[0] = s[1];
    d[1] = -2.0 * s[0] * s[0] * s[0] + k * s[0];
  };
  ConformalFactor out;
  out.x.reserve(steps + 1);
  const double dx = x_max / steps;
  State s{2.0 * b, 0.0};
  auto stepper = ode::make_dense_output(1e-14, 1e-14, ode::runge_kutta_dopri5<State>());
  auto record = [&](const State& st, double t) {
    out.x.push_back(t);
    out.v.push_back(st[0]);
    out.dv.push_back(st[1]);
    const double v2 = st[0] * st[0];
    const double fi = st[1] * st[1] + (v2 - 4.0 * a * a) * (v2 - 4.0 * b * b);
    out.max_first_integral = std::max(out.max_first_integral, std::abs(fi));
  };
  if (x_max == 0.0) {
    record(s, 0.0);
    return out;
  }
  ode::integrate_n_steps(stepper, rhs, s, 0.0, dx, steps, record);
  return out;
}

namespace {

struct FactorTable {
  ConformalFactor cf;
  double v2min = 0.0, v2max = 0.0;
  std::optional<boost::math::interpolators::cardinal_quintic_hermite<std::vector<double>>> spline;
};

FactorTable make_table(double a, double b, double xa) {
  FactorTable t;
  const int steps = std::max(64, static_cast<int>(std::ceil(xa * 400.0)));
  t.cf = delaunay_conformal_factor(a, b, xa, steps);
  t.v2min = t.v2max = t.cf.v[0] * t.cf.v[0];
  std::vector<double> v = t.cf.v, dv = t.cf.dv, d2v(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    d2v[i] = -2.0 * v[i] * v[i] * v[i] + 4.0 * (a * a + b * b) * v[i];
    t.v2min = std::min(t.v2min, v[i] * v[i]);
    t.v2max = std::max(t.v2max, v[i] * v[i]);
  }
  if (xa > 0.0)
    t.spline.emplace(std::move(v), std::move(dv), std::move(d2v), 0.0, xa / steps);
  return t;
}

// Distance from lambda to the segment {-v^2 / (4ab)} swept on [0, |x|].
double distance_to_cut(const FactorTable& t, double ab, cplx l) {
  const double e1 = -t.v2min / (4.0 * ab), e2 = -t.v2max / (4.0 * ab);
  const double lo = std::min(e1, e2), hi = std::max(e1, e2);
  const double re = std::clamp(l.real(), lo, hi);
  return std::abs(l - cplx(re, 0.0));
}

}  // namespace

IwasawaPair delaunay_explicit_frame(const DelaunayParams& p, double x, double y, double radius, int samples) {
  if (p.a == 0.0 || p.b == 0.0) throw Error(ErrorCode::ZeroParameter, "explicit frame needs a, b != 0");
  if (p.c != 0.0) throw Error(ErrorCode::InvalidArgument, "explicit frame needs c = 0");
  const double a = p.a, b = p.b, ab = a * b;
  const double xa = std::abs(x), sx = x < 0 ? -1.0 : 1.0;
  const FactorTable t = make_table(a, b, xa);
  const double v = t.cf.v.back(), dv = sx * t.cf.dv.back();
  const cplx z(x, y);

  std::vector<Mat2> bs(samples), phis(samples);
  std::vector<int> singular;
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  for (int j = 0; j < samples; ++j) {
    const cplx l = std::polar(radius, 2.0 * kPi * j / samples);
    const Mat2 A = delaunay_A(p, l);
    phis[j] = expm2(z * A);
    if (xa > 0.0 && distance_to_cut(t, ab, l) < 1e-9) {
      singular.push_back(j);
      bs[j] = identity2();
      continue;
    }
    cplx f = 0.0;
    if (xa > 0.0) {
      auto integrand = [&](double s) {
        const double vs = (*t.spline)(s);
        return 8.0 * ab * l / (4.0 * ab * l + vs * vs);
      };
      auto re = [&](double s) { return integrand(s).real(); };
      auto im = [&](double s) { return integrand(s).imag(); };
      f = sx * cplx(GK::integrate(re, 0.0, xa, 15, 1e-13), GK::integrate(im, 0.0, xa, 15, 1e-13));
    }
    const Mat2 B0 = mat2(2.0 * v * (b + a * l), -dv, 0.0, 4.0 * ab * l + v * v);
    const Mat2 B1 = B0 / std::sqrt(B0.determinant());
    bs[j] = B1 * expm2(f * A);
  }
  // sign by continuity from sample to sample
  int prev = -1;
  for (int j = 0; j < samples; ++j) {
    if (std::find(singular.begin(), singular.end(), j) != singular.end()) continue;
    if (prev >= 0 && max_abs(bs[j] + bs[prev]) < max_abs(bs[j] - bs[prev])) bs[j] = -bs[j];
    prev = j;
  }
  Loop B(radius, std::move(bs));
  if (!singular.empty()) B = fill_samples(B, singular);
  if (B.laurent_coefficient(0)(0, 0).real() < 0.0) B = scale(-1.0, B);
  std::vector<Mat2> fs(samples);
  for (int j = 0; j < samples; ++j) fs[j] = phis[j] * B[j].inverse();
  IwasawaPair out{Loop(radius, std::move(fs)), std::move(B), {}};
  out.report.negative_mass = out.B.negative_mass();
  out.report.unitarity = unitarity_residual(out.F);
  double rec = 0.0;
  for (int j = 0; j < samples; ++j) rec = std::max(rec, max_abs(out.F[j] * out.B[j] - phis[j]));
  out.report.reconstruction = rec;
  return out;
}

}  // namespace dpw

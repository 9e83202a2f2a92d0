#include "dpw/frame_ode.hpp"

#include <boost/numeric/odeint.hpp>
#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

namespace dpw {

cplx PathSegment::point(double s) const {
  if (kind == Kind::Line) return from + s * (to - from);
  return center + (from - center) * std::polar(1.0, s * sweep);
}

cplx PathSegment::tangent(double s) const {
  if (kind == Kind::Line) return to - from;
  return kI * sweep * (from - center) * std::polar(1.0, s * sweep);
}

double PathSegment::length() const {
  if (kind == Kind::Line) return std::abs(to - from);
  return std::abs(sweep) * std::abs(from - center);
}

cplx PathSpec::end() const {
  if (segments.empty()) return start;
  return segments.back().point(1.0);
}

PathSpec& PathSpec::line_to(cplx z) {
  PathSegment s;
  s.kind = PathSegment::Kind::Line;
  s.from = end();
  s.to = z;
  segments.push_back(s);
  return *this;
}

PathSpec& PathSpec::arc(cplx center, double sweep) {
  PathSegment s;
  s.kind = PathSegment::Kind::Arc;
  s.from = end();
  s.center = center;
  s.sweep = sweep;
  segments.push_back(s);
  return *this;
}

double PathSpec::clearance(const std::vector<cplx>& points) const {
  double d = std::numeric_limits<double>::infinity();
  for (const cplx q : points) {
    if (segments.empty()) d = std::min(d, std::abs(start - q));
    for (const auto& s : segments) {
      if (s.kind == PathSegment::Kind::Line) {
        const cplx e = s.to - s.from;
        const double L2 = std::norm(e);
        const double t = L2 > 0 ? std::clamp(((q - s.from) * std::conj(e)).real() / L2, 0.0, 1.0) : 0.0;
        d = std::min(d, std::abs(s.from + t * e - q));
      } else {
        const int n = std::max(64, static_cast<int>(std::ceil(std::abs(s.sweep) * 512)));
        for (int i = 0; i <= n; ++i) d = std::min(d, std::abs(s.point(double(i) / n) - q));
      }
    }
  }
  return d;
}

PathSpec loop_around(cplx z0, cplx center, double radius) {
  const cplx off = z0 - center;
  if (std::abs(off) == 0.0) throw Error(ErrorCode::InvalidArgument, "base point at the loop center");
  const cplx p = center + radius * off / std::abs(off);
  PathSpec path;
  path.start = z0;
  std::ostringstream os;
  os << "loop about " << center << " of radius " << radius << " from " << z0;
  path.description = os.str();
  if (std::abs(p - z0) > 0.0) path.line_to(p);
  path.arc(center, 2.0 * kPi);
  if (std::abs(p - z0) > 0.0) path.line_to(z0);
  return path;
}

namespace {

using State = std::vector<cplx>;

struct Attempt {
  State x;
  long steps = 0, rejected = 0;
};

Attempt integrate_once(const Potential& xi, const PathSpec& path, const std::vector<cplx>& lambdas, State x,
                       double rel_tol, const IntegrationOptions& opt) {
  namespace ode = boost::numeric::odeint;
  const int n = static_cast<int>(lambdas.size());
  Attempt out;
  for (const auto& seg : path.segments) {
    auto rhs = [&](const State& s, State& d, double t) {
      const cplx z = seg.point(t), dz = seg.tangent(t);
      for (int j = 0; j < n; ++j) {
        const Mat2 a = xi(z, lambdas[j]) * dz;
        const cplx* p = &s[4 * j];
        cplx* q = &d[4 * j];
        q[0] = p[0] * a(0, 0) + p[1] * a(1, 0);
        q[1] = p[0] * a(0, 1) + p[1] * a(1, 1);
        q[2] = p[2] * a(0, 0) + p[3] * a(1, 0);
        q[3] = p[2] * a(0, 1) + p[3] * a(1, 1);
      }
    };
    auto stepper = ode::make_controlled(opt.abs_tol, rel_tol, ode::runge_kutta_dopri5<State>());
    double t = 0.0, dt = 1.0 / 64.0;
    while (t < 1.0) {
      dt = std::min(dt, 1.0 - t);
      if (dt < opt.min_step) {
        std::ostringstream os;
        os << "step " << dt << " at z = " << seg.point(t) << " on " << path.description;
        throw Error(ErrorCode::StepSizeUnderflow, os.str());
      }
      if (stepper.try_step(rhs, x, t, dt) == ode::success) {
        ++out.steps;
        if (1.0 - t < 1e-14) t = 1.0;
      } else {
        ++out.rejected;
      }
      if (out.steps + out.rejected > opt.max_steps)
        throw Error(ErrorCode::ToleranceNotMet, "step budget exhausted on " + path.description);
    }
  }
  out.x = std::move(x);
  return out;
}

}  // namespace

IntegrationResult integrate_frame(const Potential& xi, const PathSpec& path, const Loop& phi0,
                                  const IntegrationOptions& opt) {
  const double clear = path.clearance(xi.punctures);
  if (clear < path.delta) {
    std::ostringstream os;
    os << path.description << " passes within " << clear << " of a puncture (delta " << path.delta << ")";
    throw Error(ErrorCode::PathTooClose, os.str());
  }
  const int n = phi0.size();
  std::vector<cplx> lambdas(n);
  State x0(4 * static_cast<std::size_t>(n));
  std::vector<cplx> det0(n);
  for (int j = 0; j < n; ++j) {
    lambdas[j] = phi0.node(j);
    const Mat2& m = phi0[j];
    x0[4 * j] = m(0, 0);
    x0[4 * j + 1] = m(0, 1);
    x0[4 * j + 2] = m(1, 0);
    x0[4 * j + 3] = m(1, 1);
    det0[j] = m.determinant();
    if (std::abs(det0[j]) < 1e-14 * std::max(1.0, max_abs(m) * max_abs(m)))
      throw Error(ErrorCode::SingularSample, "initial frame is singular");
  }
  double rel = opt.rel_tol;
  IntegrationResult res;
  for (int attempt = 0; attempt < 3; ++attempt) {
    Attempt a = integrate_once(xi, path, lambdas, x0, rel, opt);
    std::vector<Mat2> m(n);
    double drift = 0.0;
    for (int j = 0; j < n; ++j) {
      m[j] = mat2(a.x[4 * j], a.x[4 * j + 1], a.x[4 * j + 2], a.x[4 * j + 3]);
      drift = std::max(drift, std::abs(m[j].determinant() - det0[j]) / std::max(1.0, std::abs(det0[j])));
    }
    res = IntegrationResult{Loop(phi0.radius(), std::move(m)), drift, res.steps + a.steps, res.rejected + a.rejected};
    if (drift < opt.det_drift_tol) return res;
    rel = std::max(rel / 10.0, 1e-14);
  }
  std::ostringstream os;
  os << "det drift " << res.det_drift << " on " << path.description;
  throw Error(ErrorCode::ToleranceNotMet, os.str());
}

Loop monodromy_along(const Potential& xi, const PathSpec& closed, const Loop& phi0, const IntegrationOptions& opt,
                     double* det_drift) {
  if (std::abs(closed.end() - closed.start) > 1e-12) throw Error(ErrorCode::InvalidArgument, "path is not closed");
  const auto r = integrate_frame(xi, closed, phi0, opt);
  if (det_drift) *det_drift = r.det_drift;
  return mul(r.phi, inv(phi0));
}

MonodromyRep trinoid_monodromy(const Potential& xi, const Loop& phi0, cplx z0, double radius,
                               const IntegrationOptions& opt, int threads) {
  const PathSpec g0 = loop_around(z0, 0.0, radius), g1 = loop_around(z0, 1.0, radius);
  double d0 = 0.0, d1 = 0.0;
  MonodromyRep rep;
  if (threads > 1) {
    auto f0 = std::async(std::launch::async, [&] { return monodromy_along(xi, g0, phi0, opt, &d0); });
    rep.H1 = monodromy_along(xi, g1, phi0, opt, &d1);
    rep.H0 = f0.get();
  } else {
    rep.H0 = monodromy_along(xi, g0, phi0, opt, &d0);
    rep.H1 = monodromy_along(xi, g1, phi0, opt, &d1);
  }
  rep.Hinf = inv(mul(rep.H0, rep.H1));
  rep.base = z0;
  rep.phi0 = phi0;
  rep.det_drift = std::max(d0, d1);
  const Loop prod = mul(rep.H0, mul(rep.H1, rep.Hinf));
  rep.product_residual = max_distance(prod, Loop::constant(phi0.radius(), phi0.size(), identity2()));
  return rep;
}

Loop delaunay_monodromy(const DelaunayParams& p, double lambda_radius, int samples, const IntegrationOptions& opt) {
  PathSpec path;
  path.start = 1.0;
  path.description = "unit circle about 0";
  path.arc(0.0, 2.0 * kPi);
  return monodromy_along(delaunay_potential(p), path, Loop::constant(lambda_radius, samples, identity2()), opt);
}

double trace_identity_check(const MonodromyRep& rep, const TrinoidParams& p) {
  const Loop* hs[3] = {&rep.H0, &rep.H1, &rep.Hinf};
  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    const Loop& H = *hs[k];
    for (int j = 0; j < H.size(); ++j) {
      const cplx l = H.node(j);
      // cos(2 pi rho) = -cos(pi sqrt(1 + v h / 4)), even in the root
      const cplx want = -std::cos(kPi * std::sqrt(1.0 + trinoid_v(p, k) * trinoid_h(p, l) / 4.0));
      worst = std::max(worst, std::abs(H[j].trace() / 2.0 - want));
    }
  }
  return worst;
}

}  // namespace dpw

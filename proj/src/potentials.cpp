#include "dpw/potentials.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace dpw {

std::string_view to_string(Spaceform s) {
  switch (s) {
    case Spaceform::R3: return "R3";
    case Spaceform::S3: return "S3";
    case Spaceform::H3: return "H3";
  }
  return "?";
}

Spaceform spaceform_from_string(std::string_view s) {
  if (s == "R3") return Spaceform::R3;
  if (s == "S3") return Spaceform::S3;
  if (s == "H3") return Spaceform::H3;
  throw Error(ErrorCode::InvalidArgument, "unknown space form '" + std::string(s) + "' (expected R3, S3 or H3)");
}

Mat2 Potential::operator()(cplx z, cplx lambda) const {
  for (const cplx p : punctures)
    if (std::abs(z - p) < 1e-14) {
      std::ostringstream os;
      os << name << " evaluated at puncture z = " << p;
      throw Error(ErrorCode::EvaluationAtPuncture, os.str());
    }
  if (!std::isfinite(std::abs(z))) throw Error(ErrorCode::EvaluationAtPuncture, name + " evaluated at infinity");
  return coefficient(z, lambda);
}

// ---------------------------------------------------------------- Delaunay

Mat2 delaunay_A(const DelaunayParams& p, cplx lambda) {
  if (lambda == 0.0) throw Error(ErrorCode::ZeroLambda, "Delaunay A at lambda = 0");
  return kI * p.c * BasisConstants::eps() + (p.a / lambda + p.b) * BasisConstants::eps_plus() -
         (p.a * lambda + p.b) * BasisConstants::eps_minus();
}

Loop delaunay_A_loop(const DelaunayParams& p, double radius, int n) {
  return Loop::from_function(radius, n, [&](cplx l) { return delaunay_A(p, l); });
}

Potential delaunay_potential(const DelaunayParams& p) {
  if (p.a == 0.0 || p.b == 0.0) throw Error(ErrorCode::ZeroParameter, "Delaunay potential needs a, b != 0");
  return Potential{[p](cplx z, cplx l) -> Mat2 { return delaunay_A(p, l) / z; }, {0.0}, "Delaunay potential"};
}

cplx delaunay_mu_squared(const DelaunayParams& p, cplx lambda) {
  return p.c * p.c + p.a * p.a + p.b * p.b + p.a * p.b * (lambda + 1.0 / lambda);
}

cplx delaunay_mu(const DelaunayParams& p, cplx lambda) {
  if (lambda == 0.0) throw Error(ErrorCode::ZeroLambda, "mu at lambda = 0");
  double theta = std::arg(lambda);
  if (theta < 0) theta += 2.0 * kPi;
  const double rad = std::abs(lambda);
  cplx mu = std::sqrt(delaunay_mu_squared(p, 1.0));
  auto follow = [&](cplx l) {
    const cplx s = std::sqrt(delaunay_mu_squared(p, l));
    mu = std::abs(s - mu) <= std::abs(s + mu) ? s : -s;
  };
  const int arc_steps = std::max(8, static_cast<int>(std::ceil(theta / (2.0 * kPi) * 1024)));
  for (int i = 1; i <= arc_steps; ++i) follow(std::polar(1.0, theta * i / arc_steps));
  if (std::abs(rad - 1.0) > 0.0) {
    const int radial_steps = std::max(8, static_cast<int>(std::ceil(std::abs(std::log(rad)) * 256)));
    for (int i = 1; i <= radial_steps; ++i) follow(std::polar(std::pow(rad, double(i) / radial_steps), theta));
  }
  return mu;
}

cplx delaunay_dmu(const DelaunayParams& p, cplx lambda, int samples) {
  const double r = std::abs(lambda);
  const auto m2 = ScalarLoop::from_function(r, samples, [&](cplx l) { return delaunay_mu_squared(p, l); });
  const cplx dm2 = d_lambda(m2).eval(lambda);
  return dm2 / (2.0 * delaunay_mu(p, lambda));
}

WeightBounds delaunay_weight_bounds(double H, Spaceform space) {
  const double inf = std::numeric_limits<double>::infinity();
  const double h = std::abs(H);
  switch (space) {
    case Spaceform::R3: return {-inf, 1.0 / h};
    case Spaceform::S3: {
      const double s = std::sqrt(H * H + 1.0);
      return {-2.0 * (s + h), 2.0 * (s - h)};
    }
    case Spaceform::H3: {
      const double s = std::sqrt(H * H - 1.0);
      return {-inf, 2.0 * (h - s)};
    }
  }
  return {-inf, inf};
}

DelaunayParams delaunay_solve_weight(double w, double H, Spaceform space) {
  if (H == 0.0) throw Error(ErrorCode::ZeroParameter, "mean curvature must be nonzero");
  if (space == Spaceform::H3 && !(std::abs(H) > 1.0))
    throw Error(ErrorCode::InvalidArgument, "H3 Delaunay surfaces need |H| > 1");
  const WeightBounds wb = delaunay_weight_bounds(H, space);
  auto reject = [&]() {
    std::ostringstream os;
    os << "w = " << w << " outside [" << wb.lower << ", " << wb.upper << "] for " << to_string(space)
       << ", H = " << H;
    throw Error(ErrorCode::WeightOutOfBounds, os.str());
  };
  DelaunayParams p;
  p.H = H;
  p.space = space;
  const double h = std::abs(H);
  double sum = 0.5, prod = 0.0;
  switch (space) {
    case Spaceform::R3: {
      if (w > 1.0 / h) reject();
      prod = w * h / 16.0;
      p.lambda0 = p.lambda1 = 1.0;
      break;
    }
    case Spaceform::S3: {
      if (w < wb.lower || w > wb.upper) reject();
      const double s = std::sqrt(H * H + 1.0);
      const double c = h / s;  // cos(theta0), cot(theta0) = |H|
      prod = w * s / 16.0;
      sum = std::sqrt(std::max(0.0, 0.25 + 2.0 * prod * (1.0 - c)));
      const double th = std::acos(c);
      p.lambda0 = std::polar(1.0, th);
      p.lambda1 = std::polar(1.0, -th);
      if (H < 0) std::swap(p.lambda0, p.lambda1);
      break;
    }
    case Spaceform::H3: {
      if (w > wb.upper) reject();
      const double s = std::sqrt(H * H - 1.0);
      const double c = h / s;  // (lambda0 + 1/lambda0) / 2
      prod = w * s / 16.0;
      sum = std::sqrt(std::max(0.0, 0.25 - 2.0 * prod * (c - 1.0)));
      p.lambda0 = p.lambda1 = std::sqrt((h - 1.0) / (h + 1.0));
      break;
    }
  }
  const double disc = std::sqrt(std::max(0.0, sum * sum - 4.0 * prod));
  p.a = (sum + disc) / 2.0;
  p.b = (sum - disc) / 2.0;
  return p;
}

// ---------------------------------------------------------------- trinoid

cplx default_lambda0(Spaceform space) {
  switch (space) {
    case Spaceform::R3: return 1.0;
    case Spaceform::S3: return std::polar(1.0, kPi / 4.0);
    case Spaceform::H3: return 0.7;
  }
  return 1.0;
}

double trinoid_mean_curvature(const TrinoidParams& p) {
  switch (p.space) {
    case Spaceform::R3: return p.H;
    case Spaceform::S3: {
      // Sym points lambda0^-1 and lambda0: H = i (1 + mu) / (1 - mu), mu = lambda0^2
      const cplx mu = p.lambda0 * p.lambda0;
      return (kI * (1.0 + mu) / (1.0 - mu)).real();
    }
    case Spaceform::H3: {
      const double s = std::abs(p.lambda0);
      return (1.0 + s * s) / (1.0 - s * s);
    }
  }
  return p.H;
}

cplx trinoid_h(const TrinoidParams& p, cplx lambda) {
  return (lambda - p.lambda0) * (lambda - 1.0 / p.lambda0) / lambda;
}

cplx trinoid_Q(const TrinoidParams& p, cplx z) {
  const cplx num = p.vinf * z * z + (p.v1 - p.v0 - p.vinf) * z + p.v0;
  return num / (16.0 * z * z * (z - 1.0) * (z - 1.0));
}

Potential trinoid_potential(const TrinoidParams& p) {
  if (p.v0 == 0.0 || p.v1 == 0.0 || p.vinf == 0.0)
    throw Error(ErrorCode::ZeroParameter, "trinoid end parameters must be nonzero");
  if (p.lambda0 == 0.0 || std::abs(p.lambda0 + 1.0) < 1e-14)
    throw Error(ErrorCode::InvalidArgument, "trinoid lambda0 must avoid 0 and -1");
  return Potential{[p](cplx z, cplx l) -> Mat2 { return mat2(0.0, 1.0 / l, l * trinoid_h(p, l) * trinoid_Q(p, z), 0.0); },
                   {0.0, 1.0},
                   "trinoid potential"};
}

double trinoid_v(const TrinoidParams& p, int k) {
  switch (k) {
    case 0: return p.v0;
    case 1: return p.v1;
    case 2: return p.vinf;
  }
  throw Error(ErrorCode::InvalidArgument, "end index must be 0, 1 or 2");
}

double trinoid_rho(const TrinoidParams& p, int k, cplx lambda) {
  const cplx h = trinoid_h(p, lambda);
  if (std::abs(h.imag()) > 1e-10 * std::max(1.0, std::abs(h)))
    throw Error(ErrorCode::InvalidArgument, "rho_k needs real h(lambda)");
  const double rad = 1.0 + trinoid_v(p, k) * h.real() / 4.0;
  if (rad < 0.0) {
    std::ostringstream os;
    os << "1 + v_" << k << " h / 4 = " << rad << " at lambda = " << lambda;
    throw Error(ErrorCode::NegativeRadicand, os.str());
  }
  return 0.5 - 0.5 * std::sqrt(rad);
}

InequalityReport trinoid_inequalities(const TrinoidParams& p) {
  InequalityReport rep;
  const double hm = trinoid_h(p, -1.0).real(), hp = trinoid_h(p, 1.0).real();
  const char* names[3] = {"0", "1", "inf"};
  bool radicands_ok = true;
  for (int k = 0; k < 3; ++k) {
    const double rm = 1.0 + trinoid_v(p, k) * hm / 4.0;
    const double rp = 1.0 + trinoid_v(p, k) * hp / 4.0;
    rep.margins.emplace_back(std::string("radicand(-1) v_") + names[k], rm);
    rep.margins.emplace_back(std::string("radicand(+1) v_") + names[k], rp);
    radicands_ok = radicands_ok && rm >= 0.0 && rp >= 0.0;
    rep.n[k] = rm >= 0.0 ? 0.5 - 0.5 * std::sqrt(rm) : std::nan("");
    rep.m[k] = rp >= 0.0 ? 0.5 - 0.5 * std::sqrt(rp) : std::nan("");
  }
  auto battery = [&](const std::array<double, 3>& x, const std::string& tag) {
    const double s = std::abs(x[0]) + std::abs(x[1]) + std::abs(x[2]);
    rep.margins.emplace_back("sum |" + tag + "| <= 1", 1.0 - s);
    for (int i = 0; i < 3; ++i)
      rep.margins.emplace_back("triangle |" + tag + "_" + names[i] + "|",
                               std::abs(x[(i + 1) % 3]) + std::abs(x[(i + 2) % 3]) - std::abs(x[i]));
  };
  if (radicands_ok) {
    battery(rep.n, "n");
    if (p.space != Spaceform::R3) battery(rep.m, "m");
  }
  if (p.space == Spaceform::R3) {
    const std::array<double, 3> v{p.v0, p.v1, p.vinf};
    for (int i = 0; i < 3; ++i)
      rep.margins.emplace_back(std::string("triangle |v_") + names[i] + "|",
                               std::abs(v[(i + 1) % 3]) + std::abs(v[(i + 2) % 3]) - std::abs(v[i]));
  }
  rep.pass = radicands_ok;
  for (const auto& [name, m] : rep.margins)
    if (!(m >= 0.0)) rep.pass = false;
  return rep;
}

// ---------------------------------------------------------------- gauges

Gauge identity_gauge() {
  return Gauge{[](cplx, cplx) { return identity2(); }, [](cplx, cplx) { return Mat2(Mat2::Zero()); }};
}

Gauge diagonal_sqrt_gauge() {
  return Gauge{[](cplx z, cplx) {
                 const cplx s = std::sqrt(z);
                 return mat2(s, 0.0, 0.0, 1.0 / s);
               },
               [](cplx z, cplx) {
                 const cplx s = std::sqrt(z);
                 return mat2(0.5 / s, 0.0, 0.0, -0.5 / (z * s));
               }};
}

Gauge inverse_gauge(const Gauge& g) {
  // d(g^-1) = -g^-1 dg g^-1
  return Gauge{[g](cplx z, cplx l) { return Mat2(g.g(z, l).inverse()); },
               [g](cplx z, cplx l) {
                 const Mat2 gi = g.g(z, l).inverse();
                 return Mat2(-gi * g.dg(z, l) * gi);
               }};
}

Potential gauge(const Potential& xi, const Gauge& g, cplx probe) {
  const auto gl = Loop::from_function(1.0, 64, [&](cplx l) { return g.g(probe, l); });
  const double scale = std::max(1.0, gl.max_norm());
  if (gl.negative_mass() > 1e-10 * scale) {
    std::ostringstream os;
    os << "gauge has negative powers of lambda at z = " << probe << " (mass " << gl.negative_mass() << ")";
    throw Error(ErrorCode::GaugeNotPlus, os.str());
  }
  const ScalarLoop d = det(gl);
  for (int j = 0; j < d.size(); ++j)
    if (std::abs(d[j]) < 1e-14 * scale * scale) throw Error(ErrorCode::GaugeNotPlus, "gauge is singular");
  Potential out;
  out.punctures = xi.punctures;
  out.name = xi.name + " (gauged)";
  out.coefficient = [xi, g](cplx z, cplx l) -> Mat2 {
    const Mat2 gz = g.g(z, l);
    const Mat2 gi = gz.inverse();
    return gi * xi.coefficient(z, l) * gz + gi * g.dg(z, l);
  };
  return out;
}

EndWeights formal_end_weights(const TrinoidParams& p) {
  EndWeights out;
  const double H = trinoid_mean_curvature(p);
  const double h = std::abs(H);
  const double inf = std::numeric_limits<double>::infinity();
  double denom = h;
  switch (p.space) {
    case Spaceform::R3:
      out.bounds = {-3.0 / h, inf};
      break;
    case Spaceform::S3: {
      const double s = std::sqrt(H * H + 1.0);
      denom = s;
      out.bounds = {-6.0 * (s - h), 6.0 * (s + h)};
      break;
    }
    case Spaceform::H3: {
      const double s = std::sqrt(H * H - 1.0);
      denom = s;
      out.bounds = {-6.0 * (h - s), inf};
      break;
    }
  }
  for (int k = 0; k < 3; ++k) {
    out.w[k] = trinoid_v(p, k) / denom;
    out.lower_margin[k] = out.w[k] - out.bounds.lower;
    out.upper_margin[k] = out.bounds.upper - out.w[k];
    out.within_bounds = out.within_bounds && out.lower_margin[k] > 0.0 && out.upper_margin[k] > 0.0;
  }
  return out;
}

}  // namespace dpw

#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "dpw/factorization.hpp"
#include "dpw/loop.hpp"

namespace dpw {

enum class Spaceform { R3, S3, H3 };

std::string_view to_string(Spaceform s);
Spaceform spaceform_from_string(std::string_view s);

// Holomorphic potential xi = A(z, lambda) dz on a punctured domain.
struct Potential {
  std::function<Mat2(cplx z, cplx lambda)> coefficient;
  std::vector<cplx> punctures;  // finite punctures; infinity is implicit
  std::string name;

  // Throws EvaluationAtPuncture within 1e-14 of a puncture.
  Mat2 operator()(cplx z, cplx lambda) const;
};

struct DelaunayParams {
  double a = 0.25;
  double b = 0.25;
  double c = 0.0;
  double H = 1.0;
  Spaceform space = Spaceform::R3;
  cplx lambda0 = 1.0;
  cplx lambda1 = 1.0;  // second Sym point (S3 only)
};

// A(lambda) = i c eps + (a/lambda + b) eps_+ - (a lambda + b) eps_-.
Mat2 delaunay_A(const DelaunayParams& p, cplx lambda);
Loop delaunay_A_loop(const DelaunayParams& p, double radius, int n);

// xi = A dz / z on C*.  Throws ZeroParameter for a = 0 or b = 0.
Potential delaunay_potential(const DelaunayParams& p);

// mu^2 = a^2 + b^2 + c^2 + ab (lambda + 1/lambda): eigenvalues of A are
// +-mu.  Principal branch at lambda = 1, continued counterclockwise along
// the unit circle and then radially to |lambda|.
cplx delaunay_mu(const DelaunayParams& p, cplx lambda);
cplx delaunay_mu_squared(const DelaunayParams& p, cplx lambda);
// d mu / d lambda with the same branch; mu^2 differentiated spectrally.
cplx delaunay_dmu(const DelaunayParams& p, cplx lambda, int samples = 256);

// Sym points and normalization for a Delaunay surface of weight w.
DelaunayParams delaunay_solve_weight(double w, double H, Spaceform space);

struct WeightBounds {
  double lower;  // -inf when unbounded below
  double upper;
};
WeightBounds delaunay_weight_bounds(double H, Spaceform space);

// Explicit r-Iwasawa factors of exp((x + i y) A) for c = 0 and real a, b.
// `radius`/`samples` select the circle.
IwasawaPair delaunay_explicit_frame(const DelaunayParams& p, double x, double y, double radius = 1.0,
                                    int samples = kDefaultSamples);

// Conformal factor v(x): v'^2 = -(v^2 - 4a^2)(v^2 - 4b^2), v(0) = 2b.
struct ConformalFactor {
  std::vector<double> x, v, dv;
  double max_first_integral = 0.0;  // max |v'^2 + (v^2 - 4a^2)(v^2 - 4b^2)|
};
ConformalFactor delaunay_conformal_factor(double a, double b, double x_max, int steps = 4000);

struct TrinoidParams {
  double v0 = 0.75, v1 = 0.75, vinf = 0.75;
  cplx lambda0 = 1.0;
  Spaceform space = Spaceform::R3;
  double H = 1.0;  // used for R3; derived from lambda0 otherwise
};

// Default Sym point for a space form.
cplx default_lambda0(Spaceform space);
// Mean curvature fixed by the Sym point (S3: -cot(theta0), H3: (1+s^2)/(1-s^2)); R3 returns H_r3.
double trinoid_mean_curvature(const TrinoidParams& p);

cplx trinoid_h(const TrinoidParams& p, cplx lambda);
cplx trinoid_Q(const TrinoidParams& p, cplx z);
Potential trinoid_potential(const TrinoidParams& p);

// rho_k = 1/2 - 1/2 sqrt(1 + v_k h(lambda) / 4); k in {0, 1, 2} (2 = infinity).
double trinoid_rho(const TrinoidParams& p, int k, cplx lambda);
double trinoid_v(const TrinoidParams& p, int k);

struct InequalityReport {
  bool pass = true;
  std::array<double, 3> n{}, m{};
  std::vector<std::pair<std::string, double>> margins;  // name, signed margin (>= 0 passes)
};
InequalityReport trinoid_inequalities(const TrinoidParams& p);

// Plus-loop gauge g(z, lambda) with its z-derivative.
struct Gauge {
  std::function<Mat2(cplx z, cplx lambda)> g;
  std::function<Mat2(cplx z, cplx lambda)> dg;
};
Gauge identity_gauge();
// diag(z^(1/2), z^(-1/2)).
Gauge diagonal_sqrt_gauge();
Gauge inverse_gauge(const Gauge& g);

// xi.g = g^-1 xi g + g^-1 dg.  Plus-loop membership of g(probe, .) is
// checked on the unit circle (GaugeNotPlus).
Potential gauge(const Potential& xi, const Gauge& g, cplx probe = cplx(0.5, 0.25));

struct EndWeights {
  std::array<double, 3> w{};
  WeightBounds bounds{};
  std::array<double, 3> lower_margin{}, upper_margin{};
  bool within_bounds = true;
};
EndWeights formal_end_weights(const TrinoidParams& p);

}  // namespace dpw

#pragma once

#include <string>
#include <vector>

#include "dpw/loop.hpp"
#include "dpw/potentials.hpp"

namespace dpw {

// Piecewise path in the z-plane made of straight segments and circular arcs.
struct PathSegment {
  enum class Kind { Line, Arc };
  Kind kind = Kind::Line;
  cplx from = 0.0;
  cplx to = 0.0;      // Line: end point
  cplx center = 0.0;  // Arc: center; the arc starts at `from`
  double sweep = 0.0; // Arc: signed angle, counterclockwise positive

  cplx point(double s) const;    // s in [0, 1]
  cplx tangent(double s) const;  // dz/ds
  double length() const;
};

struct PathSpec {
  cplx start = 0.0;
  std::vector<PathSegment> segments;
  double delta = 0.05;      // minimum admissible distance to a puncture
  std::string description;

  cplx end() const;
  PathSpec& line_to(cplx z);
  PathSpec& arc(cplx center, double sweep);
  // Minimum distance from the path to the given points.
  double clearance(const std::vector<cplx>& points) const;
};

// Closed path from z0: radially to the circle |z - center| = radius, once
// around it counterclockwise, and back.
PathSpec loop_around(cplx z0, cplx center, double radius);

struct IntegrationOptions {
  double rel_tol = 1e-11;
  double abs_tol = 1e-13;
  double min_step = 1e-10;      // in path parameter units
  long max_steps = 1000000;
  double det_drift_tol = 1e-10;
};

struct IntegrationResult {
  Loop phi;
  double det_drift = 0.0;  // max_j |det Phi_j - det Phi0_j|
  long steps = 0;
  long rejected = 0;
};

// Solves dPhi = Phi xi along the path with Phi(start) = phi0, all lambda
// samples advanced together under one step controller (dopri5).  The
// tolerance is tightened and the path retried when the det drift is too
// large.  Errors: PathTooClose, StepSizeUnderflow, ToleranceNotMet.
IntegrationResult integrate_frame(const Potential& xi, const PathSpec& path, const Loop& phi0,
                                  const IntegrationOptions& opt = {});

struct MonodromyRep {
  Loop H0, H1, Hinf;
  cplx base = 0.0;
  Loop phi0;
  double det_drift = 0.0;
  double product_residual = 0.0;  // max || H0 H1 Hinf - Id ||
};

// Phi(end) Phi0^-1 for a closed path.
Loop monodromy_along(const Potential& xi, const PathSpec& closed, const Loop& phi0, const IntegrationOptions& opt = {},
                     double* det_drift = nullptr);

// Monodromy about 0 and 1 from the base point z0 along circles of the
// given radius; Hinf = (H0 H1)^-1.  The two paths run concurrently when
// `threads` > 1.
MonodromyRep trinoid_monodromy(const Potential& xi, const Loop& phi0, cplx z0 = 0.5, double radius = 0.45,
                               const IntegrationOptions& opt = {}, int threads = 2);

// Monodromy of A dz / z once around 0 from z = 1, on the given circle in lambda.
Loop delaunay_monodromy(const DelaunayParams& p, double lambda_radius, int samples,
                        const IntegrationOptions& opt = {});

// max over samples and ends of |tr(H_k)/2 - cos(2 pi rho_k)|.  The -Id
// monodromy of the square-root gauge is already folded into rho_k.
double trace_identity_check(const MonodromyRep& rep, const TrinoidParams& p);

}  // namespace dpw

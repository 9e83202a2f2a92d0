#pragma once

#include <functional>
#include <vector>

#include "dpw/loop.hpp"
#include "dpw/potentials.hpp"

namespace dpw {

// Space form, mean curvature and Sym points.  For S3 the surface is
// F(lambda1) F(lambda0)^-1, mu = lambda1 / lambda0, H = i(1 + mu)/(1 - mu).
// For H3, lambda0 is off the unit circle with |lambda0| = s.
struct SymTarget {
  Spaceform space = Spaceform::R3;
  double H = 1.0;
  cplx lambda0 = 1.0;
  cplx lambda1 = 1.0;
};

SymTarget sym_target(const DelaunayParams& p);
SymTarget sym_target(const TrinoidParams& p);

struct AmbientPoint {
  Spaceform space = Spaceform::R3;
  Vec4 x = Vec4::Zero();     // R3 uses x[0..2]
  double drift = 0.0;        // |x|^2 - 1 (S3) or Minkowski norm - 1 (H3)
  bool degenerate = false;   // R3: d/dlambda F vanishes
  Vec3 r3() const { return x.head<3>(); }
};

// -2 i lambda0 H^-1 (dF) F^-1 at lambda0 in su2 coordinates.  The
// generalized form subtracts tr((dF) F^-1) Id first.
AmbientPoint sym_r3(const Loop& F, double H, cplx lambda0, bool generalized = false);
// F(lambda1) F(lambda0)^-1 as (Re p, Im p, Re q, Im q) for [[p, q], [-conj q, conj p]].
AmbientPoint sym_s3(const Loop& F, cplx lambda0, cplx lambda1, bool generalized = false);
// F(lambda0) F(lambda0)^H = x0 Id + x1 s1 + x2 s2 + x3 s3 (Pauli matrices).
AmbientPoint sym_h3(const Loop& F, cplx lambda0, bool generalized = false);
AmbientPoint sym(const Loop& F, const SymTarget& t, bool generalized = false);

struct ClosingEnd {
  int sign = 1;                  // H(lambda0) ~ sign * Id
  double identity_residual = 0;  // || H(lambda0) - sign Id ||
  double derivative = 0;         // R3: || dH(lambda0) ||
  double pair_residual = 0;      // S3: || H(lambda0) - H(lambda1) ||
  double eigen_residual = 0;     // | tr H(lambda0) / 2 - sign |
  double eigen_derivative = 0;   // R3: |d mu| from the second derivative of the trace
};

struct ClosingReport {
  std::vector<ClosingEnd> ends;
  double max_residual = 0.0;  // max of the applicable residuals
};

ClosingReport closing_check(const std::vector<Loop>& H, const SymTarget& t);

struct FrameStructureReport {
  double alpha_scale = 0.0;       // max ||alpha|| coefficient
  double higher_powers = 0.0;     // max coefficient with |k| >= 2
  double slot_violation = 0.0;    // lambda^-1 or lambda^1 outside their slots / wrong type
  double maurer_cartan = 0.0;     // || d_x a_y - d_y a_x + [a_x, a_y] ||
  double structure_residual = 0.0;  // max of the above two, relative to alpha_scale
  bool flagged = false;
};

// Finite-difference check of alpha = F^-1 dF at z from frames on the 5x5
// stencil z + h (i + j i), i, j in {-2, ..., 2}.
FrameStructureReport verify_frame_structure(const std::function<Loop(cplx)>& frame, cplx z, double h = 1e-3,
                                            double tol = 1e-6);

// Hermitian 2x2 <-> Minkowski coordinates.
Vec4 hermitian_to_minkowski(const Mat2& f);
Vec4 su2_to_s3(const Mat2& f);

}  // namespace dpw

#pragma once

#include <vector>

#include "dpw/factorization.hpp"
#include "dpw/loop.hpp"

namespace dpw {

// T = 1 - t0^2 - t1^2 - tinf^2 + 2 t0 t1 tinf.  T > 0 at a sample means the
// three monodromies (with half traces t_k) are irreducible and
// simultaneously unitarizable there.
double goldman_T(double t0, double t1, double tinf);
// Fraction of the samples where T > 0 (real parts of the half traces).
double goldman_positive_fraction(const Loop& H0, const Loop& H1, const Loop& Hinf);

struct KernelLine {
  Mat2 X;                        // unit Frobenius norm
  int dim = 0;                   // estimated kernel dimension
  std::array<double, 4> sigma{};  // singular values, descending
};

// Kernel of X -> (X H_j - (H_j^*)^-1 X)_j at sample j (on the unit circle
// H^*(lambda) = H(lambda)^H).  Errors: DegenerateFamily when n >= 2 and all
// pairs commute at this sample.
KernelLine kernel_Ln(const std::vector<Loop>& H, int j);
KernelLine kernel_Ln(const std::vector<Mat2>& H);

struct KernelSection {
  Loop X;
  std::vector<int> exceptional;  // samples filled by interpolation
  bool phase_aligned = false;
  bool cleaned = false;          // exceptional samples filled
  bool symmetrized = false;
  double holonomy = 0.0;         // phase mismatch spread around the circle
  int switches = 0;              // definiteness switch points removed
  double residual = 0.0;         // max_j ||L_n(X)(lambda_j)|| / ||X||
};

inline constexpr int kExceptionalBudget = 8;

// Errors: KernelJump (more than kExceptionalBudget samples without a
// one-dimensional kernel), DegenerateFamily, AlignmentFailure.
KernelSection build_section(const std::vector<Loop>& H);

// X2 = alpha X1 + (alpha X1)^*, alpha scanned over 8 phases; switch points
// of definiteness are absorbed by a real scalar factor g.  Errors:
// AllZeroSymmetrization, OddSwitchCount.
KernelSection symmetrize_section(const KernelSection& X1);

struct UnitarizerResult {
  Loop C;
  KernelSection section;
  std::vector<Loop> conjugated;   // C H_j C^-1
  std::vector<int> exceptional;   // samples where C is singular, filled by interpolation
  double residual = 0.0;          // max_j unitarity_residual(C H_j C^-1)
  double tail = 0.0;              // max tail ratio of the conjugated loops
  double certified_radius = 1.0;  // smallest r checked on which they stay analytic and unitary
  double birkhoff_residual = 0.0;
};

// Errors: those of the stages, UnitarizationResidualTooLarge when the
// residual exceeds `tol`.
UnitarizerResult unitarizer(const std::vector<Loop>& H, double tol = 1e-6);

// max_j || (C H C^-1)^H (C H C^-1) - Id || over samples outside `skip`.
double conjugation_residual(const Loop& C, const Loop& H, const std::vector<int>& skip = {});

}  // namespace dpw

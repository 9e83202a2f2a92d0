#pragma once

#include <vector>

#include "dpw/laurent.hpp"
#include "dpw/loop.hpp"

namespace dpw {

inline constexpr double kFactorTolerance = 1e-9;

struct IwasawaReport {
  double reconstruction = 0.0;  // max ||Phi - F B||
  double unitarity = 0.0;       // max ||F* F - Id|| on the unit circle
  double negative_mass = 0.0;   // sum of |B_k|, k < 0
  int section_order = 0;        // Toeplitz blocks used
};

struct IwasawaPair {
  Loop F;  // r-unitary factor
  Loop B;  // plus factor, B(0) upper triangular with positive diagonal
  IwasawaReport report;
};

// Phi = F B.  For r < 1 the loop is moved to the unit circle (certified),
// split there, and F = Phi B^-1 is formed on the original circle.
IwasawaPair iwasawa(const Loop& phi, double tol = kFactorTolerance);

struct ScalarBirkhoff {
  ScalarLoop h;                  // f = h* h on the unit circle, h(0) > 0
  std::vector<CircleZero> zeros;  // boundary zeros of f
  double residual = 0.0;         // max |h* h - f| / max(1, max f)
};

// f real >= 0 on the unit circle.
ScalarBirkhoff birkhoff_scalar(const ScalarLoop& f, double tol = kFactorTolerance);

struct MatrixBirkhoff {
  Loop C;           // plus loop, C(0) upper triangular with positive diagonal
  ScalarLoop f;     // x11, real >= 0
  double residual;  // max ||f X - C* C|| / max(1, max ||f X||)
};

// X Hermitian positive semidefinite on the unit circle with det X not
// identically zero.
MatrixBirkhoff birkhoff_matrix_semidefinite(const Loop& X, double tol = kFactorTolerance);

// Outer spectral factor of a Hermitian positive definite loop on the unit
// circle: X = B* B with B a plus loop, B(0) upper triangular with positive
// diagonal.  Returns W = B^-1 (the Toeplitz solution) and B.
struct SpectralFactor {
  Loop W;
  Loop B;
  double residual;  // max ||W* X W - Id||
  int order;
};
SpectralFactor spectral_factor(const Loop& X, double tol = kFactorTolerance);

// Upper triangular R with positive diagonal and R^H R = E (E Hermitian > 0).
Mat2 cholesky_upper(const Mat2& E);

}  // namespace dpw

#include "dpw/linalg.hpp"

#include <cmath>

namespace dpw {

std::array<Mat2, 3> su2_basis() {
  const Mat2 ep = BasisConstants::eps_plus();
  const Mat2 em = BasisConstants::eps_minus();
  return {BasisConstants::eps(), ep + em, kI * (ep - em)};
}

Vec3 su2_coordinates(const Mat2& x) {
  const auto basis = su2_basis();
  Vec3 out;
  for (int i = 0; i < 3; ++i) out[i] = BasisConstants::inner(x, basis[i]).real();
  return out;
}

Mat2 from_su2_coordinates(const Vec3& v) {
  const auto basis = su2_basis();
  return v[0] * basis[0] + v[1] * basis[1] + v[2] * basis[2];
}

namespace {

// Series are used for small |w| where the closed forms cancel.
constexpr double kSeriesCutoff = 1e-2;

}  // namespace

cplx cosh_sqrt(cplx w) {
  if (std::abs(w) < kSeriesCutoff) {
    cplx term = 1.0, sum = 1.0;
    for (int k = 1; k < 12; ++k) {
      term *= w / double((2 * k - 1) * (2 * k));
      sum += term;
    }
    return sum;
  }
  return std::cosh(std::sqrt(w));
}

cplx sinhc_sqrt(cplx w) {
  if (std::abs(w) < kSeriesCutoff) {
    cplx term = 1.0, sum = 1.0;
    for (int k = 1; k < 12; ++k) {
      term *= w / double((2 * k) * (2 * k + 1));
      sum += term;
    }
    return sum;
  }
  const cplx s = std::sqrt(w);
  return std::sinh(s) / s;
}

Mat2 expm2(const Mat2& m) {
  const cplx half_trace = 0.5 * m.trace();
  const Mat2 traceless = m - half_trace * Mat2::Identity();
  // traceless^2 = -det(traceless) * Id
  const cplx w = -traceless.determinant();
  return std::exp(half_trace) * (cosh_sqrt(w) * Mat2::Identity() + sinhc_sqrt(w) * traceless);
}

}  // namespace dpw

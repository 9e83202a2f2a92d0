#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>

namespace dpw {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

inline Mat2 identity2() { return Mat2::Identity(); }

inline Mat2 mat2(cplx a, cplx b, cplx c, cplx d) {
  Mat2 m;
  m << a, b, c, d;
  return m;
}

// sl2(C) basis: eps_minus = [[0,0],[-1,0]], eps_plus = [[0,1],[0,0]],
// eps = diag(-i, i).
struct BasisConstants {
  static Mat2 eps_minus() { return mat2(0.0, 0.0, -1.0, 0.0); }
  static Mat2 eps_plus() { return mat2(0.0, 1.0, 0.0, 0.0); }
  static Mat2 eps() { return mat2(-kI, 0.0, 0.0, kI); }

  // Bilinear Ad-invariant form <X,Y> = -tr(XY)/2.
  static cplx inner(const Mat2& x, const Mat2& y) { return -0.5 * (x * y).trace(); }
};

// Orthonormal basis of su2 ~ R^3 used throughout:
// {eps, eps_plus + eps_minus, i(eps_plus - eps_minus)}.
std::array<Mat2, 3> su2_basis();

// Coordinates of X in su2_basis (real parts; the identity component of a
// gl2 matrix is dropped since it is orthogonal to every basis element).
Vec3 su2_coordinates(const Mat2& x);
Mat2 from_su2_coordinates(const Vec3& v);

// Entrywise max-modulus norm.
inline double max_abs(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }
inline double max_abs(cplx z) { return std::abs(z); }

// cosh(sqrt(w)) and sinh(sqrt(w))/sqrt(w), entire in w.
cplx cosh_sqrt(cplx w);
cplx sinhc_sqrt(cplx w);

// Matrix exponential of a 2x2 matrix via the Cayley-Hamilton closed form.
Mat2 expm2(const Mat2& m);

inline Mat2 adjoint(const Mat2& m) { return m.adjoint(); }

}  // namespace dpw

#include "doctest.h"

#include "dpw/frame_ode.hpp"
#include "dpw/unitarize.hpp"
#include "test_support.hpp"

using namespace dpw;

namespace {

const Mat2 kDiag = mat2(kI, 0.0, 0.0, -kI);
const Mat2 kRot = mat2(0.0, 1.0, -1.0, 0.0);

// Nondegenerate unitary family: rotations about two different axes with
// lambda-dependent angles.
std::vector<Loop> unitary_family(int n) {
  auto u1 = Loop::from_function(1.0, n, [](cplx l) {
    const double t = 0.7 + 0.2 * l.real();
    return mat2(std::polar(1.0, t), 0.0, 0.0, std::polar(1.0, -t));
  });
  auto u2 = Loop::from_function(1.0, n, [](cplx l) {
    const double t = 0.5 + 0.1 * l.imag();
    return mat2(std::cos(t), std::sin(t), -std::sin(t), std::cos(t));
  });
  return {u1, u2};
}

std::vector<Loop> conjugate(const std::vector<Loop>& H, const Loop& C) {
  std::vector<Loop> out;
  for (const auto& h : H) out.push_back(mul(inv(C), mul(h, C)));
  return out;
}

double proportional_distance(const Mat2& a, const Mat2& b) {
  // || a / |a| - phase * b / |b| || minimized over the phase
  const Mat2 an = a / a.norm(), bn = b / b.norm();
  const cplx c = (bn.adjoint() * an).trace();
  return (an - bn * (c / std::abs(c))).norm();
}

}  // namespace

TEST_CASE("goldman T at sample points") {
  CHECK(goldman_T(0, 0, 0) == 1.0);
  CHECK(goldman_T(1, 1, 1) == 0.0);
  CHECK(goldman_T(1, 0, 0) == 0.0);
}

TEST_CASE("property: goldman T symmetries") {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 50; ++i) {
    const double a = u(rng), b = u(rng), c = u(rng);
    const double t = goldman_T(a, b, c);
    CHECK(std::abs(goldman_T(b, a, c) - t) < 1e-14);
    CHECK(std::abs(goldman_T(c, b, a) - t) < 1e-14);
    CHECK(std::abs(goldman_T(a, c, b) - t) < 1e-14);
    CHECK(std::abs(goldman_T(-a, -b, c) - t) < 1e-14);
    CHECK(std::abs(goldman_T(a, -b, -c) - t) < 1e-14);
  }
}

TEST_CASE("kernel of L_n at sample points") {
  // brute force: X commuting with diag(i,-i) is diagonal; with the rotation it is a multiple of Id
  auto k = kernel_Ln(std::vector<Mat2>{kDiag, kRot});
  CHECK(k.dim == 1);
  CHECK(proportional_distance(k.X, identity2()) < 1e-12);
  const Mat2 h1 = mat2(std::polar(1.0, 0.4), 0.0, 0.0, std::polar(1.0, -0.4));
  k = kernel_Ln(std::vector<Mat2>{h1});
  CHECK(k.dim == 2);
  std::mt19937 rng(7);
  const Mat2 C = dpw::testing::random_sl2(rng);
  const Mat2 Ci = C.inverse();
  k = kernel_Ln(std::vector<Mat2>{Ci * kDiag * C, Ci * kRot * C});
  CHECK(k.dim == 1);
  CHECK(proportional_distance(k.X, C.adjoint() * C) < 1e-10);
  CHECK_THROWS_AS(kernel_Ln(std::vector<Mat2>{kDiag, h1}), Error);
}

TEST_CASE("property: positive T gives a one-dimensional kernel") {
  const TrinoidParams p{};
  const auto rep = trinoid_monodromy(trinoid_potential(p), Loop::constant(1.0, 64, identity2()));
  const std::vector<Loop> H{rep.H0, rep.H1, rep.Hinf};
  int checked = 0;
  for (int j = 0; j < 64; ++j) {
    const double t0 = rep.H0[j].trace().real() / 2, t1 = rep.H1[j].trace().real() / 2,
                 ti = rep.Hinf[j].trace().real() / 2;
    if (goldman_T(t0, t1, ti) > 1e-6) {
      CHECK(kernel_Ln(H, j).dim == 1);
      ++checked;
    }
  }
  CHECK(checked > 32);
}

TEST_CASE("build section: constant unitary family gives Id") {
  const int n = 32;
  const std::vector<Loop> H{Loop::constant(1.0, n, kDiag), Loop::constant(1.0, n, kRot)};
  const auto s = build_section(H);
  CHECK(s.exceptional.empty());
  CHECK(s.residual < 1e-12);
  for (int j = 0; j < n; ++j) CHECK(proportional_distance(s.X[j], identity2()) < 1e-12);
  const auto x = symmetrize_section(s);
  CHECK(x.switches == 0);
  const Mat2 x0 = x.X[0];
  CHECK(x0(0, 0).real() > 0);
  CHECK(max_distance(x.X, Loop::constant(1.0, n, x0(0, 0).real() * identity2())) < 1e-12);
}

TEST_CASE("build section: constant conjugation gives C* C") {
  std::mt19937 rng(9);
  const Mat2 C = dpw::testing::random_sl2(rng);
  const int n = 64;
  const auto H = conjugate(unitary_family(n), Loop::constant(1.0, n, C));
  const auto s = build_section(H);
  for (int j = 0; j < n; ++j) CHECK(proportional_distance(s.X[j], C.adjoint() * C) < 1e-9);
}

TEST_CASE("build section: diagonal analytic conjugation") {
  const int n = 128;
  const auto D = Loop::from_function(1.0, n, [](cplx l) {
    const cplx d = 2.0 + 0.5 * l;
    return mat2(d, 0.0, 0.0, 1.0 / d);
  });
  const auto H = conjugate(unitary_family(n), D);
  const auto s = build_section(H);
  CHECK(s.residual < 1e-8);
}

TEST_CASE("symmetrize section at sample points") {
  const int n = 64;
  KernelSection s;
  s.X = Loop::constant(1.0, n, identity2());
  CHECK(max_distance(symmetrize_section(s).X, s.X) < 1e-14);
  s.X = Loop::constant(1.0, n, Mat2(kI * identity2()));
  const auto x = symmetrize_section(s);
  CHECK(max_distance(x.X, Loop::constant(1.0, n, identity2())) < 1e-14);
  // cos(theta) Id switches at +-i; g = (lambda + 1/lambda) / 2
  s.X = Loop::from_function(1.0, n, [](cplx l) { return Mat2(l.real() * identity2()); });
  const auto c = symmetrize_section(s);
  CHECK(c.switches == 2);
  const auto want = Loop::from_function(1.0, n, [](cplx l) { return Mat2(l.real() * l.real() * identity2()); });
  CHECK(max_distance(c.X, want) < 1e-12);
  s.X = Loop::constant(1.0, n, Mat2(Mat2::Zero()));
  CHECK_THROWS_AS(symmetrize_section(s), Error);
}

TEST_CASE("unitarizer: unitary family needs only a diagonal normalization") {
  const int n = 64;
  const auto H = unitary_family(n);
  const auto u = unitarizer(H, 1e-10);
  CHECK(u.residual < 1e-10);
  const Mat2 c0 = u.C[0];
  CHECK(std::abs(c0(0, 1)) < 1e-10);
  CHECK(std::abs(c0(1, 0)) < 1e-10);
  CHECK(std::abs(c0(0, 0) - c0(1, 1)) < 1e-10);
}

TEST_CASE("unitarizer: round trip through an upper triangular conjugation") {
  const int n = 64;
  const Mat2 C0 = mat2(1.5, 0.4 - 0.3 * kI, 0.0, 1.0 / 1.5);
  const auto H = conjugate(unitary_family(n), Loop::constant(1.0, n, C0));
  const auto u = unitarizer(H, 1e-9);
  CHECK(u.residual < 1e-9);
  // C = U C0 with U unitary (times the scalar plus factor of x11)
  for (int j = 0; j < n; j += 8) {
    const Mat2 U = u.C[j] * C0.inverse();
    const Mat2 UU = U.adjoint() * U;
    CHECK(max_abs(UU - UU(0, 0) * identity2()) < 1e-9 * std::abs(UU(0, 0)));
  }
}

TEST_CASE("property: unitary conjugation of the input conjugates the output") {
  std::mt19937 rng(10);
  const int n = 64;
  const Mat2 U = dpw::testing::random_su2(rng);
  const Mat2 C0 = mat2(1.2, 0.3, 0.0, 1.0 / 1.2);
  const auto H = conjugate(unitary_family(n), Loop::constant(1.0, n, C0));
  std::vector<Loop> HU;
  for (const auto& h : H) HU.push_back(mul(Loop::constant(1.0, n, U), mul(h, Loop::constant(1.0, n, U.adjoint()))));
  const auto a = unitarizer(H), b = unitarizer(HU);
  CHECK(a.residual < 1e-9);
  CHECK(b.residual < 1e-9);
  CHECK(std::abs(a.residual - b.residual) < 1e-9);
}

TEST_CASE("unitarizer on trinoid monodromy") {
  const TrinoidParams p{};
  const auto rep = trinoid_monodromy(trinoid_potential(p), Loop::constant(1.0, 128, identity2()));
  const auto u = unitarizer({rep.H0, rep.H1, rep.Hinf});
  CHECK(u.residual < 1e-6);
  CHECK(u.exceptional.size() <= static_cast<std::size_t>(kExceptionalBudget));
  CHECK(u.tail < 1e-8);
}

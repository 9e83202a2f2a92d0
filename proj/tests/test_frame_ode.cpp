#include "doctest.h"

#include "dpw/frame_ode.hpp"
#include "test_support.hpp"

using namespace dpw;

namespace {

Loop identity_loop(int n, double r = 1.0) { return Loop::constant(r, n, identity2()); }

TrinoidParams equal_ends(double v) {
  TrinoidParams p;
  p.v0 = p.v1 = p.vinf = v;
  return p;
}

Potential constant_potential(const DelaunayParams& p) {
  return Potential{[p](cplx, cplx l) { return delaunay_A(p, l); }, {}, "constant A dz"};
}

}  // namespace

TEST_CASE("zero potential leaves the frame unchanged") {
  std::mt19937 rng(3);
  const Loop phi0 = dpw::testing::random_sl2_loop(rng, 1.0, 32);
  const Potential zero{[](cplx, cplx) { return Mat2(Mat2::Zero()); }, {}, "zero"};
  PathSpec path;
  path.start = 0.1;
  path.line_to(cplx(1.0, 2.0)).arc(0.0, 1.0);
  const auto r = integrate_frame(zero, path, phi0);
  CHECK(max_distance(r.phi, phi0) < 1e-14);
}

TEST_CASE("constant coefficients: straight path gives Phi0 exp(t A)") {
  DelaunayParams p;
  p.a = 0.3;
  p.b = 0.2;
  p.c = 0.1;
  std::mt19937 rng(4);
  const Loop phi0 = dpw::testing::random_sl2_loop(rng, 1.0, 64);
  const cplx t(1.3, -0.4);
  PathSpec path;
  path.start = 0.0;
  path.line_to(t);
  const auto r = integrate_frame(constant_potential(p), path, phi0);
  double d = 0.0;
  for (int j = 0; j < 64; ++j) d = std::max(d, max_abs(r.phi[j] - phi0[j] * expm2(t * delaunay_A(p, phi0.node(j)))));
  CHECK(d < 1e-9);
  CHECK(r.det_drift < 1e-10);
}

TEST_CASE("contractible loop has trivial monodromy") {
  const auto xi = trinoid_potential(equal_ends(0.75));
  const Loop H = monodromy_along(xi, loop_around(0.5, cplx(0.5, 0.3), 0.2), identity_loop(64));
  CHECK(max_distance(H, identity_loop(64)) < 1e-9);
}

TEST_CASE("Delaunay monodromy is exp(2 pi i A)") {
  DelaunayParams p;
  p.a = 0.35;
  p.b = -0.1;
  const Loop M = delaunay_monodromy(p, 1.0, 64);
  double d = 0.0;
  for (int j = 0; j < 64; ++j) d = std::max(d, max_abs(M[j] - expm2(2.0 * kPi * kI * delaunay_A(p, M.node(j)))));
  CHECK(d < 1e-9);
  p.a = p.b = 0.25;
  const Loop V = delaunay_monodromy(p, 1.0, 16);
  CHECK(max_abs(V[0] + identity2()) < 1e-9);
}

TEST_CASE("trinoid monodromy: product, determinant and trace identity") {
  const TrinoidParams p = equal_ends(0.75);
  const auto rep = trinoid_monodromy(trinoid_potential(p), identity_loop(64));
  CHECK(rep.product_residual < 1e-9);
  CHECK(rep.det_drift < 1e-10);
  for (const Loop* H : {&rep.H0, &rep.H1, &rep.Hinf})
    for (int j = 0; j < H->size(); ++j) CHECK(std::abs((*H)[j].determinant() - 1.0) < 1e-9);
  CHECK(trace_identity_check(rep, p) < 1e-6);
  // lambda = 1 is node 0, lambda = -1 is node 32
  for (const Loop* H : {&rep.H0, &rep.H1, &rep.Hinf}) {
    CHECK(std::abs((*H)[0].trace() - 2.0) < 1e-9);
    CHECK(std::abs((*H)[32].trace()) < 1e-9);
  }
}

TEST_CASE("trace identity for unequal ends and a real Sym point") {
  TrinoidParams p;
  p.v0 = 0.6;
  p.v1 = 0.5;
  p.vinf = 0.4;
  p.space = Spaceform::H3;
  p.lambda0 = 0.7;
  const auto rep = trinoid_monodromy(trinoid_potential(p), identity_loop(64), 0.5, 0.45, {}, 1);
  CHECK(trace_identity_check(rep, p) < 1e-6);
}

TEST_CASE("property: changing Phi0 to C Phi0 conjugates the monodromy") {
  std::mt19937 rng(8);
  const Mat2 C = dpw::testing::random_sl2(rng);
  const auto xi = trinoid_potential(equal_ends(0.5));
  const auto path = loop_around(0.5, 0.0, 0.45);
  const Loop H = monodromy_along(xi, path, identity_loop(32));
  const Loop Hc = monodromy_along(xi, path, Loop::constant(1.0, 32, C));
  double d = 0.0;
  for (int j = 0; j < 32; ++j) d = std::max(d, max_abs(Hc[j] - C * H[j] * C.inverse()));
  CHECK(d < 1e-9);
}

TEST_CASE("property: homotopic paths give the same endpoint frame") {
  const auto xi = trinoid_potential(equal_ends(0.75));
  PathSpec straight, detour;
  straight.start = detour.start = 0.5;
  straight.line_to(cplx(0.5, 0.5));
  detour.line_to(cplx(0.3, 0.2)).line_to(cplx(0.8, 0.4)).line_to(cplx(0.5, 0.5));
  const auto a = integrate_frame(xi, straight, identity_loop(64));
  const auto b = integrate_frame(xi, detour, identity_loop(64));
  CHECK(max_distance(a.phi, b.phi) < 1e-9);
}

TEST_CASE("property: doubling the lambda samples leaves shared nodes unchanged") {
  const auto xi = trinoid_potential(equal_ends(0.75));
  const auto path = loop_around(0.5, 1.0, 0.45);
  const Loop h64 = monodromy_along(xi, path, identity_loop(64));
  const Loop h128 = monodromy_along(xi, path, identity_loop(128));
  double d = 0.0;
  for (int j = 0; j < 64; ++j) d = std::max(d, max_abs(h64[j] - h128[2 * j]));
  CHECK(d < 1e-10);
}

TEST_CASE("paths too close to a puncture are rejected") {
  const auto xi = trinoid_potential(equal_ends(0.75));
  try {
    integrate_frame(xi, loop_around(0.5, 0.0, 0.02), identity_loop(16));
    FAIL("expected PathTooClose");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PathTooClose);
  }
}

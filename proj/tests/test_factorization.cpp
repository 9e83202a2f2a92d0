#include "doctest.h"

#include "dpw/factorization.hpp"
#include "test_support.hpp"

using namespace dpw;
using dpw::testing::random_sl2_loop;
using dpw::testing::random_su2;

namespace {

bool plus_normalized(const Loop& B, double tol) {
  const Mat2 b0 = B.laurent_coefficient(0);
  return std::abs(b0(1, 0)) < tol && std::abs(b0(0, 0).imag()) < tol && std::abs(b0(1, 1).imag()) < tol &&
         b0(0, 0).real() > 0 && b0(1, 1).real() > 0;
}

// h up to a unimodular constant: compare h * conj(h(0)) / |h(0)| against the oracle.
double distance_mod_phase(const ScalarLoop& h, const std::function<cplx(cplx)>& want) {
  const cplx ph = h.laurent_coefficient(0) / want(0.0);
  const cplx u = ph / std::abs(ph);
  double d = 0.0;
  for (int j = 0; j < h.size(); ++j) d = std::max(d, std::abs(h[j] - u * want(h.node(j))));
  return d;
}

}  // namespace

TEST_CASE("iwasawa of a unitary loop is trivial") {
  std::mt19937 rng(1);
  const Mat2 u = random_su2(rng);
  const auto phi2 = Loop::from_function(1.0, 64, [&](cplx l) { return Mat2(u * mat2(l, 0.0, 0.0, 1.0 / l) * u.adjoint()); });
  const auto p = iwasawa(phi2);
  CHECK(max_distance(p.B, Loop::constant(1.0, 64, identity2())) < 1e-12);
  CHECK(max_distance(p.F, phi2) < 1e-12);
}

TEST_CASE("iwasawa of a constant lower unipotent matrix (Gram/Cholesky oracle)") {
  const auto phi = Loop::constant(1.0, 32, mat2(1.0, 0.0, 1.0, 1.0));
  const auto p = iwasawa(phi);
  const double s = std::sqrt(2.0);
  const Mat2 F = mat2(1.0, -1.0, 1.0, 1.0) / s;
  const Mat2 B = mat2(s, 1.0 / s, 0.0, 1.0 / s);
  CHECK(max_distance(p.F, Loop::constant(1.0, 32, F)) < 1e-13);
  CHECK(max_distance(p.B, Loop::constant(1.0, 32, B)) < 1e-13);
}

TEST_CASE("property: iwasawa residuals on random SL2 loops") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Loop phi = random_sl2_loop(rng, 1.0, 256);
    const auto p = iwasawa(phi);
    CHECK(p.report.reconstruction < 1e-10);
    CHECK(unitarity_residual(p.F) < 1e-9);
    CHECK(p.B.negative_mass() < 1e-9);
    CHECK(plus_normalized(p.B, 1e-10));
  }
}

TEST_CASE("property: left multiplication by a constant unitary keeps B") {
  std::mt19937 rng(12);
  const Loop phi = random_sl2_loop(rng, 1.0, 128);
  const Mat2 u = random_su2(rng);
  const auto p = iwasawa(phi);
  const auto q = iwasawa(mul(Loop::constant(1.0, 128, u), phi));
  CHECK(max_distance(q.B, p.B) < 1e-10);
  CHECK(max_distance(q.F, mul(Loop::constant(1.0, 128, u), p.F)) < 1e-10);
}

TEST_CASE("r-iwasawa on an inner circle agrees with the unit circle split") {
  std::mt19937 rng(13);
  const double r = 0.8;
  const Loop phi = random_sl2_loop(rng, r, 128, 2, 0.2);
  const auto p = iwasawa(phi);
  CHECK(p.report.reconstruction < 1e-10);
  CHECK(p.report.unitarity < 1e-9);
  CHECK(p.B.negative_mass() < 1e-9);
  // F extends across the annulus and is unitary on the unit circle
  const Loop F1 = p.F.transfer(1.0);
  double u = 0.0;
  for (int j = 0; j < F1.size(); ++j) u = std::max(u, max_abs(F1[j].adjoint() * F1[j] - identity2()));
  CHECK(u < 1e-8);
}

TEST_CASE("iwasawa rejects singular samples") {
  const auto phi = Loop::from_function(1.0, 32, [](cplx l) { return mat2(l - 1.0, 0.0, 0.0, 1.0); });
  CHECK_THROWS_AS(iwasawa(phi), Error);
}

TEST_CASE("scalar Birkhoff: worked examples") {
  {
    const auto r = birkhoff_scalar(ScalarLoop::constant(1.0, 64, 1.0));
    CHECK(max_distance(r.h, ScalarLoop::constant(1.0, 64, 1.0)) < 1e-14);
  }
  {
    const auto f = ScalarLoop::from_function(1.0, 64, [](cplx l) { return 2.0 - l - 1.0 / l; });
    const auto r = birkhoff_scalar(f);
    CHECK(distance_mod_phase(r.h, [](cplx l) { return 1.0 - l; }) < 1e-10);
    CHECK(r.residual < 1e-10);
    REQUIRE(r.zeros.size() == 1);
    CHECK(r.zeros[0].order == 2);
  }
  {
    const auto f = ScalarLoop::from_function(1.0, 64, [](cplx l) { return (5.0 + 2.0 * l + 2.0 / l) / 2.0; });
    const auto r = birkhoff_scalar(f);
    CHECK(distance_mod_phase(r.h, [](cplx l) { return (2.0 + l) / std::sqrt(2.0); }) < 1e-10);
    CHECK(r.zeros.empty());
  }
}

TEST_CASE("scalar Birkhoff: zeros between nodes and of order four") {
  const cplx a = std::polar(1.0, 0.3), b = std::polar(1.0, 2.0);
  const auto f = ScalarLoop::from_function(1.0, 128, [&](cplx l) {
    return std::norm(l - a) * std::pow(std::norm(l - b), 2) * (5.0 + 2.0 * l + 2.0 / l).real() / 2.0;
  });
  const auto r = birkhoff_scalar(f);
  CHECK(r.residual < 1e-9);
  CHECK(distance_mod_phase(r.h, [&](cplx l) { return (l - a) * (l - b) * (l - b) * (2.0 + l) / std::sqrt(2.0); }) <
        1e-8);
  // zeros only on the circle: no winding on an inner circle, 3 on an outer one
  auto wind = [&](double rad) {
    return winding_number(ScalarLoop::from_function(rad, 128, [&](cplx l) { return r.h.eval(l, 1e-6); }));
  };
  CHECK(wind(0.95) == 0);
  CHECK(wind(1.05) == 3);
}

TEST_CASE("scalar Birkhoff: errors") {
  CHECK_THROWS_AS(birkhoff_scalar(ScalarLoop::constant(1.0, 32, 0.0)), Error);
  try {
    birkhoff_scalar(ScalarLoop::from_function(1.0, 32, [](cplx l) { return cplx(l.real()); }));
    FAIL("expected NegativeValue");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NegativeValue);
  }
  try {
    // f = (1 - cos theta)^(3/2) has a zero of order 3
    birkhoff_scalar(ScalarLoop::from_function(1.0, 256, [](cplx l) { return cplx(std::pow(1.0 - l.real(), 1.5)); }));
    FAIL("expected ZeroDetectionFailure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroDetectionFailure);
  }
}

TEST_CASE("matrix Birkhoff: identity") {
  const auto r = birkhoff_matrix_semidefinite(Loop::constant(1.0, 32, identity2()));
  CHECK(max_distance(r.C, Loop::constant(1.0, 32, identity2())) < 1e-13);
  CHECK(max_distance(r.f, ScalarLoop::constant(1.0, 32, 1.0)) < 1e-13);
}

TEST_CASE("matrix Birkhoff: scalar multiple of the identity") {
  // f X = (2 - lambda - 1/lambda)^2 Id, whose plus factor is (1 - lambda)^2 Id
  const auto X = Loop::from_function(1.0, 64, [](cplx l) { return Mat2((2.0 - l - 1.0 / l) * identity2()); });
  const auto r = birkhoff_matrix_semidefinite(X);
  CHECK(r.residual < 1e-10);
  const auto want = Loop::from_function(1.0, 64, [](cplx l) { return Mat2((1.0 - l) * (1.0 - l) * identity2()); });
  CHECK(max_distance(r.C, want) < 1e-10);
}

TEST_CASE("matrix Birkhoff: unitary conjugate of a singular diagonal") {
  std::mt19937 rng(5);
  const Mat2 V = random_su2(rng);
  const auto X = Loop::from_function(1.0, 64, [&](cplx l) {
    return Mat2(V.adjoint() * mat2(2.0 - l - 1.0 / l, 0.0, 0.0, 1.0) * V);
  });
  const auto r = birkhoff_matrix_semidefinite(X);
  CHECK(r.residual < 1e-9);
  const Mat2 c0 = r.C.laurent_coefficient(0);
  CHECK(std::abs(c0(1, 0)) < 1e-10);
  CHECK(r.C.negative_mass() < 1e-9);
}

TEST_CASE("property: matrix Birkhoff on random semidefinite symbols") {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const Loop G1 = random_sl2_loop(rng, 1.0, 128, 2, 0.3);
    const Loop G2 = random_sl2_loop(rng, 1.0, 128, 2, 0.3);
    const cplx a = std::polar(1.0, 2.0 * kPi * std::uniform_real_distribution<double>()(rng));
    std::vector<Mat2> g(128);
    for (int j = 0; j < 128; ++j) g[j] = G1[j] * mat2(G1.node(j) - a, 0.0, 0.0, 1.0) * G2[j];
    const Loop G(1.0, g);
    const Loop X = mul(adjoint_samples(G), G);
    const auto r = birkhoff_matrix_semidefinite(X);
    CHECK(r.residual < 1e-9);
    CHECK(r.C.negative_mass() < 1e-8);
    // det C does not vanish on an inner circle
    double mn = 1e300;
    for (int j = 0; j < 64; ++j) {
      const cplx l = 0.9 * std::polar(1.0, 2.0 * kPi * j / 64);
      Mat2 c = Mat2::Zero();
      for (int k = 0; k < 64; ++k) c += r.C.laurent_coefficient(k) * std::pow(l, k);
      mn = std::min(mn, std::abs(c.determinant()));
    }
    CHECK(mn > 1e-6);
  }
}

TEST_CASE("matrix Birkhoff: errors") {
  CHECK_THROWS_AS(birkhoff_matrix_semidefinite(Loop::constant(1.0, 32, mat2(1.0, 1.0, 0.0, 1.0))), Error);
  CHECK_THROWS_AS(birkhoff_matrix_semidefinite(Loop::constant(1.0, 32, mat2(1.0, 0.0, 0.0, -1.0))), Error);
  CHECK_THROWS_AS(birkhoff_matrix_semidefinite(Loop::constant(1.0, 32, mat2(1.0, 1.0, 1.0, 1.0))), Error);
}

#include "doctest.h"

#include <random>

#include "dpw/loop.hpp"

using namespace dpw;

namespace {

// 1 + 0.5 lambda + 0.25 lambda^-2, coefficients known in closed form.
cplx poly(cplx l) { return 1.0 + 0.5 * l + 0.25 / (l * l); }

Mat2 mat_poly(cplx l) { return mat2(1.0, l, 1.0 / l, 2.0 + 0.1 * l * l); }

}  // namespace

TEST_CASE("coefficients of a Laurent polynomial") {
  for (double r : {1.0, 0.6}) {
    const auto f = ScalarLoop::from_function(r, 64, poly);
    CHECK(std::abs(f.laurent_coefficient(0) - 1.0) < 1e-13);
    CHECK(std::abs(f.laurent_coefficient(1) - 0.5) < 1e-13);
    CHECK(std::abs(f.laurent_coefficient(-2) - 0.25) < 1e-13);
    CHECK(std::abs(f.laurent_coefficient(3)) < 1e-13);
    CHECK(f.tail_ratio() < 1e-14);
  }
}

TEST_CASE("evaluation on and off the circle") {
  const auto f = ScalarLoop::from_function(1.0, 64, poly);
  CHECK(f.eval(f.node(5)) == f[5]);
  const cplx z(0.3, 0.8);
  CHECK(std::abs(f.eval(z) - poly(z)) < 1e-12);
  CHECK(std::abs(f.eval(z * 3.0) - poly(z * 3.0)) < 1e-11);
  CHECK_THROWS_AS(f.eval(0.0), Error);
}

TEST_CASE("off-circle evaluation of a non-analytic loop is refused") {
  // |lambda| on the circle: not analytic, slowly decaying coefficients
  const auto f = ScalarLoop::from_function(1.0, 64, [](cplx l) { return cplx(std::abs(std::sin(std::arg(l)))); });
  try {
    (void)f.eval(cplx(0.5, 0.0));
    FAIL("expected NonAnalyticEvaluation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonAnalyticEvaluation);
  }
}

TEST_CASE("exp(lambda) resolved adaptively and transferred") {
  const auto f = ScalarLoop::from_function_adaptive(1.0, [](cplx l) { return std::exp(l); }, 32);
  CHECK(f.tail_ratio() <= 1e-10);
  const auto g = f.transfer(0.5);
  for (int j = 0; j < g.size(); j += 7) CHECK(std::abs(g[j] - std::exp(g.node(j))) < 1e-12);
}

TEST_CASE("star reflects across the unit circle") {
  for (double r : {1.0, 0.7}) {
    const auto a = Loop::from_function(r, 64, mat_poly);
    const auto s = star(a);
    for (int j = 0; j < a.size(); j += 5) {
      const cplx l = a.node(j);
      const Mat2 want = mat_poly(1.0 / std::conj(l)).adjoint();
      CHECK(max_abs(s[j] - want) < 1e-11);
    }
  }
}

TEST_CASE("spectral derivative") {
  for (double r : {1.0, 0.8}) {
    const auto f = ScalarLoop::from_function(r, 64, poly);
    const auto d = d_lambda(f);
    for (int j = 0; j < f.size(); j += 3) {
      const cplx l = f.node(j);
      CHECK(std::abs(d[j] - (0.5 - 0.5 / (l * l * l))) < 1e-12);
    }
  }
}

TEST_CASE("algebra and unitarity") {
  const auto a = Loop::from_function(1.0, 32, [](cplx l) {
    const cplx u = l / std::sqrt(2.0);
    return mat2(u, -1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 1.0 / (std::sqrt(2.0) * l));
  });
  CHECK(unitarity_residual(a) < 1e-14);
  const auto prod = mul(a, inv(a));
  CHECK(max_distance(prod, Loop::constant(1.0, 32, identity2())) < 1e-14);
  const auto d = det(a);
  CHECK(max_distance(d, ScalarLoop::constant(1.0, 32, 1.0)) < 1e-14);
  CHECK_THROWS_AS(mul(a, Loop::constant(1.0, 64, identity2())), Error);
  CHECK_THROWS_AS(inv(Loop::constant(1.0, 32, Mat2::Zero())), Error);
}

TEST_CASE("fill_samples restores band-limited data") {
  const auto f = Loop::from_function(1.0, 128, mat_poly);
  std::vector<Mat2> s = f.samples();
  const std::vector<int> missing{0, 1, 40, 64};
  for (int j : missing) s[j] = Mat2::Constant(99.0);
  const Loop filled = fill_samples(Loop(1.0, s), std::span<const int>(missing));
  CHECK(max_distance(filled, f) < 1e-12);
}

TEST_CASE("winding number") {
  const auto f = ScalarLoop::from_function(1.0, 64, [](cplx l) { return l * l * (l - 2.0); });
  CHECK(winding_number(f) == 2);
  CHECK(winding_number(ScalarLoop::from_function(0.5, 64, [](cplx l) { return 1.0 / l; })) == -1);
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(ScalarLoop(1.0, std::vector<cplx>(12, 1.0)), Error);
  CHECK_THROWS_AS(ScalarLoop(-1.0, std::vector<cplx>(16, 1.0)), Error);
  std::vector<cplx> bad(16, 1.0);
  bad[3] = cplx(std::nan(""), 0.0);
  CHECK_THROWS_AS(ScalarLoop(1.0, bad), Error);
}

TEST_CASE("property: product of random polynomial loops matches coefficient convolution") {
  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<cplx> p(5), q(5);
    for (auto& c : p) c = cplx(nd(rng), nd(rng));
    for (auto& c : q) c = cplx(nd(rng), nd(rng));
    auto ev = [](const std::vector<cplx>& c, cplx l) {
      cplx s = 0;
      for (int k = -2; k <= 2; ++k) s += c[k + 2] * std::pow(l, k);
      return s;
    };
    const auto a = ScalarLoop::from_function(0.9, 32, [&](cplx l) { return ev(p, l); });
    const auto b = ScalarLoop::from_function(0.9, 32, [&](cplx l) { return ev(q, l); });
    const auto ab = mul(a, b);
    for (int k = -4; k <= 4; ++k) {
      cplx want = 0;
      for (int i = -2; i <= 2; ++i)
        if (std::abs(k - i) <= 2) want += p[i + 2] * q[k - i + 2];
      CHECK(std::abs(ab.laurent_coefficient(k) - want) < 1e-11);
    }
  }
}

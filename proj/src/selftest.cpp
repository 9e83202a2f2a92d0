#include "dpw/selftest.hpp"

#include <algorithm>
#include <functional>

#include "dpw/factorization.hpp"

namespace dpw {

Mat2 random_su2(std::mt19937& rng) {
  std::normal_distribution<double> nd;
  cplx p(nd(rng), nd(rng)), q(nd(rng), nd(rng));
  const double s = std::sqrt(std::norm(p) + std::norm(q));
  p /= s;
  q /= s;
  return mat2(p, q, -std::conj(q), std::conj(p));
}

Loop random_band_limited_sl2(std::mt19937& rng, double radius, int samples, int degree, double amplitude) {
  std::normal_distribution<double> nd(0.0, amplitude), nd_g(0.0, 0.5);
  Mat2 g = identity2();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) g(i, j) += cplx(nd_g(rng), nd_g(rng));
  g /= std::sqrt(g.determinant());
  std::vector<cplx> c[3];
  for (auto& cc : c)
    for (int k = -degree; k <= degree; ++k) cc.emplace_back(nd(rng), nd(rng));
  auto poly = [&](const std::vector<cplx>& cc, cplx l) {
    cplx s = 0.0;
    for (int k = -degree; k <= degree; ++k) s += cc[k + degree] * std::pow(l, k);
    return s;
  };
  return Loop::from_function(radius, samples, [&](cplx l) {
    return Mat2(g * mat2(1.0, poly(c[0], l), 0.0, 1.0) * mat2(1.0, 0.0, poly(c[1], l), 1.0) *
                mat2(1.0, poly(c[2], l), 0.0, 1.0));
  });
}

namespace {

// distance to the oracle after removing the unimodular constant
double mod_phase(const ScalarLoop& h, const std::function<cplx(cplx)>& want) {
  const cplx ph = h.laurent_coefficient(0) / want(0.0);
  const cplx u = ph / std::abs(ph);
  double d = 0.0;
  for (int j = 0; j < h.size(); ++j) d = std::max(d, std::abs(h[j] - u * want(h.node(j))));
  return d;
}

}  // namespace

std::vector<SelfTestRow> factorization_selftest(int trials, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::vector<SelfTestRow> rows;
  const int n = 256;

  SelfTestRow rec{"iwasawa |Phi - F B|", 0.0, 1e-9, trials}, uni{"iwasawa unitarity(F)", 0.0, 1e-9, trials},
      neg{"iwasawa negative mass(B)", 0.0, 1e-9, trials};
  for (int t = 0; t < trials; ++t) {
    // bandwidth 3 * 10 <= n / 8
    const Loop phi = random_band_limited_sl2(rng, 1.0, n, 1 + t % 10, 0.2);
    const auto p = iwasawa(phi);
    rec.value = std::max(rec.value, p.report.reconstruction);
    uni.value = std::max(uni.value, unitarity_residual(p.F));
    neg.value = std::max(neg.value, p.B.negative_mass());
  }
  rows.insert(rows.end(), {rec, uni, neg});

  struct Worked {
    const char* name;
    std::function<cplx(cplx)> f, h;
  };
  const std::vector<Worked> worked{
      {"birkhoff f = 1", [](cplx) { return cplx(1.0); }, [](cplx) { return cplx(1.0); }},
      {"birkhoff f = 2 - l - 1/l", [](cplx l) { return 2.0 - l - 1.0 / l; }, [](cplx l) { return 1.0 - l; }},
      {"birkhoff f = (5 + 2l + 2/l)/2", [](cplx l) { return (5.0 + 2.0 * l + 2.0 / l) / 2.0; },
       [](cplx l) { return (2.0 + l) / std::sqrt(2.0); }},
  };
  for (const auto& w : worked) {
    const auto r = birkhoff_scalar(ScalarLoop::from_function(1.0, 64, w.f));
    rows.push_back({w.name, mod_phase(r.h, w.h), 1e-10, 1});
  }

  SelfTestRow mat{"matrix birkhoff |f X - C* C|", 0.0, 1e-9, trials};
  for (int t = 0; t < trials; ++t) {
    const Loop G1 = random_band_limited_sl2(rng, 1.0, 128, 2, 0.3);
    const Loop G2 = random_band_limited_sl2(rng, 1.0, 128, 2, 0.3);
    const cplx a = std::polar(1.0, 2.0 * kPi * std::uniform_real_distribution<double>()(rng));
    std::vector<Mat2> g(128);
    for (int j = 0; j < 128; ++j) g[j] = G1[j] * mat2(G1.node(j) - a, 0.0, 0.0, 1.0) * G2[j];
    const Loop G(1.0, g);
    mat.value = std::max(mat.value, birkhoff_matrix_semidefinite(mul(adjoint_samples(G), G)).residual);
  }
  rows.push_back(mat);
  return rows;
}

}  // namespace dpw

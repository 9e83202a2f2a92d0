#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dpw/loop.hpp"

namespace dpw {

// Random SL2 loop g U1 L U2 with constant g and unipotent factors whose
// off-diagonal entries are Laurent polynomials of the given degree, so the
// bandwidth is at most 3 * degree.
Loop random_band_limited_sl2(std::mt19937& rng, double radius, int samples, int degree, double amplitude = 0.3);
Mat2 random_su2(std::mt19937& rng);

struct SelfTestRow {
  std::string name;
  double value = 0.0;      // worst residual over the trials
  double threshold = 0.0;
  int trials = 0;
  bool pass() const { return value < threshold; }
};

// Residual table of the factorization property suite: Iwasawa on random
// band-limited loops, the scalar Birkhoff worked examples, and matrix
// Birkhoff on random semidefinite symbols.
std::vector<SelfTestRow> factorization_selftest(int trials, std::uint32_t seed = 1);

}  // namespace dpw

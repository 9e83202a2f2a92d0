#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "dpw/error.hpp"
#include "dpw/linalg.hpp"

namespace dpw {

namespace loop_detail {

template <class T>
T zero();
template <>
inline cplx zero<cplx>() { return 0.0; }
template <>
inline Mat2 zero<Mat2>() { return Mat2::Zero(); }

inline double norm(const cplx& z) { return std::abs(z); }
inline double norm(const Mat2& m) { return max_abs(m); }

inline bool finite(const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }
inline bool finite(const Mat2& m) { return m.allFinite(); }

}  // namespace loop_detail

inline constexpr int kDefaultSamples = 256;
inline constexpr int kMaxSamples = 4096;
// Default accuracy target for off-circle evaluation.
inline constexpr double kEvalTolerance = 1e-9;

// Uniform samples of an analytic function on the circle |lambda| = r.
//
// Samples live at lambda_j = r * exp(2 pi i j / N).  The truncated Laurent
// series is kept in scaled form c_k = xi_k r^k (k in [-N/2, N/2)), computed
// lazily by FFT and shared between copies.
template <class T>
class BasicLoop {
 public:
  using value_type = T;

  // Empty placeholder (no samples); assign before use.
  BasicLoop() = default;
  BasicLoop(double radius, std::vector<T> samples);

  static BasicLoop constant(double radius, int n, const T& value);
  static BasicLoop from_function(double radius, int n, const std::function<T(cplx)>& f);
  // Samples at N, doubled up to kMaxSamples until tail_ratio() <= tail_tol.
  static BasicLoop from_function_adaptive(double radius, const std::function<T(cplx)>& f,
                                          int n0 = kDefaultSamples, double tail_tol = 1e-10);
  // Builds the loop whose scaled coefficients are `scaled` (index k + N/2).
  static BasicLoop from_scaled_coefficients(double radius, std::vector<T> scaled);

  double radius() const { return radius_; }
  int size() const { return static_cast<int>(samples_.size()); }
  cplx node(int j) const;
  const std::vector<T>& samples() const { return samples_; }
  const T& operator[](int j) const { return samples_[static_cast<std::size_t>(j)]; }

  // c_k = xi_k r^k stored at index k + N/2.
  const std::vector<T>& scaled_coefficients() const;
  T scaled_coefficient(int k) const;
  T laurent_coefficient(int k) const;

  // max |c_k| over |k| >= 3N/8 relative to max |c_k|.
  double tail_ratio() const;
  // sum of |c_k| over k < 0 (divided by r^k, i.e. at unit scale of this circle).
  double negative_mass() const;
  double max_norm() const;

  // Laurent evaluation; exact sample on grid nodes.  Throws
  // NonAnalyticEvaluation when the extrapolated tail at |lambda| exceeds tol.
  T eval(cplx lambda, double tol = kEvalTolerance) const;

  // Same function sampled on the circle of radius `new_radius` (certified).
  BasicLoop transfer(double new_radius, double tol = kEvalTolerance) const;

 private:
  struct CoeffCache {
    std::once_flag once;
    std::vector<T> scaled;
  };

  double radius_ = 1.0;
  std::vector<T> samples_;
  std::shared_ptr<CoeffCache> cache_;
};

using Loop = BasicLoop<Mat2>;
using ScalarLoop = BasicLoop<cplx>;

bool is_power_of_two(int n);

void check_same_grid(double r1, int n1, double r2, int n2);

template <class T>
void check_same_grid(const BasicLoop<T>& a, const BasicLoop<T>& b) {
  check_same_grid(a.radius(), a.size(), b.radius(), b.size());
}

Loop mul(const Loop& a, const Loop& b);
Loop mul(const ScalarLoop& s, const Loop& a);
ScalarLoop mul(const ScalarLoop& a, const ScalarLoop& b);
Loop add(const Loop& a, const Loop& b);
Loop scale(cplx s, const Loop& a);
Loop inv(const Loop& a);
ScalarLoop inv(const ScalarLoop& a);
ScalarLoop det(const Loop& a);
ScalarLoop trace(const Loop& a);
Loop adjoint_samples(const Loop& a);

// F*(lambda) = conj(F(1/conj(lambda)))^T.
Loop star(const Loop& a);
ScalarLoop star(const ScalarLoop& a);

// Spectral derivative in lambda.
template <class T>
BasicLoop<T> d_lambda(const BasicLoop<T>& a);

// max_j || L*(lambda_j) L(lambda_j) - Id ||_max.
double unitarity_residual(const Loop& a);
// max_j || a_j - b_j ||_max.
double max_distance(const Loop& a, const Loop& b);
double max_distance(const ScalarLoop& a, const ScalarLoop& b);

// Replaces the samples at `missing` by the band-limited least-squares fill
// that minimises the energy in |k| >= N/4.
template <class T>
BasicLoop<T> fill_samples(const BasicLoop<T>& a, std::span<const int> missing);

// Winding number of a scalar loop around 0.
int winding_number(const ScalarLoop& a);

}  // namespace dpw

#include "dpw/laurent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dpw {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double real_at(const ScalarLoop& f, double theta) { return theta_derivative(f, theta, 0).real(); }

}  // namespace

cplx theta_derivative(const ScalarLoop& f, double theta, int p) {
  const auto& c = f.scaled_coefficients();
  const int n = f.size();
  double mx = 0.0;
  for (const auto& v : c) mx = std::max(mx, std::abs(v));
  const double floor = 64.0 * kEps * mx;
  cplx sum = 0.0;
  for (int k = -n / 2; k < n / 2; ++k) {
    const cplx ck = c[k + n / 2];
    if (std::abs(ck) <= floor && k != 0) continue;
    sum += std::pow(cplx(0.0, double(k)), p) * ck * std::polar(1.0, k * theta);
  }
  return sum;
}

std::vector<CircleZero> find_circle_zeros(const ScalarLoop& f, double rel_threshold) {
  if (std::abs(f.radius() - 1.0) > 1e-15)
    throw Error(ErrorCode::InvalidArgument, "zero search needs a loop on the unit circle");
  const int n = f.size();
  double mx = 0.0;
  for (int j = 0; j < n; ++j) mx = std::max(mx, f[j].real());
  const double h = 2.0 * kPi / n;
  std::vector<CircleZero> zeros;
  for (int j = 0; j < n; ++j) {
    const double v = f[j].real();
    const double prev = f[(j + n - 1) % n].real();
    const double next = f[(j + 1) % n].real();
    if (!(v <= prev && v < next) || v > 1e-2 * mx) continue;
    // Newton on f'(theta) = 0
    double theta = j * h;
    for (int it = 0; it < 80; ++it) {
      const double d1 = theta_derivative(f, theta, 1).real();
      const double d2 = theta_derivative(f, theta, 2).real();
      if (!(d2 > 0.0)) break;
      double step = d1 / d2;
      step = std::clamp(step, -h, h);
      theta -= step;
      if (std::abs(step) < 1e-15) break;
    }
    if (real_at(f, theta) > rel_threshold * mx) continue;
    // order from log-growth on both sides
    auto order_at = [&](double th) {
      double est = 0.0;
      for (int side : {-1, 1}) {
        const double f1 = std::max(real_at(f, th + side * h), 1e-300);
        const double f2 = std::max(real_at(f, th + side * 2.0 * h), 1e-300);
        est += std::log(f2 / f1) / std::log(2.0);
      }
      return est / 2.0;
    };
    const double est = order_at(theta);
    const int order = static_cast<int>(std::lround(est));
    if (order < 2 || order % 2 != 0) {
      std::ostringstream os;
      os << "zero near theta = " << theta << " has estimated order " << est;
      throw Error(ErrorCode::ZeroDetectionFailure, os.str());
    }
    // Higher-order zeros: the (order-1)-th derivative has a simple zero there.
    if (order >= 4) {
      double t = theta;
      for (int it = 0; it < 20; ++it) {
        const double a = theta_derivative(f, t, order - 1).real();
        const double b = theta_derivative(f, t, order).real();
        if (b == 0.0) break;
        const double step = a / b;
        if (std::abs(step) > h) break;
        t -= step;
        if (std::abs(step) < 1e-15) break;
      }
      if (std::abs(t - theta) < h && real_at(f, t) <= real_at(f, theta) * 10.0 + 1e-300) theta = t;
    }
    theta = std::fmod(theta, 2.0 * kPi);
    if (theta < 0) theta += 2.0 * kPi;
    bool dup = false;
    for (const auto& z : zeros) {
      const double d = std::abs(std::remainder(z.theta - theta, 2.0 * kPi));
      if (d < 0.5 * h) dup = true;
    }
    if (!dup) zeros.push_back({theta, std::polar(1.0, theta), order});
  }
  return zeros;
}

template <class T>
BasicLoop<T> divide_by_linear(const BasicLoop<T>& g, cplx a) {
  const int n = g.size();
  const double r = g.radius();
  const cplx alpha = a / r;
  // Coefficients at the noise floor are dropped first: repeated division
  // amplifies full-band noise.
  std::vector<T> c = g.scaled_coefficients();
  double mx = 0.0;
  for (const auto& v : c) mx = std::max(mx, loop_detail::norm(v));
  for (auto& v : c)
    if (loop_detail::norm(v) <= 64.0 * kEps * mx) v = loop_detail::zero<T>();
  // P(w) = sum_i p_i w^i with p_i = c_(i - N/2); g = w^(-N/2) P(w).
  std::vector<T> q(static_cast<std::size_t>(n), loop_detail::zero<T>());
  if (std::abs(alpha) <= 1.0) {
    q[n - 2] = c[n - 1];
    for (int i = n - 2; i >= 1; --i) q[i - 1] = c[i] + alpha * q[i];
  } else {
    T prev = loop_detail::zero<T>();
    for (int i = 0; i <= n - 2; ++i) {
      q[i] = (prev - c[i]) / alpha;
      prev = q[i];
    }
  }
  for (auto& v : q) v = v / r;
  return BasicLoop<T>::from_scaled_coefficients(r, std::move(q));
}

template <class T>
BasicLoop<T> shift_up(const BasicLoop<T>& g) {
  std::vector<T> s(g.samples());
  for (int j = 0; j < g.size(); ++j) s[j] = s[j] * g.node(j);
  return BasicLoop<T>(g.radius(), std::move(s));
}

template <class T>
BasicLoop<T> divide_by_abs2(const BasicLoop<T>& g, cplx a) {
  // |lambda - a|^2 = -conj(a) lambda^-1 (lambda - a)^2 on the unit circle
  const BasicLoop<T> q = shift_up(divide_by_linear(divide_by_linear(g, a), a));
  std::vector<T> s(q.samples());
  for (auto& v : s) v = v * (-a);
  return BasicLoop<T>(g.radius(), std::move(s));
}

template ScalarLoop divide_by_linear<cplx>(const ScalarLoop&, cplx);
template Loop divide_by_linear<Mat2>(const Loop&, cplx);
template ScalarLoop divide_by_abs2<cplx>(const ScalarLoop&, cplx);
template Loop divide_by_abs2<Mat2>(const Loop&, cplx);
template ScalarLoop shift_up<cplx>(const ScalarLoop&);
template Loop shift_up<Mat2>(const Loop&);

}  // namespace dpw

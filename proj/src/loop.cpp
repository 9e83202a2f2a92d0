#include "dpw/loop.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dpw {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// c_k = (1/N) sum_j x_j exp(-2 pi i j k / N), returned in centred order.
std::vector<cplx> forward_centred(const std::vector<cplx>& x) {
  static thread_local Eigen::FFT<double> fft;
  const int n = static_cast<int>(x.size());
  std::vector<cplx> raw;
  fft.fwd(raw, x);
  std::vector<cplx> out(x.size());
  for (int k = -n / 2; k < n / 2; ++k) out[k + n / 2] = raw[(k + n) % n] / double(n);
  return out;
}

std::vector<cplx> inverse_centred(const std::vector<cplx>& c) {
  static thread_local Eigen::FFT<double> fft;
  const int n = static_cast<int>(c.size());
  std::vector<cplx> raw(c.size());
  for (int k = -n / 2; k < n / 2; ++k) raw[(k + n) % n] = c[k + n / 2] * double(n);
  std::vector<cplx> out;
  fft.inv(out, raw);
  return out;
}

template <class T>
std::vector<T> to_coeffs(const std::vector<T>& samples);

template <>
std::vector<cplx> to_coeffs<cplx>(const std::vector<cplx>& samples) {
  return forward_centred(samples);
}

template <>
std::vector<Mat2> to_coeffs<Mat2>(const std::vector<Mat2>& samples) {
  const std::size_t n = samples.size();
  std::vector<Mat2> out(n);
  std::vector<cplx> ch(n);
  for (int e = 0; e < 4; ++e) {
    for (std::size_t j = 0; j < n; ++j) ch[j] = samples[j](e / 2, e % 2);
    const auto c = forward_centred(ch);
    for (std::size_t j = 0; j < n; ++j) out[j](e / 2, e % 2) = c[j];
  }
  return out;
}

template <class T>
std::vector<T> to_samples(const std::vector<T>& coeffs);

template <>
std::vector<cplx> to_samples<cplx>(const std::vector<cplx>& coeffs) {
  return inverse_centred(coeffs);
}

template <>
std::vector<Mat2> to_samples<Mat2>(const std::vector<Mat2>& coeffs) {
  const std::size_t n = coeffs.size();
  std::vector<Mat2> out(n);
  std::vector<cplx> ch(n);
  for (int e = 0; e < 4; ++e) {
    for (std::size_t j = 0; j < n; ++j) ch[j] = coeffs[j](e / 2, e % 2);
    const auto s = inverse_centred(ch);
    for (std::size_t j = 0; j < n; ++j) out[j](e / 2, e % 2) = s[j];
  }
  return out;
}

struct Band {
  int kmin;  // most negative retained power
  int kmax;  // largest retained power
  double floor;
  double max_coeff;
};

template <class T>
Band significant_band(const std::vector<T>& c) {
  const int n = static_cast<int>(c.size());
  double mx = 0.0;
  for (const auto& v : c) mx = std::max(mx, loop_detail::norm(v));
  const double floor = 64.0 * kEps * mx + 1e-300;
  Band b{0, 0, floor, mx};
  for (int k = 0; k < n / 2; ++k)
    if (loop_detail::norm(c[k + n / 2]) > floor) b.kmax = k;
  for (int k = -1; k >= -n / 2; --k)
    if (loop_detail::norm(c[k + n / 2]) > floor) b.kmin = k;
  return b;
}

// Upper bound of the truncation + amplified-noise error when the scaled
// series is evaluated at modulus ratio rho, on one side of the band.  The
// tail beyond the band is extrapolated with the mean decay rate between the
// largest coefficient on that side and the noise floor.
template <class T>
double side_error(const std::vector<T>& c, int edge, int direction, double rho, double floor) {
  // direction = +1 for positive powers (rho > 1 amplifies), -1 for negative.
  const int n = static_cast<int>(c.size());
  const double growth = direction > 0 ? rho : 1.0 / rho;
  if (growth <= 1.0) return 0.0;
  const int last = std::abs(edge);
  const int window_edge = direction > 0 ? n / 2 - 1 : n / 2;
  if (last >= window_edge - 1) return std::numeric_limits<double>::infinity();
  int peak = 0;
  double peak_val = 0.0;
  for (int k = 0; k <= last; ++k) {
    const double v = loop_detail::norm(c[direction * k + n / 2]);
    if (v > peak_val) {
      peak_val = v;
      peak = k;
    }
  }
  if (peak_val <= floor) return 0.0;
  const double sigma = std::pow(floor / peak_val, 1.0 / double(last + 1 - peak));
  const double q = sigma * growth;
  if (q >= 1.0) return std::numeric_limits<double>::infinity();
  const double tail = floor * std::pow(growth, last + 1) / (1.0 - q);
  const double noise = floor * std::pow(growth, last) * (last + 1);
  return tail + noise;
}

}  // namespace

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void check_same_grid(double r1, int n1, double r2, int n2) {
  if (n1 != n2 || std::abs(r1 - r2) > 1e-14 * std::max(r1, r2)) {
    std::ostringstream os;
    os << "loops on (r=" << r1 << ", N=" << n1 << ") and (r=" << r2 << ", N=" << n2 << ")";
    throw Error(ErrorCode::GridMismatch, os.str());
  }
}

template <class T>
BasicLoop<T>::BasicLoop(double radius, std::vector<T> samples)
    : radius_(radius), samples_(std::move(samples)), cache_(std::make_shared<CoeffCache>()) {
  if (!(radius > 0.0) || radius > 1.0 / kEps) throw Error(ErrorCode::InvalidArgument, "loop radius must be positive");
  const int n = size();
  if (n < 8 || !is_power_of_two(n))
    throw Error(ErrorCode::InvalidArgument, "sample count must be a power of two >= 8, got " + std::to_string(n));
  for (int j = 0; j < n; ++j)
    if (!loop_detail::finite(samples_[j]))
      throw Error(ErrorCode::InvalidArgument, "non-finite loop sample at index " + std::to_string(j));
}

template <class T>
BasicLoop<T> BasicLoop<T>::constant(double radius, int n, const T& value) {
  return BasicLoop(radius, std::vector<T>(static_cast<std::size_t>(n), value));
}

template <class T>
BasicLoop<T> BasicLoop<T>::from_function(double radius, int n, const std::function<T(cplx)>& f) {
  std::vector<T> s(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) s[j] = f(radius * std::polar(1.0, 2.0 * kPi * j / n));
  return BasicLoop(radius, std::move(s));
}

template <class T>
BasicLoop<T> BasicLoop<T>::from_function_adaptive(double radius, const std::function<T(cplx)>& f, int n0,
                                                  double tail_tol) {
  int n = n0;
  for (;;) {
    BasicLoop l = from_function(radius, n, f);
    if (l.tail_ratio() <= tail_tol || n >= kMaxSamples) return l;
    n *= 2;
  }
}

template <class T>
BasicLoop<T> BasicLoop<T>::from_scaled_coefficients(double radius, std::vector<T> scaled) {
  auto samples = to_samples<T>(scaled);
  BasicLoop l(radius, std::move(samples));
  std::call_once(l.cache_->once, [&] { l.cache_->scaled = std::move(scaled); });
  return l;
}

template <class T>
cplx BasicLoop<T>::node(int j) const {
  return radius_ * std::polar(1.0, 2.0 * kPi * j / size());
}

template <class T>
const std::vector<T>& BasicLoop<T>::scaled_coefficients() const {
  std::call_once(cache_->once, [this] { cache_->scaled = to_coeffs<T>(samples_); });
  return cache_->scaled;
}

template <class T>
T BasicLoop<T>::scaled_coefficient(int k) const {
  const int n = size();
  if (k < -n / 2 || k >= n / 2) return loop_detail::zero<T>();
  return scaled_coefficients()[k + n / 2];
}

template <class T>
T BasicLoop<T>::laurent_coefficient(int k) const {
  return scaled_coefficient(k) * std::pow(radius_, -k);
}

template <class T>
double BasicLoop<T>::tail_ratio() const {
  const auto& c = scaled_coefficients();
  const int n = size();
  double mx = 0.0, tail = 0.0;
  for (int k = -n / 2; k < n / 2; ++k) {
    const double v = loop_detail::norm(c[k + n / 2]);
    mx = std::max(mx, v);
    if (std::abs(k) >= 3 * n / 8) tail = std::max(tail, v);
  }
  return mx > 0.0 ? tail / mx : 0.0;
}

template <class T>
double BasicLoop<T>::negative_mass() const {
  double s = 0.0;
  for (int k = -size() / 2; k < 0; ++k) s += loop_detail::norm(scaled_coefficient(k));
  return s;
}

template <class T>
double BasicLoop<T>::max_norm() const {
  double m = 0.0;
  for (const auto& v : samples_) m = std::max(m, loop_detail::norm(v));
  return m;
}

template <class T>
T BasicLoop<T>::eval(cplx lambda, double tol) const {
  if (lambda == 0.0) throw Error(ErrorCode::ZeroLambda, "evaluation at lambda = 0");
  const int n = size();
  const double rho = std::abs(lambda) / radius_;
  if (std::abs(rho - 1.0) < 1e-13) {
    double theta = std::arg(lambda);
    if (theta < 0) theta += 2.0 * kPi;
    const int j = static_cast<int>(std::lround(theta * n / (2.0 * kPi))) % n;
    if (std::abs(lambda - node(j)) < 1e-14 * radius_) return samples_[j];
  }
  const auto& c = scaled_coefficients();
  const cplx w = lambda / radius_;
  if (std::abs(rho - 1.0) < 1e-13) {
    T sum = loop_detail::zero<T>();
    for (int k = -n / 2; k < n / 2; ++k) sum += c[k + n / 2] * std::pow(w, k);
    return sum;
  }
  const Band b = significant_band(c);
  const double err = side_error(c, b.kmax, +1, rho, b.floor) + side_error(c, b.kmin, -1, rho, b.floor);
  T sum = loop_detail::zero<T>();
  for (int k = b.kmin; k <= b.kmax; ++k) sum += c[k + n / 2] * std::pow(w, k);
  const double scale = std::max(1.0, loop_detail::norm(sum));
  if (!(err <= tol * scale)) {
    std::ostringstream os;
    os << "|lambda| = " << std::abs(lambda) << " from circle r = " << radius_ << ": tail estimate " << err
       << " (band [" << b.kmin << ", " << b.kmax << "] of N = " << n << ")";
    throw Error(ErrorCode::NonAnalyticEvaluation, os.str());
  }
  return sum;
}

template <class T>
BasicLoop<T> BasicLoop<T>::transfer(double new_radius, double tol) const {
  if (std::abs(new_radius - radius_) < 1e-15) return *this;
  const int n = size();
  const auto& c = scaled_coefficients();
  const double rho = new_radius / radius_;
  const Band b = significant_band(c);
  const double err = side_error(c, b.kmax, +1, rho, b.floor) + side_error(c, b.kmin, -1, rho, b.floor);
  std::vector<T> out(c.size(), loop_detail::zero<T>());
  double mx = 0.0;
  for (int k = b.kmin; k <= b.kmax; ++k) {
    out[k + n / 2] = c[k + n / 2] * std::pow(rho, k);
    mx = std::max(mx, loop_detail::norm(out[k + n / 2]));
  }
  if (!(err <= tol * std::max(1.0, mx))) {
    std::ostringstream os;
    os << "transfer from r = " << radius_ << " to r = " << new_radius << ": tail estimate " << err;
    throw Error(ErrorCode::NonAnalyticEvaluation, os.str());
  }
  return from_scaled_coefficients(new_radius, std::move(out));
}

template class BasicLoop<cplx>;
template class BasicLoop<Mat2>;

Loop mul(const Loop& a, const Loop& b) {
  check_same_grid(a, b);
  std::vector<Mat2> s(a.size());
  for (int j = 0; j < a.size(); ++j) s[j] = a[j] * b[j];
  return Loop(a.radius(), std::move(s));
}

Loop mul(const ScalarLoop& f, const Loop& a) {
  check_same_grid(f.radius(), f.size(), a.radius(), a.size());
  std::vector<Mat2> s(a.size());
  for (int j = 0; j < a.size(); ++j) s[j] = f[j] * a[j];
  return Loop(a.radius(), std::move(s));
}

ScalarLoop mul(const ScalarLoop& a, const ScalarLoop& b) {
  check_same_grid(a, b);
  std::vector<cplx> s(a.size());
  for (int j = 0; j < a.size(); ++j) s[j] = a[j] * b[j];
  return ScalarLoop(a.radius(), std::move(s));
}

Loop add(const Loop& a, const Loop& b) {
  check_same_grid(a, b);
  std::vector<Mat2> s(a.size());
  for (int j = 0; j < a.size(); ++j) s[j] = a[j] + b[j];
  return Loop(a.radius(), std::move(s));
}

Loop scale(cplx f, const Loop& a) {
  std::vector<Mat2> s(a.size());
  for (int j = 0; j < a.size(); ++j) s[j] = f * a[j];
  return Loop(a.radius(), std::move(s));
}

Loop inv(const Loop& a) {
  std::vector<Mat2> s(a.size());
  double worst = std::numeric_limits<double>::infinity();
  int worst_j = 0;
  for (int j = 0; j < a.size(); ++j) {
    const cplx d = a[j].determinant();
    const double scale = std::max(1e-300, a[j].squaredNorm());
    if (std::abs(d) / scale < worst) {
      worst = std::abs(d) / scale;
      worst_j = j;
    }
    if (std::abs(d) <= 1e-14 * scale) {
      std::ostringstream os;
      os << "singular sample at lambda_" << j << " = " << a.node(j) << ", |det| = " << std::abs(d);
      throw Error(ErrorCode::SingularSample, os.str());
    }
    s[j] = a[j].inverse();
  }
  (void)worst_j;
  return Loop(a.radius(), std::move(s));
}

ScalarLoop inv(const ScalarLoop& a) {
  std::vector<cplx> s(a.size());
  for (int j = 0; j < a.size(); ++j) {
    if (std::abs(a[j]) < 1e-300) {
      std::ostringstream os;
      os << "zero sample at lambda_" << j << " = " << a.node(j);
      throw Error(ErrorCode::SingularSample, os.str());
    }
    s[j] = 1.0 / a[j];
  }
  return ScalarLoop(a.radius(), std::move(s));
}

ScalarLoop det(const Loop& a) {
  std::vector<cplx> s(a.size());
  for (int j = 0; j < a.size(); ++j) s[j] = a[j].determinant();
  return ScalarLoop(a.radius(), std::move(s));
}

ScalarLoop trace(const Loop& a) {
  std::vector<cplx> s(a.size());
  for (int j = 0; j < a.size(); ++j) s[j] = a[j].trace();
  return ScalarLoop(a.radius(), std::move(s));
}

Loop adjoint_samples(const Loop& a) {
  std::vector<Mat2> s(a.size());
  for (int j = 0; j < a.size(); ++j) s[j] = a[j].adjoint();
  return Loop(a.radius(), std::move(s));
}

Loop star(const Loop& a) {
  // On C_r the reflected point 1/conj(lambda_j) lies on C_{1/r} at the same angle.
  const Loop reflected = std::abs(a.radius() - 1.0) < 1e-15 ? a : a.transfer(1.0 / a.radius());
  std::vector<Mat2> s(a.size());
  for (int j = 0; j < a.size(); ++j) s[j] = reflected[j].adjoint();
  return Loop(a.radius(), std::move(s));
}

ScalarLoop star(const ScalarLoop& a) {
  const ScalarLoop reflected = std::abs(a.radius() - 1.0) < 1e-15 ? a : a.transfer(1.0 / a.radius());
  std::vector<cplx> s(a.size());
  for (int j = 0; j < a.size(); ++j) s[j] = std::conj(reflected[j]);
  return ScalarLoop(a.radius(), std::move(s));
}

template <class T>
BasicLoop<T> d_lambda(const BasicLoop<T>& a) {
  const int n = a.size();
  if (a.tail_ratio() > 1e-8) {
    std::ostringstream os;
    os << "spectral derivative of an unresolved loop (tail ratio " << a.tail_ratio() << ", N = " << n << ")";
    throw Error(ErrorCode::NonAnalyticEvaluation, os.str());
  }
  const auto& c = a.scaled_coefficients();
  std::vector<T> d(c.size(), loop_detail::zero<T>());
  // xi_k lambda^k -> k xi_k lambda^(k-1); scaled: c'_(k-1) = k c_k / r
  for (int k = -n / 2 + 1; k < n / 2; ++k) d[(k - 1) + n / 2] = c[k + n / 2] * (double(k) / a.radius());
  return BasicLoop<T>::from_scaled_coefficients(a.radius(), std::move(d));
}

template Loop d_lambda<Mat2>(const Loop&);
template ScalarLoop d_lambda<cplx>(const ScalarLoop&);

double unitarity_residual(const Loop& a) {
  const Loop s = star(a);
  double r = 0.0;
  for (int j = 0; j < a.size(); ++j) r = std::max(r, max_abs(s[j] * a[j] - Mat2::Identity()));
  return r;
}

double max_distance(const Loop& a, const Loop& b) {
  check_same_grid(a, b);
  double r = 0.0;
  for (int j = 0; j < a.size(); ++j) r = std::max(r, max_abs(a[j] - b[j]));
  return r;
}

double max_distance(const ScalarLoop& a, const ScalarLoop& b) {
  check_same_grid(a, b);
  double r = 0.0;
  for (int j = 0; j < a.size(); ++j) r = std::max(r, std::abs(a[j] - b[j]));
  return r;
}

template <class T>
BasicLoop<T> fill_samples(const BasicLoop<T>& a, std::span<const int> missing) {
  if (missing.empty()) return a;
  const int n = a.size();
  const int m = static_cast<int>(missing.size());
  std::vector<T> known = a.samples();
  for (int idx : missing) known[idx] = loop_detail::zero<T>();
  const auto c = to_coeffs<T>(known);
  std::vector<int> high;
  for (int k = -n / 2; k < n / 2; ++k)
    if (std::abs(k) >= n / 4) high.push_back(k);
  Eigen::MatrixXcd design(high.size(), m);
  for (std::size_t row = 0; row < high.size(); ++row)
    for (int i = 0; i < m; ++i)
      design(row, i) = std::polar(1.0, -2.0 * kPi * double(high[row]) * missing[i] / n) / double(n);
  const auto qr = design.colPivHouseholderQr();
  std::vector<T> filled = a.samples();
  constexpr int channels = std::is_same_v<T, Mat2> ? 4 : 1;
  for (int e = 0; e < channels; ++e) {
    Eigen::VectorXcd rhs(high.size());
    for (std::size_t row = 0; row < high.size(); ++row) {
      const T& v = c[high[row] + n / 2];
      if constexpr (std::is_same_v<T, Mat2>) rhs(row) = -v(e / 2, e % 2);
      else rhs(row) = -v;
    }
    const Eigen::VectorXcd sol = qr.solve(rhs);
    for (int i = 0; i < m; ++i) {
      if constexpr (std::is_same_v<T, Mat2>) filled[missing[i]](e / 2, e % 2) = sol(i);
      else filled[missing[i]] = sol(i);
    }
  }
  return BasicLoop<T>(a.radius(), std::move(filled));
}

template Loop fill_samples<Mat2>(const Loop&, std::span<const int>);
template ScalarLoop fill_samples<cplx>(const ScalarLoop&, std::span<const int>);

int winding_number(const ScalarLoop& a) {
  double total = 0.0;
  const int n = a.size();
  for (int j = 0; j < n; ++j) total += std::arg(a[(j + 1) % n] / a[j]);
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

}  // namespace dpw

#include "dpw/unitarize.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "dpw/laurent.hpp"

namespace dpw {

double goldman_T(double t0, double t1, double tinf) {
  return 1.0 - t0 * t0 - t1 * t1 - tinf * tinf + 2.0 * t0 * t1 * tinf;
}

double goldman_positive_fraction(const Loop& H0, const Loop& H1, const Loop& Hinf) {
  int pos = 0;
  for (int j = 0; j < H0.size(); ++j) {
    const double T = goldman_T(0.5 * H0[j].trace().real(), 0.5 * H1[j].trace().real(), 0.5 * Hinf[j].trace().real());
    if (T > 0) ++pos;
  }
  return double(pos) / H0.size();
}

namespace {

using Mat4 = Eigen::Matrix4cd;
using Vec4c = Eigen::Vector4cd;

Mat2 unvec(const Vec4c& x) { return mat2(x(0), x(1), x(2), x(3)); }

// Row-major vec: vec(X H) = (I kron H^T) x, vec(K X) = (K kron I) x.
Mat4 block(const Mat2& H) {
  const Mat2 K = H.adjoint().inverse();
  const Mat2 Ht = H.transpose();
  Mat4 m = Mat4::Zero();
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      m.block<2, 2>(2 * r, 2 * c) -= K(r, c) * Mat2::Identity();
      if (r == c) m.block<2, 2>(2 * r, 2 * c) += Ht;
    }
  return m;
}

double ln_residual(const std::vector<Mat2>& H, const Mat2& X) {
  double r = 0.0;
  for (const auto& h : H) r = std::max(r, max_abs(X * h - h.adjoint().inverse() * X));
  return r;
}

std::vector<Mat2> at(const std::vector<Loop>& H, int j) {
  std::vector<Mat2> m;
  m.reserve(H.size());
  for (const auto& h : H) m.push_back(h[j]);
  return m;
}

cplx inner(const Mat2& a, const Mat2& b) { return (a.adjoint() * b).trace(); }

}  // namespace

KernelLine kernel_Ln(const std::vector<Mat2>& H) {
  if (H.empty()) throw Error(ErrorCode::InvalidArgument, "empty family");
  if (H.size() >= 2) {
    double scale = 0.0, comm = 0.0;
    for (const auto& h : H) scale = std::max(scale, max_abs(h));
    for (std::size_t i = 0; i < H.size(); ++i)
      for (std::size_t k = i + 1; k < H.size(); ++k) comm = std::max(comm, max_abs(H[i] * H[k] - H[k] * H[i]));
    if (comm <= 1e-10 * scale * scale) throw Error(ErrorCode::DegenerateFamily, "all pairs commute at this sample");
  }
  Eigen::MatrixXcd M(4 * static_cast<Eigen::Index>(H.size()), 4);
  for (std::size_t i = 0; i < H.size(); ++i) M.block<4, 4>(4 * static_cast<Eigen::Index>(i), 0) = block(H[i]);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullV);
  KernelLine out;
  const auto& s = svd.singularValues();
  for (int i = 0; i < 4; ++i) out.sigma[i] = s(i);
  out.X = unvec(svd.matrixV().col(3));
  const double zero = 1e-9 * std::max(s(0), 1e-300);
  int dim = 0;
  for (int i = 0; i < 4; ++i)
    if (s(i) <= zero) ++dim;
  if (dim == 0 && s(2) >= 1e3 * s(3)) dim = 1;
  out.dim = dim;
  return out;
}

KernelLine kernel_Ln(const std::vector<Loop>& H, int j) { return kernel_Ln(at(H, j)); }

KernelSection build_section(const std::vector<Loop>& H) {
  if (H.empty()) throw Error(ErrorCode::InvalidArgument, "empty family");
  const int n = H[0].size();
  for (const auto& h : H) {
    check_same_grid(H[0], h);
    if (std::abs(h.radius() - 1.0) > 1e-15) throw Error(ErrorCode::InvalidArgument, "monodromy must live on the unit circle");
  }
  std::vector<Mat2> x(n, Mat2::Zero());
  std::vector<bool> ok(n, false);
  int degenerate = 0;
  KernelSection sec;
  for (int j = 0; j < n; ++j) {
    try {
      const auto k = kernel_Ln(H, j);
      if (k.dim == 1) {
        x[j] = k.X;
        ok[j] = true;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateFamily) throw;
      ++degenerate;
    }
    if (!ok[j]) sec.exceptional.push_back(j);
  }
  if (static_cast<int>(sec.exceptional.size()) > kExceptionalBudget) {
    std::ostringstream os;
    os << sec.exceptional.size() << " of " << n << " samples lack a one-dimensional kernel (" << degenerate
       << " with commuting monodromy)";
    throw Error(degenerate > kExceptionalBudget ? ErrorCode::DegenerateFamily : ErrorCode::KernelJump, os.str());
  }
  // nearest-phase continuation
  int first = -1, prev = -1;
  for (int j = 0; j < n; ++j) {
    if (!ok[j]) continue;
    if (prev >= 0) {
      const cplx c = inner(x[prev], x[j]);
      if (std::abs(c) > 0.0) x[j] *= std::conj(c) / std::abs(c);
    } else {
      first = j;
    }
    prev = j;
  }
  if (first < 0) throw Error(ErrorCode::KernelJump, "no sample has a one-dimensional kernel");
  // spread the closing phase mismatch linearly around the circle
  const cplx close = inner(x[prev], x[first]);
  sec.holonomy = std::arg(close);
  for (int j = 0; j < n; ++j) x[j] *= std::polar(1.0, sec.holonomy * (j - first) / n);
  sec.phase_aligned = true;
  Loop X(1.0, std::move(x));
  if (!sec.exceptional.empty()) {
    X = fill_samples(X, sec.exceptional);
    sec.cleaned = true;
  }
  if (X.tail_ratio() > 1e-3) {
    std::ostringstream os;
    os << "aligned kernel section has Laurent tail ratio " << X.tail_ratio();
    throw Error(ErrorCode::AlignmentFailure, os.str());
  }
  for (int j = 0; j < n; ++j)
    if (ok[j]) sec.residual = std::max(sec.residual, ln_residual(at(H, j), X[j]) / std::max(max_abs(X[j]), 1e-300));
  sec.X = std::move(X);
  return sec;
}

KernelSection symmetrize_section(const KernelSection& X1) {
  const Loop& X = X1.X;
  const int n = X.size();
  // alpha maximizing the smallest sample norm of alpha X + (alpha X)^*
  double best = -1.0;
  std::vector<Mat2> x2;
  for (int k = 0; k < 8; ++k) {
    const cplx alpha = 0.5 * std::polar(1.0, kPi * k / 4.0);
    std::vector<Mat2> cand(n);
    double mn = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      cand[j] = alpha * X[j] + std::conj(alpha) * X[j].adjoint();
      mn = std::min(mn, cand[j].norm());
    }
    if (mn > best) {
      best = mn;
      x2 = std::move(cand);
    }
  }
  double scale = 0.0;
  for (const auto& m : x2) scale = std::max(scale, m.norm());
  if (!(scale > 1e-12)) throw Error(ErrorCode::AllZeroSymmetrization, "alpha X + (alpha X)^* vanishes for all 8 phases");
  // definiteness sign per sample from the trace, with a hysteresis band
  std::vector<cplx> tr(n);
  for (int j = 0; j < n; ++j) tr[j] = x2[j].trace().real();
  const ScalarLoop t(1.0, tr);
  const double band = 1e-9 * scale;
  std::vector<std::pair<int, int>> signs;  // (sample, sign)
  for (int j = 0; j < n; ++j) {
    const double v = tr[j].real();
    if (std::abs(v) > band) signs.emplace_back(j, v > 0 ? 1 : -1);
  }
  if (signs.empty()) throw Error(ErrorCode::AllZeroSymmetrization, "symmetrized section has vanishing trace");
  std::vector<double> roots;
  for (std::size_t i = 0; i < signs.size(); ++i) {
    const auto [ja, sa] = signs[i];
    const auto [jb, sb] = signs[(i + 1) % signs.size()];
    if (sa == sb) continue;
    double lo = 2.0 * kPi * ja / n, hi = 2.0 * kPi * jb / n;
    if (hi <= lo) hi += 2.0 * kPi;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double v = theta_derivative(t, mid, 0).real();
      if ((v > 0 ? 1 : -1) == sa) lo = mid;
      else hi = mid;
    }
    roots.push_back(0.5 * (lo + hi));
  }
  if (roots.size() % 2 != 0) {
    std::ostringstream os;
    os << roots.size() << " definiteness switches";
    throw Error(ErrorCode::OddSwitchCount, os.str());
  }
  int plus = -1;
  for (const auto& [j, s] : signs)
    if (s > 0) {
      plus = j;
      break;
    }
  const int m = static_cast<int>(roots.size());
  cplx phat = 1.0;
  for (double r : roots) phat *= std::polar(1.0, r);
  const cplx phat_root = std::sqrt(phat);
  auto f = [&](cplx l) {
    cplx v = std::pow(l, -m / 2) / phat_root;
    for (double r : roots) v *= l - std::polar(1.0, r);
    return v;
  };
  // with no switches and a negative definite section, g = -1
  const cplx fp = plus >= 0 ? f(X.node(plus)) : -f(X.node(signs[0].first));
  KernelSection out = X1;
  std::vector<Mat2> g(n);
  for (int j = 0; j < n; ++j) {
    const double gj = (f(X.node(j)) / fp).real();
    const Mat2 h = gj * x2[j];
    g[j] = 0.5 * (h + h.adjoint());
  }
  out.X = Loop(1.0, std::move(g));
  out.symmetrized = true;
  out.switches = m;
  return out;
}

double conjugation_residual(const Loop& C, const Loop& H, const std::vector<int>& skip) {
  double r = 0.0;
  for (int j = 0; j < H.size(); ++j) {
    if (std::find(skip.begin(), skip.end(), j) != skip.end()) continue;
    const Mat2 k = C[j] * H[j] * C[j].inverse();
    r = std::max(r, max_abs(k.adjoint() * k - identity2()));
  }
  return r;
}

UnitarizerResult unitarizer(const std::vector<Loop>& H, double tol) {
  UnitarizerResult res;
  res.section = symmetrize_section(build_section(H));
  const auto mb = birkhoff_matrix_semidefinite(res.section.X);
  res.C = mb.C;
  res.birkhoff_residual = mb.residual;
  const int n = res.C.size();
  double dmax = 0.0;
  std::vector<double> d(n);
  for (int j = 0; j < n; ++j) dmax = std::max(dmax, d[j] = std::abs(res.C[j].determinant()));
  for (int j = 0; j < n; ++j)
    if (d[j] < 1e-6 * dmax) res.exceptional.push_back(j);
  if (static_cast<int>(res.exceptional.size()) > kExceptionalBudget) {
    std::ostringstream os;
    os << "C is singular at " << res.exceptional.size() << " samples";
    throw Error(ErrorCode::UnitarizationResidualTooLarge, os.str());
  }
  for (const auto& h : H) {
    std::vector<Mat2> k(n);
    for (int j = 0; j < n; ++j) {
      if (std::find(res.exceptional.begin(), res.exceptional.end(), j) != res.exceptional.end()) k[j] = identity2();
      else k[j] = res.C[j] * h[j] * res.C[j].inverse();
    }
    Loop K(1.0, std::move(k));
    if (!res.exceptional.empty()) K = fill_samples(K, res.exceptional);
    res.residual = std::max(res.residual, unitarity_residual(K));
    res.tail = std::max(res.tail, K.tail_ratio());
    res.conjugated.push_back(std::move(K));
  }
  // certified annulus: r-unitarity K^* K = Id on C_r
  res.certified_radius = 1.0;
  for (int step = 1; step <= 50; ++step) {
    const double r = 1.0 - 0.01 * step;
    bool good = true;
    try {
      for (const auto& K : res.conjugated) {
        const Loop Kr = K.transfer(r, 1e-8);
        if (unitarity_residual(Kr) > 1e-6) good = false;
      }
    } catch (const Error&) {
      good = false;
    }
    if (!good) break;
    res.certified_radius = r;
  }
  if (res.residual > tol) {
    std::ostringstream os;
    os << "max unitarity residual of C H C^-1 is " << res.residual << " (tol " << tol << ")";
    throw Error(ErrorCode::UnitarizationResidualTooLarge, os.str());
  }
  return res;
}

}  // namespace dpw

#pragma once

#include <vector>

#include "dpw/loop.hpp"

namespace dpw {

// A zero of a nonnegative function on the unit circle.
struct CircleZero {
  double theta;  // in [0, 2 pi)
  cplx point;    // exp(i theta)
  int order;     // even for semidefinite input
};

// Zeros of a real nonnegative loop on the unit circle: local minima below
// rel_threshold * max f, refined by Newton on f'(theta), with the order
// estimated from the growth of log f at neighbouring points.  Odd orders
// raise ZeroDetectionFailure.
std::vector<CircleZero> find_circle_zeros(const ScalarLoop& f, double rel_threshold = 1e-8);

// d^p/dtheta^p of the Laurent series of f at lambda = r exp(i theta).
cplx theta_derivative(const ScalarLoop& f, double theta, int p);

// g / (lambda - a) for g vanishing at a, by synthetic division of the
// truncated Laurent series; the remainder is dropped.
template <class T>
BasicLoop<T> divide_by_linear(const BasicLoop<T>& g, cplx a);

// g / |lambda - a|^2 on the unit circle, |a| = 1.
template <class T>
BasicLoop<T> divide_by_abs2(const BasicLoop<T>& g, cplx a);

// Multiplies every sample by lambda_j.
template <class T>
BasicLoop<T> shift_up(const BasicLoop<T>& g);

}  // namespace dpw

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <queue>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include "brl/errors.hpp"
#include "brl/numeric_policy.hpp"

namespace brl {

template <class T>
struct QuadratureResult {
  T value{};
  double error = 0.0;
};

// Global adaptive Gauss-Kronrod (G7/K15) on [a, b]. Bisects the worst segment until the summed
// |K15 - G7| estimate is below max(quad_abs, quad_rel * |I|).
template <class F>
auto integrate(F&& f, double a, double b, const NumericPolicy& policy = {})
    -> QuadratureResult<decltype(f(a))> {
  using T = decltype(f(a));
  using rule = boost::math::quadrature::gauss_kronrod<double, 15>;
  if (a == b) return {T{}, 0.0};
  if (a > b) {
    auto r = integrate(f, b, a, policy);
    return {-r.value, r.error};
  }
  struct Segment {
    double lo, hi;
    T value;
    double error;
  };
  auto eval = [&f](double lo, double hi) {
    double err = 0.0;
    T v = rule::integrate(f, lo, hi, 0, 0.0, &err);
    // With zero depth Boost reports the estimate on [-1, 1]; map it back to [lo, hi].
    err *= 0.5 * (hi - lo);
    if (!std::isfinite(std::abs(v))) throw IntegrationError("integrate: non-finite integrand", INFINITY);
    return Segment{lo, hi, v, err};
  };
  auto worse = [](const Segment& x, const Segment& y) { return x.error < y.error; };
  std::priority_queue<Segment, std::vector<Segment>, decltype(worse)> heap(worse);
  heap.push(eval(a, b));
  T total = heap.top().value;
  double total_error = heap.top().error;
  auto target = [&] { return std::max(policy.quad_abs, policy.quad_rel * std::abs(total)); };
  while (total_error > target()) {
    if (static_cast<int>(heap.size()) >= policy.quad_max_segments) {
      throw IntegrationError("integrate: refinement limit reached", total_error);
    }
    const Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) throw IntegrationError("integrate: segment underflow", total_error);
    Segment left = eval(worst.lo, mid);
    Segment right = eval(mid, worst.hi);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed the running-update rounding.
  T sum{};
  double err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return {sum, err};
}

template <class F>
auto integral(F&& f, double a, double b, const NumericPolicy& policy = {}) {
  return integrate(std::forward<F>(f), a, b, policy).value;
}

// Real integrand on [a, inf).
template <class F>
double integrate_to_infinity(F&& f, double a, const NumericPolicy& policy = {}) {
  boost::math::quadrature::exp_sinh<double> rule;
  double err = 0.0;
  double l1 = 0.0;
  const double v = rule.integrate([&](double u) { return f(a + u); }, policy.quad_rel, &err, &l1);
  if (!std::isfinite(v) || err > std::max(policy.quad_abs, 10.0 * policy.quad_rel * std::abs(v))) {
    throw IntegrationError("integrate_to_infinity: no convergence", err);
  }
  return v;
}

// Half-line Fourier transforms  int_0^inf f(x) cos(w x) dx  and the sine analogue.
// The Ooura tables grow lazily, so access is serialized.
class FourierHalfLine {
 public:
  explicit FourierHalfLine(double relative_tolerance = 1e-12)
      : cos_(relative_tolerance), sin_(relative_tolerance) {}

  template <class F>
  double cos_transform(F&& f, double w) const {
    std::lock_guard lock(mutex_);
    const auto [v, rel] = cos_.integrate(f, w);
    check(v, rel);
    return v;
  }

  template <class F>
  double sin_transform(F&& f, double w) const {
    std::lock_guard lock(mutex_);
    const auto [v, rel] = sin_.integrate(f, w);
    check(v, rel);
    return v;
  }

 private:
  static void check(double v, double rel) {
    if (!std::isfinite(v) || rel > 1e-7) throw IntegrationError("Fourier transform: no convergence", rel * std::abs(v));
  }

  mutable std::mutex mutex_;
  mutable boost::math::quadrature::ooura_fourier_cos<double> cos_;
  mutable boost::math::quadrature::ooura_fourier_sin<double> sin_;
};

}  // namespace brl

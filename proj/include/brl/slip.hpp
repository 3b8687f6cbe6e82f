#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "brl/errors.hpp"
#include "brl/quadrature.hpp"

namespace brl {

// Scalar decay d rho/dt = -F(t) rho versus the frozen d rho/dt = -f_inf rho started from a slipped value.
struct SlipDemo {
  std::vector<double> t;
  std::vector<double> true_traj;
  std::vector<double> slipped;
  std::vector<double> frozen_unslipped;
  double slip_factor = 1.0;
};

// exp[-int_0^inf (F - f_inf) dt]
inline double slip_factor(const std::function<double(double)>& F, double f_inf, const NumericPolicy& policy = {}) {
  auto excess = [&](double t) { return F(t) - f_inf; };
  return std::exp(-integrate_to_infinity(excess, 0.0, policy));
}

// F(t) = f_inf (1 - e^{-t/t_m})
inline std::function<double(double)> exponential_onset_rate(double f_inf, double t_m) {
  if (!(t_m > 0.0)) throw DomainError("exponential_onset_rate: t_m must be positive");
  return [f_inf, t_m](double t) { return -f_inf * std::expm1(-t / t_m); };
}

inline SlipDemo slip_demo(const std::function<double(double)>& F, double f_inf, double rho0, double t_end, std::size_t n_points = 201,
                          const NumericPolicy& policy = {}) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw DomainError("slip_demo: t_end must be positive");
  if (n_points < 2) throw DomainError("slip_demo: need at least two sample times");
  SlipDemo d;
  d.slip_factor = slip_factor(F, f_inf, policy);
  double accumulated = 0.0;
  for (std::size_t k = 0; k < n_points; ++k) {
    const double t = t_end * static_cast<double>(k) / static_cast<double>(n_points - 1);
    if (k > 0) accumulated += integral(F, d.t.back(), t, policy);
    d.t.push_back(t);
    d.true_traj.push_back(rho0 * std::exp(-accumulated));
    d.frozen_unslipped.push_back(rho0 * std::exp(-f_inf * t));
    d.slipped.push_back(d.slip_factor * d.frozen_unslipped.back());
  }
  return d;
}

}  // namespace brl

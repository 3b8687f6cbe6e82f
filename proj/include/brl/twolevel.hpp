#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>

#include "brl/dynamics.hpp"
#include "brl/environment.hpp"
#include "brl/generator.hpp"
#include "brl/redfield.hpp"

namespace brl {

// H = -(B/2) sigma_z, Gamma = sigma_x, white-noise environment with cutoff 1/t_m.
struct TwoLevelParams {
  double B = 0.0;
  double t_m = 1.0;
  double S0 = 0.0;
  double temperature = infinite_temperature;
};

inline void validate(const TwoLevelParams& p) {
  if (!(p.B >= 0.0) || !std::isfinite(p.B)) throw DomainError("two-level: B must be finite and >= 0");
  if (!(p.t_m > 0.0) || !std::isfinite(p.t_m)) throw DomainError("two-level: t_m must be positive");
  if (!(p.S0 > 0.0) || !std::isfinite(p.S0)) throw DomainError("two-level: S0 must be positive");
  if (!(p.temperature > 0.0)) throw DomainError("two-level: temperature must be positive or inf");
}

inline std::vector<Advisory> regime_advisories(const TwoLevelParams& p) {
  std::vector<Advisory> out;
  if (p.B * p.t_m >= 0.2) out.push_back({"regime", "B*t_m = " + std::to_string(p.B * p.t_m) + ": analytic formulas need B*t_m << 1"});
  if (p.S0 * p.t_m >= 0.2) out.push_back({"regime", "S0*t_m = " + std::to_string(p.S0 * p.t_m) + ": analytic formulas need S0*t_m << 1"});
  return out;
}

inline WhiteNoiseParams white_noise(const TwoLevelParams& p) { return {p.S0, 1.0 / p.t_m, p.temperature}; }

inline SystemModel<2> two_level_model(const TwoLevelParams& p) {
  validate(p);
  return SystemModel<2>::from_matrices(Matrix2(-0.5 * p.B * sigma_z()), sigma_x());
}

inline Generator<2> two_level_generator(const TwoLevelParams& p, CoefficientMode mode = CoefficientMode::time_dependent,
                                        bool suppress_negative_rate = false, const NumericPolicy& policy = {}) {
  return make_generator(two_level_model(p), white_noise_kernel(white_noise(p)), 0.0, mode, suppress_negative_rate, policy);
}

struct CouplingPair {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

// Leading-order white-noise couplings:
//   lambda1 = 2 S0 (1 - e^{-x}),  lambda2 = -(B t_m)^2 S0 [1 - (1 + x) e^{-x}]^2 / (2 (1 - e^{-x})),  x = t/t_m.
inline CouplingPair lambdas_white(double t, const TwoLevelParams& p) {
  validate(p);
  if (!(t >= 0.0)) throw DomainError("lambdas_white: t must be >= 0");
  if (t == 0.0) return {0.0, 0.0};
  const double x = t / p.t_m;
  const double p1 = std::isinf(x) ? 1.0 : -std::expm1(-x);
  const double p2 = std::isinf(x) ? 1.0 : boost::math::gamma_p(2.0, x);
  const double bt = p.B * p.t_m;
  return {2.0 * p.S0 * p1, -bt * bt * p.S0 * p2 * p2 / (2.0 * p1)};
}

struct IBundle {
  double x = 0.0;
  double Iz = 0.0;
  double Iy = 0.0;
  double Ixy = 0.0;
  double Ix = 0.0;
  bool frozen = false;
};

namespace detail {

// sum_{k >= k0} c_k with terms built by a recurrence; stops once terms are negligible.
template <class Term>
double series(Term term, int k0) {
  double sum = 0.0;
  for (int k = k0; k < k0 + 60; ++k) {
    const double t = term(k);
    sum += t;
    if (std::abs(t) <= 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

inline double factorial(int k) { return std::tgamma(k + 1.0); }

// x - (1 - e^{-x}) = sum_{k>=2} (-x)^k / k!
inline double i_y(double x) {
  if (x < 0.5) return series([x](int k) { return std::pow(-x, k) / factorial(k); }, 2);
  return x + std::expm1(-x);
}

// x^2/2 - [1 - (1 + x) e^{-x}] = sum_{k>=1} (-1)^{k+1} x^{k+2} / (k! (k+2))
inline double i_xy(double x) {
  if (x < 0.5) return series([x](int k) { return (k % 2 == 1 ? 1.0 : -1.0) * std::pow(x, k + 2) / (factorial(k) * (k + 2)); }, 1);
  return 0.5 * x * x - boost::math::gamma_p(2.0, x);
}

// nu^2 (1 - e^{-nu}) - [1 - (1 + nu) e^{-nu}]^2 / (4 (1 - e^{-nu}))
inline double ix_integrand(double nu) {
  if (nu < 1e-6) return nu * nu * nu * (15.0 / 16.0 - 43.0 / 96.0 * nu);
  const double p1 = -std::expm1(-nu);
  const double p2 = boost::math::gamma_p(2.0, nu);
  return nu * nu * p1 - p2 * p2 / (4.0 * p1);
}

}  // namespace detail

// I-integrals at x = t/t_m. The frozen variant uses the saturated couplings.
inline IBundle i_bundle(double x, bool frozen = false) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("i_bundle: x must be finite and >= 0");
  if (frozen) return {x, x, x, 0.5 * x * x, x * x * x / 3.0 - x / 4.0, true};
  NumericPolicy relative_only;
  relative_only.quad_abs = 1e-300;
  relative_only.quad_rel = 1e-12;
  const double iy = detail::i_y(x);
  const double ix = x == 0.0 ? 0.0 : integral(detail::ix_integrand, 0.0, x, relative_only);
  return {x, iy, iy, detail::i_xy(x), ix, false};
}

// Leading terms for x << 1 and x >> 1.
inline IBundle i_bundle_small_x(double x) { return {x, 0.5 * x * x, 0.5 * x * x, x * x * x / 3.0, 15.0 / 64.0 * std::pow(x, 4), false}; }
inline IBundle i_bundle_large_x(double x) { return {x, x, x, 0.5 * x * x, x * x * x / 3.0, false}; }

// Iy Ix / Ixy^2. At x = 0 the time-dependent limit is 135/128; the frozen one diverges.
inline double ratio_curve(double x, bool frozen = false) {
  if (!(x >= 0.0)) throw DomainError("ratio_curve: x must be >= 0");
  if (frozen) {
    if (x == 0.0) throw DivergenceError("ratio_curve: frozen variant diverges at x = 0");
    return 4.0 / 3.0 - 1.0 / (x * x);
  }
  if (x < 1e-40) return 135.0 / 128.0;
  const IBundle b = i_bundle(x);
  return b.Iy * b.Ix / (b.Ixy * b.Ixy);
}

// Iz sz^2 + Iy sy^2 - 2 sx sy (B t_m) Ixy + sx^2 (B t_m)^2 Ix
inline double purity_bracket(const BlochVector& s, double bt, const IBundle& b) {
  return b.Iz * s.z * s.z + b.Iy * s.y * s.y - 2.0 * s.x * s.y * bt * b.Ixy + s.x * s.x * bt * bt * b.Ix;
}

// Same bracket with the square completed in s_y.
inline double purity_bracket_completed(const BlochVector& s, double bt, const IBundle& b) {
  const double shift = s.y - s.x * bt * b.Ixy / b.Iy;
  return b.Iz * s.z * s.z + b.Iy * shift * shift + s.x * s.x * bt * bt * (b.Ix - b.Ixy * b.Ixy / b.Iy);
}

// P = 1 - 2 S0 t_m [bracket], with s in the frame of the first Lindblad operator. The slow rotation
// of that frame (an angle of order B t_m) is neglected, so the s_x^2 term is only indicative.
inline double short_time_purity(const BlochVector& s, double t, const TwoLevelParams& p, bool frozen = false) {
  validate(p);
  return 1.0 - 2.0 * p.S0 * p.t_m * purity_bracket(s, p.B * p.t_m, i_bundle(t / p.t_m, frozen));
}

inline bool short_time_in_regime(double t, const TwoLevelParams& p) {
  return p.B * t <= 0.3 && p.S0 * t <= 0.3;
}

struct PurityBound {
  double value = 1.0;
  bool in_regime = true;
};

// 1 - S0 B^2 t^3 / 6, meaningful for t_m << t << 1/B, 1/S0.
inline PurityBound worst_case_purity_bound(double t, const TwoLevelParams& p) {
  validate(p);
  const bool ok = t >= 10.0 * p.t_m && p.B * t <= 0.1 && p.S0 * t <= 0.1;
  return {1.0 - p.S0 * p.B * p.B * t * t * t / 6.0, ok};
}

// Asymptotic short-time purity for t_m << t: 1 - 2 S0 t [sz^2 + (sy - sx B t/2)^2 + (sx B t)^2/12].
inline double asymptotic_short_time_purity(const BlochVector& s, double t, const TwoLevelParams& p) {
  const double bt = p.B * t;
  const double d = s.y - 0.5 * s.x * bt;
  return 1.0 - 2.0 * p.S0 * t * (s.z * s.z + d * d + s.x * s.x * bt * bt / 12.0);
}

struct Maximizer {
  BlochVector s;
  double purity = 0.0;
};

// Pure state maximizing the asymptotic purity (s_z = 0 branch with s_x > 0): coarse grid, then Brent.
inline Maximizer worst_case_maximizer(double t, const TwoLevelParams& p) {
  validate(p);
  auto value = [&](double phi) { return asymptotic_short_time_purity({std::cos(phi), std::sin(phi), 0.0}, t, p); };
  const int n = 720;
  double best = 0.0;
  for (int k = 1; k < n; ++k) {
    const double phi = -0.5 * M_PI + M_PI * k / n;
    if (value(phi) > value(best)) best = phi;
  }
  const double h = M_PI / n;
  const auto r = boost::math::tools::brent_find_minima([&](double phi) { return -value(phi); }, best - h, best + h, 52);
  return {{std::cos(r.first), std::sin(r.first), 0.0}, -r.second};
}

// Upper bound on the purity gained in one growth window at t >> t_m.
inline double long_time_growth_bound(const TwoLevelParams& p) {
  validate(p);
  return 0.5 * p.S0 * p.B * p.B * p.t_m * p.t_m * p.t_m;
}

// Half-width [(t_m/2)^2 - (s_z'/(s_x' B))^2]^{1/2} of the window where purity can grow; none when imaginary.
inline std::optional<double> growth_window_halfwidth(double sz, double sx, const TwoLevelParams& p) {
  validate(p);
  const double a = 0.25 * p.t_m * p.t_m;
  if (sz == 0.0) return std::sqrt(a);
  if (sx == 0.0 || p.B == 0.0) return std::nullopt;
  const double r = sz / (sx * p.B);
  const double d = a - r * r;
  if (d < 0.0) return std::nullopt;
  return std::sqrt(d);
}

// Largest rise of purity over any maximal non-decreasing run that starts at or after t_min.
inline double max_purity_growth(const std::vector<double>& times, const std::vector<double>& purity, double t_min) {
  double best = 0.0;
  std::size_t k = 0;
  while (k < times.size() && times[k] < t_min) ++k;
  while (k + 1 < times.size()) {
    std::size_t e = k;
    while (e + 1 < times.size() && purity[e + 1] >= purity[e]) ++e;
    best = std::max(best, purity[e] - purity[k]);
    k = e == k ? k + 1 : e;
  }
  return best;
}

// Bloch axis of a Hermitian (up to phase) 2x2 operator, normalized.
inline BlochVector operator_axis(const Matrix2& l) {
  const cplx phase = std::abs(l(0, 1)) > std::abs(l(0, 0)) ? l(0, 1) + l(1, 0) : l(0, 0) - l(1, 1);
  const cplx u = std::abs(phase) > 0.0 ? phase / std::abs(phase) : cplx{1.0, 0.0};
  const Matrix2 h = l / u;
  BlochVector a{(h * sigma_x()).trace().real(), (h * sigma_y()).trace().real(), (h * sigma_z()).trace().real()};
  const double n = a.norm();
  return {a.x / n, a.y / n, a.z / n};
}

// n points on a sphere of radius r with the polar axis along sigma_x, both poles included.
// jitter > 0 perturbs azimuths by up to jitter * golden angle, reproducibly from the seed.
inline std::vector<BlochVector> fibonacci_sphere(std::size_t n, double radius = 1.0, double jitter = 0.0, std::uint64_t seed = 0) {
  std::vector<BlochVector> out;
  if (n == 0) return out;
  if (n == 1) return {{radius, 0.0, 0.0}};
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  std::mt19937_64 rng(seed);
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = 1.0 - 2.0 * static_cast<double>(k) / static_cast<double>(n - 1);
    const double r = std::sqrt(std::max(0.0, 1.0 - u * u));
    double phi = golden * static_cast<double>(k);
    if (jitter > 0.0) {
      const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      phi += jitter * golden * (2.0 * unit - 1.0);
    }
    out.push_back({radius * u, radius * r * std::cos(phi), radius * r * std::sin(phi)});
  }
  return out;
}

}  // namespace brl

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "brl/errors.hpp"
#include "brl/keyvalue.hpp"
#include "brl/opsys.hpp"
#include "brl/quadrature.hpp"

namespace brl {

inline constexpr double infinite_temperature = std::numeric_limits<double>::infinity();

// Symmetrized and antisymmetrized noise spectra. A non-empty `support` lists ascending knots on
// [0, w_max]; S and A are then taken to vanish for |w| > w_max and integrals run segment-wise.
struct SpectralPair {
  std::function<double(double)> S;
  std::function<double(double)> A;
  double temperature = infinite_temperature;
  std::vector<double> support;
};

// Closed-form description alpha(tau) = amplitude * exp(-rate * tau) for tau >= 0.
struct ExponentialKernel {
  cplx amplitude;
  double rate;
};

struct MemoryKernel {
  std::function<cplx(double)> alpha;
  double t_m = 1.0;
  std::optional<ExponentialKernel> exponential;

  cplx operator()(double tau) const { return alpha(tau); }
};

struct WhiteNoiseParams {
  double S0 = 0.0;
  double omega_m = 1.0;
  double temperature = infinite_temperature;

  double t_m() const { return 1.0 / omega_m; }
  // 1 + i/(2 T t_m); exactly 1 at infinite temperature.
  cplx thermal_factor() const {
    return std::isinf(temperature) ? cplx{1.0, 0.0} : cplx{1.0, omega_m / (2.0 * temperature)};
  }
};

inline void validate(const WhiteNoiseParams& p) {
  if (!(p.S0 >= 0.0) || !std::isfinite(p.S0)) throw DomainError("white noise: S0 must be finite and >= 0");
  if (!(p.omega_m > 0.0) || !std::isfinite(p.omega_m)) throw DomainError("white noise: omega_m must be positive");
  if (!(p.temperature > 0.0)) throw DomainError("white noise: temperature must be positive or inf");
}

// True when T >> omega_m is violated (factor 5 margin).
inline bool high_temperature_advisory(const WhiteNoiseParams& p) {
  return std::isfinite(p.temperature) && p.temperature < 5.0 * p.omega_m;
}

inline double tanh_half(double omega, double temperature) {
  return std::isinf(temperature) ? 0.0 : std::tanh(omega / (2.0 * temperature));
}

// S(w) = S0 w_m^2/(w_m^2 + w^2), A(w) = S(w) w/(2T).
inline SpectralPair lorentzian_pair(const WhiteNoiseParams& p) {
  validate(p);
  auto S = [S0 = p.S0, wm = p.omega_m](double w) { return S0 * wm * wm / (wm * wm + w * w); };
  std::function<double(double)> A = [](double) { return 0.0; };
  if (std::isfinite(p.temperature)) A = [S, T = p.temperature](double w) { return S(w) * w / (2.0 * T); };
  return {S, A, p.temperature, {}};
}

// A = S tanh(w/2T); even extension of S.
inline SpectralPair thermal_pair(std::function<double(double)> S, double temperature, std::vector<double> support = {}) {
  if (!(temperature > 0.0)) throw DomainError("thermal_pair: temperature must be positive or inf");
  auto even = [S = std::move(S)](double w) { return S(std::abs(w)); };
  auto A = [even, temperature](double w) { return even(w) * tanh_half(w, temperature); };
  return {even, A, temperature, std::move(support)};
}

// Largest |S(w) - S(-w)| and |A(w) + A(-w)| over the samples.
inline double spectral_symmetry_residual(const SpectralPair& sp, const std::vector<double>& omegas) {
  double worst = 0.0;
  for (double w : omegas) {
    worst = std::max(worst, std::abs(sp.S(w) - sp.S(-w)));
    worst = std::max(worst, std::abs(sp.A(w) + sp.A(-w)));
  }
  return worst;
}

inline double thermal_consistency_residual(const SpectralPair& sp, const std::vector<double>& omegas) {
  double worst = 0.0;
  for (double w : omegas) worst = std::max(worst, std::abs(sp.A(w) - sp.S(w) * tanh_half(w, sp.temperature)));
  return worst;
}

inline MemoryKernel exponential_kernel(ExponentialKernel e, double t_m) {
  if (!(e.rate > 0.0)) throw DomainError("exponential kernel: rate must be positive");
  auto alpha = [e](double tau) {
    const cplx v = e.amplitude * std::exp(-e.rate * std::abs(tau));
    return tau >= 0.0 ? v : std::conj(v);
  };
  return {alpha, t_m, e};
}

// alpha(tau) = (S0 w_m/2)(1 + i w_m/2T) exp(-w_m tau), tau >= 0.
inline MemoryKernel white_noise_kernel(const WhiteNoiseParams& p) {
  validate(p);
  return exponential_kernel({0.5 * p.S0 * p.omega_m * p.thermal_factor(), p.omega_m}, p.t_m());
}

// Re alpha(tau) = int dw/2pi S(w) e^{-i w tau},  i Im alpha(tau) = int dw/2pi A(w) e^{-i w tau}.
inline MemoryKernel kernel_from_spectra(const SpectralPair& sp, double t_m, const NumericPolicy& policy = {}) {
  if (!(t_m > 0.0)) throw DomainError("kernel_from_spectra: t_m must be positive");
  auto fourier = std::make_shared<FourierHalfLine>();
  auto half_line = [sp, fourier, policy](double tau) {
    const double at = std::abs(tau);
    double re = 0.0;
    double im = 0.0;
    if (!sp.support.empty()) {
      for (std::size_t k = 0; k + 1 < sp.support.size(); ++k) {
        const double lo = sp.support[k];
        const double hi = sp.support[k + 1];
        re += integral([&](double w) { return sp.S(w) * std::cos(w * at); }, lo, hi, policy);
        im -= integral([&](double w) { return sp.A(w) * std::sin(w * at); }, lo, hi, policy);
      }
    } else if (at == 0.0) {
      re = integrate_to_infinity(sp.S, 0.0, policy);
    } else {
      re = fourier->cos_transform(sp.S, at);
      im = -fourier->sin_transform(sp.A, at);
    }
    const cplx v{re / M_PI, im / M_PI};
    return tau >= 0.0 ? v : std::conj(v);
  };
  return {half_line, t_m, std::nullopt};
}

// Samples alpha on [0, tau_max] with n intervals and interpolates with cubic B-splines;
// zero beyond tau_max.
inline MemoryKernel tabulate_kernel(const MemoryKernel& k, double tau_max, std::size_t n) {
  if (!(tau_max > 0.0) || n < 4) throw DomainError("tabulate_kernel: bad grid");
  const double h = tau_max / static_cast<double>(n);
  std::vector<double> re(n + 1);
  std::vector<double> im(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const cplx v = k(h * static_cast<double>(i));
    re[i] = v.real();
    im[i] = v.imag();
  }
  using spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;
  auto sre = std::make_shared<spline>(re.begin(), re.end(), 0.0, h);
  auto sim = std::make_shared<spline>(im.begin(), im.end(), 0.0, h);
  auto alpha = [sre, sim, tau_max](double tau) {
    const double at = std::abs(tau);
    if (at > tau_max) return cplx{};
    const cplx v{(*sre)(at), (*sim)(at)};
    return tau >= 0.0 ? v : std::conj(v);
  };
  return {alpha, k.t_m, std::nullopt};
}

// f_q(t) = int_0^t (tau/t_m)^q alpha(tau) dtau.
inline cplx f_q(double t, int q, const MemoryKernel& k, const NumericPolicy& policy = {}) {
  if (!(t >= 0.0)) throw DomainError("f_q: t must be >= 0");
  if (q < 0) throw UnsupportedOrderError("f_q: q must be >= 0");
  if (t == 0.0) return {};
  return integral([&](double tau) { return std::pow(tau / k.t_m, q) * k(tau); }, 0.0, t, policy);
}

// f_q(t) = (S0/2) q! P(q+1, t/t_m) (1 + i/(2 T t_m)) with P the regularized lower incomplete gamma.
inline cplx white_noise_f(double t, int q, const WhiteNoiseParams& p) {
  if (q < 0 || q > 2) throw UnsupportedOrderError("white_noise_f: closed form only for q in {0,1,2}");
  if (!(t >= 0.0)) throw DomainError("white_noise_f: t must be >= 0");
  validate(p);
  const double x = t * p.omega_m;
  const double shape = std::isinf(x) ? 1.0 : boost::math::gamma_p(static_cast<double>(q + 1), x);
  return 0.5 * p.S0 * boost::math::factorial<double>(static_cast<unsigned>(q)) * shape * p.thermal_factor();
}

// Two-column CSV (w, S(w)) with w >= 0 ascending; '#' lines and a non-numeric header are skipped.
inline std::vector<std::pair<double, double>> load_spectrum_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spectrum " + path);
  std::vector<std::pair<double, double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double w = 0.0;
    double s = 0.0;
    if (!(ls >> w >> s)) {
      if (rows.empty()) continue;
      throw ConfigError("spectrum " + path + ": bad row '" + line + "'");
    }
    if (w < 0.0 || (!rows.empty() && w <= rows.back().first)) {
      throw ConfigError("spectrum " + path + ": frequencies must be >= 0 and increasing");
    }
    rows.emplace_back(w, s);
  }
  if (rows.size() < 2) throw ConfigError("spectrum " + path + ": need at least two rows");
  return rows;
}

// Piecewise-linear S from a table, zero beyond the last frequency.
inline SpectralPair tabulated_pair(const std::vector<std::pair<double, double>>& rows, double temperature) {
  auto S = [rows](double w) {
    if (w < rows.front().first || w > rows.back().first) return 0.0;
    auto hi = std::lower_bound(rows.begin(), rows.end(), w, [](const auto& r, double v) { return r.first < v; });
    if (hi == rows.begin()) return hi->second;
    auto lo = std::prev(hi);
    const double f = (w - lo->first) / (hi->first - lo->first);
    return lo->second + f * (hi->second - lo->second);
  };
  std::vector<double> knots;
  if (rows.front().first > 0.0) knots.push_back(0.0);
  for (const auto& r : rows) knots.push_back(r.first);
  return thermal_pair(S, temperature, knots);
}

enum class EnvironmentKind { white_lorentzian, tabulated };

struct EnvironmentConfig {
  EnvironmentKind kind = EnvironmentKind::white_lorentzian;
  double S0 = 0.0;
  double omega_m = 1.0;
  double temperature = infinite_temperature;
  std::string spectrum_path;
};

// Keys: kind, S0, omega_m, temperature (number or inf), spectrum (CSV path, tabulated only).
inline EnvironmentConfig environment_from_key_values(const KeyValues& kv, const std::string& prefix = "") {
  EnvironmentConfig c;
  auto get = [&](const std::string& k) -> const std::string* {
    auto it = kv.find(prefix + k);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (const auto* v = get("kind")) {
    if (*v == "white_lorentzian") c.kind = EnvironmentKind::white_lorentzian;
    else if (*v == "tabulated") c.kind = EnvironmentKind::tabulated;
    else throw ConfigError("environment kind must be white_lorentzian or tabulated, got '" + *v + "'");
  }
  if (const auto* v = get("S0")) c.S0 = parse_real(prefix + "S0", *v);
  if (const auto* v = get("omega_m")) c.omega_m = parse_real(prefix + "omega_m", *v);
  if (const auto* v = get("temperature")) c.temperature = parse_real(prefix + "temperature", *v);
  if (const auto* v = get("spectrum")) c.spectrum_path = *v;
  if (!(c.omega_m > 0.0) || !std::isfinite(c.omega_m)) throw ConfigError("omega_m must be positive");
  if (!(c.temperature > 0.0)) throw ConfigError("temperature must be positive or inf");
  if (c.kind == EnvironmentKind::white_lorentzian && !(c.S0 >= 0.0 && std::isfinite(c.S0))) {
    throw ConfigError("S0 must be finite and >= 0");
  }
  if (c.kind == EnvironmentKind::tabulated && c.spectrum_path.empty()) {
    throw ConfigError("tabulated environment needs a spectrum path");
  }
  return c;
}

// Tabulated kernels are sampled on [0, 40 t_m] so repeated evaluation stays cheap.
inline MemoryKernel make_kernel(const EnvironmentConfig& c, const NumericPolicy& policy = {}) {
  if (c.kind == EnvironmentKind::white_lorentzian) return white_noise_kernel({c.S0, c.omega_m, c.temperature});
  const auto pair = tabulated_pair(load_spectrum_table(c.spectrum_path), c.temperature);
  const double t_m = 1.0 / c.omega_m;
  return tabulate_kernel(kernel_from_spectra(pair, t_m, policy), 40.0 * t_m, 8000);
}

}  // namespace brl

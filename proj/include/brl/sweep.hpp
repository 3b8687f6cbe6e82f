#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "brl/dynamics.hpp"
#include "brl/parallel.hpp"
#include "brl/twolevel.hpp"

namespace brl {

struct SweepGrid {
  std::size_t sphere_points = 2048;
  std::vector<double> shells{0.5, 0.9, 0.99};
  std::size_t shell_points = 512;
  std::size_t time_samples = 400;
  double jitter = 0.0;
  std::uint64_t seed = 0;
};

// Pure states first, then each mixed shell in order.
inline std::vector<BlochVector> sweep_states(const SweepGrid& g) {
  auto out = fibonacci_sphere(g.sphere_points, 1.0, g.jitter, g.seed);
  for (std::size_t k = 0; k < g.shells.size(); ++k) {
    if (!(g.shells[k] > 0.0 && g.shells[k] <= 1.0)) throw DomainError("sweep: shell radius must lie in (0, 1]");
    const auto shell = fibonacci_sphere(g.shell_points, g.shells[k], g.jitter, g.seed + k + 1);
    out.insert(out.end(), shell.begin(), shell.end());
  }
  return out;
}

struct SweepSettings {
  double t_end = 0.0;
  std::optional<double> step;
  double short_regime_end = 0.0;
  unsigned jobs = 1;
  NumericPolicy policy{};
};

struct Extremum {
  double value = 0.0;
  double time = 0.0;
  BlochVector state;
};

struct RegimeSummary {
  double t_end = 0.0;
  Extremum max_purity{-1.0, 0.0, {}};
  Extremum min_eig{1.0, 0.0, {}};
};

struct Violation {
  std::size_t index = 0;
  BlochVector state;
  double time = 0.0;
  double min_eig = 0.0;
  double purity = 0.0;
};

struct SweepReport {
  std::size_t n_states = 0;
  double step = 0.0;
  std::size_t steps = 0;
  RegimeSummary short_regime;
  RegimeSummary full;
  std::vector<double> sample_times;
  std::vector<double> max_purity_by_time;
  std::vector<double> min_eig_by_time;
  // Worst point of every state that left the physical set by more than the slack.
  std::vector<Violation> violations;
  double slack = 0.0;

  bool pass() const { return violations.empty(); }
};

namespace detail {

using HermCoords = Eigen::Vector4d;
using StepMap = Eigen::Matrix4d;

// (rho00, rho11, Re rho01, Im rho01)
inline HermCoords herm_coords(const Matrix2& m) {
  return {m(0, 0).real(), m(1, 1).real(), m(0, 1).real(), m(0, 1).imag()};
}

inline HermCoords herm_coords(const BlochVector& s) { return {0.5 * (1.0 + s.z), 0.5 * (1.0 - s.z), 0.5 * s.x, -0.5 * s.y}; }

inline double coords_min_eig(const HermCoords& r) {
  const double half = 0.5 * (r(0) - r(1));
  return 0.5 * (r(0) + r(1)) - std::sqrt(half * half + r(2) * r(2) + r(3) * r(3));
}

inline double coords_purity(const HermCoords& r) { return r(0) * r(0) + r(1) * r(1) + 2.0 * (r(2) * r(2) + r(3) * r(3)); }

// One RK4 step followed by Hermitization is linear in rho; its matrix in Hermitian coordinates.
inline StepMap step_map(const CoefficientTable<2>& table, std::size_t step) {
  const std::array<Matrix2, 4> basis{Matrix2{{1.0, 0.0}, {0.0, 0.0}}, Matrix2{{0.0, 0.0}, {0.0, 1.0}},
                                     Matrix2{{0.0, 1.0}, {1.0, 0.0}}, Matrix2{{0.0, I}, {-I, 0.0}}};
  StepMap m;
  for (int c = 0; c < 4; ++c) {
    const Matrix2 a = table.rk4(basis[static_cast<std::size_t>(c)], step);
    m.col(c) = herm_coords(Matrix2(0.5 * (a + a.adjoint())));
  }
  return m;
}

struct StateResult {
  RegimeSummary short_regime;
  RegimeSummary full;
  std::vector<double> sampled_purity;
  std::vector<double> sampled_min_eig;
  std::optional<Violation> violation;
};

inline void track(RegimeSummary& r, double purity, double min_eig, double t, const BlochVector& s) {
  if (purity > r.max_purity.value) r.max_purity = {purity, t, s};
  if (min_eig < r.min_eig.value) r.min_eig = {min_eig, t, s};
}

inline void merge(RegimeSummary& into, const RegimeSummary& r) {
  if (r.max_purity.value > into.max_purity.value) into.max_purity = r.max_purity;
  if (r.min_eig.value < into.min_eig.value) into.min_eig = r.min_eig;
}

}  // namespace detail

// Propagates every state with the same per-step transfer maps and checks positivity at every step.
inline SweepReport positivity_sweep(const Generator<2>& g, const std::vector<BlochVector>& states, std::size_t time_samples,
                                    const SweepSettings& settings) {
  const StepPlan plan = plan_steps(g, settings.t_end, settings.step);
  const CoefficientTable<2> table(g, 0.0, plan);
  std::vector<detail::StepMap> maps(plan.steps);
  parallel_for(plan.steps, settings.jobs, [&](std::size_t s) { maps[s] = detail::step_map(table, s); });

  std::vector<std::size_t> sample_steps;
  const std::size_t n_samples = std::max<std::size_t>(1, time_samples);
  for (std::size_t k = 0; k <= n_samples; ++k)
    sample_steps.push_back(static_cast<std::size_t>(std::llround(static_cast<double>(plan.steps) * static_cast<double>(k) / static_cast<double>(n_samples))));
  sample_steps.erase(std::unique(sample_steps.begin(), sample_steps.end()), sample_steps.end());

  const double slack = settings.policy.positivity_slack;
  const double short_end = settings.short_regime_end > 0.0 ? settings.short_regime_end : 10.0 * g.t_m();
  std::vector<detail::StateResult> results(states.size());

  parallel_for(states.size(), settings.jobs, [&](std::size_t i) {
    const BlochVector s0 = states[i];
    detail::StateResult res;
    res.short_regime.t_end = short_end;
    res.full.t_end = settings.t_end;
    res.sampled_purity.reserve(sample_steps.size());
    res.sampled_min_eig.reserve(sample_steps.size());
    detail::HermCoords r = detail::herm_coords(s0);
    std::size_t next = 0;
    for (std::size_t s = 0; s <= plan.steps; ++s) {
      if (s > 0) r = maps[s - 1] * r;
      const double t = table.time(s);
      const double p = detail::coords_purity(r);
      const double e = detail::coords_min_eig(r);
      detail::track(res.full, p, e, t, s0);
      if (t <= short_end * (1.0 + 1e-12)) detail::track(res.short_regime, p, e, t, s0);
      if (next < sample_steps.size() && sample_steps[next] == s) {
        res.sampled_purity.push_back(p);
        res.sampled_min_eig.push_back(e);
        ++next;
      }
      if ((e < -slack || p > 1.0 + slack) && (!res.violation || e < res.violation->min_eig)) res.violation = Violation{i, s0, t, e, p};
    }
    results[i] = std::move(res);
  });

  SweepReport rep;
  rep.n_states = states.size();
  rep.step = plan.h;
  rep.steps = plan.steps;
  rep.slack = slack;
  rep.short_regime.t_end = short_end;
  rep.full.t_end = settings.t_end;
  for (std::size_t s : sample_steps) rep.sample_times.push_back(table.time(s));
  rep.max_purity_by_time.assign(sample_steps.size(), -1.0);
  rep.min_eig_by_time.assign(sample_steps.size(), 1.0);
  for (const auto& res : results) {
    detail::merge(rep.short_regime, res.short_regime);
    detail::merge(rep.full, res.full);
    for (std::size_t k = 0; k < sample_steps.size(); ++k) {
      rep.max_purity_by_time[k] = std::max(rep.max_purity_by_time[k], res.sampled_purity[k]);
      rep.min_eig_by_time[k] = std::min(rep.min_eig_by_time[k], res.sampled_min_eig[k]);
    }
    if (res.violation) rep.violations.push_back(*res.violation);
  }
  return rep;
}

// Two-level sweep; t_end defaults to 10/S0.
inline SweepReport positivity_sweep(const TwoLevelParams& p, const SweepGrid& grid, CoefficientMode mode,
                                    bool suppress_negative_rate = false, SweepSettings settings = {}) {
  validate(p);
  if (settings.t_end <= 0.0) settings.t_end = 10.0 / p.S0;
  const auto g = two_level_generator(p, mode, suppress_negative_rate, settings.policy);
  return positivity_sweep(g, sweep_states(grid), grid.time_samples, settings);
}

}  // namespace brl

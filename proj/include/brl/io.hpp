#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "brl/dynamics.hpp"
#include "brl/slip.hpp"
#include "brl/sweep.hpp"
#include "brl/twolevel.hpp"

namespace brl {

// 17 significant digits, '.' decimal point, locale independent.
inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

namespace detail {

inline void csv_row(std::ostream& os, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) os << ',';
    os << format_real(v);
    first = false;
  }
  os << '\n';
}

}  // namespace detail

inline void write_trajectory_csv(std::ostream& os, const Trajectory<2>& tr) {
  os << "t,s_x,s_y,s_z,purity,min_eig,lambda1,lambda2\n";
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const BlochVector s = bloch_of(tr.states[k].matrix());
    const double l1 = k < tr.lambda1.size() ? tr.lambda1[k] : NAN;
    const double l2 = k < tr.lambda2.size() ? tr.lambda2[k] : NAN;
    detail::csv_row(os, {tr.times[k], s.x, s.y, s.z, tr.purity[k], tr.min_eig[k], l1, l2});
  }
}

// Density matrices as nested [re, im] pairs.
template <int N>
nlohmann::json trajectory_json(const Trajectory<N>& tr) {
  nlohmann::json out;
  out["step"] = tr.step;
  out["aborted"] = tr.aborted;
  if (tr.aborted) out["abort_reason"] = tr.abort_reason;
  auto& rows = out["records"] = nlohmann::json::array();
  for (std::size_t k = 0; k < tr.size(); ++k) {
    nlohmann::json row{{"t", tr.times[k]}, {"purity", tr.purity[k]}, {"min_eig", tr.min_eig[k]}};
    if (k < tr.lambda1.size()) {
      row["lambda1"] = tr.lambda1[k];
      row["lambda2"] = tr.lambda2[k];
    }
    const auto& m = tr.states[k].matrix();
    auto& rho = row["rho"] = nlohmann::json::array();
    for (Index i = 0; i < m.rows(); ++i) {
      auto r = nlohmann::json::array();
      for (Index j = 0; j < m.cols(); ++j) r.push_back({m(i, j).real(), m(i, j).imag()});
      rho.push_back(std::move(r));
    }
    rows.push_back(std::move(row));
  }
  return out;
}

inline nlohmann::json bloch_json(const BlochVector& s) { return {s.x, s.y, s.z}; }

inline nlohmann::json sweep_json(const SweepReport& rep, const TwoLevelParams& p, const SweepGrid& grid, CoefficientMode mode,
                                 bool suppress_negative_rate) {
  auto extremum = [](const Extremum& e) { return nlohmann::json{{"value", e.value}, {"t", e.time}, {"state", bloch_json(e.state)}}; };
  auto regime = [&](const RegimeSummary& r) {
    return nlohmann::json{{"t_end", r.t_end}, {"max_purity", extremum(r.max_purity)}, {"min_eig", extremum(r.min_eig)}};
  };
  nlohmann::json out;
  out["params"] = {{"B", p.B}, {"t_m", p.t_m}, {"S0", p.S0}, {"temperature", std::isinf(p.temperature) ? nlohmann::json("inf") : nlohmann::json(p.temperature)},
                   {"mode", to_string(mode)}, {"suppress_negative_rate", suppress_negative_rate}};
  out["grid"] = {{"sphere_points", grid.sphere_points}, {"shells", grid.shells}, {"shell_points", grid.shell_points},
                 {"time_samples", grid.time_samples}, {"jitter", grid.jitter}, {"seed", grid.seed},
                 {"states", rep.n_states}, {"step", rep.step}, {"steps", rep.steps}};
  out["max_purity"] = extremum(rep.full.max_purity);
  out["min_eig"] = extremum(rep.full.min_eig);
  out["short_regime"] = regime(rep.short_regime);
  out["slack"] = rep.slack;
  out["pass"] = rep.pass();
  auto& v = out["violations"] = nlohmann::json::array();
  for (const auto& x : rep.violations)
    v.push_back({{"index", x.index}, {"state", bloch_json(x.state)}, {"t", x.time}, {"min_eig", x.min_eig}, {"purity", x.purity}});
  out["samples"] = {{"t", rep.sample_times}, {"max_purity", rep.max_purity_by_time}, {"min_eig", rep.min_eig_by_time}};
  return out;
}

// x, ratio_timedep, ratio_frozen; log-spaced on [x_min, x_max].
inline std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi >= lo)) throw DomainError("log_spaced: need 0 < lo <= hi");
  if (n == 1) return {lo};
  std::vector<double> out(n);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t k = 0; k < n; ++k) out[k] = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

inline void write_ratio_csv(std::ostream& os, const std::vector<double>& xs) {
  os << "x,ratio_timedep,ratio_frozen\n";
  for (double x : xs) detail::csv_row(os, {x, ratio_curve(x, false), ratio_curve(x, true)});
}

inline void write_slip_csv(std::ostream& os, const SlipDemo& d) {
  os << "t,true,slipped,frozen_unslipped\n";
  for (std::size_t k = 0; k < d.t.size(); ++k) detail::csv_row(os, {d.t[k], d.true_traj[k], d.slipped[k], d.frozen_unslipped[k]});
}

}  // namespace brl

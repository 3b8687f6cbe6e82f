#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "brl/generator.hpp"
#include "brl/opsys.hpp"
#include "brl/redfield.hpp"

namespace brl {

// Closed form (1 - |s|)/2 for N = 2; Hermitian eigensolve otherwise.
template <class Derived>
double min_eigenvalue(const Eigen::MatrixBase<Derived>& rho) {
  return hermitian_eigenvalues(rho)(0);
}

template <int N>
double min_eigenvalue(const DensityMatrix<N>& rho) {
  return min_eigenvalue(rho.matrix());
}

template <int N>
double purity(const Matrix<N>& rho) {
  return rho.cwiseAbs2().sum();
}

// dP/dt = 2 tr[rho d rho/dt] with the Lindblad-form right-hand side.
template <int N>
double purity_rate(const Matrix<N>& rho, const DissipatorDecomposition<N>& d) {
  return 2.0 * (rho * lindblad_rhs<N>(rho, d)).trace().real();
}

// -2 sum_n lambda_n (tr[L^+ L rho^2] - tr[rho L rho L^+]).
template <int N>
double purity_rate_explicit(const Matrix<N>& rho, const DissipatorDecomposition<N>& d) {
  double rate = 0.0;
  const std::pair<double, const Matrix<N>*> terms[2] = {{d.lambda1, &d.L1.matrix()}, {d.lambda2, &d.L2.matrix()}};
  const Matrix<N> rho2 = rho * rho;
  for (const auto& [lambda, lp] : terms) {
    const Matrix<N>& l = *lp;
    rate -= 2.0 * lambda * ((l.adjoint() * l * rho2).trace() - (rho * l * rho * l.adjoint()).trace()).real();
  }
  return rate;
}

template <int N>
struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix<N>> states;
  std::vector<double> purity;
  std::vector<double> min_eig;
  std::vector<double> lambda1;
  std::vector<double> lambda2;
  double step = 0.0;
  double max_trace_drift = 0.0;
  double max_hermitization_residual = 0.0;
  bool aborted = false;
  std::string abort_reason;

  std::size_t size() const { return times.size(); }
  double min_eigenvalue_overall() const { return min_eig.empty() ? 1.0 : *std::min_element(min_eig.begin(), min_eig.end()); }
  double max_purity() const { return purity.empty() ? 0.0 : *std::max_element(purity.begin(), purity.end()); }
};

struct EvolveOptions {
  std::optional<double> step;
  std::size_t record_every = 1;
  // When non-empty, replaces record_every; each time is snapped to the nearest step.
  std::vector<double> record_times;
  bool record_lambdas = true;
};

// h = min(t_m/20, 0.01/rate_scale, t_end/50), shrunk so an integer number of steps lands on t_end.
struct StepPlan {
  double h = 0.0;
  std::size_t steps = 0;
};

template <int N>
StepPlan plan_steps(const Generator<N>& g, double t_end, std::optional<double> step = std::nullopt) {
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw DomainError("evolve: t_end must be finite and >= 0");
  if (t_end == 0.0) return {0.0, 0};
  double h = step ? *step : std::min({g.t_m() / 20.0, t_end / 50.0});
  if (!step && g.rate_scale() > 0.0) h = std::min(h, 0.01 / g.rate_scale());
  if (!(h > 0.0) || t_end / h > 1e9) throw DomainError("evolve: step underflow");
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / h * (1.0 - 1e-12)));
  return {t_end / static_cast<double>(steps), steps};
}

// Coefficients at every RK4 node t0 + k h/2; shared read-only by any number of trajectories.
template <int N>
class CoefficientTable {
 public:
  CoefficientTable(const Generator<N>& g, double t0, StepPlan plan) : t0_(t0), plan_(plan) {
    nodes_.reserve(2 * plan.steps + 1);
    for (std::size_t k = 0; k <= 2 * plan.steps; ++k) nodes_.push_back(g.coefficients(t0 + 0.5 * plan.h * static_cast<double>(k)));
  }

  const Coefficients<N>& node(std::size_t k) const { return nodes_[k]; }
  double time(std::size_t step) const { return t0_ + plan_.h * static_cast<double>(step); }
  const StepPlan& plan() const noexcept { return plan_; }

  Matrix<N> rk4(const Matrix<N>& rho, std::size_t step) const {
    const double h = plan_.h;
    const auto& c0 = nodes_[2 * step];
    const auto& cm = nodes_[2 * step + 1];
    const auto& c1 = nodes_[2 * step + 2];
    const Matrix<N> k1 = c0.apply(rho);
    const Matrix<N> k2 = cm.apply(rho + 0.5 * h * k1);
    const Matrix<N> k3 = cm.apply(rho + 0.5 * h * k2);
    const Matrix<N> k4 = c1.apply(rho + h * k3);
    return rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

 private:
  double t0_;
  StepPlan plan_;
  std::vector<Coefficients<N>> nodes_;
};

namespace detail {

inline std::vector<std::size_t> record_steps(const StepPlan& plan, const EvolveOptions& opt, double t_end) {
  std::vector<std::size_t> out;
  if (!opt.record_times.empty()) {
    for (double t : opt.record_times) {
      if (t < 0.0 || t > t_end * (1.0 + 1e-12)) continue;
      const double k = plan.h > 0.0 ? std::round(t / plan.h) : 0.0;
      out.push_back(std::min(plan.steps, static_cast<std::size_t>(k)));
    }
    out.push_back(0);
  } else {
    const std::size_t every = std::max<std::size_t>(1, opt.record_every);
    for (std::size_t s = 0; s <= plan.steps; s += every) out.push_back(s);
  }
  out.push_back(plan.steps);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

// Fixed-step RK4. Re-Hermitizes after every step; never renormalizes the trace.
template <int N>
Trajectory<N> evolve(const DensityMatrix<N>& rho0, const Generator<N>& g, double t_end, const EvolveOptions& opt = {}) {
  if (rho0.dim() != g.model().dim()) throw DimensionError("evolve: state and generator dimensions differ");
  const StepPlan plan = plan_steps(g, t_end, opt.step);
  const CoefficientTable<N> table(g, 0.0, plan);
  const auto records = detail::record_steps(plan, opt, t_end);

  Trajectory<N> tr;
  tr.step = plan.h;
  auto record = [&](std::size_t step, const Matrix<N>& rho) {
    const double t = table.time(step);
    tr.times.push_back(t);
    tr.states.emplace_back(rho, typename DensityMatrix<N>::Unchecked{});
    tr.purity.push_back(purity<N>(rho));
    tr.min_eig.push_back(min_eigenvalue(rho));
    if (opt.record_lambdas) {
      const auto d = g.decomposition(t);
      tr.lambda1.push_back(d.lambda1);
      tr.lambda2.push_back(d.lambda2);
    }
  };

  Matrix<N> rho = rho0.matrix();
  std::size_t next = 0;
  if (records[next] == 0) record(records[next++], rho);
  for (std::size_t s = 0; s < plan.steps; ++s) {
    Matrix<N> advanced = table.rk4(rho, s);
    if (!all_finite(advanced)) {
      tr.aborted = true;
      tr.abort_reason = "non-finite state at t = " + std::to_string(table.time(s + 1));
      if (tr.times.empty() || tr.times.back() != table.time(s)) record(s, rho);
      return tr;
    }
    tr.max_hermitization_residual = std::max(tr.max_hermitization_residual, 0.5 * hermiticity_residual(advanced));
    rho = 0.5 * (advanced + advanced.adjoint());
    tr.max_trace_drift = std::max(tr.max_trace_drift, std::abs(rho.trace() - 1.0));
    if (next < records.size() && records[next] == s + 1) record(records[next++], rho);
  }
  return tr;
}

// Two-time propagator K(t; t0) as an N^2 x N^2 matrix, row i'N + j', column iN + j.
template <int N>
class Propagator {
 public:
  Propagator(Eigen::MatrixXcd k, Index dim, double t, double t0) : k_(std::move(k)), dim_(dim), t_(t), t0_(t0) {}

  cplx operator()(Index ip, Index jp, Index i, Index j) const { return k_(ip * dim_ + jp, i * dim_ + j); }
  const Eigen::MatrixXcd& matrix() const noexcept { return k_; }
  Index dim() const noexcept { return dim_; }
  double t() const noexcept { return t_; }
  double t0() const noexcept { return t0_; }

  Matrix<N> apply(const Matrix<N>& rho) const {
    Eigen::VectorXcd v(dim_ * dim_);
    for (Index i = 0; i < dim_; ++i)
      for (Index j = 0; j < dim_; ++j) v(i * dim_ + j) = rho(i, j);
    const Eigen::VectorXcd w = k_ * v;
    Matrix<N> out = zero_matrix<N>(dim_);
    for (Index i = 0; i < dim_; ++i)
      for (Index j = 0; j < dim_; ++j) out(i, j) = w(i * dim_ + j);
    return out;
  }

  // max_ij |sum_i' K_{i'i';ij} - delta_ij|
  double trace_residual() const {
    double worst = 0.0;
    for (Index i = 0; i < dim_; ++i)
      for (Index j = 0; j < dim_; ++j) {
        cplx s{};
        for (Index ip = 0; ip < dim_; ++ip) s += (*this)(ip, ip, i, j);
        worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
      }
    return worst;
  }

  // max |K_{i'j';ij} - conj(K_{j'i';ji})|
  double hermiticity_residual() const {
    double worst = 0.0;
    for (Index ip = 0; ip < dim_; ++ip)
      for (Index jp = 0; jp < dim_; ++jp)
        for (Index i = 0; i < dim_; ++i)
          for (Index j = 0; j < dim_; ++j)
            worst = std::max(worst, std::abs((*this)(ip, jp, i, j) - std::conj((*this)(jp, ip, j, i))));
    return worst;
  }

 private:
  Eigen::MatrixXcd k_;
  Index dim_;
  double t_;
  double t0_;
};

// Evolves the Hermitian matrix-unit combinations E_ii, (E_ij + E_ji)/2, i(E_ij - E_ji)/2 and
// recombines E_ij = S - iA, E_ji = S + iA.
template <int N>
Propagator<N> propagator(const Generator<N>& g, double t, double t0 = 0.0, std::optional<double> step = std::nullopt) {
  if (!(t >= t0)) throw DomainError("propagator: need t >= t0");
  const Index dim = g.model().dim();
  const StepPlan plan = plan_steps(g, t - t0, step);
  const CoefficientTable<N> table(g, t0, plan);
  auto run = [&](Matrix<N> rho) {
    for (std::size_t s = 0; s < plan.steps; ++s) {
      const Matrix<N> a = table.rk4(rho, s);
      rho = 0.5 * (a + a.adjoint());
    }
    return rho;
  };
  Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(dim * dim, dim * dim);
  auto put = [&](Index i, Index j, const Matrix<N>& out) {
    for (Index ip = 0; ip < dim; ++ip)
      for (Index jp = 0; jp < dim; ++jp) k(ip * dim + jp, i * dim + j) = out(ip, jp);
  };
  for (Index i = 0; i < dim; ++i) {
    Matrix<N> e = zero_matrix<N>(dim);
    e(i, i) = 1.0;
    put(i, i, run(e));
    for (Index j = i + 1; j < dim; ++j) {
      Matrix<N> s = zero_matrix<N>(dim);
      s(i, j) = s(j, i) = 0.5;
      Matrix<N> a = zero_matrix<N>(dim);
      a(i, j) = 0.5 * I;
      a(j, i) = -0.5 * I;
      const Matrix<N> ks = run(s);
      const Matrix<N> ka = run(a);
      put(i, j, ks - I * ka);
      put(j, i, ks + I * ka);
    }
  }
  return Propagator<N>(std::move(k), dim, t, t0);
}

// || K(2 tau; 0) - K(tau; 0)^2 ||_F, both with the same step.
template <int N>
double semigroup_defect(const Generator<N>& g, double tau, std::optional<double> step = std::nullopt) {
  const double h = step ? *step : plan_steps(g, tau).h;
  const auto k1 = propagator(g, tau, 0.0, h);
  const auto k2 = propagator(g, 2.0 * tau, 0.0, h);
  return (k2.matrix() - k1.matrix() * k1.matrix()).norm();
}

}  // namespace brl

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "brl/environment.hpp"
#include "brl/opsys.hpp"
#include "brl/redfield.hpp"

namespace brl {

enum class CoefficientMode { time_dependent, frozen };

inline const char* to_string(CoefficientMode m) { return m == CoefficientMode::frozen ? "frozen" : "time_dependent"; }

// Xi(t) and its saturated value.
template <int N>
struct XiSource {
  std::function<Matrix<N>(double)> at;
  Matrix<N> limit;
  double horizon = std::numeric_limits<double>::infinity();
};

template <int N>
XiSource<N> closed_form_xi(const SystemModel<N>& m, const ExponentialKernel& e) {
  const double inf = std::numeric_limits<double>::infinity();
  return {[m, e](double t) { return xi_exponential(t, m, e).matrix(); }, xi_exponential(inf, m, e).matrix(), inf};
}

// Xi tabulated on [0, max(horizon, 60 t_m)] by segment-wise quadrature, cubic Hermite in between
// using the exact dXi/dt. The limit is the value at the end of the grid.
template <int N>
XiSource<N> interpolated_xi(const SystemModel<N>& m, const MemoryKernel& k, double horizon, double spacing,
                            const NumericPolicy& policy = {}) {
  if (!(spacing > 0.0) || !(horizon >= 0.0)) throw DomainError("interpolated_xi: bad grid");
  const double span = std::max(horizon, 60.0 * k.t_m);
  const auto n = static_cast<std::size_t>(std::ceil(span / spacing));
  const double h = span / static_cast<double>(n);
  const Index dim = m.dim();
  const Matrix<N> gp = m.to_eigenbasis(m.Gamma());

  std::vector<double> freqs;
  Eigen::MatrixXi slot = Eigen::MatrixXi::Constant(dim, dim, -1);
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < dim; ++j) {
      if (gp(i, j) == cplx{}) continue;
      const double w = m.energies()(i) - m.energies()(j);
      auto it = std::find_if(freqs.begin(), freqs.end(), [&](double f) { return std::abs(f - w) <= 1e-14 * std::max(1.0, std::abs(w)); });
      if (it == freqs.end()) {
        freqs.push_back(w);
        slot(i, j) = static_cast<int>(freqs.size() - 1);
      } else {
        slot(i, j) = static_cast<int>(it - freqs.begin());
      }
    }
  }

  struct Table {
    std::vector<std::vector<cplx>> value;
    std::vector<std::vector<cplx>> rate;
  };
  auto table = std::make_shared<Table>();
  for (double w : freqs) {
    auto integrand = [&](double tau) { return k(tau) * std::exp(cplx(0.0, -w * tau)); };
    std::vector<cplx> v(n + 1);
    std::vector<cplx> r(n + 1);
    for (std::size_t s = 0; s <= n; ++s) {
      const double t = h * static_cast<double>(s);
      r[s] = integrand(t);
      if (s > 0) v[s] = v[s - 1] + integral(integrand, t - h, t, policy);
    }
    table->value.push_back(std::move(v));
    table->rate.push_back(std::move(r));
  }

  auto assemble = [m, gp, slot, dim](const std::vector<cplx>& g) {
    Matrix<N> xp = zero_matrix<N>(dim);
    for (Index i = 0; i < dim; ++i)
      for (Index j = 0; j < dim; ++j)
        if (slot(i, j) >= 0) xp(i, j) = gp(i, j) * g[static_cast<std::size_t>(slot(i, j))];
    return Matrix<N>(m.from_eigenbasis(xp));
  };

  std::vector<cplx> last(freqs.size());
  for (std::size_t f = 0; f < freqs.size(); ++f) last[f] = table->value[f][n];

  auto at = [table, assemble, h, n, span](double t) {
    if (!(t >= 0.0) || t > span * (1.0 + 1e-12)) throw DomainError("interpolated_xi: t outside the tabulated range");
    auto s = static_cast<std::size_t>(std::min<double>(std::floor(t / h), static_cast<double>(n - 1)));
    const double u = t / h - static_cast<double>(s);
    const double h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
    const double h10 = u * (1.0 - u) * (1.0 - u);
    const double h01 = u * u * (3.0 - 2.0 * u);
    const double h11 = u * u * (u - 1.0);
    std::vector<cplx> g(table->value.size());
    for (std::size_t f = 0; f < g.size(); ++f) {
      const auto& v = table->value[f];
      const auto& r = table->rate[f];
      g[f] = h00 * v[s] + h10 * h * r[s] + h01 * v[s + 1] + h11 * h * r[s + 1];
    }
    return assemble(g);
  };
  return {at, assemble(last), span};
}

// d rho/dt = X + X^+ with X = K rho + A1 rho B1 + A2 rho B2; valid for Hermitian rho.
template <int N>
struct Coefficients {
  Matrix<N> K;
  Matrix<N> A1;
  Matrix<N> B1;
  Matrix<N> A2;
  Matrix<N> B2;
  bool second_jump = false;

  Matrix<N> apply(const Matrix<N>& rho) const {
    Matrix<N> x = K * rho + A1 * rho * B1;
    if (second_jump) x += A2 * rho * B2;
    return x + x.adjoint();
  }
};

// Master-equation generator for one system model and one Xi source.
template <int N>
class Generator {
 public:
  Generator(SystemModel<N> model, XiSource<N> xi, double t_m, CoefficientMode mode = CoefficientMode::time_dependent,
            bool suppress_negative_rate = false, NumericPolicy policy = {})
      : model_(std::move(model)), xi_(std::move(xi)), t_m_(t_m), mode_(mode), suppress_(suppress_negative_rate), policy_(policy) {
    if (!(t_m_ > 0.0)) throw DomainError("Generator: t_m must be positive");
    const auto d = decompose(model_, SystemOperator<N>(xi_.limit, Unit::energy()), INFINITY, policy_);
    rate_scale_ = std::max({model_.delta_sys(), 0.5 * std::abs(d.lambda1), 0.5 * std::abs(d.lambda2)});
  }

  const SystemModel<N>& model() const noexcept { return model_; }
  double t_m() const noexcept { return t_m_; }
  CoefficientMode mode() const noexcept { return mode_; }
  bool suppresses_negative_rate() const noexcept { return suppress_; }
  // Fastest physical rate: largest gap or half the saturated couplings.
  double rate_scale() const noexcept { return rate_scale_; }
  double horizon() const noexcept { return xi_.horizon; }
  const NumericPolicy& policy() const noexcept { return policy_; }

  Generator with_mode(CoefficientMode mode) const {
    Generator g = *this;
    g.mode_ = mode;
    return g;
  }

  Matrix<N> xi(double t) const { return mode_ == CoefficientMode::frozen ? xi_.limit : xi_.at(t); }

  DissipatorDecomposition<N> decomposition(double t) const {
    auto d = decompose(model_, SystemOperator<N>(xi(t), Unit::energy()), t, policy_);
    if (suppress_) clip(d);
    return d;
  }

  Coefficients<N> coefficients(double t) const {
    const Matrix<N> x = xi(t);
    const Matrix<N>& g = model_.Gamma();
    const Index dim = model_.dim();
    if (!suppress_) return {Matrix<N>(-I * model_.H() - g * x), x, g, zero_matrix<N>(dim), zero_matrix<N>(dim), false};
    const auto d = decomposition(t);
    const Matrix<N>& l1 = d.L1.matrix();
    const Matrix<N>& l2 = d.L2.matrix();
    Coefficients<N> c{Matrix<N>(-I * d.H_renorm.matrix() - 0.5 * d.lambda1 * l1.adjoint() * l1 - 0.5 * d.lambda2 * l2.adjoint() * l2),
                      Matrix<N>(0.5 * d.lambda1 * l1), Matrix<N>(l1.adjoint()), Matrix<N>(0.5 * d.lambda2 * l2),
                      Matrix<N>(l2.adjoint()), d.lambda2 != 0.0};
    return c;
  }

  // Full right-hand side; rho need not be Hermitian.
  Matrix<N> rhs(const Matrix<N>& rho, double t) const {
    if (!suppress_) return br_rhs<N>(rho, model_, xi(t));
    return lindblad_rhs<N>(rho, decomposition(t));
  }

 private:
  static void clip(DissipatorDecomposition<N>& d) {
    if (d.lambda1 < 0.0) d.lambda1 = 0.0;
    if (d.lambda2 < 0.0) d.lambda2 = 0.0;
  }

  SystemModel<N> model_;
  XiSource<N> xi_;
  double t_m_;
  CoefficientMode mode_;
  bool suppress_;
  NumericPolicy policy_;
  double rate_scale_ = 0.0;
};

// Exponential kernels use closed-form Xi; anything else goes through the interpolated grid.
template <int N>
Generator<N> make_generator(const SystemModel<N>& m, const MemoryKernel& k, double horizon,
                            CoefficientMode mode = CoefficientMode::time_dependent, bool suppress_negative_rate = false,
                            const NumericPolicy& policy = {}) {
  if (k.exponential) return Generator<N>(m, closed_form_xi(m, *k.exponential), k.t_m, mode, suppress_negative_rate, policy);
  const double guess = std::max(m.delta_sys(), std::abs(k(0.0)) * k.t_m);
  const double spacing = std::min(k.t_m / 20.0, guess > 0.0 ? 0.02 / guess : k.t_m / 20.0);
  return Generator<N>(m, interpolated_xi(m, k, horizon, spacing, policy), k.t_m, mode, suppress_negative_rate, policy);
}

}  // namespace brl

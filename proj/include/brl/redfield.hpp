#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "brl/environment.hpp"
#include "brl/errors.hpp"
#include "brl/numeric_policy.hpp"
#include "brl/opsys.hpp"
#include "brl/quadrature.hpp"

namespace brl {

// System Hamiltonian (energy) and coupling operator Gamma (dimensionless), both Hermitian.
template <int N = Dynamic>
class SystemModel {
 public:
  SystemModel(SystemOperator<N> hamiltonian, SystemOperator<N> coupling, const NumericPolicy& policy = {})
      : h_(std::move(hamiltonian)), gamma_(std::move(coupling)) {
    if (h_.dim() != gamma_.dim()) throw DimensionError("SystemModel: H and Gamma dimensions differ");
    if (h_.unit() != Unit::energy()) throw UnitError("SystemModel: H must carry energy units");
    if (gamma_.unit() != Unit::dimensionless()) throw UnitError("SystemModel: Gamma must be dimensionless");
    if (!h_.is_hermitian(policy.algebra)) throw DomainError("SystemModel: H is not Hermitian");
    if (!gamma_.is_hermitian(policy.algebra)) throw DomainError("SystemModel: Gamma is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix<N>> solver(h_.matrix());
    energies_ = solver.eigenvalues();
    basis_ = solver.eigenvectors();
    delta_sys_ = energies_(energies_.size() - 1) - energies_(0);
  }

  static SystemModel from_matrices(const Matrix<N>& h, const Matrix<N>& gamma, const NumericPolicy& policy = {}) {
    return SystemModel(SystemOperator<N>(h, Unit::energy()), SystemOperator<N>(gamma), policy);
  }

  const SystemOperator<N>& hamiltonian() const noexcept { return h_; }
  const SystemOperator<N>& coupling() const noexcept { return gamma_; }
  const Matrix<N>& H() const noexcept { return h_.matrix(); }
  const Matrix<N>& Gamma() const noexcept { return gamma_.matrix(); }
  Index dim() const noexcept { return h_.dim(); }
  double delta_sys() const noexcept { return delta_sys_; }
  const Eigen::VectorXd& energies() const noexcept { return energies_; }
  // Columns are eigenvectors of H, ascending energy.
  const Matrix<N>& eigenbasis() const noexcept { return basis_; }

  Matrix<N> to_eigenbasis(const Matrix<N>& op) const { return basis_.adjoint() * op * basis_; }
  Matrix<N> from_eigenbasis(const Matrix<N>& op) const { return basis_ * op * basis_.adjoint(); }

 private:
  SystemOperator<N> h_;
  SystemOperator<N> gamma_;
  Eigen::VectorXd energies_;
  Matrix<N> basis_;
  double delta_sys_ = 0.0;
};

namespace detail {

// Builds Xi from per-frequency scalars: Xi'_ij = Gamma'_ij * g(E_i - E_j) in the H eigenbasis.
template <int N, class G>
Matrix<N> assemble_in_eigenbasis(const SystemModel<N>& m, G&& g) {
  const Matrix<N> gp = m.to_eigenbasis(m.Gamma());
  Matrix<N> xp = zero_matrix<N>(m.dim());
  std::vector<std::pair<double, cplx>> cache;
  const double scale = std::max(1.0, m.delta_sys());
  for (Index i = 0; i < m.dim(); ++i) {
    for (Index j = 0; j < m.dim(); ++j) {
      if (gp(i, j) == cplx{}) continue;
      const double w = m.energies()(i) - m.energies()(j);
      cplx value{};
      bool hit = false;
      for (const auto& [cw, cv] : cache) {
        if (std::abs(cw - w) <= 1e-14 * scale) {
          value = cv;
          hit = true;
          break;
        }
      }
      if (!hit) {
        value = g(w);
        cache.emplace_back(w, value);
      }
      xp(i, j) = gp(i, j) * value;
    }
  }
  return m.from_eigenbasis(xp);
}

// (1 - exp(-z t))/z, with a series near z t = 0.
inline cplx exp_integral(cplx z, double t) {
  if (std::isinf(t)) return 1.0 / z;
  const cplx zt = z * t;
  if (std::abs(zt) < 1e-2) {
    return t * (1.0 - zt / 2.0 + zt * zt / 6.0 - zt * zt * zt / 24.0 + zt * zt * zt * zt / 120.0);
  }
  return (1.0 - std::exp(-zt)) / z;
}

}  // namespace detail

// Xi(t) = int_0^t alpha(tau) exp(-i H tau) Gamma exp(i H tau) dtau by quadrature.
template <int N>
SystemOperator<N> xi_exact(double t, const SystemModel<N>& m, const MemoryKernel& k, const NumericPolicy& policy = {}) {
  if (!(t >= 0.0)) throw DomainError("xi_exact: t must be >= 0");
  if (t == 0.0) return SystemOperator<N>::zero(m.dim(), Unit::energy());
  auto g = [&](double w) {
    return integral([&](double tau) { return k(tau) * std::exp(cplx(0.0, -w * tau)); }, 0.0, t, policy);
  };
  return SystemOperator<N>(detail::assemble_in_eigenbasis(m, g), Unit::energy());
}

// Closed form of xi_exact for alpha = A exp(-r tau); t may be +inf.
template <int N>
SystemOperator<N> xi_exponential(double t, const SystemModel<N>& m, const ExponentialKernel& e) {
  if (!(t >= 0.0)) throw DomainError("xi_exponential: t must be >= 0");
  if (t == 0.0) return SystemOperator<N>::zero(m.dim(), Unit::energy());
  auto g = [&](double w) { return e.amplitude * detail::exp_integral(cplx(e.rate, w), t); };
  return SystemOperator<N>(detail::assemble_in_eigenbasis(m, g), Unit::energy());
}

// dXi/dt = alpha(t) exp(-i H t) Gamma exp(i H t).
template <int N>
Matrix<N> xi_rate(double t, const SystemModel<N>& m, const MemoryKernel& k) {
  const cplx a = k(t);
  return detail::assemble_in_eigenbasis(m, [&](double w) { return a * std::exp(cplx(0.0, -w * t)); });
}

// Xi ~ f0 Gamma - i t_m f1 [H, Gamma] - (t_m^2/2) f2 [H, [H, Gamma]].
template <int N>
SystemOperator<N> xi_short_memory(const SystemModel<N>& m, double t_m, cplx f0, cplx f1, cplx f2) {
  const Matrix<N> c1 = commutator<N>(m.H(), m.Gamma());
  const Matrix<N> c2 = commutator<N>(m.H(), c1);
  return SystemOperator<N>(Matrix<N>(f0 * m.Gamma() - I * t_m * f1 * c1 - 0.5 * t_m * t_m * f2 * c2), Unit::energy());
}

struct Advisory {
  std::string code;
  std::string message;
};

// Warnings, not errors: the expansion and the Born truncation lose validity here.
template <int N>
std::vector<Advisory> validity_advisories(const SystemModel<N>& m, double noise_power, double t_m) {
  std::vector<Advisory> out;
  if (noise_power * t_m > 0.1) {
    out.push_back({"born", "S0*t_m = " + std::to_string(noise_power * t_m) + " > 0.1: fourth-order terms are not negligible"});
  }
  if (m.delta_sys() * t_m > 0.2) {
    out.push_back({"short_memory", "Delta_sys*t_m = " + std::to_string(m.delta_sys() * t_m) +
                                       " > 0.2: short-memory expansion unreliable"});
  }
  return out;
}

// -i[H, rho] - Gamma Xi rho - rho Xi^+ Gamma + Xi rho Gamma + Gamma rho Xi^+
template <int N>
Matrix<N> br_rhs(const Matrix<N>& rho, const SystemModel<N>& m, const Matrix<N>& xi) {
  if (rho.rows() != m.dim() || xi.rows() != m.dim()) throw DimensionError("br_rhs: dimension mismatch");
  const Matrix<N>& g = m.Gamma();
  const Matrix<N> xd = xi.adjoint();
  return -I * commutator<N>(m.H(), rho) - g * xi * rho - rho * xd * g + xi * rho * g + g * rho * xd;
}

template <int N>
Matrix<N> br_rhs(const DensityMatrix<N>& rho, const SystemModel<N>& m, const SystemOperator<N>& xi) {
  return br_rhs<N>(rho.matrix(), m, xi.matrix());
}

// H' = H - (i/2)(Gamma Xi - Xi^+ Gamma)
template <int N>
SystemOperator<N> renormalized_hamiltonian(const SystemModel<N>& m, const SystemOperator<N>& xi) {
  const Matrix<N>& g = m.Gamma();
  Matrix<N> hp = m.H() - 0.5 * I * (g * xi.matrix() - xi.matrix().adjoint() * g);
  hp = 0.5 * (hp + hp.adjoint()).eval();
  return SystemOperator<N>(hp, Unit::energy());
}

// -i[H', rho] - (1/2){Gamma Xi + Xi^+ Gamma, rho} + Xi rho Gamma + Gamma rho Xi^+
template <int N>
Matrix<N> br_rhs_rewritten(const Matrix<N>& rho, const SystemModel<N>& m, const Matrix<N>& xi) {
  const Matrix<N>& g = m.Gamma();
  const Matrix<N> xd = xi.adjoint();
  const Matrix<N> hp = m.H() - 0.5 * I * (g * xi - xd * g);
  const Matrix<N> d = g * xi + xd * g;
  return -I * commutator<N>(hp, rho) - 0.5 * anticommutator<N>(d, rho) + xi * rho * g + g * rho * xd;
}

struct CouplingMatrixH {
  cplx b_plus{};
  double b_z = 0.0;

  double b() const { return std::hypot(std::abs(b_plus), b_z); }
  // b_z * 1 + [[b_z, b_+], [b_+^*, -b_z]]
  Matrix2 matrix() const { return (Matrix2() << 2.0 * b_z, b_plus, std::conj(b_plus), 0.0).finished(); }
  double lambda1() const { return b_z + b(); }
  double lambda2() const { return b_z - b(); }
};

template <int N>
CouplingMatrixH coupling_matrix(const SystemOperator<N>& gamma, const SystemOperator<N>& xi, const SystemOperator<N>& p1,
                                const SystemOperator<N>& p2) {
  const cplx g1 = hs_inner(gamma.matrix(), p1.matrix());
  return {g1 * hs_inner(p2.matrix(), xi.matrix()), (g1 * hs_inner(p1.matrix(), xi.matrix())).real()};
}

// h_ij = tr[Gamma^+ P_i] tr[P_j^+ Xi] + tr[Xi^+ P_i] tr[P_j^+ Gamma], for any pair (P_1, P_2).
template <int N>
Matrix2 coupling_matrix_general(const Matrix<N>& gamma, const Matrix<N>& xi, const Matrix<N>& p1, const Matrix<N>& p2) {
  const Matrix<N>* p[2] = {&p1, &p2};
  Matrix2 h;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      h(i, j) = hs_inner(gamma, *p[i]) * hs_inner(*p[j], xi) + hs_inner(xi, *p[i]) * hs_inner(*p[j], gamma);
  return h;
}

// b_+ and b_z from the short-memory expansion:
//   b_+ = t_m f1 sqrt(2 tr[G^2] tr[G H [H, G]]),  b_z = Re f0 tr[G^2] - (t_m^2/2) Re f2 K sqrt(tr[G^2])
// with K = tr[G [H, [H, G]]]/sqrt(tr[G^2]).
template <int N>
CouplingMatrixH short_memory_coupling(const SystemModel<N>& m, double t_m, cplx f0, cplx f1, cplx f2) {
  const Matrix<N>& g = m.Gamma();
  const Matrix<N> c1 = commutator<N>(m.H(), g);
  const double g2 = (g * g).trace().real();
  const double ghc = (g * m.H() * c1).trace().real();
  const double k = (g * commutator<N>(m.H(), c1)).trace().real() / std::sqrt(g2);
  return {t_m * f1 * std::sqrt(std::max(0.0, 2.0 * g2 * ghc)), f0.real() * g2 - 0.5 * t_m * t_m * f2.real() * k * std::sqrt(g2)};
}

template <int N>
struct DissipatorDecomposition {
  double time = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  SystemOperator<N> L1;
  SystemOperator<N> L2;
  SystemOperator<N> H_renorm;
  Matrix2 U = Matrix2::Identity();
};

// Rows of U are the conjugated eigenvectors of h, so L_i = sum_j U_ij P_j and lambda_1 = b_z + b.
inline Matrix2 coupling_rotation(const CouplingMatrixH& h) {
  const double b = h.b();
  if (b == 0.0) return Matrix2::Identity();
  const cplx bp = h.b_plus;
  Matrix2 u;
  if (h.b_z >= 0.0) {
    const double c = std::sqrt(0.5 * (1.0 + h.b_z / b));
    const double d = std::sqrt(2.0 * b * (b + h.b_z));
    u << c, bp / d, std::conj(bp) / d, -c;
  } else {
    // Same eigenvectors written through b - b_z, regular as b_+ -> 0.
    const double c = std::sqrt((b - h.b_z) / (2.0 * b));
    const double d = std::sqrt(2.0 * b * (b - h.b_z));
    u << bp / d, c, c, -std::conj(bp) / d;
    u = u.conjugate().eval();
  }
  return u;
}

template <int N>
DissipatorDecomposition<N> lindblad_decompose(const CouplingMatrixH& h, const SystemOperator<N>& p1, const SystemOperator<N>& p2,
                                              const SystemOperator<N>& h_renorm, double t) {
  const Matrix2 u = coupling_rotation(h);
  DissipatorDecomposition<N> d;
  d.time = t;
  d.lambda1 = h.lambda1();
  d.lambda2 = h.lambda2();
  d.L1 = SystemOperator<N>(Matrix<N>(u(0, 0) * p1.matrix() + u(0, 1) * p2.matrix()));
  d.L2 = SystemOperator<N>(Matrix<N>(u(1, 0) * p1.matrix() + u(1, 1) * p2.matrix()));
  d.H_renorm = h_renorm;
  d.U = u;
  return d;
}

template <int N>
DissipatorDecomposition<N> decompose(const SystemModel<N>& m, const SystemOperator<N>& xi, double t, const NumericPolicy& policy = {}) {
  const auto pair = gram_schmidt_pair(m.coupling(), xi, policy);
  const auto h = coupling_matrix(m.coupling(), xi, pair.P1, pair.P2);
  return lindblad_decompose(h, pair.P1, pair.P2, renormalized_hamiltonian(m, xi), t);
}

// -i[H', rho] - sum_n (lambda_n/2)(L^+L rho + rho L^+L - 2 L rho L^+)
template <int N>
Matrix<N> lindblad_rhs(const Matrix<N>& rho, const DissipatorDecomposition<N>& d) {
  Matrix<N> out = -I * commutator<N>(d.H_renorm.matrix(), rho);
  const std::pair<double, const Matrix<N>*> terms[2] = {{d.lambda1, &d.L1.matrix()}, {d.lambda2, &d.L2.matrix()}};
  for (const auto& [lambda, lp] : terms) {
    const Matrix<N>& l = *lp;
    const Matrix<N> ll = l.adjoint() * l;
    out -= 0.5 * lambda * (ll * rho + rho * ll - 2.0 * l * rho * l.adjoint());
  }
  return out;
}

// -i[H', rho] - (1/2) sum_ij h_ij (P_i^+ P_j rho + rho P_i^+ P_j - 2 P_j rho P_i^+)
template <int N>
Matrix<N> pair_form_rhs(const Matrix<N>& rho, const Matrix2& h, const Matrix<N>& p1, const Matrix<N>& p2, const Matrix<N>& h_renorm) {
  const Matrix<N>* p[2] = {&p1, &p2};
  Matrix<N> out = -I * commutator<N>(h_renorm, rho);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const Matrix<N> pp = p[i]->adjoint() * *p[j];
      out -= 0.5 * h(i, j) * (pp * rho + rho * pp - 2.0 * *p[j] * rho * p[i]->adjoint());
    }
  }
  return out;
}

struct RwaRates {
  double T2_inv = 0.0;
  double lamb_shift = 0.0;
};

// Secular dephasing of the (i, j) coherence, indices into the ascending H eigenbasis.
template <int N>
RwaRates rwa_rates(const SystemModel<N>& m, const SystemOperator<N>& xi, Index i, Index j) {
  if (i == j) throw UndefinedPairError("rwa_rates: i and j must differ");
  if (i < 0 || j < 0 || i >= m.dim() || j >= m.dim()) throw DimensionError("rwa_rates: index out of range");
  const Matrix<N> g = m.to_eigenbasis(m.Gamma());
  const Matrix<N> x = m.to_eigenbasis(xi.matrix());
  const Matrix<N> xd = x.adjoint();
  const Matrix<N> d = g * x + xd * g;
  const cplx bracket = 0.5 * d(i, i) + 0.5 * d(j, j) - x(i, i) * g(j, j) - g(i, i) * xd(j, j);
  return {bracket.real(), bracket.imag()};
}

}  // namespace brl

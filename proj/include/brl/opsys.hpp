#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "brl/errors.hpp"
#include "brl/numeric_policy.hpp"

namespace brl {

using cplx = std::complex<double>;
using Index = Eigen::Index;
inline constexpr int Dynamic = Eigen::Dynamic;

template <int N>
using Matrix = Eigen::Matrix<cplx, N, N>;
using Matrix2 = Matrix<2>;
using MatrixX = Matrix<Dynamic>;

inline constexpr cplx I{0.0, 1.0};

// Physical dimension of an operator as a power of energy (hbar = 1).
struct Unit {
  int energy_power = 0;

  static constexpr Unit dimensionless() { return {0}; }
  static constexpr Unit energy() { return {1}; }

  friend constexpr bool operator==(Unit, Unit) = default;
  friend constexpr Unit operator*(Unit a, Unit b) { return {a.energy_power + b.energy_power}; }
};

inline std::string to_string(Unit u) {
  if (u.energy_power == 0) return "dimensionless";
  if (u.energy_power == 1) return "energy";
  return "energy^" + std::to_string(u.energy_power);
}

template <int N>
Matrix<N> zero_matrix(Index dim) {
  if constexpr (N == Dynamic) return MatrixX::Zero(dim, dim);
  else return Matrix<N>::Zero();
}

template <int N>
Matrix<N> identity_matrix(Index dim) {
  if constexpr (N == Dynamic) return MatrixX::Identity(dim, dim);
  else return Matrix<N>::Identity();
}

template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

template <class Derived>
double hermiticity_residual(const Eigen::MatrixBase<Derived>& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

template <class A, class B>
cplx hs_inner(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("hs_inner: dimension mismatch");
  return a.conjugate().cwiseProduct(b).sum();
}

template <int N>
Matrix<N> commutator(const Matrix<N>& a, const Matrix<N>& b) {
  return a * b - b * a;
}

template <int N>
Matrix<N> anticommutator(const Matrix<N>& a, const Matrix<N>& b) {
  return a * b + b * a;
}

inline Matrix2 sigma_0() { return Matrix2::Identity(); }
inline Matrix2 sigma_x() { return (Matrix2() << 0, 1, 1, 0).finished(); }
inline Matrix2 sigma_y() { return (Matrix2() << 0, -I, I, 0).finished(); }
inline Matrix2 sigma_z() { return (Matrix2() << 1, 0, 0, -1).finished(); }

// Square matrix with finite entries and a unit tag.
template <int N = Dynamic>
class SystemOperator {
 public:
  SystemOperator() : m_(zero_matrix<N>(N == Dynamic ? 0 : N)) {}

  explicit SystemOperator(Matrix<N> m, Unit unit = Unit::dimensionless()) : m_(std::move(m)), unit_(unit) {
    if (m_.rows() != m_.cols()) throw DimensionError("SystemOperator: matrix is not square");
    if (m_.rows() == 0) throw DimensionError("SystemOperator: empty matrix");
    if (!all_finite(m_)) throw DomainError("SystemOperator: non-finite entry");
  }

  static SystemOperator zero(Index dim, Unit unit = Unit::dimensionless()) {
    return SystemOperator(zero_matrix<N>(dim), unit);
  }

  const Matrix<N>& matrix() const noexcept { return m_; }
  Unit unit() const noexcept { return unit_; }
  Index dim() const noexcept { return m_.rows(); }

  SystemOperator adjoint() const { return SystemOperator(m_.adjoint(), unit_); }
  bool is_hermitian(double tol) const { return hermiticity_residual(m_) <= tol; }
  cplx trace() const { return m_.trace(); }

  friend SystemOperator operator+(const SystemOperator& a, const SystemOperator& b) {
    check_compatible(a, b, "+");
    return SystemOperator(a.m_ + b.m_, a.unit_);
  }
  friend SystemOperator operator-(const SystemOperator& a, const SystemOperator& b) {
    check_compatible(a, b, "-");
    return SystemOperator(a.m_ - b.m_, a.unit_);
  }
  friend SystemOperator operator*(const SystemOperator& a, const SystemOperator& b) {
    if (a.dim() != b.dim()) throw DimensionError("SystemOperator *: dimension mismatch");
    return SystemOperator(a.m_ * b.m_, a.unit_ * b.unit_);
  }
  friend SystemOperator operator*(cplx c, const SystemOperator& a) { return SystemOperator(c * a.m_, a.unit_); }
  friend SystemOperator operator*(const SystemOperator& a, cplx c) { return c * a; }

 private:
  static void check_compatible(const SystemOperator& a, const SystemOperator& b, const char* op) {
    if (a.dim() != b.dim()) throw DimensionError(std::string("SystemOperator ") + op + ": dimension mismatch");
    if (a.unit_ != b.unit_) {
      throw UnitError(std::string("SystemOperator ") + op + ": " + to_string(a.unit_) + " vs " + to_string(b.unit_));
    }
  }

  Matrix<N> m_;
  Unit unit_{};
};

template <int N>
cplx hs_inner(const SystemOperator<N>& a, const SystemOperator<N>& b) {
  return hs_inner(a.matrix(), b.matrix());
}

template <int N>
SystemOperator<N> commutator(const SystemOperator<N>& a, const SystemOperator<N>& b) {
  if (a.dim() != b.dim()) throw DimensionError("commutator: dimension mismatch");
  return SystemOperator<N>(commutator<N>(a.matrix(), b.matrix()), a.unit() * b.unit());
}

// Hermitian, unit-trace matrix. Positivity is measured, not enforced.
template <int N = Dynamic>
class DensityMatrix {
 public:
  struct Unchecked {};

  explicit DensityMatrix(Matrix<N> m, const NumericPolicy& policy = {}) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) throw DimensionError("DensityMatrix: not a square matrix");
    if (!all_finite(m_)) throw StateError("DensityMatrix: non-finite entry");
    if (hermiticity_residual(m_) > policy.algebra) throw StateError("DensityMatrix: not Hermitian");
    if (std::abs(m_.trace() - 1.0) > policy.algebra) throw StateError("DensityMatrix: trace differs from 1");
  }

  // For integrator output, whose trace drift is a diagnostic rather than an error.
  DensityMatrix(Matrix<N> m, Unchecked) noexcept : m_(std::move(m)) {}

  const Matrix<N>& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }
  double trace() const { return m_.trace().real(); }
  double purity() const { return m_.cwiseAbs2().sum(); }

 private:
  Matrix<N> m_;
};

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm2() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(norm2()); }
  friend bool operator==(const BlochVector&, const BlochVector&) = default;
};

inline DensityMatrix<2> bloch_to_rho(const BlochVector& s) {
  Matrix2 m;
  m << 0.5 * (1.0 + s.z), 0.5 * cplx(s.x, -s.y), 0.5 * cplx(s.x, s.y), 0.5 * (1.0 - s.z);
  return DensityMatrix<2>(m, DensityMatrix<2>::Unchecked{});
}

inline BlochVector bloch_of(const Matrix2& m) {
  return {2.0 * m(0, 1).real(), -2.0 * m(0, 1).imag(), (m(0, 0) - m(1, 1)).real()};
}

template <int N>
BlochVector rho_to_bloch(const DensityMatrix<N>& rho) {
  if (rho.dim() != 2) throw DimensionError("rho_to_bloch: dimension must be 2");
  return bloch_of(Matrix2(rho.matrix()));
}

// Ascending eigenvalues of a Hermitian matrix; closed form for 2x2.
template <class Derived>
Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() != m.cols()) throw DimensionError("hermitian_eigenvalues: not square");
  if (m.rows() == 2) {
    const double a = m(0, 0).real();
    const double d = m(1, 1).real();
    const cplx c = 0.5 * (m(0, 1) + std::conj(m(1, 0)));
    const double mean = 0.5 * (a + d);
    const double r = std::hypot(0.5 * (a - d), std::abs(c));
    Eigen::VectorXd ev(2);
    ev << mean - r, mean + r;
    return ev;
  }
  Eigen::SelfAdjointEigenSolver<MatrixX> solver(MatrixX(m), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

template <int N>
struct GramSchmidtPair {
  SystemOperator<N> P1;
  SystemOperator<N> P2;
  bool degenerate = false;
};

// Orthonormal Hermitian basis in generalized Gell-Mann order: for each pair j<k the symmetric then the
// antisymmetric element, then the diagonal elements. The identity is not part of this list.
inline std::vector<MatrixX> gell_mann_traceless(Index dim) {
  std::vector<MatrixX> out;
  const double r = 1.0 / std::sqrt(2.0);
  for (Index j = 0; j < dim; ++j) {
    for (Index k = j + 1; k < dim; ++k) {
      MatrixX s = MatrixX::Zero(dim, dim);
      s(j, k) = r;
      s(k, j) = r;
      out.push_back(s);
      MatrixX a = MatrixX::Zero(dim, dim);
      a(j, k) = -I * r;
      a(k, j) = I * r;
      out.push_back(a);
    }
  }
  for (Index l = 1; l < dim; ++l) {
    MatrixX d = MatrixX::Zero(dim, dim);
    const double norm = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
    for (Index j = 0; j < l; ++j) d(j, j) = norm;
    d(l, l) = -static_cast<double>(l) * norm;
    out.push_back(d);
  }
  return out;
}

template <int N>
GramSchmidtPair<N> gram_schmidt_pair(const SystemOperator<N>& gamma, const SystemOperator<N>& xi,
                                     const NumericPolicy& policy = {}) {
  if (gamma.dim() != xi.dim()) throw DimensionError("gram_schmidt_pair: dimension mismatch");
  const double gamma_norm = std::sqrt(hs_inner(gamma.matrix(), gamma.matrix()).real());
  if (!(gamma_norm > 0.0)) throw DomainError("gram_schmidt_pair: tr[Gamma^2] must be positive");
  const Matrix<N> p1 = gamma.matrix() / gamma_norm;
  const Matrix<N> residual = xi.matrix() - p1 * hs_inner(p1, xi.matrix());
  const double xi_norm = xi.matrix().norm();
  const double residual_norm = residual.norm();
  GramSchmidtPair<N> out{SystemOperator<N>(p1), SystemOperator<N>(p1), false};
  if (xi_norm > 0.0 && residual_norm > policy.degenerate * xi_norm) {
    out.P2 = SystemOperator<N>(Matrix<N>(residual / residual_norm));
    return out;
  }
  out.degenerate = true;
  std::vector<MatrixX> candidates = gell_mann_traceless(gamma.dim());
  candidates.push_back(MatrixX::Identity(gamma.dim(), gamma.dim()) / std::sqrt(static_cast<double>(gamma.dim())));
  for (const auto& g : candidates) {
    const Matrix<N> gm = g;
    const Matrix<N> r = gm - p1 * hs_inner(p1, gm);
    if (r.squaredNorm() >= 0.5) {
      out.P2 = SystemOperator<N>(Matrix<N>(r / r.norm()));
      return out;
    }
  }
  throw DomainError("gram_schmidt_pair: no completion found");
}

// N^2 operators orthonormal under tr[A^dagger B].
template <int N = Dynamic>
class TraceClassBasis {
 public:
  TraceClassBasis(std::vector<Matrix<N>> ops, double gram_tolerance = 1e-10)
      : ops_(std::move(ops)), gram_tolerance_(gram_tolerance) {
    if (ops_.empty()) throw DimensionError("TraceClassBasis: empty");
    const Index dim = ops_.front().rows();
    if (static_cast<Index>(ops_.size()) != dim * dim) throw DimensionError("TraceClassBasis: need N^2 operators");
    for (const auto& op : ops_)
      if (op.rows() != dim || op.cols() != dim) throw DimensionError("TraceClassBasis: mixed dimensions");
    if (gram_residual() > gram_tolerance_) throw DomainError("TraceClassBasis: operators are not orthonormal");
  }

  // Identity/sqrt(N) followed by the traceless Gell-Mann elements.
  static TraceClassBasis gell_mann(Index dim, double gram_tolerance = 1e-10) {
    std::vector<Matrix<N>> ops;
    ops.push_back(Matrix<N>(MatrixX::Identity(dim, dim) / std::sqrt(static_cast<double>(dim))));
    for (const auto& g : gell_mann_traceless(dim)) ops.push_back(Matrix<N>(g));
    return TraceClassBasis(std::move(ops), gram_tolerance);
  }

  std::size_t size() const noexcept { return ops_.size(); }
  Index dim() const noexcept { return ops_.front().rows(); }
  const Matrix<N>& operator[](std::size_t i) const { return ops_[i]; }
  double gram_tolerance() const noexcept { return gram_tolerance_; }

  double gram_residual() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < ops_.size(); ++i)
      for (std::size_t j = 0; j < ops_.size(); ++j)
        worst = std::max(worst, std::abs(hs_inner(ops_[i], ops_[j]) - (i == j ? 1.0 : 0.0)));
    return worst;
  }

  Eigen::VectorXcd coefficients(const Matrix<N>& op) const {
    Eigen::VectorXcd c(static_cast<Index>(ops_.size()));
    for (std::size_t j = 0; j < ops_.size(); ++j) c(static_cast<Index>(j)) = hs_inner(ops_[j], op);
    return c;
  }

  Matrix<N> reconstruct(const Eigen::VectorXcd& c) const {
    Matrix<N> out = zero_matrix<N>(dim());
    for (std::size_t j = 0; j < ops_.size(); ++j) out += c(static_cast<Index>(j)) * ops_[j];
    return out;
  }

 private:
  std::vector<Matrix<N>> ops_;
  double gram_tolerance_;
};

}  // namespace brl

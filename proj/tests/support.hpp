#pragma once

#include <cmath>
#include <random>

#include "catch_amalgamated.hpp"

#include "brl/opsys.hpp"

namespace brl::test {

inline constexpr int property_cases = 1000;

inline std::mt19937_64& rng() {
  static std::mt19937_64 engine(20240607);
  return engine;
}

inline double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }
inline double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng()); }

// Uniform in the unit Bloch ball.
inline BlochVector random_bloch(double max_radius = 1.0) {
  BlochVector s{normal(), normal(), normal()};
  const double r = max_radius * std::cbrt(uniform());
  const double n = s.norm();
  return {r * s.x / n, r * s.y / n, r * s.z / n};
}

inline MatrixX random_complex(Index dim) {
  MatrixX m(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) m(i, j) = cplx(normal(), normal());
  return m;
}

inline MatrixX random_hermitian(Index dim) {
  const MatrixX m = random_complex(dim);
  return 0.5 * (m + m.adjoint());
}

// Random full-rank or pure density matrix.
inline MatrixX random_density(Index dim, bool pure = false) {
  if (pure) {
    Eigen::VectorXcd v = random_complex(dim).col(0);
    v.normalize();
    return v * v.adjoint();
  }
  const MatrixX g = random_complex(dim);
  MatrixX r = g * g.adjoint();
  return r / r.trace();
}

}  // namespace brl::test

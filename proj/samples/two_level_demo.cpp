// Evolves s = (1, 0, 0) with time-dependent and with frozen coefficients and prints
// the smallest eigenvalue reached by each, plus the Lindblad rates at a few times.

#include <cstdio>

#include "brl/dynamics.hpp"
#include "brl/twolevel.hpp"

int main() {
  const brl::TwoLevelParams p{0.05, 1.0, 0.01};
  const auto rho0 = brl::bloch_to_rho({1.0, 0.0, 0.0});

  for (auto mode : {brl::CoefficientMode::time_dependent, brl::CoefficientMode::frozen}) {
    const auto g = brl::two_level_generator(p, mode);
    const auto tr = brl::evolve(rho0, g, 5.0);
    std::printf("%-15s min eigenvalue %+.3e  max purity - 1 %+.3e\n", brl::to_string(mode), tr.min_eigenvalue_overall(),
                tr.max_purity() - 1.0);
  }

  const auto g = brl::two_level_generator(p);
  std::printf("\n%8s %14s %14s\n", "t/t_m", "lambda1", "lambda2");
  for (double t : {0.1, 1.0, 3.0, 10.0, 50.0}) {
    const auto d = g.decomposition(t);
    std::printf("%8.1f %14.6e %14.6e\n", t, d.lambda1, d.lambda2);
  }
}

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "support.hpp"

#include "brl/dynamics.hpp"
#include "brl/slip.hpp"
#include "brl/twolevel.hpp"

using namespace brl;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const TwoLevelParams weak{0.05, 1.0, 0.01};

double gk(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-12);
}

// I-integrals from their definitions as time integrals of the couplings.
IBundle oracle_bundle(double x) {
  const TwoLevelParams p{1.0, 1.0, 1.0};
  auto l1 = [&](double nu) { return lambdas_white(nu, p).lambda1; };
  auto l2 = [&](double nu) { return lambdas_white(nu, p).lambda2; };
  IBundle b;
  b.x = x;
  b.Iy = gk([&](double nu) { return l1(nu) / 2.0; }, 0.0, x);
  b.Iz = b.Iy;
  b.Ixy = gk([&](double nu) { return nu * l1(nu) / 2.0; }, 0.0, x);
  b.Ix = gk([&](double nu) { return (nu * nu * l1(nu) + l2(nu)) / 2.0; }, 0.0, x);
  return b;
}

}  // namespace

TEST_CASE("white-noise couplings saturate", "[twolevel]") {
  const auto l = lambdas_white(50.0, weak);
  const double bt = weak.B * weak.t_m;
  CHECK_THAT(l.lambda1, WithinRel(2.0 * weak.S0, 1e-6));
  CHECK_THAT(l.lambda2, WithinRel(-2.0 * weak.S0 * bt * bt / 4.0, 1e-6));
  const auto zero = lambdas_white(0.0, weak);
  CHECK(zero.lambda1 == 0.0);
  CHECK(zero.lambda2 == 0.0);
  for (int c = 0; c < test::property_cases; ++c) {
    const auto s = lambdas_white(test::uniform(0.0, 100.0), weak);
    REQUIRE(s.lambda2 <= 0.0);
    REQUIRE(s.lambda1 >= 0.0);
  }
  CHECK_THROWS_AS(lambdas_white(-1.0, weak), DomainError);
}

TEST_CASE("pipeline couplings approach the leading-order white-noise forms", "[twolevel]") {
  const auto g = two_level_generator(weak);
  const double bt = weak.B * weak.t_m;
  for (double t : {0.2, 1.0, 3.0, 10.0, 50.0}) {
    const auto d = g.decomposition(t);
    const auto w = lambdas_white(t, weak);
    CHECK_THAT(d.lambda1, WithinRel(w.lambda1, 2.0 * bt * bt));
    CHECK_THAT(d.lambda2, WithinRel(w.lambda2, 0.1));
  }
}

TEST_CASE("I-integrals match quadrature of their definitions", "[twolevel][property]") {
  for (int c = 0; c < test::property_cases; ++c) {
    const double x = std::pow(10.0, test::uniform(-3.0, 2.0));
    const IBundle b = i_bundle(x);
    const IBundle o = oracle_bundle(x);
    REQUIRE_THAT(b.Iy, WithinRel(o.Iy, 1e-10));
    REQUIRE_THAT(b.Ixy, WithinRel(o.Ixy, 1e-10));
    REQUIRE_THAT(b.Ix, WithinRel(o.Ix, 1e-8));
  }
}

TEST_CASE("I-integrals follow their small- and large-x limits", "[twolevel]") {
  const IBundle s = i_bundle(1e-4);
  const IBundle ss = i_bundle_small_x(1e-4);
  CHECK_THAT(s.Iy, WithinRel(ss.Iy, 1e-4));
  CHECK_THAT(s.Ixy, WithinRel(ss.Ixy, 1e-4));
  CHECK_THAT(s.Ix, WithinRel(ss.Ix, 1e-4));
  const IBundle l = i_bundle(1e4);
  const IBundle ll = i_bundle_large_x(1e4);
  CHECK_THAT(l.Iy, WithinRel(ll.Iy, 1e-3));
  CHECK_THAT(l.Ixy, WithinRel(ll.Ixy, 1e-3));
  CHECK_THAT(l.Ix, WithinRel(ll.Ix, 1e-3));
  const IBundle f = i_bundle(2.0, true);
  CHECK(f.Iy == 2.0);
  CHECK(f.Ixy == 2.0);
  CHECK_THAT(f.Ix, WithinRel(8.0 / 3.0 - 0.5, 1e-15));
  CHECK_THROWS_AS(i_bundle(-1.0), DomainError);
}

TEST_CASE("ratio curve limits and monotonicity", "[twolevel]") {
  CHECK(ratio_curve(0.0) == 135.0 / 128.0);
  CHECK_THAT(ratio_curve(1e-3), WithinAbs(135.0 / 128.0, 1e-4));
  CHECK_THAT(ratio_curve(1e5), WithinAbs(4.0 / 3.0, 1e-4));
  double previous = 0.0;
  for (int k = 0; k <= 400; ++k) {
    const double x = std::pow(10.0, -4.0 + 8.0 * k / 400.0);
    const double r = ratio_curve(x);
    REQUIRE(r >= previous);
    REQUIRE(r > 1.0);
    previous = r;
  }
  CHECK_THAT(ratio_curve(std::sqrt(3.0), true), WithinAbs(1.0, 1e-12));
  CHECK(ratio_curve(1.7, true) < 1.0);
  CHECK_THROWS_AS(ratio_curve(0.0, true), DivergenceError);
}

TEST_CASE("completing the square leaves the purity bracket unchanged", "[twolevel][property]") {
  for (int c = 0; c < test::property_cases; ++c) {
    const BlochVector s = test::random_bloch();
    const double bt = test::uniform(0.0, 0.3);
    const IBundle b = i_bundle(test::uniform(0.01, 30.0), c % 2 == 0);
    const double raw = purity_bracket(s, bt, b);
    REQUIRE_THAT(purity_bracket_completed(s, bt, b), WithinAbs(raw, 1e-12 * (1.0 + std::abs(raw))));
  }
}

TEST_CASE("short-time purity tracks the simulation for y and z states", "[twolevel]") {
  const auto g = two_level_generator(weak);
  for (const BlochVector s : {BlochVector{0.0, 0.0, 1.0}, BlochVector{0.0, 1.0, 0.0}}) {
    EvolveOptions opt;
    opt.record_times = {0.25, 0.5, 1.0, 2.0};
    const auto tr = evolve(bloch_to_rho(s), g, 2.0, opt);
    for (std::size_t k = 1; k < tr.size(); ++k) {
      const double t = tr.times[k];
      // Relative corrections are O(S0 t) and O(B t_m).
      CHECK_THAT(1.0 - tr.purity[k], WithinRel(1.0 - short_time_purity(s, t, weak), 2.0 * weak.S0 * t + 0.02));
    }
  }
}

TEST_CASE("an x state loses purity as the lab-frame expansion predicts", "[twolevel]") {
  // With the rotation of the first Lindblad frame kept, 1 - P = 2 S0 B^2 t_m^3 int (nu^2 P1 - nu P2).
  const auto g = two_level_generator(weak);
  EvolveOptions opt;
  opt.record_times = {0.25, 0.5, 1.0};
  const auto tr = evolve(bloch_to_rho({1.0, 0.0, 0.0}), g, 1.0, opt);
  for (std::size_t k = 1; k < tr.size(); ++k) {
    const double x = tr.times[k] / weak.t_m;
    const double integral = gk([](double nu) { return nu * nu * -std::expm1(-nu) - nu * (1.0 - (1.0 + nu) * std::exp(-nu)); }, 0.0, x);
    const double predicted = 2.0 * weak.S0 * std::pow(weak.B, 2) * std::pow(weak.t_m, 3) * integral;
    CHECK_THAT(1.0 - tr.purity[k], WithinRel(predicted, 0.05));
  }
}

TEST_CASE("frozen coefficients raise the purity of an x state at short times", "[twolevel]") {
  const BlochVector x{1.0, 0.0, 0.0};
  CHECK(short_time_purity(x, 0.5, weak, true) > 1.0);
  CHECK(short_time_purity(x, 0.5, weak, false) < 1.0);
  CHECK(short_time_purity(x, 5.0, weak, true) < 1.0);
}

TEST_CASE("worst-case maximizer and bound", "[twolevel]") {
  const TwoLevelParams p{0.001, 1.0, 0.001};
  for (double t : {20.0, 50.0, 100.0}) {
    const double bt = p.B * t;
    const auto m = worst_case_maximizer(t, p);
    CHECK_THAT(m.s.x, WithinAbs(1.0 - bt * bt / 8.0, 1e-6));
    CHECK_THAT(m.s.y, WithinAbs(0.5 * bt, bt * bt * bt));
    const auto bound = worst_case_purity_bound(t, p);
    CHECK(bound.in_regime);
    // Leading order in B t; the next correction is relative O((B t)^2).
    CHECK_THAT(1.0 - m.purity, WithinRel(1.0 - bound.value, bt * bt));
  }
  CHECK_FALSE(worst_case_purity_bound(1.0, p).in_regime);
  CHECK_FALSE(worst_case_purity_bound(20.0, weak).in_regime);
}

TEST_CASE("growth window half-width", "[twolevel]") {
  CHECK_THAT(*growth_window_halfwidth(0.0, 1.0, weak), WithinRel(0.5 * weak.t_m, 1e-15));
  const auto w = growth_window_halfwidth(0.01, 1.0, weak);
  REQUIRE(w);
  CHECK_THAT(*w, WithinRel(std::sqrt(0.25 - 0.04), 1e-14));
  CHECK_FALSE(growth_window_halfwidth(0.1, 1.0, weak));
  CHECK_FALSE(growth_window_halfwidth(0.1, 0.0, weak));
  CHECK_THAT(long_time_growth_bound(weak), WithinRel(0.5 * 0.01 * 0.0025, 1e-15));
}

TEST_CASE("maximal purity growth over monotone runs", "[twolevel]") {
  const std::vector<double> t{0, 1, 2, 3, 4, 5, 6, 7};
  const std::vector<double> p{1.0, 0.9, 0.92, 0.95, 0.94, 0.941, 0.90, 0.93};
  CHECK_THAT(max_purity_growth(t, p, 0.0), WithinAbs(0.05, 1e-15));
  CHECK_THAT(max_purity_growth(t, p, 3.5), WithinAbs(0.03, 1e-15));
  CHECK(max_purity_growth(t, {1, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3}, 0.0) == 0.0);
}

TEST_CASE("Fibonacci sphere points", "[twolevel][property]") {
  for (std::size_t n : {1u, 2u, 3u, 100u, 2048u}) {
    const auto pts = fibonacci_sphere(n, 0.9);
    REQUIRE(pts.size() == n);
    for (const auto& s : pts) REQUIRE_THAT(s.norm(), WithinRel(0.9, 1e-14));
    if (n >= 2) {
      CHECK(pts.front() == BlochVector{0.9, 0.0, 0.0});
      CHECK(pts.back().x == -0.9);
    }
  }
  CHECK(fibonacci_sphere(0).empty());
  CHECK(fibonacci_sphere(64, 1.0, 0.3, 7) == fibonacci_sphere(64, 1.0, 0.3, 7));
  CHECK_FALSE(fibonacci_sphere(64, 1.0, 0.3, 7) == fibonacci_sphere(64, 1.0, 0.3, 8));
  CHECK(fibonacci_sphere(64, 1.0, 0.0, 7) == fibonacci_sphere(64, 1.0, 0.0, 8));
}

TEST_CASE("operator axis of a rotated Pauli combination", "[twolevel]") {
  const double a = 0.3;
  const BlochVector ax = operator_axis(cplx(0.0, 1.0) * (std::cos(a) * sigma_x() + std::sin(a) * sigma_z()));
  CHECK_THAT(ax.x, WithinAbs(std::cos(a), 1e-15));
  CHECK_THAT(ax.z, WithinAbs(std::sin(a), 1e-15));
  const auto g = two_level_generator(weak);
  const BlochVector late = operator_axis(g.decomposition(1e3).L1.matrix());
  CHECK_THAT(std::atan2(-late.y, late.x), WithinAbs(0.5 * weak.B * weak.t_m, 1e-4));
}

TEST_CASE("initial slip for the exponential onset", "[twolevel][slip]") {
  for (double f_inf : {0.1, 0.5, 1.0, 2.0}) {
    const double t_m = 1.3;
    const auto d = slip_demo(exponential_onset_rate(f_inf, t_m), f_inf, 1.0, 20.0 * t_m, 201);
    CHECK_THAT(d.slip_factor, WithinRel(std::exp(f_inf * t_m), 1e-10));
    for (std::size_t k = 0; k < d.t.size(); ++k) {
      const double exact = std::exp(-f_inf * (d.t[k] + t_m * std::expm1(-d.t[k] / t_m)));
      REQUIRE_THAT(d.true_traj[k], WithinRel(exact, 1e-10));
      // slipped/true - 1 = exp(f_inf t_m e^{-t/t_m}) - 1
      REQUIRE_THAT(d.slipped[k] / d.true_traj[k] - 1.0, WithinAbs(std::expm1(f_inf * t_m * std::exp(-d.t[k] / t_m)), 1e-9));
    }
  }
}

TEST_CASE("slip demo edge cases", "[twolevel][slip]") {
  const auto same = slip_demo([](double) { return 0.7; }, 0.7, 2.0, 5.0, 11);
  CHECK(same.slip_factor == 1.0);
  for (std::size_t k = 0; k < same.t.size(); ++k) CHECK_THAT(same.slipped[k], WithinRel(same.true_traj[k], 1e-13));
  const auto flat = slip_demo(exponential_onset_rate(0.0, 1.0), 0.0, 1.0, 5.0, 11);
  for (std::size_t k = 0; k < flat.t.size(); ++k) {
    CHECK(flat.true_traj[k] == 1.0);
    CHECK(flat.slipped[k] == 1.0);
  }
  CHECK_THROWS_AS(slip_factor([](double) { return 1.0; }, 0.0), IntegrationError);
  CHECK_THROWS_AS(slip_demo([](double) { return 1.0; }, 1.0, 1.0, 0.0), DomainError);
}

TEST_CASE("two-level parameters are validated", "[twolevel]") {
  CHECK_THROWS_AS(validate(TwoLevelParams{-1.0, 1.0, 0.01}), DomainError);
  CHECK_THROWS_AS(validate(TwoLevelParams{0.1, 0.0, 0.01}), DomainError);
  CHECK_THROWS_AS(validate(TwoLevelParams{0.1, 1.0, 0.0}), DomainError);
  CHECK(regime_advisories(weak).empty());
  CHECK(regime_advisories({0.5, 1.0, 0.01}).size() == 1);
  CHECK(regime_advisories({0.5, 1.0, 0.5}).size() == 2);
}

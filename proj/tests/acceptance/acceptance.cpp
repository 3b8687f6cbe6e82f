// Acceptance checks: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "brl/dynamics.hpp"
#include "brl/environment.hpp"
#include "brl/io.hpp"
#include "brl/parallel.hpp"
#include "brl/redfield.hpp"
#include "brl/slip.hpp"
#include "brl/sweep.hpp"
#include "brl/twolevel.hpp"

namespace {

using namespace brl;

// Pinned tolerances.
constexpr double tol_ratio = 1e-4;
constexpr double tol_ratio_frozen_one = 1e-6;
constexpr double tol_saturation = 1e-6;
constexpr double tol_positivity = 1e-9;
constexpr double tol_violation = 1e-6;
constexpr double max_offender_angle_deg = 5.0;
constexpr double tol_linearity = 0.05;
constexpr double tol_bound = 1e-9;
constexpr double tol_generator = 1e-11;
constexpr double tol_fq = 1e-9;
constexpr double min_defect_timedep = 1e-4;
constexpr double max_defect_frozen = 1e-9;
constexpr double rk4_order_band = 0.3;
constexpr double tol_slip_late = 1e-6;
constexpr double min_slip_early = 0.1;
constexpr double tol_slip_factor = 1e-10;
constexpr int cases = 1000;

const TwoLevelParams reference_model{0.05, 1.0, 0.01};

int failures = 0;

void report(const char* id, bool ok, const std::string& detail) {
  std::printf("%s %s %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void note(const std::string& text) { std::printf("     %s\n", text.c_str()); }

std::string num(double v) { return format_real(v); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::mt19937_64 rng(20240607);

double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

BlochVector random_bloch() {
  std::normal_distribution<double> n;
  const double x = n(rng), y = n(rng), z = n(rng);
  const double r = std::cbrt(uniform(0.0, 1.0)) / std::sqrt(x * x + y * y + z * z);
  return {x * r, y * r, z * r};
}

MatrixX random_hermitian(Index dim) {
  std::normal_distribution<double> n;
  MatrixX a(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) a(i, j) = cplx(n(rng), n(rng));
  return 0.5 * (a + a.adjoint());
}

MatrixX random_complex(Index dim) {
  std::normal_distribution<double> n;
  MatrixX a(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) a(i, j) = cplx(n(rng), n(rng));
  return a;
}

void c1_ratio_curve() {
  const auto t0 = std::chrono::steady_clock::now();
  const double low = ratio_curve(1e-3);
  const double high = ratio_curve(1e3);
  const auto xs = log_spaced(1e-3, 1e3, 200);
  bool monotone = true;
  double previous = 0.0;
  for (double x : xs) {
    const double r = ratio_curve(x);
    monotone = monotone && r >= previous;
    previous = r;
  }
  const double root = std::sqrt(3.0);
  bool frozen_below = true;
  for (double x : log_spaced(1e-3, root * (1.0 - 1e-6), 200)) frozen_below = frozen_below && ratio_curve(x, true) < 1.0;
  const double at_root = ratio_curve(root, true);
  const double elapsed = seconds_since(t0);

  const bool ok_low = std::abs(low - 135.0 / 128.0) <= tol_ratio;
  const bool ok_high = std::abs(high - 4.0 / 3.0) <= tol_ratio;
  const bool ok_root = std::abs(at_root - 1.0) <= tol_ratio_frozen_one;
  report("C1", ok_low && ok_high && monotone && frozen_below && ok_root && elapsed < 1.0,
         "ratio(1e-3) = " + num(low) + " (135/128 = " + num(135.0 / 128.0) + "), ratio(1e3) = " + num(high) + " (4/3 = " + num(4.0 / 3.0) +
             "), monotone " + (monotone ? "yes" : "no") + ", frozen < 1 below sqrt3 " + (frozen_below ? "yes" : "no") +
             ", frozen(sqrt3) = " + num(at_root) + ", " + num(elapsed) + " s");
  if (!ok_high) {
    note("ratio(x) - 4/3 decays like 1/x: ratio(1e4) = " + num(ratio_curve(1e4)) + ", ratio(1e6) = " + num(ratio_curve(1e6)));
  }
}

void c2_saturation() {
  const double bt = reference_model.B * reference_model.t_m;
  const auto l = lambdas_white(50.0 * reference_model.t_m, reference_model);
  const double e1 = std::abs(l.lambda1 / (2.0 * reference_model.S0) - 1.0);
  const double target2 = -2.0 * reference_model.S0 * (bt / 2.0) * (bt / 2.0);
  const double e2 = std::abs(l.lambda2 / target2 - 1.0);
  bool nonpositive = true;
  for (double t : log_spaced(1e-4, 1e3, 2000)) nonpositive = nonpositive && lambdas_white(t, reference_model).lambda2 <= 0.0;
  const auto g = two_level_generator(reference_model);
  for (double t : log_spaced(1e-3, 1e3, 400)) nonpositive = nonpositive && g.decomposition(t).lambda2 <= 0.0;
  report("C2", e1 <= tol_saturation && e2 <= tol_saturation && nonpositive,
         "lambda1(50 t_m) rel err " + num(e1) + ", lambda2(50 t_m) rel err " + num(e2) + ", lambda2 <= 0 on all samples " +
             (nonpositive ? "yes" : "no"));
  const auto d = g.decomposition(50.0 * reference_model.t_m);
  note("full pipeline at 50 t_m: lambda1 = " + num(d.lambda1) + ", lambda2 = " + num(d.lambda2) + " (higher orders in B t_m)");
}

SweepReport reference_sweep(CoefficientMode mode, double t_end, double short_end) {
  SweepSettings s;
  s.t_end = t_end;
  s.short_regime_end = short_end;
  s.jobs = default_jobs();
  return positivity_sweep(reference_model, SweepGrid{}, mode, false, s);
}

void c3_positivity() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = reference_sweep(CoefficientMode::time_dependent, 10.0 / reference_model.S0, 0.0);
  const double elapsed = seconds_since(t0);
  const bool ok = rep.full.min_eig.value >= -tol_positivity && elapsed < 60.0;
  report("C3", ok,
         std::to_string(rep.n_states) + " states to t = " + num(rep.full.t_end) + ", min eigenvalue " + num(rep.full.min_eig.value) +
             ", max purity " + num(rep.full.max_purity.value) + ", " + num(elapsed) + " s on " + std::to_string(default_jobs()) +
             " worker(s)");
}

void c4_negative_control() {
  const double short_end = 3.0 * reference_model.t_m;
  const auto rep = reference_sweep(CoefficientMode::frozen, short_end, short_end);
  const auto& worst = rep.short_regime.max_purity;
  const double excess = worst.value - 1.0;
  const BlochVector s = worst.state;
  const double angle = std::acos(std::min(1.0, std::abs(s.x) / std::sqrt(s.norm2()))) * 180.0 / M_PI;

  // Linear onset of the excess, on the axis of the frozen first Lindblad operator.
  const auto g = two_level_generator(reference_model, CoefficientMode::frozen);
  const BlochVector axis = operator_axis(g.decomposition(0.0).L1.matrix());
  EvolveOptions opt;
  opt.step = 0.001 * reference_model.t_m;
  opt.record_times = {0.01, 0.02, 0.04};
  const auto tr = evolve(bloch_to_rho(axis), g, 0.04, opt);
  const double r1 = (tr.purity[2] - 1.0) / (tr.purity[1] - 1.0);
  const double r2 = (tr.purity[3] - 1.0) / (tr.purity[2] - 1.0);
  const bool linear = tr.purity[1] > 1.0 && std::abs(r1 - 2.0) <= 2.0 * tol_linearity && std::abs(r2 - 2.0) <= 2.0 * tol_linearity;

  report("C4", excess > tol_violation && angle <= max_offender_angle_deg && linear,
         "max purity for t <= 3 t_m: 1 + " + num(excess) + " at t = " + num(worst.time) + ", worst state " + num(angle) +
             " deg from sigma_x; on the frozen L1 axis P(2t)-1 : P(t)-1 = " + num(r1) + ", " + num(r2) + " at t = 0.01, 0.02 t_m");
  const double bt = reference_model.B * reference_model.t_m;
  note("initial slope dP/dt = " + num((tr.purity[1] - 1.0) / tr.times[1]) + "; S0 (B t_m)^2/2 = " + num(0.5 * reference_model.S0 * bt * bt) +
       ", S0/2 = " + num(0.5 * reference_model.S0));
}

void c5_purity_bounds() {
  const double lo = 10.0 * reference_model.t_m;
  const double hi = 0.1 / std::max(reference_model.B, reference_model.S0);
  note("bound window for B t_m = 0.05, S0 t_m = 0.01 is [" + num(lo) + ", " + num(hi) + "]: empty; using B t_m = S0 t_m = 0.002");

  const TwoLevelParams p{0.002, 1.0, 0.002};
  const double hi_p = 0.1 / std::max(p.B, p.S0);
  SweepGrid grid;
  grid.time_samples = 400;
  SweepSettings s;
  s.t_end = hi_p;
  s.jobs = default_jobs();
  const auto rep = positivity_sweep(p, grid, CoefficientMode::time_dependent, false, s);
  double worst_margin = -1.0;
  double worst_t = 0.0;
  for (std::size_t k = 0; k < rep.sample_times.size(); ++k) {
    const double t = rep.sample_times[k];
    if (t < 10.0 * p.t_m) continue;
    const double bound = 1.0 - p.S0 * p.B * p.B * t * t * t / 6.0;
    const double margin = rep.max_purity_by_time[k] - bound;
    if (margin > worst_margin || worst_t == 0.0) worst_margin = margin, worst_t = t;
  }
  const bool bound_ok = worst_margin <= tol_bound;
  const double deficit = p.S0 * p.B * p.B * std::pow(worst_t, 3) / 6.0;
  note("excess over the bound is " + num(worst_margin / deficit) + " of the bounded deficit at t = " + num(worst_t) + " (B t = " +
       num(p.B * worst_t) + ", S0 t = " + num(p.S0 * worst_t) + ")");

  // Long-time growth for equatorial states of the reference model, every step recorded.
  const auto g = two_level_generator(reference_model);
  const double limit = long_time_growth_bound(reference_model);
  double growth = 0.0;
  for (int k = 0; k < 16; ++k) {
    const double phi = 2.0 * M_PI * k / 16.0;
    EvolveOptions opt;
    opt.record_lambdas = false;
    const auto tr = evolve(bloch_to_rho({std::cos(phi), std::sin(phi), 0.0}), g, 10.0 / reference_model.S0, opt);
    growth = std::max(growth, max_purity_growth(tr.times, tr.purity, 10.0 * reference_model.t_m));
  }
  const bool growth_ok = growth < limit;
  report("C5", bound_ok && growth_ok,
         "max over t in [10, " + num(hi_p) + "] t_m of (max purity - bound) = " + num(worst_margin) + " at t = " + num(worst_t) +
             "; long-time purity growth " + num(growth) + " vs " + num(limit));
}

void c6_generator_equivalence() {
  const auto g = two_level_generator(reference_model);
  const auto& m = g.model();
  double worst_pair = 0.0;
  double worst_decomposed = 0.0;
  double doubled = std::numeric_limits<double>::infinity();
  for (int c = 0; c < cases; ++c) {
    const double t = uniform(0.0, 10.0 / reference_model.S0);
    const Matrix2 rho = bloch_to_rho(random_bloch()).matrix();
    const Matrix2 xi = g.xi(t);
    const Matrix2 a = br_rhs<2>(rho, m, xi);
    const Matrix2 b = br_rhs_rewritten<2>(rho, m, xi);
    auto d = g.decomposition(t);
    const Matrix2 l = lindblad_rhs<2>(rho, d);
    worst_pair = std::max(worst_pair, (a - b).cwiseAbs().maxCoeff());
    worst_decomposed = std::max(worst_decomposed, (a - l).cwiseAbs().maxCoeff());
    d.lambda1 *= 2.0;
    d.lambda2 *= 2.0;
    const double gap = (lindblad_rhs<2>(rho, d) - a).cwiseAbs().maxCoeff();
    if (t > reference_model.t_m && rho_to_bloch(DensityMatrix<2>(rho)).norm2() > 0.01) doubled = std::min(doubled, gap);
  }
  report("C6", worst_pair <= tol_generator && worst_decomposed <= tol_generator,
         std::to_string(cases) + " samples: |original - rewritten| <= " + num(worst_pair) + ", |original - Lindblad| <= " +
             num(worst_decomposed) + "; doubled-rate convention differs by >= " + num(doubled));
}

void c7_fq_cross() {
  using boost::math::quadrature::gauss_kronrod;
  double worst = 0.0;
  std::size_t n = 0;
  for (double T : {infinite_temperature, 0.7, 5.0}) {
    const WhiteNoiseParams p{reference_model.S0, 1.0 / reference_model.t_m, T};
    const double im_factor = std::isinf(T) ? 0.0 : p.omega_m / (2.0 * T);
    for (int q = 0; q <= 2; ++q) {
      for (int k = 0; k <= 100; ++k) {
        const double t = 20.0 * reference_model.t_m * k / 100.0;
        auto w = [&](double tau) { return std::pow(p.omega_m * tau, q) * 0.5 * p.S0 * p.omega_m * std::exp(-p.omega_m * tau); };
        const double re = gauss_kronrod<double, 61>::integrate(w, 0.0, t, 15, 1e-14);
        const cplx oracle(re, re * im_factor);
        worst = std::max(worst, std::abs(white_noise_f(t, q, p) - oracle));
        worst = std::max(worst, std::abs(f_q(t, q, white_noise_kernel(p)) - oracle));
        ++n;
      }
    }
  }
  report("C7", worst <= tol_fq, std::to_string(n) + " (t, q, T) samples, max |analytic - quadrature| = " + num(worst));
}

void c8_semigroup() {
  const auto g = two_level_generator(reference_model);
  const double timedep = semigroup_defect(g, reference_model.t_m);
  const double frozen = semigroup_defect(g.with_mode(CoefficientMode::frozen), reference_model.t_m);
  report("C8", timedep > min_defect_timedep && frozen < max_defect_frozen,
         "||K(2t_m) - K(t_m)^2||_F = " + num(timedep) + " (time-dependent), " + num(frozen) + " (frozen)");
}

void c9_invariants() {
  const auto g = two_level_generator(reference_model);
  double trace = 0.0, herm = 0.0;
  EvolveOptions opt;
  opt.record_lambdas = false;
  opt.record_every = 20;
  for (int c = 0; c < cases; ++c) {
    const auto tr = evolve(bloch_to_rho(random_bloch()), g, 2.0, opt);
    trace = std::max(trace, tr.max_trace_drift);
    for (const auto& rho : tr.states) herm = std::max(herm, hermiticity_residual(rho.matrix()));
  }

  double ortho_p = 0.0, ortho_l = 0.0;
  for (int c = 0; c < cases; ++c) {
    const Index dim = 2 + c % 3;
    const auto m = SystemModel<Dynamic>::from_matrices(random_hermitian(dim), random_hermitian(dim));
    const SystemOperator<Dynamic> xi(random_complex(dim), Unit::energy());
    const auto pair = gram_schmidt_pair(m.coupling(), xi);
    const MatrixX& p1 = pair.P1.matrix();
    const MatrixX& p2 = pair.P2.matrix();
    ortho_p = std::max({ortho_p, std::abs(hs_inner(p1, p1) - 1.0), std::abs(hs_inner(p2, p2) - 1.0), std::abs(hs_inner(p1, p2))});
    const auto d = decompose(m, xi, 0.0);
    const MatrixX& l1 = d.L1.matrix();
    const MatrixX& l2 = d.L2.matrix();
    ortho_l = std::max({ortho_l, std::abs(hs_inner(l1, l1) - 1.0), std::abs(hs_inner(l2, l2) - 1.0), std::abs(hs_inner(l1, l2))});
  }

  const TwoLevelParams strong{2.0, 1.0, 0.5};
  const auto gs = two_level_generator(strong);
  const auto rho0 = bloch_to_rho({0.6, -0.3, 0.7});
  auto final_state = [&](double h) {
    EvolveOptions o;
    o.step = h;
    o.record_lambdas = false;
    o.record_every = 1u << 20;
    return evolve(rho0, gs, 4.0, o).states.back().matrix();
  };
  const Matrix2 reference = final_state(0.2 / 64.0);
  const double order = std::log2((final_state(0.1) - reference).norm() / (final_state(0.05) - reference).norm());

  double roundtrip = 0.0;
  for (int c = 0; c < cases; ++c) {
    const BlochVector s = random_bloch();
    const BlochVector back = rho_to_bloch(bloch_to_rho(s));
    roundtrip = std::max({roundtrip, std::abs(back.x - s.x), std::abs(back.y - s.y), std::abs(back.z - s.z)});
  }

  const double eps = std::numeric_limits<double>::epsilon();
  const bool ok = trace < 1e-14 && herm == 0.0 && ortho_p < 1e-10 && ortho_l < 1e-10 && std::abs(order - 4.0) <= rk4_order_band &&
                  roundtrip <= 2.0 * eps;
  report("C9", ok,
         std::to_string(cases) + " cases each: trace drift " + num(trace) + ", Hermiticity " + num(herm) + ", P-pair " + num(ortho_p) +
             ", L-pair " + num(ortho_l) + ", RK4 order " + num(order) + ", Bloch round trip " + num(roundtrip));
}

void c10_slip() {
  const double f_inf = 0.5;
  const double t_m = 1.0;
  const auto F = exponential_onset_rate(f_inf, t_m);
  const auto demo = slip_demo(F, f_inf, 1.0, 20.0 * t_m, 2001);
  double late = 0.0;
  double early = 0.0;
  for (std::size_t k = 0; k < demo.t.size(); ++k) {
    const double rel = std::abs(demo.slipped[k] - demo.true_traj[k]) / demo.true_traj[k];
    if (demo.t[k] >= 10.0 * t_m) late = std::max(late, rel);
    if (k == 1) early = rel;
  }
  const double target = std::exp(-f_inf * t_m);
  const double factor_err = std::abs(demo.slip_factor - target);
  report("C10", late <= tol_slip_late && early > min_slip_early && factor_err <= tol_slip_factor,
         "f_inf t_m = " + num(f_inf * t_m) + ": max rel deviation for t >= 10 t_m " + num(late) + ", at t = " + num(demo.t[1]) + " " +
             num(early) + ", slip factor " + num(demo.slip_factor) + " vs exp(-f_inf t_m) = " + num(target));
  note("slip factor - exp(+f_inf t_m) = " + num(demo.slip_factor - std::exp(f_inf * t_m)) +
       "; deviation at 10 t_m equals exp(f_inf t_m e^-10) - 1 = " + num(std::expm1(f_inf * t_m * std::exp(-10.0))));
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void()>>> checks{
      {"C1", c1_ratio_curve}, {"C2", c2_saturation},  {"C3", c3_positivity}, {"C4", c4_negative_control}, {"C5", c5_purity_bounds},
      {"C6", c6_generator_equivalence}, {"C7", c7_fq_cross}, {"C8", c8_semigroup}, {"C9", c9_invariants}, {"C10", c10_slip}};
  for (const auto& [id, check] : checks) {
    try {
      check();
    } catch (const std::exception& e) {
      report(id, false, std::string("threw: ") + e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, checks.size());
  return failures == 0 ? 0 : 1;
}

// Command-line front end. Exit codes: 0 pass, 1 positivity violation, 2 usage or configuration error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "brl/config.hpp"
#include "brl/dynamics.hpp"
#include "brl/io.hpp"
#include "brl/numeric_policy.hpp"
#include "brl/slip.hpp"
#include "brl/sweep.hpp"
#include "brl/twolevel.hpp"

namespace {

constexpr int exit_pass = 0;
constexpr int exit_violation = 1;
constexpr int exit_usage = 2;

struct CommonFlags {
  std::string config;
  std::string mode;
  std::string out;
  unsigned jobs = 0;
  std::int64_t seed = -1;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "key = value run configuration")->required()->check(CLI::ExistingFile);
  cmd->add_option("--mode", f.mode, "coefficient mode")->check(CLI::IsMember({"timedep", "frozen"}));
  cmd->add_option("--out", f.out, "output path, '-' for stdout (overrides 'outputs')");
  cmd->add_option("--jobs", f.jobs, "worker threads (default: all cores)");
  cmd->add_option("--seed", f.seed, "grid seed")->check(CLI::NonNegativeNumber);
  cmd->add_option("--set", f.overrides, "override a config key, KEY=VALUE")->allow_extra_args(false);
}

brl::RunConfig load_config(const CommonFlags& f) {
  brl::KeyValues kv = brl::load_key_values(f.config);
  for (const auto& o : f.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw brl::ConfigError("--set expects KEY=VALUE, got '" + o + "'");
    kv[brl::trim(o.substr(0, eq))] = brl::trim(o.substr(eq + 1));
  }
  if (!f.mode.empty()) kv["mode"] = f.mode;
  if (f.seed >= 0) kv["seed"] = std::to_string(f.seed);
  if (f.jobs > 0) kv["jobs"] = std::to_string(f.jobs);
  brl::RunConfig c = brl::run_config_from_key_values(kv);
  if (!f.out.empty()) c.outputs = {f.out};
  if (c.outputs.empty()) c.outputs = {"-"};
  if (c.jobs == 0) c.jobs = brl::default_jobs();
  return c;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Writes `text` to a file, or to stdout for "-".
void emit(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw brl::ConfigError("cannot open output '" + path + "'");
  os << text;
  if (!os) throw brl::ConfigError("failed writing '" + path + "'");
}

void warn(const std::vector<brl::Advisory>& advisories) {
  for (const auto& a : advisories) std::cerr << "warning [" << a.code << "]: " << a.message << '\n';
}

std::string sweep_samples_csv(const brl::SweepReport& rep) {
  std::ostringstream os;
  os << "t,max_purity,min_eig\n";
  for (std::size_t k = 0; k < rep.sample_times.size(); ++k)
    os << brl::format_real(rep.sample_times[k]) << ',' << brl::format_real(rep.max_purity_by_time[k]) << ','
       << brl::format_real(rep.min_eig_by_time[k]) << '\n';
  return os.str();
}

int run_sweep(const brl::RunConfig& c, const brl::NumericPolicy& policy) {
  if (c.environment) throw brl::ConfigError("sweep supports the white-noise model only; drop the environment.* keys");
  warn(brl::regime_advisories(c.model));
  brl::SweepSettings s;
  s.t_end = brl::effective_t_end(c);
  s.step = c.step;
  s.jobs = c.jobs;
  s.policy = policy;
  if (!(s.t_end > 0.0)) throw brl::ConfigError("sweep needs t_end > 0");
  const auto rep = brl::positivity_sweep(c.model, c.grid, c.mode, c.suppress_negative_rate, s);
  const std::string json = brl::sweep_json(rep, c.model, c.grid, c.mode, c.suppress_negative_rate).dump(2) + "\n";
  for (const auto& path : c.outputs) emit(path, ends_with(path, ".csv") ? sweep_samples_csv(rep) : json);
  std::cerr << (rep.pass() ? "PASS" : "FAIL") << ": " << rep.n_states << " states, min eigenvalue "
            << brl::format_real(rep.full.min_eig.value) << ", max purity " << brl::format_real(rep.full.max_purity.value) << ", "
            << rep.violations.size() << " violating states\n";
  return rep.pass() ? exit_pass : exit_violation;
}

int run_simulate(const brl::RunConfig& c, const brl::NumericPolicy& policy) {
  if (!c.initial_state) return run_sweep(c, policy);
  warn(brl::regime_advisories(c.model));
  const double t_end = brl::effective_t_end(c);
  const auto model = brl::two_level_model(c.model);
  const auto kernel = c.environment ? brl::make_kernel(*c.environment, policy) : brl::white_noise_kernel(brl::white_noise(c.model));
  const auto g = brl::make_generator(model, kernel, t_end, c.mode, c.suppress_negative_rate, policy);
  brl::EvolveOptions opt;
  opt.step = c.step;
  opt.record_every = c.record_every;
  const brl::DensityMatrix<2> rho0(brl::bloch_to_rho(*c.initial_state).matrix(), policy);
  const auto tr = brl::evolve(rho0, g, t_end, opt);

  for (const auto& path : c.outputs) {
    std::ostringstream os;
    if (ends_with(path, ".json")) os << brl::trajectory_json(tr).dump(2) << '\n';
    else brl::write_trajectory_csv(os, tr);
    emit(path, os.str());
  }
  const double slack = policy.positivity_slack;
  const bool ok = !tr.aborted && tr.min_eigenvalue_overall() >= -slack && tr.max_purity() <= 1.0 + slack;
  if (tr.aborted) std::cerr << "aborted: " << tr.abort_reason << '\n';
  std::cerr << (ok ? "PASS" : "FAIL") << ": min eigenvalue " << brl::format_real(tr.min_eigenvalue_overall()) << ", max purity "
            << brl::format_real(tr.max_purity()) << '\n';
  return ok ? exit_pass : exit_violation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bloch-Redfield to time-dependent Lindblad simulator with positivity checks"};
  app.require_subcommand(1);

  CommonFlags sim_flags;
  auto* simulate = app.add_subcommand("simulate", "evolve one initial state and write its trajectory");
  add_common(simulate, sim_flags);

  CommonFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "check positivity over a grid of initial states");
  add_common(sweep, sweep_flags);

  double x_min = 1e-3, x_max = 1e3;
  std::size_t ratio_points = 200;
  std::string ratio_out = "-";
  auto* ratio = app.add_subcommand("ratio-curve", "tabulate Iy Ix / Ixy^2 for both coefficient modes");
  ratio->add_option("--x-min", x_min, "smallest t/t_m")->check(CLI::PositiveNumber);
  ratio->add_option("--x-max", x_max, "largest t/t_m")->check(CLI::PositiveNumber);
  ratio->add_option("--n-points", ratio_points, "number of log-spaced samples")->check(CLI::Range(std::size_t{1}, std::size_t{1000000}));
  ratio->add_option("--out", ratio_out, "output path, '-' for stdout");

  double f_inf = 1.0, slip_tm = 1.0, slip_t_end = 20.0;
  std::size_t slip_points = 201;
  std::string slip_out = "-";
  auto* slip = app.add_subcommand("slip-demo", "scalar decay with and without an initial slip");
  slip->add_option("--f-inf", f_inf, "saturated decay rate");
  slip->add_option("--t-m", slip_tm, "onset time of F(t) = f_inf (1 - exp(-t/t_m))")->check(CLI::PositiveNumber);
  slip->add_option("--t-end", slip_t_end, "end time")->check(CLI::PositiveNumber);
  slip->add_option("--n-points", slip_points, "number of uniform samples")->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));
  slip->add_option("--out", slip_out, "output path, '-' for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_pass : exit_usage;
  }

  try {
    const brl::NumericPolicy policy = brl::policy_from_environment();
    if (*simulate) return run_simulate(load_config(sim_flags), policy);
    if (*sweep) return run_sweep(load_config(sweep_flags), policy);
    if (*ratio) {
      if (!(x_min < x_max) && ratio_points > 1) throw brl::ConfigError("ratio-curve needs x-min < x-max");
      std::ostringstream os;
      brl::write_ratio_csv(os, brl::log_spaced(x_min, ratio_points > 1 ? x_max : x_min, ratio_points));
      emit(ratio_out, os.str());
      return exit_pass;
    }
    if (*slip) {
      std::ostringstream os;
      brl::write_slip_csv(os, brl::slip_demo(brl::exponential_onset_rate(f_inf, slip_tm), f_inf, 1.0, slip_t_end, slip_points, policy));
      emit(slip_out, os.str());
      return exit_pass;
    }
  } catch (const brl::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  }
  return exit_usage;
}

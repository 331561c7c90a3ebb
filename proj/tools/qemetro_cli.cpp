// Command-line front end: parameter sweeps, the PEC comparison and a quick
// closed-form cross-check.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "qemetro/harness.hpp"

using namespace qemetro;

namespace {

struct Flags {
  std::string state, noise, theta_rule, evaluation, config, out;
  std::vector<int> nq, qem_order;
  std::vector<double> tau, theta;
  int dfree = -1, workers = -1, pec_samples = -1, pec_repeats = -1;
  double dt = -1, gamma_c = -2;
  long long seed = -1;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--state", f.state, "css | ghz | sds");
  app->add_option("--noise", f.noise, "mpd | mad | nmpd");
  app->add_option("--nq", f.nq, "qubit counts")->delimiter(',');
  app->add_option("--tau", f.tau, "noise strengths tau = gamma dt (repeatable)")->delimiter(',');
  app->add_option("--theta", f.theta, "explicit theta values")->delimiter(',');
  app->add_option("--theta-rule", f.theta_rule, "pi/2 | pi/(2N) | pi/100 | grid | list");
  app->add_option("--dfree", f.dfree, "free-evolution layers");
  app->add_option("--dt", f.dt, "layer duration");
  app->add_option("--gamma-c", f.gamma_c, "NMPD environment rate (default gamma_PD / 2)");
  app->add_option("--qem-order", f.qem_order, "mitigation orders")->delimiter(',');
  app->add_option("--evaluation", f.evaluation, "exact | device");
  app->add_option("--pec-samples", f.pec_samples, "PEC samples (0: match circuit-group sizes)");
  app->add_option("--pec-repeats", f.pec_repeats, "PEC repeats");
  app->add_option("--seed", f.seed, "RNG seed");
  app->add_option("--out", f.out, "output file, '-' for stdout");
  app->add_option("--workers", f.workers, "worker threads (0: all cores)");
  app->add_option("--config", f.config, "JSON or key = value file, overrides flags");
}

SweepConfig to_config(const Flags& f) {
  SweepConfig c;
  if (!f.state.empty()) c.state = parse_state_kind(f.state);
  if (!f.noise.empty()) c.noise = parse_noise_kind(f.noise);
  if (!f.nq.empty()) c.n_qubits = f.nq;
  if (!f.tau.empty()) c.taus = f.tau;
  if (!f.theta.empty()) {
    c.thetas = f.theta;
    c.theta_rule = ThetaRule::List;
  }
  if (!f.theta_rule.empty()) c.theta_rule = parse_theta_rule(f.theta_rule);
  if (f.dfree >= 0) c.d_free = f.dfree;
  if (f.dt >= 0) c.dt = f.dt;
  if (f.gamma_c > -2) c.gamma_c = f.gamma_c;
  if (!f.qem_order.empty()) c.qem_orders = f.qem_order;
  if (!f.evaluation.empty()) c.evaluation = parse_evaluation(f.evaluation);
  if (f.pec_samples >= 0 || f.pec_repeats >= 0) {
    c.pec = PecConfig{};
    if (f.pec_samples >= 0) c.pec->n_samples = f.pec_samples;
    if (f.pec_repeats >= 0) c.pec->n_repeats = f.pec_repeats;
  }
  if (f.seed >= 0) c.seed = static_cast<std::uint64_t>(f.seed);
  if (!f.out.empty()) c.output = f.out;
  if (f.workers >= 0) c.workers = f.workers;
  if (!f.config.empty()) apply_config_file(c, f.config);
  return c;
}

// Opens the destination; an empty path lands in the default output directory.
std::ostream& open_output(const SweepConfig& c, const std::string& stem, std::unique_ptr<std::ofstream>& file) {
  if (c.output == "-") return std::cout;
  std::filesystem::path p = c.output;
  if (p.empty())
    p = std::filesystem::path(default_output_dir()) /
        (stem + "_" + to_string(c.state) + "_" + to_string(c.noise) + ".csv");
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  file = std::make_unique<std::ofstream>(p);
  if (!*file) throw ConfigError("cannot write '" + p.string() + "'");
  std::cerr << "writing " << p.string() << "\n";
  return *file;
}

int oracle_check(const SweepConfig& c) {
  c.validate();
  int failures = 0;
  std::printf("%-5s %-5s %3s %-9s %-9s %14s %14s %10s\n", "state", "noise", "nq", "tau", "theta",
              "closed-form", "simulated", "rel-err");
  for (int n : c.n_qubits)
    for (double tau : c.taus)
      for (double theta : c.thetas_for(n)) {
        MetrologyTask t = make_task(c.state, n, theta, c.d_free, c.dt);
        t.basis_change = false;
        const NoiseSpec spec = NoiseSpec::from_tau(c.noise, tau, c.dt, c.gamma_c);
        const FisherValue cf = closed_form(t, spec, false);
        const FisherValue sim = qfi_spectral(
            [&](double th) {
              MetrologyTask u = t;
              u.theta = th;
              return evolve_noisy(build_task_circuit(u), spec);
            },
            theta);
        const double rel = std::abs(cf.value - sim.value) / std::max(1e-300, std::abs(cf.value));
        const bool ok = rel < 1e-6;
        failures += !ok;
        std::printf("%-5s %-5s %3d %-9.3g %-9.5g %14.10g %14.10g %10.2e %s\n", to_string(c.state).c_str(),
                    to_string(c.noise).c_str(), n, tau, theta, cf.value, sim.value, rel, ok ? "ok" : "MISMATCH");
      }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perturbative error mitigation for noisy quantum metrology"};
  app.require_subcommand(1);
  Flags sweep_flags, pec_flags, oracle_flags;
  CLI::App* sweep = app.add_subcommand("sweep", "ideal / noisy / mitigated Fisher information over a grid");
  CLI::App* pec = app.add_subcommand("pec-compare", "variance comparison against PEC");
  CLI::App* oracle = app.add_subcommand("oracle-check", "closed-form QFI against simulation");
  add_common(sweep, sweep_flags);
  add_common(pec, pec_flags);
  add_common(oracle, oracle_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sweep->parsed()) {
      const SweepConfig c = to_config(sweep_flags);
      c.validate();
      std::unique_ptr<std::ofstream> file;
      run_sweep(c, &open_output(c, "sweep", file));
    } else if (pec->parsed()) {
      SweepConfig c = to_config(pec_flags);
      if (!c.pec) c.pec = PecConfig{};
      c.validate();
      std::unique_ptr<std::ofstream> file;
      run_pec_comparison(c, &open_output(c, "pec", file));
    } else {
      return oracle_check(to_config(oracle_flags));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const CapabilityError& e) {
    std::cerr << "capability error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

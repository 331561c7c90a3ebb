#include "qemetro/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "qemetro/pec.hpp"

namespace qemetro {

std::string to_string(ThetaRule r) {
  switch (r) {
    case ThetaRule::HalfPi: return "pi/2";
    case ThetaRule::PiOver2N: return "pi/(2N)";
    case ThetaRule::PiOver100: return "pi/100";
    case ThetaRule::Grid: return "grid";
    case ThetaRule::List: return "list";
  }
  return "?";
}

ThetaRule parse_theta_rule(const std::string& s) {
  if (s == "pi/2") return ThetaRule::HalfPi;
  if (s == "pi/(2N)" || s == "pi/2N") return ThetaRule::PiOver2N;
  if (s == "pi/100") return ThetaRule::PiOver100;
  if (s == "grid") return ThetaRule::Grid;
  if (s == "list") return ThetaRule::List;
  throw ConfigError("unknown theta rule '" + s + "'");
}

void SweepConfig::validate() const {
  if (n_qubits.empty()) throw ConfigError("empty n_qubits list");
  if (taus.empty()) throw ConfigError("empty tau list");
  for (double t : taus)
    if (!(t >= 0)) throw ConfigError("tau values must be >= 0");
  if (theta_rule == ThetaRule::List && thetas.empty()) throw ConfigError("empty theta list");
  if (theta_rule == ThetaRule::Grid && (!(theta_step > 0) || grid_last < grid_first))
    throw ConfigError("theta grid needs theta_step > 0 and grid_last >= grid_first");
  if (qem_orders.empty()) throw ConfigError("empty qem order list");
  for (int o : qem_orders)
    if (o != 1 && o != 2) throw ConfigError("qem orders must be 1 or 2");
  if (!(h > 0)) throw ConfigError("derivative step must be positive");
  if (workers < 0) throw ConfigError("workers must be >= 0");
  if (pec) {
    if (pec->n_repeats < 1 || pec->n_samples < 0) throw ConfigError("invalid PEC run sizes");
    if (noise == NoiseKind::MAD) throw CapabilityError("PEC is implemented for dephasing only");
  }
  for (int n : n_qubits) {
    MetrologyTask t = make_task(state, n, 0.0, d_free, dt);
    t.validate();
    if (state == StateKind::SDS && noise == NoiseKind::MAD)
      throw CapabilityError("SDS under MAD is not supported");
  }
  NoiseSpec::from_tau(noise, taus.front(), dt, gamma_c);
}

std::vector<double> SweepConfig::thetas_for(int n) const {
  using std::numbers::pi;
  switch (theta_rule) {
    case ThetaRule::HalfPi: return {pi / 2};
    case ThetaRule::PiOver2N: return {pi / (2 * n)};
    case ThetaRule::PiOver100: return {pi / 100};
    case ThetaRule::List: return thetas;
    case ThetaRule::Grid: {
      std::vector<double> out;
      for (int i = grid_first; i <= grid_last; ++i) out.push_back(theta_step * i);
      return out;
    }
  }
  return {};
}

int SweepConfig::worker_count() const {
  if (workers > 0) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

template <class T>
std::vector<T> as_list(const nlohmann::json& v) {
  if (v.is_array()) return v.get<std::vector<T>>();
  return {v.get<T>()};
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Value of a key-value line as JSON: number, list of numbers or string.
nlohmann::json parse_value(const std::string& raw) {
  const std::string v = trim(raw);
  if (v.find(',') != std::string::npos) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& part : split(v, ',')) arr.push_back(parse_value(part));
    return arr;
  }
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (!v.empty() && end == v.c_str() + v.size()) {
    if (v.find_first_of(".eE") == std::string::npos) return static_cast<long long>(d);
    return d;
  }
  if (v == "true") return true;
  if (v == "false") return false;
  return v;
}

}  // namespace

void apply_json(SweepConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be an object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "state") cfg.state = parse_state_kind(v.get<std::string>());
      else if (key == "noise") cfg.noise = parse_noise_kind(v.get<std::string>());
      else if (key == "nq" || key == "n_qubits") cfg.n_qubits = as_list<int>(v);
      else if (key == "tau" || key == "taus") cfg.taus = as_list<double>(v);
      else if (key == "theta" || key == "thetas") {
        cfg.thetas = as_list<double>(v);
        cfg.theta_rule = ThetaRule::List;
      } else if (key == "theta_rule" || key == "theta-rule")
        cfg.theta_rule = parse_theta_rule(v.get<std::string>());
      else if (key == "theta_step" || key == "theta-step") cfg.theta_step = v.get<double>();
      else if (key == "grid_first" || key == "grid-first") cfg.grid_first = v.get<int>();
      else if (key == "grid_last" || key == "grid-last") cfg.grid_last = v.get<int>();
      else if (key == "dfree" || key == "d_free") cfg.d_free = v.get<int>();
      else if (key == "dt") cfg.dt = v.get<double>();
      else if (key == "gamma_c" || key == "gamma-c") cfg.gamma_c = v.get<double>();
      else if (key == "qem_order" || key == "qem-order" || key == "qem_orders")
        cfg.qem_orders = as_list<int>(v);
      else if (key == "evaluation") cfg.evaluation = parse_evaluation(v.get<std::string>());
      else if (key == "h") cfg.h = v.get<double>();
      else if (key == "pec_samples" || key == "pec-samples") {
        if (!cfg.pec) cfg.pec = PecConfig{};
        cfg.pec->n_samples = v.get<int>();
      } else if (key == "pec_repeats" || key == "pec-repeats") {
        if (!cfg.pec) cfg.pec = PecConfig{};
        cfg.pec->n_repeats = v.get<int>();
      } else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "out" || key == "output") cfg.output = v.get<std::string>();
      else if (key == "workers") cfg.workers = v.get<int>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

void apply_config_file(SweepConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    j = nlohmann::json::object();
    int line_no = 0;
    for (const auto& raw : split(text, '\n')) {
      ++line_no;
      const std::string line = trim(raw.substr(0, raw.find('#')));
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
      j[trim(line.substr(0, eq))] = parse_value(line.substr(eq + 1));
    }
  }
  apply_json(cfg, j);
}

nlohmann::json to_json(const SweepConfig& cfg) {
  nlohmann::json j;
  j["state"] = to_string(cfg.state);
  j["noise"] = to_string(cfg.noise);
  j["n_qubits"] = cfg.n_qubits;
  j["taus"] = cfg.taus;
  j["theta_rule"] = to_string(cfg.theta_rule);
  if (cfg.theta_rule == ThetaRule::List) j["thetas"] = cfg.thetas;
  if (cfg.theta_rule == ThetaRule::Grid) {
    j["theta_step"] = cfg.theta_step;
    j["grid_first"] = cfg.grid_first;
    j["grid_last"] = cfg.grid_last;
  }
  j["d_free"] = cfg.d_free;
  j["dt"] = cfg.dt;
  j["gamma_c"] = cfg.gamma_c;
  j["qem_orders"] = cfg.qem_orders;
  j["evaluation"] = to_string(cfg.evaluation);
  j["h"] = cfg.h;
  if (cfg.pec) {
    j["pec_samples"] = cfg.pec->n_samples;
    j["pec_repeats"] = cfg.pec->n_repeats;
  }
  j["seed"] = cfg.seed;
  return j;
}

// ---- evaluation ---------------------------------------------------------------

namespace {

struct Stencils {
  StateStencil ideal, noisy, qem1, qem2;
  double trace1 = 1.0, trace2 = 1.0;
};

Stencils build_stencils(const SweepConfig& cfg, int n, const NoiseSpec& spec, double theta) {
  Stencils s;
  for (int i = 0; i < 5; ++i) {
    const MetrologyTask task = make_task(cfg.state, n, theta + (i - 2) * cfg.h, cfg.d_free, cfg.dt);
    const MitigationBundle b = mitigate_all(build_task_circuit(task), spec, cfg.evaluation);
    s.ideal[i] = b.ideal;
    s.noisy[i] = b.noisy;
    s.qem1[i] = normalize(b.qem1).matrix;
    s.qem2[i] = normalize(b.qem2).matrix;
    if (i == 2) {
      s.trace1 = b.qem1.trace;
      s.trace2 = b.qem2.trace;
    }
  }
  return s;
}

double cfi_of(const Observable& o, const StateStencil& s, double h, bool& degenerate) {
  try {
    return error_propagation(o, s, h).cfi.normalized;
  } catch (const DegenerateError&) {
    degenerate = true;
    return 0.0;
  }
}

FisherValue per_qubit(double v, int n) { return make_fisher(v * n, n, FisherMethod::ErrorPropagation); }

}  // namespace

FisherReport evaluate_point(const SweepConfig& cfg, int n, double tau, double theta) {
  const NoiseSpec spec = NoiseSpec::from_tau(cfg.noise, tau, cfg.dt, cfg.gamma_c);
  const MetrologyTask task = make_task(cfg.state, n, theta, cfg.d_free, cfg.dt);
  const Observable o = task_observable(task);
  const Stencils s = build_stencils(cfg, n, spec, theta);

  FisherReport r;
  r.state = cfg.state;
  r.noise = cfg.noise;
  r.n_qubits = n;
  r.tau = tau;
  r.theta = theta;
  r.cfi.ideal = cfi_of(o, s.ideal, cfg.h, r.degenerate);
  r.cfi.noisy = cfi_of(o, s.noisy, cfg.h, r.degenerate);
  r.cfi.qem1 = cfi_of(o, s.qem1, cfg.h, r.degenerate);
  r.cfi.qem2 = cfi_of(o, s.qem2, cfg.h, r.degenerate);
  r.qfi.ideal = qfi_spectral(s.ideal, cfg.h).normalized;
  r.qfi.noisy = qfi_spectral(s.noisy, cfg.h).normalized;
  r.qfi.qem1 = qfi_spectral(s.qem1, cfg.h).normalized;
  r.qfi.qem2 = qfi_spectral(s.qem2, cfg.h).normalized;
  r.distance.noisy = trace_distance(s.ideal[2], s.noisy[2]);
  r.distance.qem1 = trace_distance(s.ideal[2], s.qem1[2]);
  r.distance.qem2 = trace_distance(s.ideal[2], s.qem2[2]);
  r.trace_qem1 = s.trace1;
  r.trace_qem2 = s.trace2;

  auto f = [n](double v) { return per_qubit(v, n); };
  r.rt1 = rt_measure(f(r.qfi.ideal), f(r.qfi.noisy), f(r.qfi.qem1));
  r.rt2 = rt_measure(f(r.qfi.ideal), f(r.qfi.noisy), f(r.qfi.qem2));
  r.rt1_cfi = rt_measure(f(r.cfi.ideal), f(r.cfi.noisy), f(r.cfi.qem1));
  r.rt2_cfi = rt_measure(f(r.cfi.ideal), f(r.cfi.noisy), f(r.cfi.qem2));
  const bool want1 = std::count(cfg.qem_orders.begin(), cfg.qem_orders.end(), 1) > 0;
  const bool want2 = std::count(cfg.qem_orders.begin(), cfg.qem_orders.end(), 2) > 0;
  r.precision_loss = (want1 && (r.rt1.precision_loss || r.rt1_cfi.precision_loss)) ||
                     (want2 && (r.rt2.precision_loss || r.rt2_cfi.precision_loss));
  r.negative_cfi = (want1 && r.cfi.qem1 < 0) || (want2 && r.cfi.qem2 < 0);
  return r;
}

// ---- CSV ---------------------------------------------------------------------

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string rt(const RtResult& r) { return r.precision_loss ? "inf" : num(r.value); }

const char* kSweepColumns =
    "state,noise,n_qubits,tau,theta,nq_theta,cfi_ideal,cfi_noisy,cfi_qem1,cfi_qem2,"
    "qfi_ideal,qfi_noisy,qfi_qem1,qfi_qem2,d_noisy,d_qem1,d_qem2,trace_qem1,trace_qem2,"
    "rt1_qfi,rt2_qfi,rt1_cfi,rt2_cfi,flags";

// Runs job(i) for i in [0, count) on a pool and hands results to sink(i)
// in index order.
template <class Result>
std::vector<Result> ordered_pool(std::size_t count, int workers,
                                 const std::function<Result(std::size_t)>& job,
                                 const std::function<void(const Result&)>& sink) {
  std::vector<std::optional<Result>> slots(count);
  std::vector<Result> out;
  std::atomic<std::size_t> next{0};
  std::mutex lock;
  std::size_t flushed = 0;
  std::exception_ptr error;

  auto work = [&] {
    for (;;) {
      const std::size_t i = next++;
      if (i >= count) return;
      try {
        Result r = job(i);
        std::lock_guard<std::mutex> g(lock);
        slots[i] = std::move(r);
        while (flushed < count && slots[flushed]) {
          if (sink) sink(*slots[flushed]);
          ++flushed;
        }
      } catch (...) {
        std::lock_guard<std::mutex> g(lock);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace

void write_csv_header(std::ostream& os, const SweepConfig& cfg) {
  os << "# qemetro sweep " << to_json(cfg).dump() << "\n";
  os << "# columns: " << kSweepColumns
     << " (Fisher values per qubit; rt on |ideal - noisy| / |ideal - qem|)\n";
  os << kSweepColumns << "\n";
}

void write_csv_row(std::ostream& os, const FisherReport& r) {
  std::string flags;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!flags.empty()) flags += "|";
    flags += name;
  };
  add(r.precision_loss, "precision-loss");
  add(r.negative_cfi, "negative-cfi");
  add(r.degenerate, "degenerate");
  if (flags.empty()) flags = "none";
  os << to_string(r.state) << ',' << to_string(r.noise) << ',' << r.n_qubits << ',' << num(r.tau)
     << ',' << num(r.theta) << ',' << num(r.n_qubits * r.theta) << ',' << num(r.cfi.ideal) << ','
     << num(r.cfi.noisy) << ',' << num(r.cfi.qem1) << ',' << num(r.cfi.qem2) << ','
     << num(r.qfi.ideal) << ',' << num(r.qfi.noisy) << ',' << num(r.qfi.qem1) << ','
     << num(r.qfi.qem2) << ',' << num(r.distance.noisy) << ',' << num(r.distance.qem1) << ','
     << num(r.distance.qem2) << ',' << num(r.trace_qem1) << ',' << num(r.trace_qem2) << ','
     << rt(r.rt1) << ',' << rt(r.rt2) << ',' << rt(r.rt1_cfi) << ',' << rt(r.rt2_cfi) << ','
     << flags << "\n";
}

std::vector<FisherReport> run_sweep(const SweepConfig& cfg, std::ostream* csv) {
  cfg.validate();
  struct Point {
    int n;
    double tau, theta;
  };
  std::vector<Point> grid;
  for (int n : cfg.n_qubits)
    for (double tau : cfg.taus)
      for (double theta : cfg.thetas_for(n)) grid.push_back({n, tau, theta});

  if (csv) write_csv_header(*csv, cfg);
  return ordered_pool<FisherReport>(
      grid.size(), cfg.worker_count(),
      [&](std::size_t i) { return evaluate_point(cfg, grid[i].n, grid[i].tau, grid[i].theta); },
      [&](const FisherReport& r) {
        if (csv) {
          write_csv_row(*csv, r);
          csv->flush();
        }
      });
}

// ---- PEC comparison ----------------------------------------------------------------

PecComparison compare_pec_point(const SweepConfig& cfg, int n, double tau, std::uint64_t seed) {
  if (!cfg.pec) throw ConfigError("PEC comparison needs a PEC configuration");
  const double theta = cfg.thetas_for(n).front();
  const NoiseSpec spec = NoiseSpec::from_tau(cfg.noise, tau, cfg.dt, cfg.gamma_c);
  const MetrologyTask task = make_task(cfg.state, n, theta, cfg.d_free, cfg.dt);
  const int depth = layer_counts(task).d_tot;

  PecComparison c;
  c.state = cfg.state;
  c.n_qubits = n;
  c.tau = tau;
  c.theta = theta;
  c.n_qem1 = cfg.pec->n_samples > 0 ? cfg.pec->n_samples : circuit_group_size(n, depth, cfg.noise, 1);
  c.n_qem2 = cfg.pec->n_samples > 0 ? cfg.pec->n_samples : circuit_group_size(n, depth, cfg.noise, 2);

  SweepConfig point = cfg;
  point.workers = 1;
  const FisherReport r = evaluate_point(point, n, tau, theta);
  c.ideal_cfi = r.cfi.ideal;
  c.sigma2_qem1 = qem_sigma2(r.cfi.qem1, r.cfi.ideal);
  c.sigma2_qem2 = qem_sigma2(r.cfi.qem2, r.cfi.ideal);

  const Observable o = task_observable(task);
  auto circuit_at = [&](double t) {
    return build_task_circuit(make_task(cfg.state, n, t, cfg.d_free, cfg.dt));
  };
  const int workers = cfg.worker_count();
  PecRun run1{static_cast<int>(c.n_qem1), cfg.pec->n_repeats, seed, {}};
  PecRun run2{static_cast<int>(c.n_qem2), cfg.pec->n_repeats, seed ^ 0x5851F42D4C957F2Dull, {}};
  c.sigma2_pec_n1 = pec_sigma2(pec_cfi(circuit_at, spec, o, theta, cfg.h, run1, workers), c.ideal_cfi);
  c.sigma2_pec_n2 = pec_sigma2(pec_cfi(circuit_at, spec, o, theta, cfg.h, run2, workers), c.ideal_cfi);
  return c;
}

std::vector<PecComparison> run_pec_comparison(const SweepConfig& cfg, std::ostream* csv) {
  cfg.validate();
  if (!cfg.pec) throw ConfigError("PEC comparison needs a PEC configuration");
  if (csv) {
    *csv << "# qemetro pec-compare " << to_json(cfg).dump() << "\n";
    *csv << "# columns: sigma2 values are squared deviations of the per-qubit CFI from the ideal\n";
    *csv << "state,n_qubits,tau,theta,n_qem1,n_qem2,cfi_ideal,sigma2_qem1,sigma2_qem2,"
            "sigma2_pec_nqem1,sigma2_pec_nqem2,seed,repeats\n";
  }
  std::vector<PecComparison> out;
  for (int n : cfg.n_qubits)
    for (double tau : cfg.taus) {
      PecComparison c = compare_pec_point(cfg, n, tau, cfg.seed);
      if (csv) {
        *csv << to_string(c.state) << ',' << c.n_qubits << ',' << num(c.tau) << ',' << num(c.theta)
             << ',' << c.n_qem1 << ',' << c.n_qem2 << ',' << num(c.ideal_cfi) << ','
             << num(c.sigma2_qem1) << ',' << num(c.sigma2_qem2) << ',' << num(c.sigma2_pec_n1)
             << ',' << num(c.sigma2_pec_n2) << ',' << cfg.seed << ',' << cfg.pec->n_repeats << "\n";
        csv->flush();
      }
      out.push_back(c);
    }
  return out;
}

std::string default_output_dir() {
  const char* dir = std::getenv("QEMETRO_OUT_DIR");
  return dir && *dir ? dir : ".";
}

}  // namespace qemetro

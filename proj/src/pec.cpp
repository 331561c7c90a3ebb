#include "qemetro/pec.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

#include "qemetro/fisher.hpp"

namespace qemetro {

double QuasiprobabilityOp::one_norm() const {
  double s = 0.0;
  for (double e : eta) s += std::abs(e);
  return s;
}

ComplexMatrix QuasiprobabilityOp::apply(const ComplexMatrix& rho, int qubit, int n_qubits) const {
  ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (std::size_t b = 0; b < basis.size(); ++b)
    out += eta[b] * sandwich(rho, basis[b], qubit, n_qubits);
  return out;
}

double dephasing_flip_probability(double strength) { return -0.5 * std::expm1(-strength); }

QuasiprobabilityOp dephasing_inverse(double strength) {
  if (!(strength >= 0)) throw DomainError("dephasing_inverse: strength must be >= 0");
  const double p = dephasing_flip_probability(strength);
  if (p >= 0.5) throw DomainError("dephasing_inverse: channel is not invertible");
  return {{gates::I(), gates::Z()}, {(1 - p) / (1 - 2 * p), -p / (1 - 2 * p)}};
}

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

SplitMix64 SplitMix64::stream(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 mix(seed ^ (0xD1B54A32D192ED03ull * (index + 1)));
  return SplitMix64(mix.next());
}

namespace {

using Pattern = std::vector<int>;  // flat (layer * n + qubit) indices carrying Z
using Evaluator = std::function<std::vector<double>(const Pattern&)>;

std::vector<double> layer_strengths(const NoiseSpec& spec, int depth) {
  if (spec.kind == NoiseKind::MAD) throw CapabilityError("PEC is implemented for dephasing only");
  std::vector<double> s = layer_weights(spec, depth);
  for (double& x : s) x *= spec.tau();
  return s;
}

// Per repeat, the sign- and norm-weighted sample means of every evaluator output.
std::vector<std::vector<double>> pec_core(int depth, int n, const std::vector<double>& strengths,
                                          const PecRun& run, const Evaluator& evaluate, int workers) {
  if (run.n_samples < 1 || run.n_repeats < 1) throw ConfigError("PEC run needs samples and repeats >= 1");
  std::vector<double> flip(depth);
  double scale = 1.0;
  for (int l = 0; l < depth; ++l) {
    const QuasiprobabilityOp q = dephasing_inverse(strengths[l]);
    flip[l] = std::abs(q.eta[1]) / q.one_norm();
    scale *= std::pow(q.one_norm(), n);
  }

  std::map<Pattern, std::vector<double>> memo;
  std::mutex lock;
  auto value = [&](const Pattern& p) {
    {
      std::lock_guard<std::mutex> g(lock);
      auto it = memo.find(p);
      if (it != memo.end()) return it->second;
    }
    std::vector<double> v = evaluate(p);
    std::lock_guard<std::mutex> g(lock);
    return memo.emplace(p, std::move(v)).first->second;
  };

  std::vector<std::vector<double>> result(run.n_repeats);
  auto work = [&](int id) {
    for (int r = id; r < run.n_repeats; r += workers) {
      SplitMix64 rng = SplitMix64::stream(run.seed, static_cast<std::uint64_t>(r));
      std::vector<double> acc;
      Pattern pattern;
      for (int s = 0; s < run.n_samples; ++s) {
        pattern.clear();
        for (int l = 0; l < depth; ++l)
          for (int j = 0; j < n; ++j)
            if (rng.uniform() < flip[l]) pattern.push_back(l * n + j);
        const double sign = pattern.size() % 2 ? -1.0 : 1.0;
        const std::vector<double> v = value(pattern);
        if (acc.empty()) acc.assign(v.size(), 0.0);
        for (std::size_t i = 0; i < v.size(); ++i) acc[i] += sign * v[i];
      }
      for (double& a : acc) a *= scale / run.n_samples;
      result[r] = std::move(acc);
    }
  };
  workers = std::max(1, std::min(workers, run.n_repeats));
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int id = 0; id < workers; ++id) pool.emplace_back(work, id);
    for (auto& t : pool) t.join();
  }
  return result;
}

ComplexMatrix evolve_with_pattern(const Circuit& c, const NoiseSpec& spec, const Pattern& p) {
  const int n = c.n_qubits;
  std::vector<int> all(n);
  for (int q = 0; q < n; ++q) all[q] = q;
  ComplexMatrix rho = zero_state(n);
  std::size_t next = 0;
  const ComplexMatrix z = gates::Z();
  for (int l = 0; l < c.depth(); ++l) {
    rho = apply_layer(c.layers[l], rho);
    rho = apply_channel(rho, kraus_for_interval(spec, l * spec.dt, (l + 1) * spec.dt), all, n);
    for (; next < p.size() && p[next] / n == l; ++next) rho = sandwich(rho, z, p[next] % n, n);
  }
  return rho;
}

double expect(const ComplexMatrix& rho, const ComplexMatrix& o) {
  return rho.cwiseProduct(o.transpose()).sum().real();
}

}  // namespace

std::vector<double> pec_estimate(const Circuit& c, const NoiseSpec& spec, const Observable& o,
                                 PecRun& run, int workers) {
  spec.validate();
  const auto strengths = layer_strengths(spec, c.depth());
  const auto rows = pec_core(
      c.depth(), c.n_qubits, strengths, run,
      [&](const Pattern& p) { return std::vector<double>{expect(evolve_with_pattern(c, spec, p), o.matrix)}; },
      workers);
  run.estimates.clear();
  for (const auto& r : rows) run.estimates.push_back(r[0]);
  return run.estimates;
}

std::vector<double> pec_cfi(const std::function<Circuit(double)>& circuit_at, const NoiseSpec& spec,
                            const Observable& o, double theta, double h, const PecRun& run,
                            int workers) {
  spec.validate();
  std::vector<Circuit> stencil;
  for (int s = -2; s <= 2; ++s) stencil.push_back(circuit_at(theta + s * h));
  const int depth = stencil[0].depth();
  const int n = stencil[0].n_qubits;
  for (const auto& c : stencil)
    if (c.depth() != depth || c.n_qubits != n) throw ShapeError("pec_cfi: stencil circuits differ in shape");
  const ComplexMatrix o2 = o.matrix * o.matrix;
  const auto strengths = layer_strengths(spec, depth);

  const auto rows = pec_core(
      depth, n, strengths, run,
      [&](const Pattern& p) {
        std::vector<double> v;
        for (const auto& c : stencil) v.push_back(expect(evolve_with_pattern(c, spec, p), o.matrix));
        v.push_back(expect(evolve_with_pattern(stencil[2], spec, p), o2));
        return v;
      },
      workers);

  std::vector<double> cfi;
  for (const auto& r : rows) {
    const double slope = (r[0] - 8 * r[1] + 8 * r[3] - r[4]) / (12 * h);
    const double variance = r[5] - r[2] * r[2];
    cfi.push_back(slope * slope / variance / n);
  }
  return cfi;
}

double pec_sigma2(const std::vector<double>& cfi, double ideal_cfi) {
  if (cfi.empty()) throw SizeError("pec_sigma2: no repeats");
  double s = 0.0;
  for (double c : cfi) s += (c - ideal_cfi) * (c - ideal_cfi);
  return s / cfi.size();
}

double qem_sigma2(double mitigated_cfi, double ideal_cfi) {
  return (mitigated_cfi - ideal_cfi) * (mitigated_cfi - ideal_cfi);
}

}  // namespace qemetro

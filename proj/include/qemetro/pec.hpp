#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qemetro/circuit.hpp"
#include "qemetro/noise.hpp"

namespace qemetro {

// Signed mixture of one-qubit basis operations rho -> B rho B^dagger.
struct QuasiprobabilityOp {
  std::vector<ComplexMatrix> basis;
  std::vector<double> eta;

  double one_norm() const;
  ComplexMatrix apply(const ComplexMatrix& rho, int qubit, int n_qubits) const;
};

// Flip probability of a dephasing layer of strength s: (1 - e^{-s}) / 2.
double dephasing_flip_probability(double strength);

// Inverse of rho -> (1 - p) rho + p Z rho Z over {1, Z}. Throws DomainError
// when p >= 1/2.
QuasiprobabilityOp dephasing_inverse(double strength);

struct PecRun {
  int n_samples = 1;
  int n_repeats = 1;
  std::uint64_t seed = 0;
  std::vector<double> estimates;
};

// splitmix64; one stream per (seed, repeat).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();  // [0, 1) with 53 random bits
  static SplitMix64 stream(std::uint64_t seed, std::uint64_t index);

 private:
  std::uint64_t state_;
};

// Monte Carlo PEC of <O>: each sample draws a {1, Z} recovery operation per
// (layer, qubit) from |eta| / ||eta||_1, evaluates the noisy sampled circuit
// exactly and weights it with sign * prod ||eta||_1. Fills and returns
// run.estimates, one mean per repeat. Dephasing channels only.
std::vector<double> pec_estimate(const Circuit& c, const NoiseSpec& spec, const Observable& o,
                                 PecRun& run, int workers = 1);

// Per-repeat error-propagation CFI (per qubit) from PEC estimates of <O> on
// the five-point stencil around theta and of <O^2> at theta. The stencil
// points share each repeat's sampled recovery patterns.
std::vector<double> pec_cfi(const std::function<Circuit(double)>& circuit_at, const NoiseSpec& spec,
                            const Observable& o, double theta, double h, const PecRun& run,
                            int workers = 1);

// Mean over repeats of (CFI_l - CFI_ideal)^2.
double pec_sigma2(const std::vector<double>& cfi, double ideal_cfi);
double qem_sigma2(double mitigated_cfi, double ideal_cfi);

}  // namespace qemetro

#pragma once

#include <string>
#include <vector>

#include "qemetro/circuit.hpp"

namespace qemetro {

enum class NoiseKind { MPD, MAD, NMPD };

std::string to_string(NoiseKind k);
NoiseKind parse_noise_kind(const std::string& s);

// Channel family plus rates. Dimensionless strength per layer is
// tau = gamma * dt (gamma_pd for the dephasing channels, gamma_ad for MAD).
struct NoiseSpec {
  NoiseKind kind = NoiseKind::MPD;
  double gamma_pd = 0.0;
  double gamma_ad = 0.0;
  double gamma_c = 0.0;  // NMPD environment rate
  double dt = 0.1;

  double rate() const { return kind == NoiseKind::MAD ? gamma_ad : gamma_pd; }
  double tau() const { return rate() * dt; }
  void validate() const;

  // gamma_c < 0 selects the default gamma_c = gamma_pd / 2.
  static NoiseSpec from_tau(NoiseKind kind, double tau, double dt = 0.1, double gamma_c = -1.0);
  NoiseSpec with_tau(double tau) const;  // rescales the rate, keeps gamma_c
};

struct KrausSet {
  std::vector<ComplexMatrix> operators;
  double t_a = 0.0, t_b = 0.0;
};

// F(t) = t + (exp(-gamma_c t) - 1) / gamma_c.
double nmpd_F(double t, double gamma_c);

KrausSet kraus_for_interval(const NoiseSpec& spec, double t_a, double t_b);

// Applies the same one-qubit channel independently to every listed qubit.
ComplexMatrix apply_channel(const ComplexMatrix& rho, const KrausSet& kraus,
                            const std::vector<int>& qubits, int n_qubits);

// Gate-then-noise evolution, layer l covering [(l-1) dt, l dt], noise on all
// qubits of the register.
ComplexMatrix evolve_noisy(const Circuit& c, const NoiseSpec& spec, const ComplexMatrix& rho0);
ComplexMatrix evolve_noisy(const Circuit& c, const NoiseSpec& spec);

// ---- generator view --------------------------------------------------------
// Every channel here is exp(s_l * sum_j L_j) with one unit-rate generator
// per qubit and a layer strength s_l = tau * w_l.

// Unit-rate one-qubit generator applied to qubit j of rho.
//   dephasing: (Z rho Z - rho) / 2
//   damping:   s- rho s+ - {P1, rho} / 2
ComplexMatrix generator_on_qubit(NoiseKind kind, const ComplexMatrix& rho, int qubit, int n_qubits);
ComplexMatrix generator(NoiseKind kind, const ComplexMatrix& rho, int n_qubits);

// Layer weights w_l (l = 1..depth): 1 for the Markovian channels,
// (F(l dt) - F((l-1) dt)) / dt for NMPD.
std::vector<double> layer_weights(const NoiseSpec& spec, int depth);

}  // namespace qemetro

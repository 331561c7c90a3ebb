#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "qemetro/circuit.hpp"
#include "qemetro/noise.hpp"

namespace qemetro {

enum class FisherMethod { Spectral, FidelityLimit, PureVariance, ErrorPropagation, Povm, ClosedForm };

std::string to_string(FisherMethod m);

struct FisherValue {
  double value = 0.0;       // total Fisher information
  double normalized = 0.0;  // per qubit
  FisherMethod method = FisherMethod::Spectral;
};

FisherValue make_fisher(double value, int n_qubits, FisherMethod method);

using StateFamily = std::function<ComplexMatrix(double)>;

// Five-point central difference of f at x.
double five_point(const std::function<double(double)>& f, double x, double h);
ComplexMatrix five_point(const StateFamily& f, double x, double h);

inline constexpr double kDerivativeStep = 1e-3;

// States at theta + s h for s = -2..2.
using StateStencil = std::array<ComplexMatrix, 5>;
StateStencil sample_stencil(const StateFamily& f, double theta, double h);
ComplexMatrix stencil_derivative(const StateStencil& s, double h);
inline constexpr double kSpectralCutoff = 1e-12;
inline constexpr double kProbabilityFloor = 1e-14;

FisherValue qfi_spectral(const ComplexMatrix& rho, const ComplexMatrix& drho);
FisherValue qfi_spectral(const StateFamily& rho_at, double theta, double h = kDerivativeStep);
FisherValue qfi_spectral(const StateStencil& s, double h);

struct FidelityLimitOptions {
  double eps = 1e-4;
  // 1 evaluates 8(1 - F(rho(t), rho(t + eps))) / eps^2 as written. Larger
  // values use the midpoint pair (t - e/2, t + e/2), whose error series is
  // even in e, and Richardson-extrapolate over e = eps, eps/2, ...
  int richardson_levels = 1;
};
FisherValue qfi_fidelity_limit(const StateFamily& rho_at, double theta0,
                               FidelityLimitOptions opt = {});

// 4 (<H^2> - <H>^2) on a pure input state.
FisherValue qfi_pure_variance(const Observable& generator, const ComplexVector& psi);

// Classical Fisher information of a projective measurement.
FisherValue cfi_povm(const StateFamily& rho_at, const std::vector<ComplexMatrix>& povm,
                     double theta, double h = kDerivativeStep);
std::vector<ComplexMatrix> computational_basis_povm(int n_qubits);

struct ErrorPropagation {
  double expectation = 0.0;
  double variance = 0.0;  // <O^2> - <O>^2, signed
  double slope = 0.0;     // d<O>/dtheta
  FisherValue cfi;        // slope^2 / variance, signed
};

// Error-propagation CFI. The family must already be normalized to unit
// trace; the variance keeps its sign for quasi-densities.
ErrorPropagation error_propagation(const Observable& o, const StateFamily& rho_at, double theta,
                                   double h = kDerivativeStep);
FisherValue error_propagation_cfi(const Observable& o, const StateFamily& rho_at, double theta,
                                  double h = kDerivativeStep);
ErrorPropagation error_propagation(const Observable& o, const StateStencil& s, double h);

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b);
// Uhlmann fidelity Tr sqrt(sqrt(a) b sqrt(a)), computed as the nuclear norm
// of sqrt(a) sqrt(b). Eigenvalues below 1e-14 of the largest are treated as
// exact zeros so that rank-deficient states keep full precision.
double fidelity(const ComplexMatrix& a, const ComplexMatrix& b);

FisherValue convert_theta_to_omega(const FisherValue& f, double t_free);

// ---- closed forms ----------------------------------------------------------
// Exponents count one decay factor e^{-tau} per noisy layer, i.e. the
// convention tau = gamma * dt used throughout the library.
namespace oracle {

double ideal_qfi(StateKind kind, int n_qubits, int group_size);
// Ideal (J^z)^2 error-propagation CFI of mu Dicke groups of size N:
// mu / [2/(N(N+2)) ((N(N+2)/16 - 1/2) tan^2(theta) + 1)].
double sds_ideal_cfi(int n, int mu, double theta);

// Coherence magnitude left after the init + free layers under dephasing.
double css_mpd_coherence(int layers, double tau);
double ghz_mpd_coherence(int n, int d_free, double tau);

// Output states before the basis change.
ComplexMatrix css_mpd_state(int n_qubits, int layers, double tau, double theta);
ComplexMatrix css_mad_state(int n_qubits, int layers, double tau, double theta);
ComplexMatrix ghz_mpd_state(int n, int d_free, double tau, double theta);

// sin^2 / (1 - c^2 cos^2) family with c the coherence magnitude.
double qubit_cfi(double c, double phase);

}  // namespace oracle

// Closed-form total Fisher value for a task/noise pair, evaluated on the
// state before the basis-change layer. `measured` selects the CFI of the
// J^x / X^{⊗N} / (J^z)^2 readout, otherwise the QFI. Throws CapabilityError
// for combinations without a closed form (GHZ or SDS under MAD, noisy SDS).
FisherValue closed_form(const MetrologyTask& task, const NoiseSpec& spec, bool measured);

}  // namespace qemetro

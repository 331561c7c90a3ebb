#include "qemetro/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qemetro {

std::string to_string(FisherMethod m) {
  switch (m) {
    case FisherMethod::Spectral: return "spectral";
    case FisherMethod::FidelityLimit: return "fidelity-limit";
    case FisherMethod::PureVariance: return "pure-variance";
    case FisherMethod::ErrorPropagation: return "error-propagation";
    case FisherMethod::Povm: return "povm";
    case FisherMethod::ClosedForm: return "closed-form";
  }
  return "?";
}

FisherValue make_fisher(double value, int n_qubits, FisherMethod method) {
  return {value, value / n_qubits, method};
}

double five_point(const std::function<double(double)>& f, double x, double h) {
  return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
}

ComplexMatrix five_point(const StateFamily& f, double x, double h) {
  return (f(x - 2 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2 * h)) / (12 * h);
}

FisherValue qfi_spectral(const ComplexMatrix& rho, const ComplexMatrix& drho) {
  if (max_abs(drho - drho.adjoint()) > kHermitianTol * std::max(1.0, max_abs(drho)))
    throw DomainError("qfi_spectral: derivative is not Hermitian");
  const auto es = eig_hermitian(rho);
  const ComplexMatrix m = es.eigenvectors.adjoint() * drho * es.eigenvectors;
  const auto& lam = es.eigenvalues;
  double q = 0.0;
  for (Eigen::Index j = 0; j < lam.size(); ++j)
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
      const double s = lam(j) + lam(k);
      if (s <= kSpectralCutoff) continue;
      q += 2.0 * std::norm(m(k, j)) / s;
    }
  return make_fisher(q, qubits_of(rho.rows()), FisherMethod::Spectral);
}

StateStencil sample_stencil(const StateFamily& f, double theta, double h) {
  return {f(theta - 2 * h), f(theta - h), f(theta), f(theta + h), f(theta + 2 * h)};
}

ComplexMatrix stencil_derivative(const StateStencil& s, double h) {
  return (s[0] - 8.0 * s[1] + 8.0 * s[3] - s[4]) / (12 * h);
}

FisherValue qfi_spectral(const StateFamily& rho_at, double theta, double h) {
  return qfi_spectral(rho_at(theta), five_point(rho_at, theta, h));
}

FisherValue qfi_spectral(const StateStencil& s, double h) {
  return qfi_spectral(s[2], stencil_derivative(s, h));
}

FisherValue qfi_fidelity_limit(const StateFamily& rho_at, double theta0, FidelityLimitOptions opt) {
  if (!(opt.eps > 0)) throw DomainError("qfi_fidelity_limit: eps must be positive");
  const int n = qubits_of(rho_at(theta0).rows());
  if (opt.richardson_levels <= 1) {
    const double f = fidelity(rho_at(theta0), rho_at(theta0 + opt.eps));
    return make_fisher(8 * (1 - f) / (opt.eps * opt.eps), n, FisherMethod::FidelityLimit);
  }
  // Neville table over e_i = eps / 2^i with an error series in e^2.
  const int L = opt.richardson_levels;
  std::vector<double> t(L);
  for (int i = 0; i < L; ++i) {
    const double e = opt.eps / std::pow(2.0, i);
    const double f = fidelity(rho_at(theta0 - e / 2), rho_at(theta0 + e / 2));
    t[i] = 8 * (1 - f) / (e * e);
  }
  for (int k = 1; k < L; ++k) {
    const double p = std::pow(4.0, k);
    for (int i = L - 1; i >= k; --i) t[i] = (p * t[i] - t[i - 1]) / (p - 1);
  }
  return make_fisher(t[L - 1], n, FisherMethod::FidelityLimit);
}

FisherValue qfi_pure_variance(const Observable& generator, const ComplexVector& psi) {
  const ComplexVector hpsi = generator.matrix * psi;
  const double mean = psi.dot(hpsi).real();
  const double second = hpsi.squaredNorm();
  return make_fisher(4 * (second - mean * mean), qubits_of(psi.size()), FisherMethod::PureVariance);
}

static double expectation(const ComplexMatrix& rho, const ComplexMatrix& op) {
  // Tr(rho op) without forming the product.
  return rho.cwiseProduct(op.transpose()).sum().real();
}

std::vector<ComplexMatrix> computational_basis_povm(int n_qubits) {
  std::vector<ComplexMatrix> povm;
  for (int i = 0; i < dim_of(n_qubits); ++i) povm.push_back(basis_projector(n_qubits, i));
  return povm;
}

FisherValue cfi_povm(const StateFamily& rho_at, const std::vector<ComplexMatrix>& povm, double theta,
                     double h) {
  if (povm.empty()) throw DomainError("cfi_povm: empty POVM");
  ComplexMatrix sum = ComplexMatrix::Zero(povm[0].rows(), povm[0].cols());
  for (const auto& e : povm) sum += e;
  if (max_abs(sum - ComplexMatrix::Identity(sum.rows(), sum.cols())) > 1e-10)
    throw DomainError("cfi_povm: POVM elements do not sum to the identity");

  const double xs[5] = {theta - 2 * h, theta - h, theta, theta + h, theta + 2 * h};
  std::vector<std::vector<double>> p(5, std::vector<double>(povm.size()));
  for (int s = 0; s < 5; ++s) {
    const ComplexMatrix rho = rho_at(xs[s]);
    for (std::size_t k = 0; k < povm.size(); ++k) p[s][k] = expectation(rho, povm[k]);
  }
  double f = 0.0;
  for (std::size_t k = 0; k < povm.size(); ++k) {
    if (p[2][k] < kProbabilityFloor) continue;
    const double dp = (p[0][k] - 8 * p[1][k] + 8 * p[3][k] - p[4][k]) / (12 * h);
    f += dp * dp / p[2][k];
  }
  return make_fisher(f, qubits_of(povm[0].rows()), FisherMethod::Povm);
}

ErrorPropagation error_propagation(const Observable& o, const StateStencil& s, double h) {
  const ComplexMatrix o2 = o.matrix * o.matrix;
  double e[5];
  for (int i = 0; i < 5; ++i) e[i] = expectation(s[i], o.matrix);
  ErrorPropagation r;
  r.expectation = e[2];
  r.variance = expectation(s[2], o2) - e[2] * e[2];
  r.slope = (e[0] - 8 * e[1] + 8 * e[3] - e[4]) / (12 * h);
  // Below this the stencil cannot tell the slope from cancellation noise.
  const double noise = 64 * std::numeric_limits<double>::epsilon() *
                       std::max({std::abs(e[0]), std::abs(e[1]), std::abs(e[3]), std::abs(e[4]), 1.0}) / h;
  if (std::abs(r.slope) < noise)
    throw DegenerateError("error_propagation: derivative of <O> vanishes");
  const double value = r.variance == 0.0 ? std::numeric_limits<double>::infinity()
                                         : r.slope * r.slope / r.variance;
  r.cfi = make_fisher(value, qubits_of(s[2].rows()), FisherMethod::ErrorPropagation);
  return r;
}

ErrorPropagation error_propagation(const Observable& o, const StateFamily& rho_at, double theta,
                                   double h) {
  return error_propagation(o, sample_stencil(rho_at, theta, h), h);
}

FisherValue error_propagation_cfi(const Observable& o, const StateFamily& rho_at, double theta,
                                  double h) {
  return error_propagation(o, rho_at, theta, h).cfi;
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  return 0.5 * trace_norm(a - b);
}

namespace {
struct Support {
  ComplexMatrix basis;  // columns scaled by sqrt(eigenvalue)
};

Support scaled_support(const ComplexMatrix& m) {
  const auto es = eig_hermitian(m);
  const auto& lam = es.eigenvalues;
  if (lam.minCoeff() < -1e-10) throw DomainError("fidelity: input is not positive semidefinite");
  const double cut = 1e-14 * std::max(lam.maxCoeff(), 0.0);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (lam(i) > cut) keep.push_back(i);
  ComplexMatrix b(m.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    b.col(c) = es.eigenvectors.col(keep[c]) * std::sqrt(lam(keep[c]));
  return {b};
}
}  // namespace

double fidelity(const ComplexMatrix& a, const ComplexMatrix& b) {
  const Support sa = scaled_support(a), sb = scaled_support(b);
  if (sa.basis.cols() == 0 || sb.basis.cols() == 0) return 0.0;
  const ComplexMatrix core = sa.basis.adjoint() * sb.basis;
  Eigen::JacobiSVD<ComplexMatrix> svd(core);
  return svd.singularValues().sum();
}

FisherValue convert_theta_to_omega(const FisherValue& f, double t_free) {
  return {f.value * t_free * t_free, f.normalized * t_free * t_free, f.method};
}

namespace oracle {

double ideal_qfi(StateKind kind, int n_qubits, int group_size) {
  const int mu = n_qubits / group_size;
  switch (kind) {
    case StateKind::CSS: return n_qubits;
    case StateKind::GHZ: return static_cast<double>(mu) * group_size * group_size;
    case StateKind::SDS: return mu * group_size * (group_size + 2) / 2.0;
  }
  return 0.0;
}

double sds_ideal_cfi(int n, int mu, double theta) {
  const double nn = n * (n + 2.0);
  const double t = std::tan(theta);
  return mu / (2.0 / nn * ((nn / 16.0 - 0.5) * t * t + 1.0));
}

double css_mpd_coherence(int layers, double tau) { return std::exp(-layers * tau); }

double ghz_mpd_coherence(int n, int d_free, double tau) {
  return std::exp(-(n * (n + 1) / 2.0 + d_free * n) * tau);
}

namespace {
ComplexMatrix qubit_state(double p1, cplx coherence) {
  // [[1 - p1, coherence], [conj, p1]]
  ComplexMatrix m(2, 2);
  m << 1 - p1, coherence, std::conj(coherence), p1;
  return m;
}
ComplexMatrix power(const ComplexMatrix& q, int n) {
  ComplexMatrix out = q;
  for (int i = 1; i < n; ++i) out = kron(out, q);
  return out;
}
}  // namespace

// The ideal qubit is (|0> + e^{-i theta}|1>)/sqrt2, so <0|rho|1> carries e^{+i theta}.
ComplexMatrix css_mpd_state(int n_qubits, int layers, double tau, double theta) {
  const double c = css_mpd_coherence(layers, tau);
  return power(qubit_state(0.5, 0.5 * c * std::polar(1.0, theta)), n_qubits);
}

ComplexMatrix css_mad_state(int n_qubits, int layers, double tau, double theta) {
  const double e = std::exp(-layers * tau);
  return power(qubit_state(0.5 * e, 0.5 * std::sqrt(e) * std::polar(1.0, theta)), n_qubits);
}

ComplexMatrix ghz_mpd_state(int n, int d_free, double tau, double theta) {
  const int d = dim_of(n);
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  const double c = ghz_mpd_coherence(n, d_free, tau);
  m(0, 0) = m(d - 1, d - 1) = 0.5;
  m(0, d - 1) = 0.5 * c * std::polar(1.0, n * theta);
  m(d - 1, 0) = std::conj(m(0, d - 1));
  return m;
}

double qubit_cfi(double c, double phase) {
  const double s = std::sin(phase), co = std::cos(phase);
  return c * c * s * s / (1 - c * c * co * co);
}

}  // namespace oracle

FisherValue closed_form(const MetrologyTask& task, const NoiseSpec& spec, bool measured) {
  task.validate();
  const int n = task.n_qubits;
  const int N = task.group_size;
  const int mu = task.mu();
  const double tau = spec.tau();
  auto done = [&](double v) { return make_fisher(v, n, FisherMethod::ClosedForm); };

  if (task.kind == StateKind::SDS) {
    if (tau != 0.0) throw CapabilityError("closed_form: no closed form for noisy SDS");
    return done(measured ? oracle::sds_ideal_cfi(N, mu, task.theta)
                         : oracle::ideal_qfi(task.kind, n, N));
  }

  // Per-layer exponents: coherence decays by exp(-sum_l n_l s_l), with n_l
  // the number of qubits in superposition during layer l.
  const LayerCounts lc = layer_counts(task);
  const int layers = lc.d_in + lc.d_free;
  const std::vector<double> w = layer_weights(spec, layers);
  double exponent = 0.0;  // per group
  for (int l = 1; l <= layers; ++l) {
    const int active = task.kind == StateKind::CSS ? 1 : std::min(l, N);
    exponent += active * tau * w[l - 1];
  }

  const bool damping = spec.kind == NoiseKind::MAD;
  if (damping && task.kind == StateKind::GHZ && tau != 0.0)
    throw CapabilityError("closed_form: no closed form for GHZ under MAD");
  // Under damping the coherence decays at half the population rate. The X
  // readout and the transverse Bloch length only see the coherence.
  const double c = std::exp(damping ? -exponent / 2 : -exponent);
  if (task.kind == StateKind::CSS)
    return done(n * (measured ? oracle::qubit_cfi(c, task.theta) : c * c));
  return done(mu * N * N * (measured ? oracle::qubit_cfi(c, N * task.theta) : c * c));
}

}  // namespace qemetro

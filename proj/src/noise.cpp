#include "qemetro/noise.hpp"

#include <algorithm>
#include <cmath>

namespace qemetro {

std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::MPD: return "mpd";
    case NoiseKind::MAD: return "mad";
    case NoiseKind::NMPD: return "nmpd";
  }
  return "?";
}

NoiseKind parse_noise_kind(const std::string& s) {
  std::string t = s;
  std::transform(t.begin(), t.end(), t.begin(), ::tolower);
  if (t == "mpd") return NoiseKind::MPD;
  if (t == "mad") return NoiseKind::MAD;
  if (t == "nmpd") return NoiseKind::NMPD;
  throw ConfigError("unknown noise kind '" + s + "'");
}

void NoiseSpec::validate() const {
  if (gamma_pd < 0 || gamma_ad < 0 || gamma_c < 0) throw ConfigError("noise rates must be >= 0");
  if (!(dt > 0)) throw ConfigError("noise dt must be positive");
  if (kind == NoiseKind::NMPD && gamma_pd > 0 && !(gamma_c > 0))
    throw ConfigError("NMPD requires gamma_c > 0");
}

NoiseSpec NoiseSpec::from_tau(NoiseKind kind, double tau, double dt, double gamma_c) {
  NoiseSpec s;
  s.kind = kind;
  s.dt = dt;
  if (kind == NoiseKind::MAD)
    s.gamma_ad = tau / dt;
  else
    s.gamma_pd = tau / dt;
  s.gamma_c = gamma_c >= 0 ? gamma_c : s.gamma_pd / 2;
  s.validate();
  return s;
}

NoiseSpec NoiseSpec::with_tau(double tau) const {
  NoiseSpec s = *this;
  if (kind == NoiseKind::MAD)
    s.gamma_ad = tau / dt;
  else
    s.gamma_pd = tau / dt;
  return s;
}

double nmpd_F(double t, double gamma_c) {
  if (gamma_c <= 0) return 0.0;
  const double x = gamma_c * t;
  // t * (1 - (1 - e^{-x}) / x), with a series where the difference cancels.
  if (x < 1e-3) return t * (x / 2 - x * x / 6 + x * x * x / 24 - x * x * x * x / 120);
  return t + std::expm1(-x) / gamma_c;
}

KrausSet kraus_for_interval(const NoiseSpec& spec, double t_a, double t_b) {
  if (t_b < t_a) throw DomainError("kraus_for_interval: t_b < t_a");
  KrausSet k;
  k.t_a = t_a;
  k.t_b = t_b;
  if (spec.kind == NoiseKind::MAD) {
    const double e = std::exp(-spec.gamma_ad * (t_b - t_a));
    ComplexMatrix m0 = gates::P0() + std::sqrt(e) * gates::P1();
    ComplexMatrix m1 = std::sqrt(1 - e) * gates::sigma_minus();
    k.operators = {m0, m1};
    return k;
  }
  const double delta = spec.kind == NoiseKind::MPD
                           ? spec.gamma_pd * (t_b - t_a)
                           : spec.gamma_pd * (nmpd_F(t_b, spec.gamma_c) - nmpd_F(t_a, spec.gamma_c));
  const double e = std::exp(-delta);
  k.operators = {std::sqrt((1 + e) / 2) * gates::I(), std::sqrt((1 - e) / 2) * gates::Z()};
  return k;
}

ComplexMatrix apply_channel(const ComplexMatrix& rho, const KrausSet& kraus,
                            const std::vector<int>& qubits, int n_qubits) {
  ComplexMatrix cur = rho;
  for (int q : qubits) {
    ComplexMatrix acc = ComplexMatrix::Zero(rho.rows(), rho.cols());
    for (const auto& m : kraus.operators) acc += sandwich(cur, m, q, n_qubits);
    cur = std::move(acc);
  }
  return cur;
}

ComplexMatrix evolve_noisy(const Circuit& c, const NoiseSpec& spec, const ComplexMatrix& rho0) {
  spec.validate();
  std::vector<int> all(c.n_qubits);
  for (int q = 0; q < c.n_qubits; ++q) all[q] = q;
  ComplexMatrix rho = rho0;
  for (int l = 1; l <= c.depth(); ++l) {
    rho = apply_layer(c.layers[l - 1], rho);
    rho = apply_channel(rho, kraus_for_interval(spec, (l - 1) * spec.dt, l * spec.dt), all,
                        c.n_qubits);
  }
  return rho;
}

ComplexMatrix evolve_noisy(const Circuit& c, const NoiseSpec& spec) {
  return evolve_noisy(c, spec, zero_state(c.n_qubits));
}

ComplexMatrix generator_on_qubit(NoiseKind kind, const ComplexMatrix& rho, int qubit, int n_qubits) {
  const Eigen::Index d = rho.rows();
  const Eigen::Index bit = Eigen::Index{1} << (n_qubits - 1 - qubit);
  ComplexMatrix out(d, d);
  if (kind != NoiseKind::MAD) {
    for (Eigen::Index c = 0; c < d; ++c)
      for (Eigen::Index r = 0; r < d; ++r)
        out(r, c) = ((r ^ c) & bit) ? -rho(r, c) : cplx(0.0);
    return out;
  }
  for (Eigen::Index c = 0; c < d; ++c)
    for (Eigen::Index r = 0; r < d; ++r) {
      const bool br = r & bit, bc = c & bit;
      cplx v = -0.5 * (static_cast<double>(br) + static_cast<double>(bc)) * rho(r, c);
      if (!br && !bc) v += rho(r | bit, c | bit);
      out(r, c) = v;
    }
  return out;
}

ComplexMatrix generator(NoiseKind kind, const ComplexMatrix& rho, int n_qubits) {
  ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (int q = 0; q < n_qubits; ++q) out += generator_on_qubit(kind, rho, q, n_qubits);
  return out;
}

std::vector<double> layer_weights(const NoiseSpec& spec, int depth) {
  std::vector<double> w(depth, 1.0);
  if (spec.kind != NoiseKind::NMPD) return w;
  for (int l = 1; l <= depth; ++l)
    w[l - 1] = (nmpd_F(l * spec.dt, spec.gamma_c) - nmpd_F((l - 1) * spec.dt, spec.gamma_c)) / spec.dt;
  return w;
}

}  // namespace qemetro

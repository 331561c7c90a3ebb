#include "qemetro/circuit.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace qemetro {

namespace gates {
ComplexMatrix I() { return ComplexMatrix::Identity(2, 2); }
ComplexMatrix X() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
ComplexMatrix Y() {
  ComplexMatrix m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}
ComplexMatrix Z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
ComplexMatrix H() {
  ComplexMatrix m(2, 2);
  m << 1, 1, 1, -1;
  return m / std::sqrt(2.0);
}
ComplexMatrix P0() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 1;
  return m;
}
ComplexMatrix P1() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(1, 1) = 1;
  return m;
}
ComplexMatrix sigma_minus() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1;
  return m;
}
ComplexMatrix sigma_plus() { return sigma_minus().adjoint(); }
ComplexMatrix Ry(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  ComplexMatrix m(2, 2);
  m << c, -s, s, c;
  return m;
}
ComplexMatrix Rz(double theta) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = std::polar(1.0, -theta / 2);
  m(1, 1) = std::polar(1.0, theta / 2);
  return m;
}
}  // namespace gates

Circuit& Circuit::append(const Circuit& other) {
  if (other.n_qubits != n_qubits) throw ShapeError("Circuit::append: register size mismatch");
  layers.insert(layers.end(), other.layers.begin(), other.layers.end());
  return *this;
}

Circuit& Circuit::add(GateLayer layer) {
  if (layer.unitary.rows() != dim_of(n_qubits)) throw ShapeError("Circuit::add: layer size mismatch");
  layers.push_back(std::move(layer));
  return *this;
}

static void check_qubit(int q, int n) {
  if (q < 0 || q >= n) throw ShapeError("qubit index out of range");
}

GateLayer single_qubit_layer(int n_qubits, int qubit, const ComplexMatrix& u, std::string label,
                             std::vector<double> params) {
  check_qubit(qubit, n_qubits);
  return {checked_unitary(embed(u, qubit, n_qubits)), std::move(label), {qubit}, std::move(params)};
}

GateLayer parallel_layer(int n_qubits, const std::vector<int>& qubits, const ComplexMatrix& u,
                         std::string label, std::vector<double> params) {
  ComplexMatrix full = ComplexMatrix::Identity(dim_of(n_qubits), dim_of(n_qubits));
  for (int q : qubits) {
    check_qubit(q, n_qubits);
    left_multiply(full, u, q, n_qubits);
  }
  return {checked_unitary(std::move(full)), std::move(label), qubits, std::move(params)};
}

GateLayer controlled_layer(int n_qubits, const std::vector<int>& controls, int target,
                           const ComplexMatrix& u, std::string label, std::vector<double> params) {
  check_qubit(target, n_qubits);
  const Eigen::Index d = dim_of(n_qubits);
  Eigen::Index cmask = 0;
  for (int c : controls) {
    check_qubit(c, n_qubits);
    if (c == target) throw ShapeError("controlled_layer: control equals target");
    cmask |= Eigen::Index{1} << (n_qubits - 1 - c);
  }
  const Eigen::Index tbit = Eigen::Index{1} << (n_qubits - 1 - target);
  ComplexMatrix full = ComplexMatrix::Identity(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    if ((r & cmask) != cmask || (r & tbit)) continue;
    const Eigen::Index r1 = r | tbit;
    full(r, r) = u(0, 0);
    full(r, r1) = u(0, 1);
    full(r1, r) = u(1, 0);
    full(r1, r1) = u(1, 1);
  }
  std::vector<int> targets = controls;
  targets.push_back(target);
  return {checked_unitary(std::move(full)), std::move(label), std::move(targets), std::move(params)};
}

ComplexMatrix apply_layer(const GateLayer& layer, const ComplexMatrix& rho) {
  return layer.unitary * rho * layer.unitary.adjoint();
}

ComplexMatrix run_ideal(const Circuit& c, const ComplexMatrix& rho0) {
  ComplexMatrix rho = rho0;
  for (const auto& layer : c.layers) rho = apply_layer(layer, rho);
  return rho;
}

ComplexMatrix run_ideal(const Circuit& c) { return run_ideal(c, zero_state(c.n_qubits)); }

ComplexVector run_ideal_state(const Circuit& c) {
  ComplexVector psi = ComplexVector::Zero(dim_of(c.n_qubits));
  psi(0) = 1;
  for (const auto& layer : c.layers) psi = layer.unitary * psi;
  return psi;
}

ComplexMatrix circuit_unitary(const Circuit& c) {
  ComplexMatrix u = ComplexMatrix::Identity(dim_of(c.n_qubits), dim_of(c.n_qubits));
  for (const auto& layer : c.layers) u = layer.unitary * u;
  return u;
}

std::string to_string(StateKind k) {
  switch (k) {
    case StateKind::CSS: return "css";
    case StateKind::GHZ: return "ghz";
    case StateKind::SDS: return "sds";
  }
  return "?";
}

StateKind parse_state_kind(const std::string& s) {
  std::string t = s;
  std::transform(t.begin(), t.end(), t.begin(), ::tolower);
  if (t == "css") return StateKind::CSS;
  if (t == "ghz") return StateKind::GHZ;
  if (t == "sds") return StateKind::SDS;
  throw ConfigError("unknown state kind '" + s + "'");
}

void MetrologyTask::validate() const {
  if (n_qubits < 1) throw ConfigError("n_qubits must be positive");
  if (group_size < 1 || n_qubits % group_size != 0)
    throw ConfigError("n_qubits must be a multiple of the group size");
  if (d_free < 1) throw ConfigError("d_free must be positive");
  if (!(dt > 0)) throw ConfigError("dt must be positive");
  if (kind == StateKind::GHZ && group_size < 2) throw ConfigError("GHZ needs group size >= 2");
  if (kind == StateKind::SDS) {
    if (group_size != 2 && group_size != 4 && group_size != 6)
      throw CapabilityError("SDS circuits exist only for N in {2, 4, 6}");
  }
  if (n_qubits > 8) throw CapabilityError("registers above 8 qubits are not supported");
}

MetrologyTask make_task(StateKind kind, int n_qubits, double theta, int d_free, double dt) {
  MetrologyTask t;
  t.kind = kind;
  t.n_qubits = n_qubits;
  t.group_size = kind == StateKind::CSS ? 1 : n_qubits;
  t.theta = theta;
  t.d_free = d_free;
  t.dt = dt;
  t.validate();
  return t;
}

Circuit build_css_init(int n_qubits) {
  if (n_qubits < 1) throw ConfigError("build_css_init: need at least one qubit");
  Circuit c(n_qubits);
  std::vector<int> all(n_qubits);
  for (int q = 0; q < n_qubits; ++q) all[q] = q;
  c.add(parallel_layer(n_qubits, all, gates::H(), "H_all"));
  return c;
}

namespace {

void append_ghz(Circuit& c, int offset, int n) {
  c.add(single_qubit_layer(c.n_qubits, offset, gates::H(), "H"));
  for (int l = 0; l + 1 < n; ++l)
    c.add(controlled_layer(c.n_qubits, {offset + l}, offset + l + 1, gates::X(), "CX"));
}

// Split-and-cyclic-shift block of the Dicke unitary on qubits q[0..n-1]
// (unary input with the excitations at the end), handling up to k
// excitations.
void append_scs(Circuit& c, const std::vector<int>& q, int n, int k) {
  const int b = q[n - 1];
  {
    const int a = q[n - 2];
    const double th = 2.0 * std::acos(std::sqrt(1.0 / n));
    c.add(controlled_layer(c.n_qubits, {b}, a, gates::X(), "CX"));
    c.add(controlled_layer(c.n_qubits, {a}, b, gates::Ry(-th), "CRy", {-th}));
    c.add(controlled_layer(c.n_qubits, {b}, a, gates::X(), "CX"));
  }
  for (int l = 2; l <= k; ++l) {
    const int a = q[n - 1 - l];
    const int mid = q[n - l];
    const double th = 2.0 * std::acos(std::sqrt(static_cast<double>(l) / n));
    c.add(controlled_layer(c.n_qubits, {b}, a, gates::X(), "CX"));
    c.add(controlled_layer(c.n_qubits, {a, mid}, b, gates::Ry(-th), "CCRy", {-th}));
    c.add(controlled_layer(c.n_qubits, {b}, a, gates::X(), "CX"));
  }
}

// Maps |0^{n-l} 1^l> to the n-qubit Dicke state with l excitations, l <= k.
void append_dicke_unitary(Circuit& c, const std::vector<int>& q, int k) {
  for (int n = static_cast<int>(q.size()); n >= 2; --n) {
    const int kk = std::min(k, n - 1);
    if (kk >= 1) append_scs(c, q, n, kk);
  }
}

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void append_sds(Circuit& c, int offset, int n) {
  if (n == 2) {
    c.add(single_qubit_layer(c.n_qubits, offset + 1, gates::X(), "X"));
    append_dicke_unitary(c, {offset, offset + 1}, 1);
    return;
  }
  if (n != 4 && n != 6) throw CapabilityError("SDS circuits exist only for N in {2, 4, 6}");
  // Two halves A and B; A receives i excitations in unary with weight
  // C(h,i) C(h,h-i), B receives the remaining h-i, then each half is
  // symmetrized by the Dicke unitary.
  const int h = n / 2;
  std::vector<int> A, B;
  for (int i = 0; i < h; ++i) A.push_back(offset + i);
  for (int i = 0; i < h; ++i) B.push_back(offset + h + i);

  for (int q : B) c.add(single_qubit_layer(c.n_qubits, q, gates::X(), "X"));

  std::vector<double> x(h + 1);
  for (int i = 0; i <= h; ++i) x[i] = binom(h, i) * binom(n - h, h - i);
  auto angle = [&](int i) {
    double s = 0;
    for (int j = i; j <= h; ++j) s += x[j];
    return 2.0 * std::acos(std::sqrt(x[i] / s));
  };
  const double th0 = angle(0);
  c.add(single_qubit_layer(c.n_qubits, A[h - 1], gates::Ry(th0), "Ry", {th0}));
  for (int t = 1; t < h; ++t) {
    const double th = angle(t);
    c.add(controlled_layer(c.n_qubits, {A[h - t]}, A[h - 1 - t], gates::Ry(th), "CRy", {th}));
  }
  for (int t = 1; t <= h; ++t)
    c.add(controlled_layer(c.n_qubits, {A[h - t]}, B[t - 1], gates::X(), "CX"));

  append_dicke_unitary(c, A, h);
  append_dicke_unitary(c, B, h);
}

}  // namespace

Circuit build_ghz_init(int n) {
  if (n < 2) throw ConfigError("build_ghz_init: N >= 2 required");
  Circuit c(n);
  append_ghz(c, 0, n);
  return c;
}

Circuit build_sds_init(int n) {
  if (n != 2 && n != 4 && n != 6) throw CapabilityError("SDS circuits exist only for N in {2, 4, 6}");
  Circuit c(n);
  append_sds(c, 0, n);
  return c;
}

Circuit build_free_evolution(int n_qubits, int d_free, Axis axis, double omega, double dt) {
  if (d_free < 1) throw ConfigError("build_free_evolution: d_free >= 1 required");
  Circuit c(n_qubits);
  const double angle = -omega * dt;
  const ComplexMatrix r = axis == Axis::Z ? gates::Rz(angle) : gates::Ry(angle);
  std::vector<int> all(n_qubits);
  for (int q = 0; q < n_qubits; ++q) all[q] = q;
  const std::string label = axis == Axis::Z ? "Rz_all" : "Ry_all";
  const GateLayer layer = parallel_layer(n_qubits, all, r, label, {angle});
  for (int l = 0; l < d_free; ++l) c.add(layer);
  return c;
}

Circuit build_basis_change(BasisChange kind, int n_qubits) {
  if (kind == BasisChange::None) return Circuit(n_qubits);
  Circuit c(n_qubits);
  std::vector<int> all(n_qubits);
  for (int q = 0; q < n_qubits; ++q) all[q] = q;
  c.add(parallel_layer(n_qubits, all, gates::H(), "H_all"));
  return c;
}

Circuit build_init(const MetrologyTask& task) {
  task.validate();
  Circuit c(task.n_qubits);
  switch (task.kind) {
    case StateKind::CSS: return build_css_init(task.n_qubits);
    case StateKind::GHZ:
      for (int g = 0; g < task.mu(); ++g) append_ghz(c, g * task.group_size, task.group_size);
      return c;
    case StateKind::SDS:
      for (int g = 0; g < task.mu(); ++g) append_sds(c, g * task.group_size, task.group_size);
      return c;
  }
  return c;
}

Circuit build_task_circuit(const MetrologyTask& task) {
  Circuit c = build_init(task);
  const Axis axis = task.kind == StateKind::SDS ? Axis::Y : Axis::Z;
  c.append(build_free_evolution(task.n_qubits, task.d_free, axis, task.omega(), task.dt));
  if (task.basis_change && task.kind != StateKind::SDS)
    c.append(build_basis_change(BasisChange::HadamardAll, task.n_qubits));
  return c;
}

LayerCounts layer_counts(const MetrologyTask& task) {
  const int d_in = build_init(task).depth();
  const int d_basis = (task.basis_change && task.kind != StateKind::SDS) ? 1 : 0;
  return {d_in, task.d_free, d_basis, d_in + task.d_free + d_basis};
}

Observable observable(ObservableKind kind, int n) {
  const int d = dim_of(n);
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  switch (kind) {
    case ObservableKind::Jx:
      for (int q = 0; q < n; ++q) m += embed(gates::X(), q, n);
      return {m, "Jx"};
    case ObservableKind::Jz:
      for (int q = 0; q < n; ++q) m += embed(gates::Z(), q, n);
      return {m, "Jz"};
    case ObservableKind::Jz2: {
      for (int q = 0; q < n; ++q) m += embed(gates::Z(), q, n) / 2.0;
      return {m * m, "Jz2"};
    }
    case ObservableKind::Xall:
    case ObservableKind::Zall: {
      const ComplexMatrix p = kind == ObservableKind::Xall ? gates::X() : gates::Z();
      m = ComplexMatrix::Identity(d, d);
      for (int q = 0; q < n; ++q) left_multiply(m, p, q, n);
      return {m, kind == ObservableKind::Xall ? "Xall" : "Zall"};
    }
  }
  return {m, "?"};
}

Observable task_observable(const MetrologyTask& task) {
  switch (task.kind) {
    case StateKind::CSS:
      return observable(task.basis_change ? ObservableKind::Jz : ObservableKind::Jx, task.n_qubits);
    case StateKind::GHZ:
      return observable(task.basis_change ? ObservableKind::Zall : ObservableKind::Xall,
                        task.n_qubits);
    case StateKind::SDS: return observable(ObservableKind::Jz2, task.n_qubits);
  }
  return {};
}

Observable free_generator(const MetrologyTask& task) {
  const ComplexMatrix p = task.kind == StateKind::SDS ? gates::Y() : gates::Z();
  const int d = dim_of(task.n_qubits);
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  for (int q = 0; q < task.n_qubits; ++q) m += embed(p, q, task.n_qubits) / 2.0;
  return {m, "H_free"};
}

ComplexVector ghz_vector(int n) {
  ComplexVector v = ComplexVector::Zero(dim_of(n));
  v(0) = v(dim_of(n) - 1) = 1.0 / std::sqrt(2.0);
  return v;
}

ComplexVector dicke_vector(int n, int excitations) {
  ComplexVector v = ComplexVector::Zero(dim_of(n));
  for (int i = 0; i < dim_of(n); ++i)
    if (std::popcount(static_cast<unsigned>(i)) == excitations) v(i) = 1.0;
  return v / v.norm();
}

nlohmann::json circuit_to_json(const Circuit& c) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : c.layers)
    layers.push_back({{"label", l.label}, {"targets", l.targets}, {"params", l.params}});
  return {{"n_qubits", c.n_qubits}, {"depth", c.depth()}, {"layers", layers}};
}

}  // namespace qemetro

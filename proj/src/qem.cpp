#include "qemetro/qem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <thread>
#include <tuple>

namespace qemetro {

NoiseExpansion noise_expansion(const Circuit& c, const NoiseSpec& spec, const ComplexMatrix& rho0) {
  const std::vector<double> w = layer_weights(spec, c.depth());
  const int n = c.n_qubits;
  NoiseExpansion e{rho0, ComplexMatrix::Zero(rho0.rows(), rho0.cols()),
                   ComplexMatrix::Zero(rho0.rows(), rho0.cols())};
  for (int l = 0; l < c.depth(); ++l) {
    const ComplexMatrix& u = c.layers[l].unitary;
    const ComplexMatrix a0 = u * e.ideal * u.adjoint();
    const ComplexMatrix a1 = u * e.d1 * u.adjoint();
    const ComplexMatrix a2 = u * e.d2 * u.adjoint();
    const ComplexMatrix la0 = generator(spec.kind, a0, n);
    e.d2 = a2 + 2 * w[l] * generator(spec.kind, a1, n) + w[l] * w[l] * generator(spec.kind, la0, n);
    e.d1 = a1 + w[l] * la0;
    e.ideal = a0;
  }
  return e;
}

NoiseExpansion noise_expansion(const Circuit& c, const NoiseSpec& spec) {
  return noise_expansion(c, spec, zero_state(c.n_qubits));
}

ComplexMatrix delta1(const Circuit& c, const NoiseSpec& spec) { return noise_expansion(c, spec).d1; }
ComplexMatrix delta2(const Circuit& c, const NoiseSpec& spec) { return noise_expansion(c, spec).d2; }

ComplexMatrix delta1_of_delta1(const Circuit& c, const NoiseSpec& spec) {
  const int n = c.n_qubits;
  const int depth = c.depth();
  const std::vector<double> w = layer_weights(spec, depth);
  auto L = [&](const ComplexMatrix& m) { return generator(spec.kind, m, n); };

  ComplexMatrix prefix = zero_state(n);  // noiseless state after layer k1
  ComplexMatrix total = ComplexMatrix::Zero(prefix.rows(), prefix.cols());
  for (int k1 = 0; k1 < depth; ++k1) {
    prefix = apply_layer(c.layers[k1], prefix);
    // Diagonal term: both insertions in layer k1.
    ComplexMatrix once = w[k1] * L(prefix);
    ComplexMatrix twice = w[k1] * L(once);
    ComplexMatrix later = ComplexMatrix::Zero(prefix.rows(), prefix.cols());
    for (int k2 = k1 + 1; k2 < depth; ++k2) {
      once = apply_layer(c.layers[k2], once);
      twice = apply_layer(c.layers[k2], twice);
      later = apply_layer(c.layers[k2], later) + w[k2] * L(once);
    }
    // Each unordered pair k1 < k2 occurs twice in the ordered sum.
    total += twice + 2.0 * later;
  }
  return total;
}

ComplexMatrix noisy_delta1(const Circuit& c, const NoiseSpec& spec) {
  const int n = c.n_qubits;
  const std::vector<double> w = layer_weights(spec, c.depth());
  std::vector<int> all(n);
  for (int q = 0; q < n; ++q) all[q] = q;
  ComplexMatrix rho = zero_state(n);
  ComplexMatrix d = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (int l = 1; l <= c.depth(); ++l) {
    const KrausSet k = kraus_for_interval(spec, (l - 1) * spec.dt, l * spec.dt);
    rho = apply_channel(apply_layer(c.layers[l - 1], rho), k, all, n);
    // The generator commutes with its own channel.
    d = apply_channel(apply_layer(c.layers[l - 1], d), k, all, n) +
        w[l - 1] * generator(spec.kind, rho, n);
  }
  return d;
}

QuasiDensity make_quasi(ComplexMatrix m) {
  QuasiDensity q;
  q.trace = m.trace().real();
  q.matrix = std::move(m);
  return q;
}

QuasiDensity normalize(const QuasiDensity& q) {
  if (std::abs(q.trace) <= 1e-9) throw DegenerateError("normalize: trace is numerically zero");
  return {q.matrix / q.trace, 1.0};
}

std::string to_string(Evaluation e) { return e == Evaluation::Exact ? "exact" : "device"; }

Evaluation parse_evaluation(const std::string& s) {
  if (s == "exact") return Evaluation::Exact;
  if (s == "device") return Evaluation::Device;
  throw ConfigError("unknown evaluation mode '" + s + "'");
}

MitigationBundle mitigate_all(const Circuit& c, const NoiseSpec& spec, Evaluation evaluation) {
  const double tau = spec.tau();
  const NoiseExpansion e = noise_expansion(c, spec);
  MitigationBundle b;
  b.ideal = e.ideal;
  b.noisy = evolve_noisy(c, spec);
  if (evaluation == Evaluation::Exact) {
    const ComplexMatrix first = b.noisy - tau * e.d1;
    b.qem1 = make_quasi(first);
    b.qem2 = make_quasi(first - 0.5 * tau * tau * e.d2);
  } else {
    const ComplexMatrix first = b.noisy - tau * noisy_delta1(c, spec);
    b.qem1 = make_quasi(first);
    // -tau^2/2 delta2 + tau^2 delta1(delta1); the two operators coincide.
    b.qem2 = make_quasi(first + 0.5 * tau * tau * e.d2);
  }
  return b;
}

QuasiDensity mitigate(const ComplexMatrix& rho_noisy, const Circuit& c, const NoiseSpec& spec,
                      int order, Evaluation evaluation) {
  if (order != 1 && order != 2) throw ConfigError("mitigate: order must be 1 or 2");
  const double tau = spec.tau();
  if (evaluation == Evaluation::Exact) {
    const NoiseExpansion e = noise_expansion(c, spec);
    ComplexMatrix m = rho_noisy - tau * e.d1;
    if (order == 2) m -= 0.5 * tau * tau * e.d2;
    return make_quasi(std::move(m));
  }
  ComplexMatrix m = rho_noisy - tau * noisy_delta1(c, spec);
  if (order == 2) m += 0.5 * tau * tau * delta2(c, spec);
  return make_quasi(std::move(m));
}

RtResult rt_measure(const FisherValue& ideal, const FisherValue& noisy, const FisherValue& mitigated) {
  const double den = std::abs(ideal.normalized - mitigated.normalized);
  if (den < 1e-15) return {std::numeric_limits<double>::infinity(), true};
  return {std::abs(ideal.normalized - noisy.normalized) / den, false};
}

// ---- circuit realization -----------------------------------------------------

Circuit ad_effect_circuit(AdVariant variant, double theta, int system, int ancilla, int n_qubits) {
  Circuit c(n_qubits);
  c.add(controlled_layer(n_qubits, {system}, ancilla, gates::Ry(theta), "CRy", {theta}));
  if (variant == AdVariant::B) c.add(single_qubit_layer(n_qubits, ancilla, gates::X(), "X"));
  c.add(controlled_layer(n_qubits, {ancilla}, system, gates::X(), "CX"));
  return c;
}

Circuit ad_effect_circuit(AdVariant variant, double theta) {
  return ad_effect_circuit(variant, theta, 0, 1, 2);
}

namespace {

struct OpTerm {
  int op;  // -1 identity, otherwise an InsertOp
  double coefficient;
};

std::vector<OpTerm> op_table(NoiseKind kind) {
  if (kind == NoiseKind::MAD)
    return {{-1, -0.25},
            {static_cast<int>(InsertOp::Z), 0.25},
            {static_cast<int>(InsertOp::SigmaMinus), 1.0},
            {static_cast<int>(InsertOp::P1), -1.0}};
  return {{-1, -0.5}, {static_cast<int>(InsertOp::Z), 0.5}};
}

const char* op_name(InsertOp op) {
  switch (op) {
    case InsertOp::Z: return "Z";
    case InsertOp::SigmaMinus: return "sm";
    case InsertOp::P1: return "P1";
  }
  return "?";
}

bool needs_ancilla(InsertOp op) { return op != InsertOp::Z; }

std::string label_of(const std::vector<Insertion>& ins) {
  if (ins.empty()) return "original";
  std::string s;
  for (const auto& i : ins) {
    if (!s.empty()) s += "+";
    s += std::string(op_name(i.op)) + "@q" + std::to_string(i.qubit) + ":L" + std::to_string(i.layer);
  }
  return s;
}

GroupMember make_member(std::vector<Insertion> ins, int n_system) {
  GroupMember m;
  int next = n_system;
  for (const auto& i : ins)
    if (needs_ancilla(i.op))
      m.post.push_back({next++, i.op == InsertOp::SigmaMinus ? 1 : 0});
  m.label = label_of(ins);
  m.insertions = std::move(ins);
  return m;
}

}  // namespace

int CircuitGroup::ancillas() const {
  int a = 0;
  for (const auto& m : members) a = std::max(a, static_cast<int>(m.post.size()));
  return a;
}

CircuitGroup circuit_group(const Circuit& c, const NoiseSpec& spec, int order) {
  if (order != 1 && order != 2) throw ConfigError("circuit_group: order must be 1 or 2");
  CircuitGroup g;
  g.base = c;
  g.kind = spec.kind;
  g.order = order;
  const int n = c.n_qubits;
  const int depth = c.depth();
  const std::vector<double> w = layer_weights(spec, depth);
  const std::vector<OpTerm> table = op_table(spec.kind);

  g.members.push_back(make_member({}, n));
  std::map<std::tuple<int, int, int>, std::size_t> single;
  for (int k = 1; k <= depth; ++k)
    for (int j = 0; j < n; ++j)
      for (const auto& t : table) {
        if (t.op < 0) continue;
        single[{k, j, t.op}] = g.members.size();
        g.members.push_back(make_member({{k, j, static_cast<InsertOp>(t.op)}}, n));
      }

  // First order: sum_k w_k sum_j L_j.
  for (int k = 1; k <= depth; ++k)
    for (int j = 0; j < n; ++j)
      for (const auto& t : table) {
        const std::size_t idx = t.op < 0 ? 0 : single.at({k, j, t.op});
        g.members[idx].coefficient[0] += w[k - 1] * t.coefficient;
      }
  if (order == 1) return g;

  // Second order: sum_k w_k^2 L_k L_k + 2 sum_{k1 > k2} w_k1 w_k2 L_k1 L_k2,
  // where L_k2 acts first. Same-layer pairs run over ordered (j1, j2).
  for (int k1 = 1; k1 <= depth; ++k1)
    for (int k2 = 1; k2 <= k1; ++k2) {
      const double f = (k1 == k2 ? 1.0 : 2.0) * w[k1 - 1] * w[k2 - 1];
      for (int j1 = 0; j1 < n; ++j1)
        for (int j2 = 0; j2 < n; ++j2)
          for (const auto& a : table)
            for (const auto& b : table) {
              const double coef = f * a.coefficient * b.coefficient;
              if (a.op < 0 && b.op < 0) {
                g.members[0].coefficient[1] += coef;
              } else if (a.op < 0) {
                g.members[single.at({k2, j2, b.op})].coefficient[1] += coef;
              } else if (b.op < 0) {
                g.members[single.at({k1, j1, a.op})].coefficient[1] += coef;
              } else {
                GroupMember m = make_member({{k2, j2, static_cast<InsertOp>(b.op)},
                                             {k1, j1, static_cast<InsertOp>(a.op)}},
                                            n);
                m.coefficient[1] = coef;
                g.members.push_back(std::move(m));
              }
            }
    }
  return g;
}

std::size_t circuit_group_size(int n_qubits, int depth, NoiseKind kind, int order) {
  const std::size_t m = kind == NoiseKind::MAD ? 3 : 1;
  const std::size_t n = n_qubits, d = depth;
  std::size_t count = 1 + m * n * d;
  if (order == 2) count += m * m * n * n * d * (d + 1) / 2;
  return count;
}

Circuit member_circuit(const CircuitGroup& g, const GroupMember& m) {
  const int n_sys = g.base.n_qubits;
  const int n_anc = static_cast<int>(m.post.size());
  const int n = n_sys + n_anc;
  const ComplexMatrix pad = ComplexMatrix::Identity(dim_of(n_anc), dim_of(n_anc));
  Circuit out(n);
  std::size_t next = 0;
  int ancilla = n_sys;
  auto insert_after = [&](int layer) {
    for (; next < m.insertions.size() && m.insertions[next].layer == layer; ++next) {
      const Insertion& i = m.insertions[next];
      if (i.op == InsertOp::Z) {
        out.add(single_qubit_layer(n, i.qubit, gates::Z(), "Z"));
      } else {
        const AdVariant v = i.op == InsertOp::SigmaMinus ? AdVariant::A : AdVariant::B;
        out.append(ad_effect_circuit(v, std::numbers::pi, i.qubit, ancilla++, n));
      }
    }
  };
  for (int l = 1; l <= g.base.depth(); ++l) {
    const GateLayer& src = g.base.layers[l - 1];
    GateLayer layer = src;
    if (n_anc > 0) layer.unitary = kron(src.unitary, pad);
    out.add(std::move(layer));
    insert_after(l);
  }
  return out;
}

ComplexMatrix evaluate_member(const CircuitGroup& g, const GroupMember& m) {
  const Circuit c = member_circuit(g, m);
  ComplexMatrix rho = run_ideal(c);
  if (m.post.empty()) return rho;
  for (const auto& p : m.post) {
    const ComplexMatrix proj = p.outcome ? gates::P1() : gates::P0();
    rho = sandwich(rho, proj, p.ancilla, c.n_qubits);
  }
  std::vector<int> keep(g.base.n_qubits);
  for (int q = 0; q < g.base.n_qubits; ++q) keep[q] = q;
  return partial_trace(rho, keep, std::vector<int>(c.n_qubits, 2));
}

ComplexMatrix evaluate_group(const CircuitGroup& g, int which, int workers) {
  if (which != 0 && which != 1) throw ConfigError("evaluate_group: which must be 0 or 1");
  if (which == 1 && g.order < 2) throw ConfigError("evaluate_group: group has no second-order terms");
  const int d = dim_of(g.base.n_qubits);
  ComplexMatrix total = ComplexMatrix::Zero(d, d);
  workers = std::max(1, workers);

  // Fixed-size blocks, summed in member order, keep the result independent
  // of the worker count.
  constexpr std::size_t kBlock = 64;
  std::vector<ComplexMatrix> out(kBlock);
  for (std::size_t start = 0; start < g.members.size(); start += kBlock) {
    const std::size_t stop = std::min(g.members.size(), start + kBlock);
    auto work = [&](int id) {
      for (std::size_t i = start + id; i < stop; i += workers) {
        const GroupMember& m = g.members[i];
        if (m.coefficient[which] == 0.0)
          out[i - start] = ComplexMatrix::Zero(d, d);
        else
          out[i - start] = evaluate_member(g, m) * m.coefficient[which];
      }
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (int id = 0; id < workers; ++id) pool.emplace_back(work, id);
      for (auto& t : pool) t.join();
    }
    for (std::size_t i = start; i < stop; ++i) total += out[i - start];
  }
  return total;
}

nlohmann::json to_json(const CircuitGroup& g) {
  nlohmann::json j;
  j["n_qubits"] = g.base.n_qubits;
  j["depth"] = g.base.depth();
  j["noise"] = to_string(g.kind);
  j["order"] = g.order;
  j["size"] = g.size();
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : g.members) {
    nlohmann::json e;
    e["label"] = m.label;
    nlohmann::json ins = nlohmann::json::array();
    for (const auto& i : m.insertions)
      ins.push_back({{"layer", i.layer}, {"qubit", i.qubit}, {"op", op_name(i.op)}});
    e["insertions"] = ins;
    e["coefficients"] = {m.coefficient[0], m.coefficient[1]};
    nlohmann::json post = nlohmann::json::array();
    for (const auto& p : m.post) post.push_back({{"ancilla", p.ancilla}, {"outcome", p.outcome}});
    e["post_selection"] = post;
    members.push_back(e);
  }
  j["members"] = members;
  return j;
}

}  // namespace qemetro

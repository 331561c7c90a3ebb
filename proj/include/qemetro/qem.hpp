#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "qemetro/fisher.hpp"
#include "qemetro/noise.hpp"

namespace qemetro {

// Taylor coefficients of the noisy output in tau around tau = 0:
// rho(tau) = ideal + tau d1 + tau^2 / 2 d2 + O(tau^3).
struct NoiseExpansion {
  ComplexMatrix ideal;
  ComplexMatrix d1;
  ComplexMatrix d2;
};

// Layer-by-layer recursion; the per-layer weights of `spec` are held fixed,
// only the overall strength tau is expanded.
NoiseExpansion noise_expansion(const Circuit& c, const NoiseSpec& spec, const ComplexMatrix& rho0);
NoiseExpansion noise_expansion(const Circuit& c, const NoiseSpec& spec);

ComplexMatrix delta1(const Circuit& c, const NoiseSpec& spec);
ComplexMatrix delta2(const Circuit& c, const NoiseSpec& spec);
// Explicit double sum over ordered insertion pairs (k1, k2). Quadratic in the
// depth; equal to delta2 and used as its independent reference.
ComplexMatrix delta1_of_delta1(const Circuit& c, const NoiseSpec& spec);

// d rho_noisy / d tau at the actual noise strength, i.e. delta1 as seen by
// circuits that are themselves noisy.
ComplexMatrix noisy_delta1(const Circuit& c, const NoiseSpec& spec);

struct QuasiDensity {
  ComplexMatrix matrix;
  double trace = 1.0;
};

QuasiDensity make_quasi(ComplexMatrix m);
// Throws DegenerateError when |trace| <= 1e-9.
QuasiDensity normalize(const QuasiDensity& q);

// Exact: the noise-effect terms come from noiseless evaluation.
// Device: the first-order term is measured with noisy circuits and the
// second-order formula carries the compensating delta1(delta1) term.
enum class Evaluation { Exact, Device };

std::string to_string(Evaluation e);
Evaluation parse_evaluation(const std::string& s);

QuasiDensity mitigate(const ComplexMatrix& rho_noisy, const Circuit& c, const NoiseSpec& spec,
                      int order, Evaluation evaluation = Evaluation::Device);

// Both mitigation orders plus the noisy output from one pass over the circuit.
struct MitigationBundle {
  ComplexMatrix ideal;
  ComplexMatrix noisy;
  QuasiDensity qem1;
  QuasiDensity qem2;
};
MitigationBundle mitigate_all(const Circuit& c, const NoiseSpec& spec,
                              Evaluation evaluation = Evaluation::Device);

struct RtResult {
  double value = 0.0;
  bool precision_loss = false;
};
RtResult rt_measure(const FisherValue& ideal, const FisherValue& noisy, const FisherValue& mitigated);

// ---- circuit realization -----------------------------------------------------

enum class AdVariant { A, B };

// Two-qubit register (system qubit 0, ancilla qubit 1). A is CRy(theta) on the
// ancilla controlled by the system, then CX back onto the system; B inserts
// X on the ancilla between them.
Circuit ad_effect_circuit(AdVariant variant, double theta);
// The same gates placed on arbitrary qubits of a larger register.
Circuit ad_effect_circuit(AdVariant variant, double theta, int system, int ancilla, int n_qubits);

enum class InsertOp { Z, SigmaMinus, P1 };

struct Insertion {
  int layer;  // inserted right after this 1-based layer
  int qubit;
  InsertOp op;
};

struct PostSelection {
  int ancilla;
  int outcome;
};

struct GroupMember {
  std::vector<Insertion> insertions;  // in time order
  double coefficient[2] = {0.0, 0.0};  // weights for delta1 and delta2
  std::vector<PostSelection> post;
  std::string label;
};

struct CircuitGroup {
  Circuit base;
  NoiseKind kind = NoiseKind::MPD;
  int order = 1;
  std::vector<GroupMember> members;

  std::size_t size() const { return members.size(); }
  int ancillas() const;  // maximum over members
};

// The insertion circuits whose weighted, post-selected outputs give delta1
// (coefficient[0]) and, for order 2, delta2 (coefficient[1]). The original
// circuit is always the first member.
CircuitGroup circuit_group(const Circuit& c, const NoiseSpec& spec, int order);
// Member count of circuit_group without building it:
// 1 + m n d (+ m^2 n^2 d (d + 1) / 2 at order 2), m non-identity ops per qubit.
std::size_t circuit_group_size(int n_qubits, int depth, NoiseKind kind, int order);

// Base circuit with the member's insertions, on base.n_qubits + ancillas.
Circuit member_circuit(const CircuitGroup& g, const GroupMember& m);
// Noiseless run, ancilla projection and partial trace onto the system.
ComplexMatrix evaluate_member(const CircuitGroup& g, const GroupMember& m);
// Sum of coefficient[which] * member output; which = 0 for delta1, 1 for delta2.
ComplexMatrix evaluate_group(const CircuitGroup& g, int which, int workers = 1);

nlohmann::json to_json(const CircuitGroup& g);

}  // namespace qemetro

#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "qemetro/tensor.hpp"

namespace qemetro {

namespace gates {
ComplexMatrix I();
ComplexMatrix X();
ComplexMatrix Y();
ComplexMatrix Z();
ComplexMatrix H();
ComplexMatrix P0();
ComplexMatrix P1();
ComplexMatrix sigma_minus();  // |0><1|
ComplexMatrix sigma_plus();   // |1><0|
ComplexMatrix Ry(double theta);  // exp(-i theta Y / 2)
ComplexMatrix Rz(double theta);  // exp(-i theta Z / 2)
}  // namespace gates

// One time step of a circuit: a single elementary gate, already expanded to
// the whole register.
struct GateLayer {
  ComplexMatrix unitary;
  std::string label;
  std::vector<int> targets;   // controls first, then target(s)
  std::vector<double> params;
};

struct Circuit {
  int n_qubits = 0;
  std::vector<GateLayer> layers;

  Circuit() = default;
  explicit Circuit(int n) : n_qubits(n) {}

  int depth() const { return static_cast<int>(layers.size()); }
  Circuit& append(const Circuit& other);
  Circuit& add(GateLayer layer);
};

// Layer factories. All verify unitarity.
GateLayer single_qubit_layer(int n_qubits, int qubit, const ComplexMatrix& u,
                             std::string label, std::vector<double> params = {});
// Same one-qubit gate applied simultaneously to every qubit in `qubits`.
GateLayer parallel_layer(int n_qubits, const std::vector<int>& qubits, const ComplexMatrix& u,
                         std::string label, std::vector<double> params = {});
// u on `target`, conditioned on every control being |1>.
GateLayer controlled_layer(int n_qubits, const std::vector<int>& controls, int target,
                           const ComplexMatrix& u, std::string label,
                           std::vector<double> params = {});

// Noiseless execution.
ComplexMatrix apply_layer(const GateLayer& layer, const ComplexMatrix& rho);
ComplexMatrix run_ideal(const Circuit& c, const ComplexMatrix& rho0);
ComplexMatrix run_ideal(const Circuit& c);  // from |0...0>
ComplexVector run_ideal_state(const Circuit& c);
ComplexMatrix circuit_unitary(const Circuit& c);

enum class StateKind { CSS, GHZ, SDS };
enum class Axis { Z, Y };

std::string to_string(StateKind k);
StateKind parse_state_kind(const std::string& s);

struct MetrologyTask {
  StateKind kind = StateKind::CSS;
  int n_qubits = 1;
  int group_size = 1;  // N; n_qubits = mu * N
  double theta = 0.0;
  int d_free = 10;
  double dt = 0.1;
  bool basis_change = true;

  int mu() const { return n_qubits / group_size; }
  double t_free() const { return d_free * dt; }
  double omega() const { return theta / t_free(); }
  void validate() const;  // throws CapabilityError / ConfigError
};

// Convenience: mu = 1 task for the given family.
MetrologyTask make_task(StateKind kind, int n_qubits, double theta, int d_free = 10,
                        double dt = 0.1);

Circuit build_css_init(int n_qubits);
Circuit build_ghz_init(int n);
Circuit build_sds_init(int n);
Circuit build_free_evolution(int n_qubits, int d_free, Axis axis, double omega, double dt);

enum class BasisChange { HadamardAll, None };
Circuit build_basis_change(BasisChange kind, int n_qubits);

// Initialization for mu groups of size N, laid out on consecutive qubits.
Circuit build_init(const MetrologyTask& task);
// Initialization, free evolution and (when task.basis_change) the final
// measurement-basis layer.
Circuit build_task_circuit(const MetrologyTask& task);

// Layer counts d_in, d_free, d_tot of the task circuit.
struct LayerCounts {
  int d_in, d_free, d_basis, d_tot;
};
LayerCounts layer_counts(const MetrologyTask& task);

struct Observable {
  ComplexMatrix matrix;
  std::string label;
};

enum class ObservableKind { Jx, Jz, Jz2, Xall, Zall };

// Jx = sum X_j, Jz = sum Z_j, Jz2 = (sum Z_j / 2)^2, Xall/Zall = tensor powers.
Observable observable(ObservableKind kind, int n_qubits);
// The observable read out on the final (basis-changed) register for a task:
// Jz for CSS, Z^{⊗N} for GHZ, (J^z)^2 for SDS.
Observable task_observable(const MetrologyTask& task);
// Generator of the free evolution, sum_j sigma_j / 2 along the task axis.
Observable free_generator(const MetrologyTask& task);

// Analytic target states for the builders.
ComplexVector ghz_vector(int n);
ComplexVector dicke_vector(int n, int excitations);

nlohmann::json circuit_to_json(const Circuit& c);

}  // namespace qemetro

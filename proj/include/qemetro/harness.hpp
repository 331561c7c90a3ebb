#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qemetro/qem.hpp"

namespace qemetro {

enum class ThetaRule { HalfPi, PiOver2N, PiOver100, Grid, List };

std::string to_string(ThetaRule r);
ThetaRule parse_theta_rule(const std::string& s);

struct PecConfig {
  int n_repeats = 100;
  // 0 matches the budgets to the first- and second-order circuit-group sizes.
  int n_samples = 0;
};

struct SweepConfig {
  StateKind state = StateKind::CSS;
  NoiseKind noise = NoiseKind::MPD;
  std::vector<int> n_qubits{1};
  std::vector<double> taus{1e-2};
  ThetaRule theta_rule = ThetaRule::HalfPi;
  std::vector<double> thetas;  // ThetaRule::List
  // ThetaRule::Grid: theta_i = theta_step * i for i = grid_first..grid_last.
  double theta_step = 0.0;
  int grid_first = 1;
  int grid_last = 0;
  int d_free = 10;
  double dt = 0.1;
  // < 0 ties the NMPD environment rate to gamma_PD / 2.
  double gamma_c = -1.0;
  std::vector<int> qem_orders{1, 2};
  Evaluation evaluation = Evaluation::Device;
  double h = kDerivativeStep;
  std::optional<PecConfig> pec;
  std::uint64_t seed = 1;
  std::string output;  // empty: stdout
  int workers = 0;     // 0: hardware concurrency

  // Throws ConfigError for malformed grids and CapabilityError for
  // unsupported physics before any computation starts.
  void validate() const;
  std::vector<double> thetas_for(int n_qubits) const;
  int worker_count() const;
};

// Applies JSON keys (same names as the SweepConfig fields, or the CLI flag
// spellings) onto `cfg`.
void apply_json(SweepConfig& cfg, const nlohmann::json& j);
// Reads a JSON document, or `key = value` lines when the file does not
// parse as JSON. Lists in key-value files are comma separated.
void apply_config_file(SweepConfig& cfg, const std::string& path);
nlohmann::json to_json(const SweepConfig& cfg);

struct DistanceSet {
  double noisy = 0.0, qem1 = 0.0, qem2 = 0.0;
};

struct FisherQuad {
  double ideal = 0.0, noisy = 0.0, qem1 = 0.0, qem2 = 0.0;  // per qubit
};

struct FisherReport {
  StateKind state;
  NoiseKind noise;
  int n_qubits = 0;
  double tau = 0.0;
  double theta = 0.0;
  FisherQuad cfi;
  FisherQuad qfi;
  DistanceSet distance;
  double trace_qem1 = 1.0, trace_qem2 = 1.0;  // before normalization
  RtResult rt1, rt2;                          // on the QFI
  RtResult rt1_cfi, rt2_cfi;                  // on the CFI
  bool precision_loss = false;
  bool negative_cfi = false;
  bool degenerate = false;  // d<O>/dtheta vanished; CFI reported as 0
};

// One grid point; the five-point stencil is formed around theta.
FisherReport evaluate_point(const SweepConfig& cfg, int n_qubits, double tau, double theta);

// Grid order is n_qubits, then tau, then theta. When `csv` is set, the header
// and then the rows are written in grid order as soon as every earlier point is done.
std::vector<FisherReport> run_sweep(const SweepConfig& cfg, std::ostream* csv = nullptr);

void write_csv_header(std::ostream& os, const SweepConfig& cfg);
void write_csv_row(std::ostream& os, const FisherReport& r);

struct PecComparison {
  StateKind state;
  int n_qubits = 0;
  double tau = 0.0;
  double theta = 0.0;
  std::size_t n_qem1 = 0, n_qem2 = 0;  // circuit budgets
  double ideal_cfi = 0.0;
  double sigma2_qem1 = 0.0, sigma2_qem2 = 0.0;
  double sigma2_pec_n1 = 0.0, sigma2_pec_n2 = 0.0;  // PEC at N^QEM_1st, N^QEM_2nd samples
};

// One comparison per (n_qubits, tau) at the first theta of the rule.
PecComparison compare_pec_point(const SweepConfig& cfg, int n_qubits, double tau,
                                std::uint64_t seed);
std::vector<PecComparison> run_pec_comparison(const SweepConfig& cfg, std::ostream* csv = nullptr);

// Default output directory from QEMETRO_OUT_DIR, else ".".
std::string default_output_dir();

}  // namespace qemetro

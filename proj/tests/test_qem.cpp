#include <gtest/gtest.h>

#include <numbers>

#include "qemetro/qem.hpp"
#include "test_util.hpp"

using namespace qemetro;

namespace {

// Gate-then-noise evolution with each layer channel written as the power
// series of exp(s_l L). Valid for negative strengths, which lets the tau
// derivatives at zero be taken with central differences.
ComplexMatrix series_evolve(const Circuit& c, const NoiseSpec& spec, double tau) {
  const std::vector<double> w = layer_weights(spec, c.depth());
  ComplexMatrix rho = zero_state(c.n_qubits);
  for (int l = 0; l < c.depth(); ++l) {
    rho = apply_layer(c.layers[l], rho);
    const double s = tau * w[l];
    ComplexMatrix term = rho, sum = rho;
    for (int k = 1; k < 30; ++k) {
      term = generator(spec.kind, term, c.n_qubits) * (s / k);
      sum += term;
    }
    rho = sum;
  }
  return rho;
}

ComplexMatrix fd_first(const Circuit& c, const NoiseSpec& spec, double h) {
  auto f = [&](double t) { return series_evolve(c, spec, t); };
  return (f(-2 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2 * h)) / (12 * h);
}

ComplexMatrix fd_second(const Circuit& c, const NoiseSpec& spec, double h) {
  auto f = [&](double t) { return series_evolve(c, spec, t); };
  return (-f(-2 * h) + 16.0 * f(-h) - 30.0 * f(0) + 16.0 * f(h) - f(2 * h)) / (12 * h * h);
}

struct Case {
  StateKind state;
  int n;
  NoiseKind noise;
};

const Case kCases[] = {
    {StateKind::CSS, 2, NoiseKind::MPD}, {StateKind::CSS, 2, NoiseKind::MAD},
    {StateKind::CSS, 2, NoiseKind::NMPD}, {StateKind::GHZ, 3, NoiseKind::MPD},
    {StateKind::GHZ, 3, NoiseKind::MAD}, {StateKind::GHZ, 3, NoiseKind::NMPD},
};

Circuit task_circuit(const Case& c, double theta = 0.3) {
  return build_task_circuit(make_task(c.state, c.n, theta, 4));
}

double rel(const ComplexMatrix& a, const ComplexMatrix& b) {
  return max_abs(a - b) / std::max(1e-300, max_abs(b));
}

}  // namespace

TEST(Expansion, SeriesEvolutionMatchesKraus) {
  for (const Case& c : kCases) {
    const NoiseSpec spec = NoiseSpec::from_tau(c.noise, 0.03);
    EXPECT_LT(max_abs(series_evolve(task_circuit(c), spec, 0.03) - evolve_noisy(task_circuit(c), spec)),
              1e-13);
  }
}

TEST(Expansion, Delta1MatchesFiniteDifference) {
  for (const Case& c : kCases) {
    const NoiseSpec spec = NoiseSpec::from_tau(c.noise, 0.01);
    const Circuit circ = task_circuit(c);
    EXPECT_LT(rel(delta1(circ, spec), fd_first(circ, spec, 1e-3)), 1e-6)
        << to_string(c.state) << " " << to_string(c.noise);
  }
}

TEST(Expansion, Delta2MatchesFiniteDifference) {
  for (const Case& c : kCases) {
    const NoiseSpec spec = NoiseSpec::from_tau(c.noise, 0.01);
    const Circuit circ = task_circuit(c);
    EXPECT_LT(rel(delta2(circ, spec), fd_second(circ, spec, 1e-3)), 1e-6)
        << to_string(c.state) << " " << to_string(c.noise);
  }
}

TEST(Expansion, PairSumEqualsDelta2) {
  for (const Case& c : kCases) {
    const NoiseSpec spec = NoiseSpec::from_tau(c.noise, 0.01);
    const Circuit circ = task_circuit(c);
    EXPECT_LT(rel(delta1_of_delta1(circ, spec), delta2(circ, spec)), 1e-10);
  }
}

TEST(Expansion, EffectsAreTracelessAndHermitian) {
  for (const Case& c : kCases) {
    const NoiseSpec spec = NoiseSpec::from_tau(c.noise, 0.01);
    const NoiseExpansion e = noise_expansion(task_circuit(c), spec);
    EXPECT_LT(std::abs(e.d1.trace()), 1e-12);
    EXPECT_LT(std::abs(e.d2.trace()), 1e-12);
    EXPECT_LT(max_abs(e.d1 - e.d1.adjoint()), 1e-12);
    EXPECT_LT(max_abs(e.d2 - e.d2.adjoint()), 1e-12);
    EXPECT_LT(max_abs(e.ideal - run_ideal(task_circuit(c))), 1e-13);
  }
}

TEST(Expansion, NoisyDelta1IsTauDerivative) {
  for (const Case& c : kCases) {
    const double tau = 0.02, h = 2e-5;
    const NoiseSpec spec = NoiseSpec::from_tau(c.noise, tau);
    const Circuit circ = task_circuit(c);
    // The NMPD weights depend on gamma_c only, so both steps share them.
    const ComplexMatrix fd = (evolve_noisy(circ, spec.with_tau(tau + h)) -
                              evolve_noisy(circ, spec.with_tau(tau - h))) / (2 * h);
    EXPECT_LT(rel(noisy_delta1(circ, spec), fd), 1e-6);
  }
}

TEST(Mitigation, ResidualOrders) {
  const Case c{StateKind::GHZ, 3, NoiseKind::MPD};
  const Circuit circ = task_circuit(c);
  for (Evaluation ev : {Evaluation::Exact, Evaluation::Device}) {
    double prev1 = 0, prev2 = 0;
    for (double tau : {1e-2, 1e-3}) {
      const NoiseSpec spec = NoiseSpec::from_tau(c.noise, tau);
      const MitigationBundle b = mitigate_all(circ, spec, ev);
      const double d1 = trace_distance(b.ideal, normalize(b.qem1).matrix);
      const double d2 = trace_distance(b.ideal, normalize(b.qem2).matrix);
      EXPECT_LT(d2, d1);
      if (prev1 > 0) {
        EXPECT_NEAR(std::log10(prev1 / d1), 2.0, 0.1) << to_string(ev);
        EXPECT_NEAR(std::log10(prev2 / d2), 3.0, 0.1) << to_string(ev);
      }
      prev1 = d1;
      prev2 = d2;
    }
  }
}

TEST(Mitigation, SingleOrderMatchesBundle) {
  const Circuit circ = task_circuit({StateKind::CSS, 2, NoiseKind::MAD});
  const NoiseSpec spec = NoiseSpec::from_tau(NoiseKind::MAD, 0.01);
  for (Evaluation ev : {Evaluation::Exact, Evaluation::Device}) {
    const MitigationBundle b = mitigate_all(circ, spec, ev);
    EXPECT_LT(max_abs(mitigate(b.noisy, circ, spec, 1, ev).matrix - b.qem1.matrix), 1e-14);
    EXPECT_LT(max_abs(mitigate(b.noisy, circ, spec, 2, ev).matrix - b.qem2.matrix), 1e-14);
  }
  EXPECT_THROW(mitigate(ComplexMatrix::Identity(4, 4), circ, spec, 3), ConfigError);
}

TEST(Quasi, NormalizeAndTrace) {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2) * 0.51;
  const QuasiDensity q = make_quasi(m);
  EXPECT_NEAR(q.trace, 1.02, 1e-15);
  EXPECT_NEAR(normalize(q).matrix.trace().real(), 1.0, 1e-15);
  EXPECT_THROW(normalize(make_quasi(ComplexMatrix::Zero(2, 2))), DegenerateError);
  EXPECT_EQ(parse_evaluation("device"), Evaluation::Device);
  EXPECT_THROW(parse_evaluation("magic"), ConfigError);
}

TEST(Quasi, RtMeasure) {
  const FisherValue ideal = make_fisher(3.0, 3, FisherMethod::Spectral);
  const FisherValue noisy = make_fisher(2.4, 3, FisherMethod::Spectral);
  const FisherValue mit = make_fisher(2.97, 3, FisherMethod::Spectral);
  const RtResult r = rt_measure(ideal, noisy, mit);
  EXPECT_NEAR(r.value, 0.2 / 0.01, 1e-9);
  EXPECT_FALSE(r.precision_loss);
  const RtResult exact = rt_measure(ideal, noisy, ideal);
  EXPECT_TRUE(exact.precision_loss);
  EXPECT_TRUE(std::isinf(exact.value));
}

TEST(AdCircuits, RealizeLoweringAndProjector) {
  std::mt19937_64 rng(610);
  const ComplexMatrix rho = testutil::random_density(1, rng);
  const ComplexMatrix in = kron(rho, basis_projector(1, 0));
  auto post = [&](AdVariant v, int outcome) {
    const ComplexMatrix out = run_ideal(ad_effect_circuit(v, std::numbers::pi), in);
    const ComplexMatrix proj = kron(ComplexMatrix::Identity(2, 2), basis_projector(1, outcome));
    return partial_trace(proj * out * proj, {0}, {2, 2});
  };
  const ComplexMatrix sm = gates::sigma_minus(), p1 = gates::P1();
  EXPECT_LT(max_abs(post(AdVariant::A, 1) - sm * rho * sm.adjoint()), 1e-14);
  EXPECT_LT(max_abs(post(AdVariant::B, 0) - p1 * rho * p1), 1e-14);
  EXPECT_EQ(ad_effect_circuit(AdVariant::B, 0.3).depth(), 3);
  EXPECT_EQ(ad_effect_circuit(AdVariant::A, 0.3, 2, 0, 3).n_qubits, 3);
}

TEST(CircuitGroup, SizesForThreeQubits) {
  const int d_css = layer_counts(make_task(StateKind::CSS, 3, 0.1)).d_tot;
  const int d_ghz = layer_counts(make_task(StateKind::GHZ, 3, 0.1)).d_tot;
  EXPECT_EQ(circuit_group_size(3, d_css, NoiseKind::MPD, 1), 37u);
  EXPECT_EQ(circuit_group_size(3, d_css, NoiseKind::MPD, 2), 739u);
  EXPECT_EQ(circuit_group_size(3, d_ghz, NoiseKind::MPD, 1), 43u);
  EXPECT_EQ(circuit_group_size(3, d_ghz, NoiseKind::MPD, 2), 988u);
  const NoiseSpec spec = NoiseSpec::from_tau(NoiseKind::MPD, 1e-3);
  const Circuit css = build_task_circuit(make_task(StateKind::CSS, 3, 0.1));
  EXPECT_EQ(circuit_group(css, spec, 1).size(), 37u);
  EXPECT_EQ(circuit_group(css, spec, 2).size(), 739u);
  const NoiseSpec mad = NoiseSpec::from_tau(NoiseKind::MAD, 1e-3);
  EXPECT_EQ(circuit_group(css, mad, 1).size(), circuit_group_size(3, d_css, NoiseKind::MAD, 1));
}

TEST(CircuitGroup, OriginalCircuitComesFirst) {
  const Circuit c = build_ghz_init(2);
  const CircuitGroup g = circuit_group(c, NoiseSpec::from_tau(NoiseKind::MAD, 1e-2), 1);
  EXPECT_TRUE(g.members.front().insertions.empty());
  EXPECT_EQ(member_circuit(g, g.members.front()).depth(), c.depth());
  EXPECT_GE(g.ancillas(), 1);
  const nlohmann::json j = to_json(g);
  EXPECT_EQ(j["size"], g.size());
  EXPECT_EQ(j["members"].size(), g.size());
}

TEST(CircuitGroup, FirstOrderGroupEqualsDelta1) {
  for (NoiseKind kind : {NoiseKind::MAD, NoiseKind::MPD, NoiseKind::NMPD}) {
    const NoiseSpec spec = NoiseSpec::from_tau(kind, 1e-2);
    for (int n : {1, 2}) {
      const Circuit c = build_task_circuit(make_task(StateKind::CSS, n, 0.4, 2));
      ASSERT_LE(c.depth(), 4);
      const CircuitGroup g = circuit_group(c, spec, 1);
      EXPECT_LT(max_abs(evaluate_group(g, 0) - delta1(c, spec)), 1e-10) << to_string(kind);
    }
  }
}

TEST(CircuitGroup, SecondOrderGroupEqualsDelta2) {
  for (NoiseKind kind : {NoiseKind::MAD, NoiseKind::MPD}) {
    const NoiseSpec spec = NoiseSpec::from_tau(kind, 1e-2);
    const Circuit c = build_task_circuit(make_task(StateKind::GHZ, 2, 0.4, 1));
    const CircuitGroup g = circuit_group(c, spec, 2);
    EXPECT_LT(max_abs(evaluate_group(g, 1, 4) - delta2(c, spec)), 1e-10) << to_string(kind);
    EXPECT_LT(max_abs(evaluate_group(g, 0, 1) - delta1(c, spec)), 1e-10) << to_string(kind);
  }
}

TEST(CircuitGroup, ThreadCountDoesNotChangeBits) {
  const NoiseSpec spec = NoiseSpec::from_tau(NoiseKind::MAD, 1e-2);
  const Circuit c = build_task_circuit(make_task(StateKind::GHZ, 2, 0.4, 2));
  const CircuitGroup g = circuit_group(c, spec, 2);
  const ComplexMatrix a = evaluate_group(g, 1, 1);
  const ComplexMatrix b = evaluate_group(g, 1, 8);
  EXPECT_EQ(max_abs(a - b), 0.0);
}

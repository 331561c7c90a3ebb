#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "qemetro/pec.hpp"
#include "test_util.hpp"

using namespace qemetro;

TEST(SplitMix, ReferenceSequence) {
  SplitMix64 r(0);
  EXPECT_EQ(r.next(), 0xE220A8397B1DCDAFull);
  EXPECT_EQ(r.next(), 0x6E789E6AA1B965F4ull);
  SplitMix64 a = SplitMix64::stream(7, 3), b = SplitMix64::stream(7, 3), c = SplitMix64::stream(7, 4);
  EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(SplitMix64::stream(7, 3).next(), c.next());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(Quasiprobability, DephasingInverseIdentities) {
  for (double s : {1e-4, 1e-2, 0.3}) {
    const double p = dephasing_flip_probability(s);
    EXPECT_NEAR(1 - 2 * p, std::exp(-s), 1e-15);
    const QuasiprobabilityOp q = dephasing_inverse(s);
    ASSERT_EQ(q.eta.size(), 2u);
    EXPECT_NEAR(q.eta[0] + q.eta[1], 1.0, 1e-14);
    EXPECT_NEAR(q.eta[0], (1 - p) / (1 - 2 * p), 1e-14);
    EXPECT_NEAR(q.eta[1], -p / (1 - 2 * p), 1e-14);
    EXPECT_NEAR(q.one_norm(), 1 / (1 - 2 * p), 1e-12);
  }
}

TEST(Quasiprobability, InverseUndoesChannel) {
  std::mt19937_64 rng(987);
  const ComplexMatrix rho = testutil::random_density(2, rng);
  const double s = 0.05;
  const NoiseSpec spec = NoiseSpec::from_tau(NoiseKind::MPD, s);
  const ComplexMatrix noisy = apply_channel(rho, kraus_for_interval(spec, 0, spec.dt), {1}, 2);
  EXPECT_LT(max_abs(dephasing_inverse(s).apply(noisy, 1, 2) - rho), 1e-14);
}

TEST(Quasiprobability, RejectsFullDephasing) {
  EXPECT_THROW(dephasing_inverse(std::numeric_limits<double>::infinity()), DomainError);
}

TEST(Pec, DeterministicForSeed) {
  const MetrologyTask t = make_task(StateKind::GHZ, 2, 0.3, 3);
  const Circuit c = build_task_circuit(t);
  const NoiseSpec spec = NoiseSpec::from_tau(NoiseKind::MPD, 0.05);
  const Observable o = task_observable(t);
  PecRun a{50, 8, 42, {}}, b{50, 8, 42, {}}, d{50, 8, 43, {}};
  pec_estimate(c, spec, o, a, 1);
  pec_estimate(c, spec, o, b, 4);
  pec_estimate(c, spec, o, d, 1);
  EXPECT_EQ(a.estimates, b.estimates);
  EXPECT_NE(a.estimates, d.estimates);
  EXPECT_EQ(a.estimates.size(), 8u);
}

TEST(Pec, UnbiasedEstimate) {
  const MetrologyTask t = make_task(StateKind::CSS, 2, 0.7, 3);
  const Circuit c = build_task_circuit(t);
  const NoiseSpec spec = NoiseSpec::from_tau(NoiseKind::MPD, 0.05);
  const Observable o = task_observable(t);
  const double ideal = (o.matrix * run_ideal(c)).trace().real();
  const double noisy = (o.matrix * evolve_noisy(c, spec)).trace().real();
  PecRun run{400, 50, 11, {}};
  const std::vector<double> est = pec_estimate(c, spec, o, run, 2);
  const double mean = std::accumulate(est.begin(), est.end(), 0.0) / est.size();
  double var = 0;
  for (double e : est) var += (e - mean) * (e - mean);
  var /= est.size() - 1;
  const double se = std::sqrt(var / est.size());
  EXPECT_LT(std::abs(mean - ideal), 5 * se);
  EXPECT_GT(std::abs(noisy - ideal), 5 * se);  // the test can tell the two apart
}

TEST(Pec, NmpdUsesLayerStrengths) {
  const MetrologyTask t = make_task(StateKind::CSS, 1, 0.7, 4);
  const Circuit c = build_task_circuit(t);
  const NoiseSpec spec = NoiseSpec::from_tau(NoiseKind::NMPD, 0.2);
  const Observable o = task_observable(t);
  const double ideal = (o.matrix * run_ideal(c)).trace().real();
  PecRun run{400, 50, 5, {}};
  const std::vector<double> est = pec_estimate(c, spec, o, run, 2);
  const double mean = std::accumulate(est.begin(), est.end(), 0.0) / est.size();
  EXPECT_NEAR(mean, ideal, 0.02);
}

TEST(Pec, AmplitudeDampingUnsupported) {
  const MetrologyTask t = make_task(StateKind::CSS, 1, 0.7);
  PecRun run{10, 1, 1, {}};
  EXPECT_THROW(pec_estimate(build_task_circuit(t), NoiseSpec::from_tau(NoiseKind::MAD, 0.01),
                            task_observable(t), run),
               CapabilityError);
}

TEST(Pec, CfiConvergesToIdeal) {
  const MetrologyTask t = make_task(StateKind::CSS, 1, 1.2, 3);
  const NoiseSpec spec = NoiseSpec::from_tau(NoiseKind::MPD, 1e-3);
  auto circuit_at = [](double th) { return build_task_circuit(make_task(StateKind::CSS, 1, th, 3)); };
  const PecRun run{2000, 20, 3, {}};
  const std::vector<double> cfi = pec_cfi(circuit_at, spec, task_observable(t), 1.2, 1e-3, run, 2);
  ASSERT_EQ(cfi.size(), 20u);
  EXPECT_LT(pec_sigma2(cfi, 1.0), 1e-3);
  EXPECT_NEAR(qem_sigma2(1.1, 1.0), 0.01, 1e-15);
  EXPECT_THROW(pec_sigma2({}, 1.0), SizeError);
}

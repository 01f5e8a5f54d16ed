#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "oracles.hpp"
#include "spiked/enumeration.hpp"
#include "spiked/spin_glass.hpp"

using namespace spiked;

namespace {

const std::vector<double> kOne{1.0};

std::vector<double> beta(double b) { return {b}; }

// Gibbs probabilities of every k x N configuration, by listing them.
std::map<std::vector<double>, double> brute_gibbs(const Disorder& d, const std::vector<Prior>& priors,
                                                  const std::vector<double>& bb) {
  const int n = d.n, k = static_cast<int>(priors.size());
  std::vector<std::size_t> digit(static_cast<std::size_t>(k) * n, 0);
  std::map<std::vector<double>, double> out;
  double z = 0.0;
  while (true) {
    SpinAssignment s{k, n, std::vector<double>(digit.size())};
    double w = 1.0;
    for (std::size_t j = 0; j < digit.size(); ++j) {
      const Prior& pr = priors[j / n];
      s.values[j] = pr[digit[j]].point;
      w *= pr[digit[j]].weight;
    }
    const double g = w * std::exp(hamiltonian(d, s, bb));
    out[s.values] = g;
    z += g;
    std::size_t j = 0;
    while (j < digit.size() && ++digit[j] == priors[j / n].size()) digit[j++] = 0;
    if (j == digit.size()) break;
  }
  for (auto& [_, v] : out) v /= z;
  return out;
}

}  // namespace

TEST(Overlap, Examples) {
  const std::vector<double> a{1, -1, 1, 1};
  EXPECT_EQ(overlap(a, a), 1.0);
  EXPECT_EQ(overlap(std::vector<double>{1, 1, -1, -1}, std::vector<double>{1, -1, 1, -1}), 0.0);
  EXPECT_EQ(overlap(std::vector<double>{2, 0}, std::vector<double>{0, 2}), 0.0);
  EXPECT_THROW(overlap(a, std::vector<double>{1, 1}), DomainError);
}

TEST(Hamiltonian, ZeroSnrAndShapeChecks) {
  const Disorder d = sample_disorder(4, 3, 1);
  const SpinAssignment s{2, 4, {1, -1, 1, 1, -1, -1, 1, 1}};
  EXPECT_EQ(hamiltonian(d, s, std::vector<double>{0.0, 0.0}), 0.0);
  EXPECT_THROW(hamiltonian(d, s, kOne), DomainError);
}

TEST(Hamiltonian, SingleSpikeFormula) {
  const Disorder d = sample_disorder(5, 3, 3);
  const std::vector<double> x{1, -1, 1, 1, -1};
  const SpinAssignment s{1, 5, x};
  const double expected = 0.7 * hamiltonian_x(d, x) - 0.5 * 0.49 * 5.0;
  EXPECT_NEAR(hamiltonian(d, s, beta(0.7)), expected, 1e-12);
}

TEST(Hamiltonian, EvenOrderOverlapTermSignInvariant) {
  const Disorder d = sample_disorder(5, 4, 3);
  const std::vector<double> x{1, -1, 1, 1, -1};
  std::vector<double> neg(x);
  for (auto& v : neg) v = -v;
  const double hx = hamiltonian(d, SpinAssignment{1, 5, x}, beta(0.8)) - 0.8 * hamiltonian_x(d, x);
  const double hn = hamiltonian(d, SpinAssignment{1, 5, neg}, beta(0.8)) - 0.8 * hamiltonian_x(d, neg);
  EXPECT_EQ(hx, hn);
  EXPECT_NEAR(hamiltonian_x(d, x), hamiltonian_x(d, neg), 1e-12);
}

TEST(Hamiltonian, ExponentialHasUnitMean) {
  const SpinAssignment s{1, 5, {1, -1, 1, 1, -1}};
  std::vector<double> vals(5000);
  for (std::size_t i = 0; i < vals.size(); ++i)
    vals[i] = std::exp(hamiltonian(sample_disorder(5, 3, derive_seed(17, StreamTag::Replica, i)), s, beta(0.5)));
  EXPECT_NEAR(summarize(vals).mean, 1.0, 0.05);
}

TEST(Enumeration, GrayOrderVisitsEveryConfigurationOnce) {
  const Disorder d = sample_disorder(5, 3, 4);
  const Prior prior = make_sparse_rademacher(0.4);
  std::map<std::vector<double>, int> seen;
  double total_weight = 0.0;
  for_each_configuration(d.entries, 5, 3, prior, [&](std::span<const double> x, double c, double sq, double lw) {
    const std::vector<double> v(x.begin(), x.end());
    ++seen[v];
    total_weight += std::exp(lw);
    EXPECT_NEAR(c, oracle::naive_contraction(d.entries, 5, 3, v), 1e-9);
    EXPECT_NEAR(sq, std::inner_product(v.begin(), v.end(), v.begin(), 0.0), 1e-12);
  });
  EXPECT_EQ(seen.size(), 243u);
  for (const auto& [_, count] : seen) EXPECT_EQ(count, 1);
  EXPECT_NEAR(total_weight, 1.0, 1e-12);
}

TEST(Enumeration, LimitRaisesResourceError) {
  EXPECT_THROW(configuration_count(2, 30), ResourceError);
  EXPECT_EQ(configuration_count(3, 4), 81u);
  const Disorder d = sample_disorder(26, 2, 1);
  EXPECT_THROW(free_energy_exact(d, {make_rademacher()}, kOne), ResourceError);
}

TEST(FreeEnergy, ZeroSnrIsZero) {
  const Disorder d = sample_disorder(7, 3, 5);
  EXPECT_NEAR(free_energy_exact(d, {make_sparse_rademacher(0.3)}, beta(0.0)).value, 0.0, 1e-12);
  EXPECT_EQ(free_energy_exact(d, {make_rademacher(), make_rademacher()}, std::vector<double>{0.0, 0.0}).value, 0.0);
}

TEST(FreeEnergy, TwoSpinFourTermHandComputation) {
  const Disorder d = sample_disorder(2, 2, 21);
  const auto& y = d.entries;
  const double b = 0.3;
  // sigma in {(+,+), (+,-), (-,+), (-,-)}; <Y, s s^T> / sqrt(2), R(s,s) = 1.
  double z = 0.0;
  for (double s1 : {1.0, -1.0})
    for (double s2 : {1.0, -1.0}) {
      const double x = (y[0] * s1 * s1 + y[1] * s1 * s2 + y[2] * s2 * s1 + y[3] * s2 * s2) / std::sqrt(2.0);
      z += 0.25 * std::exp(b * x - 0.5 * b * b * 2.0);
    }
  const FreeEnergySample f = free_energy_exact(d, {make_rademacher()}, beta(b));
  EXPECT_NEAR(f.value, std::log(z) / 2.0, 1e-12);
  EXPECT_EQ(f.config_count, 4u);
  EXPECT_EQ(f.method, FreeEnergyMethod::ExactEnumeration);
}

TEST(FreeEnergy, MatchesBruteForceOracle) {
  for (const Prior& prior : {make_rademacher(), make_sparse_rademacher(0.3), Prior({{-1.0, 0.2}, {0.5, 0.3}, {2.0, 0.5}})}) {
    const Disorder d = sample_disorder(6, 3, 8);
    for (double b : {0.4, 1.5, 4.0})
      EXPECT_NEAR(free_energy_exact(d, {prior}, beta(b)).value * 6.0,
                  oracle::brute_log_partition(d.entries, 6, 3, prior, b), 1e-10);
  }
}

TEST(FreeEnergy, MultiSpikeMatchesListing) {
  const Disorder d = sample_disorder(3, 3, 7);
  const std::vector<Prior> priors{make_rademacher(), make_sparse_rademacher(0.5)};
  const std::vector<double> bb{0.7, 1.1};
  double z = 0.0;
  std::vector<std::size_t> digit(6, 0);
  while (true) {
    SpinAssignment s{2, 3, std::vector<double>(6)};
    double w = 1.0;
    for (int j = 0; j < 6; ++j) {
      s.values[j] = priors[j / 3][digit[j]].point;
      w *= priors[j / 3][digit[j]].weight;
    }
    z += w * std::exp(hamiltonian(d, s, bb));
    int j = 0;
    while (j < 6 && ++digit[j] == priors[j / 3].size()) digit[j++] = 0;
    if (j == 6) break;
  }
  EXPECT_NEAR(free_energy_exact(d, priors, bb).value, std::log(z) / 3.0, 1e-12);
}

TEST(FreeEnergy, EvenOrderInvariantUnderAtomNegation) {
  const Prior a({{-1.0, 0.3}, {2.0, 0.7}}), b({{1.0, 0.3}, {-2.0, 0.7}});
  for (int p : {2, 4}) {
    const Disorder d = sample_disorder(7, p, 31);
    EXPECT_NEAR(free_energy_exact(d, {a}, beta(0.9)).value, free_energy_exact(d, {b}, beta(0.9)).value, 1e-12);
  }
}

TEST(FreeEnergy, DisorderMeanNonpositive) {
  const auto rows = fluctuation_scan({8}, 3, make_rademacher(), 1.0, 200, 19);
  EXPECT_LE(rows[0].mean, 3.0 * std::sqrt(rows[0].variance / rows[0].replicas));
}

TEST(FreeEnergy, MonteCarloAgreesWithEnumeration) {
  const Disorder d = sample_disorder(8, 3, 23);
  const double exact = free_energy_exact(d, {make_rademacher()}, beta(1.2)).value;
  const FreeEnergySample mc = free_energy_mc(d, {make_rademacher()}, beta(1.2), ChainOptions{3000, 300, 4, 0});
  EXPECT_NEAR(mc.value, exact, 0.01);
  EXPECT_EQ(mc.method, FreeEnergyMethod::MetropolisMc);
}

TEST(ContractionDelta, MatchesRecomputation) {
  const Disorder d = sample_disorder(5, 4, 2);
  const std::vector<double> x{0.5, -1.0, 2.0, 0.0, 1.5};
  for (int site = 0; site < 5; ++site) {
    std::vector<double> y(x);
    y[site] += -1.7;
    EXPECT_NEAR(contraction_delta(d.entries, 5, 4, x, site, -1.7), contract(d.entries, 5, 4, y) - contract(d.entries, 5, 4, x),
                1e-10);
  }
}

TEST(Metropolis, ZeroSnrSamplesThePrior) {
  const Disorder d = sample_disorder(6, 3, 1);
  const Prior prior = make_sparse_rademacher(0.4);
  ChainStats stats;
  const auto samples = metropolis_samples(d.entries, 6, 3, {prior}, beta(0.0), ChainOptions{20000, 100, 5, 0}, &stats);
  EXPECT_EQ(stats.acceptance(), 1.0);
  ASSERT_EQ(samples.size(), 19900u);
  std::vector<double> counts(3, 0.0);
  for (const auto& s : samples)
    for (double v : s.values) counts[v < -0.5 ? 0 : (v > 0.5 ? 2 : 1)] += 1.0;
  const double total = samples.size() * 6.0;
  // A site survives a sweep unchanged with probability (5/6)^6, so
  // consecutive snapshots are correlated; the 3-sigma band is widened twofold.
  for (int k = 0; k < 3; ++k) {
    const double w = prior[k].weight;
    EXPECT_NEAR(counts[k] / total, w, 2.0 * 3.0 * std::sqrt(w * (1 - w) / total));
  }
}

TEST(Metropolis, HistogramMatchesExactGibbs) {
  const Disorder d = sample_disorder(3, 2, 13);
  const std::vector<Prior> priors{make_sparse_rademacher(0.5)};
  const auto exact = brute_gibbs(d, priors, beta(1.0));
  std::map<std::vector<double>, double> hist;
  long count = 0;
  metropolis_chain(d.entries, 3, 2, priors, beta(1.0), ChainOptions{1000000, 1000, 8, 0},
                   [&](const SpinAssignment& s) {
                     hist[s.values] += 1.0;
                     ++count;
                   });
  double tv = 0.0;
  for (const auto& [config, prob] : exact) tv += 0.5 * std::abs(prob - hist[config] / count);
  EXPECT_LT(tv, 0.01);
}

TEST(Metropolis, TwoRowHistogramMatchesExactGibbs) {
  const Disorder d = sample_disorder(3, 3, 14);
  const std::vector<Prior> priors{make_rademacher(), make_rademacher()};
  const std::vector<double> bb{0.9, 0.6};
  const auto exact = brute_gibbs(d, priors, bb);
  std::map<std::vector<double>, double> hist;
  long count = 0;
  metropolis_chain(d.entries, 3, 3, priors, bb, ChainOptions{300000, 1000, 9, 0}, [&](const SpinAssignment& s) {
    hist[s.values] += 1.0;
    ++count;
  });
  double tv = 0.0;
  for (const auto& [config, prob] : exact) tv += 0.5 * std::abs(prob - hist[config] / count);
  EXPECT_LT(tv, 0.01);
}

TEST(Metropolis, DeterministicAndValidated) {
  const Disorder d = sample_disorder(5, 3, 1);
  const auto a = metropolis_samples(d.entries, 5, 3, {make_rademacher()}, beta(1.0), ChainOptions{50, 10, 3, 0});
  const auto b = metropolis_samples(d.entries, 5, 3, {make_rademacher()}, beta(1.0), ChainOptions{50, 10, 3, 0});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].values, b[i].values);
  EXPECT_THROW(metropolis_samples(d.entries, 5, 3, {make_rademacher()}, beta(1.0), ChainOptions{10, 10, 3, 0}),
               DomainError);
}

TEST(OverlapMoment, ZeroSnrLawIsSecondMomentSquaredOverN) {
  const Prior wide({{-2.0, 0.5}, {2.0, 0.5}});
  for (const Prior& prior : {make_rademacher(), make_sparse_rademacher(0.3), wide}) {
    const double v = moments(prior).second_moment;
    for (int n : {4, 6, 8}) {
      OverlapMomentOptions o;
      o.replicas = 3;
      const auto r = overlap_moment(n, 3, {prior}, {0.0}, o);
      EXPECT_NEAR(r.estimate[0], v * v / n, 1e-12);
    }
  }
}

TEST(OverlapMoment, ExactAgreesWithMonteCarlo) {
  OverlapMomentOptions o;
  o.replicas = 60;
  o.seed = 3;
  const auto e = overlap_moment(6, 3, {make_rademacher()}, {0.5}, o);
  o.method = OverlapMethod::MonteCarlo;
  o.sweeps = 3000;
  o.burn_in = 300;
  const auto m = overlap_moment(6, 3, {make_rademacher()}, {0.5}, o);
  EXPECT_NEAR(e.estimate[0], m.estimate[0], 3.0 * std::hypot(e.stderr_[0], m.stderr_[0]) + 1e-3);
}

TEST(OverlapMoment, HigherMomentMatchesDoubleSum) {
  const Disorder d = sample_disorder(5, 3, 41);
  const Prior prior = make_sparse_rademacher(0.5);
  const auto exact = brute_gibbs(d, {prior}, beta(1.3));
  double expected = 0.0;
  for (const auto& [a, pa] : exact)
    for (const auto& [b, pb] : exact) expected += pa * pb * std::pow(overlap(a, b), 4);
  std::vector<RowTable> tables{build_row_table(d.entries, 5, 3, prior, true)};
  const JointGibbs gibbs(tables, std::vector<double>{1.3});
  EXPECT_NEAR(exact_overlap_moment(gibbs, 0, 2), expected, 1e-12);
  double second = 0.0;
  for (const auto& [a, pa] : exact)
    for (const auto& [b, pb] : exact) second += pa * pb * std::pow(overlap(a, b), 2);
  EXPECT_NEAR(exact_overlap_moment(gibbs, 0, 1), second, 1e-12);
}

TEST(LrStatistic, ZeroSnrAndUnitMeanUnderNull) {
  const Disorder d = sample_disorder(6, 3, 2);
  EXPECT_EQ(lr_statistic(d.entries, 6, 3, {make_rademacher()}, beta(0.0)), 0.0);
  std::vector<double> ratio(3000);
  for (std::size_t i = 0; i < ratio.size(); ++i) {
    const Disorder w = sample_disorder(6, 3, derive_seed(99, StreamTag::NullTensor, i));
    ratio[i] = std::exp(lr_statistic(w.entries, 6, 3, {make_rademacher()}, beta(0.5)));
  }
  EXPECT_NEAR(summarize(ratio).mean, 1.0, 0.1);
}

TEST(LrStatistic, InvariantUnderCoordinateRelabeling) {
  const int n = 6, p = 3;
  const Disorder d = sample_disorder(n, p, 5);
  const std::vector<int> perm{3, 0, 5, 1, 4, 2};
  std::vector<double> moved(d.entries.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) moved[(perm[i] * n + perm[j]) * n + perm[k]] = d.entries[(i * n + j) * n + k];
  const std::vector<Prior> pr{make_sparse_rademacher(0.6)};
  EXPECT_NEAR(lr_statistic(moved, n, p, pr, beta(1.1)), lr_statistic(d.entries, n, p, pr, beta(1.1)), 1e-10);
}

TEST(Detection, PowerlessAtZeroSnr) {
  const DetectionResult r = detection_experiment(6, 3, {make_rademacher()}, {0.0}, 100, 1);
  EXPECT_NEAR(r.total_error, 1.0, 3.0 * r.total_error_stderr + 1e-12);
}

TEST(Detection, NearlyPowerlessBelowThreshold) {
  // The finite-N distance at N = 12, beta = 0.5 is about 0.08, so the
  // 3-sigma band is only meaningful for a modest trial count.
  const DetectionResult r = detection_experiment(12, 3, {make_rademacher()}, {0.5}, 200, 2);
  EXPECT_NEAR(r.total_error, 1.0, 3.0 * r.total_error_stderr);
}

TEST(TotalVariation, ZeroSnrAndRange) {
  EXPECT_EQ(estimate_tv(6, 3, {make_rademacher()}, {0.0}, 20, 1).tv, 0.0);
  const auto curve = estimate_tv_curve(8, 3, make_sparse_rademacher(0.5), {0.1, 1.0, 3.0, 6.0}, 50, 2);
  for (const auto& e : curve) {
    EXPECT_GE(e.tv, 0.0);
    EXPECT_LE(e.tv, 1.0);
  }
}

TEST(TotalVariation, CurveMatchesSingleSnrCalls) {
  const auto curve = estimate_tv_curve(7, 3, make_rademacher(), {0.4, 1.6}, 30, 6);
  EXPECT_NEAR(estimate_tv(7, 3, {make_rademacher()}, {1.6}, 30, 6).tv, curve[1].tv, 1e-12);
}

TEST(TotalVariation, PhaseContrastAtTen) {
  const auto curve = estimate_tv_curve(10, 3, make_rademacher(), {0.3, 2.5}, 1000, 7);
  EXPECT_GT(curve[1].tv - curve[0].tv, 3.0 * std::hypot(curve[0].stderr_, curve[1].stderr_));
}

TEST(Fluctuations, ZeroSnrHasZeroVariance) {
  const auto rows = fluctuation_scan({5, 6}, 3, make_rademacher(), 0.0, 10, 1);
  for (const auto& r : rows) EXPECT_EQ(r.variance, 0.0);
  const auto pos = fluctuation_scan({5}, 3, make_rademacher(), 0.7, 10, 1);
  EXPECT_GE(pos[0].variance, 0.0);
}

TEST(Fluctuations, LogLogSlopeOfPowerLaw) {
  const std::vector<double> x{2, 4, 8, 16}, y{3.0 / 8, 3.0 / 64, 3.0 / 512, 3.0 / 4096};
  EXPECT_NEAR(loglog_slope(x, y), -3.0, 1e-12);
  EXPECT_THROW(loglog_slope(x, std::vector<double>{1, 0, 1, 1}), DomainError);
}

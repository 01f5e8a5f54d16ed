#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "spiked/enumeration.hpp"
#include "spiked/error.hpp"
#include "spiked/parallel.hpp"
#include "spiked/prior.hpp"
#include "spiked/rng.hpp"
#include "spiked/tensor.hpp"

namespace spiked {

/// k x N spin configuration; row r takes values in the support of prior r.
struct SpinAssignment {
  int k = 0;
  int n = 0;
  std::vector<double> values;

  std::span<const double> row(int r) const { return std::span<const double>(values).subspan(r * n, n); }
  std::span<double> row(int r) { return std::span<double>(values).subspan(r * n, n); }
};

/// R(a, b) = (1/N) sum_i a_i b_i
inline double overlap(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("overlap: length mismatch");
  if (a.empty()) throw DomainError("overlap: empty vectors");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return dot / static_cast<double>(a.size());
}

inline void check_beta_bar(const std::vector<Prior>& priors, std::span<const double> beta_bar) {
  if (priors.empty()) throw DomainError("at least one prior required");
  if (priors.size() != beta_bar.size()) throw DomainError("beta_bar length must equal the number of priors");
}

/// H(sigma_bar) = sum_r beta_r X_N(sigma(r))
///                - sum_{r,r'} (beta_r beta_r' / 2) N R(sigma(r), sigma(r'))^p
inline double hamiltonian(std::span<const double> entries, int n, int p, const SpinAssignment& s,
                          std::span<const double> beta_bar) {
  if (s.n != n || static_cast<std::size_t>(s.k) != beta_bar.size() ||
      s.values.size() != static_cast<std::size_t>(s.k) * n)
    throw DomainError("hamiltonian: shape mismatch");
  const double scale = signal_scale(n, p);
  double h = 0.0;
  for (int r = 0; r < s.k; ++r) {
    if (beta_bar[r] != 0.0) h += beta_bar[r] * scale * contract(entries, n, p, s.row(r));
    for (int q = 0; q < s.k; ++q)
      h -= 0.5 * beta_bar[r] * beta_bar[q] * n * std::pow(overlap(s.row(r), s.row(q)), p);
  }
  return h;
}

inline double hamiltonian(const Disorder& d, const SpinAssignment& s, std::span<const double> beta_bar) {
  return hamiltonian(d.entries, d.n, d.p, s, beta_bar);
}

enum class FreeEnergyMethod { ExactEnumeration, MetropolisMc };

struct FreeEnergySample {
  double value = 0.0;
  int n = 0;
  int p = 0;
  std::vector<double> beta_bar;
  FreeEnergyMethod method = FreeEnergyMethod::ExactEnumeration;
  std::uint64_t seed = 0;
  std::uint64_t config_count = 0;  // configurations enumerated, or sweeps run for Monte Carlo
};

/// log of the prior-average of exp(H) over all configurations, i.e. N F_N,
/// for the disorder `entries`.
inline double log_partition_exact(std::span<const double> entries, int n, int p, const std::vector<Prior>& priors,
                                  std::span<const double> beta_bar,
                                  std::uint64_t limit = kDefaultEnumerationLimit) {
  check_beta_bar(priors, beta_bar);
  std::uint64_t total = 1;
  for (const auto& prior : priors) {
    const std::uint64_t c = configuration_count(prior.size(), n, limit);
    if (total > limit / c) throw ResourceError("free energy: joint configuration count exceeds the limit; use Monte Carlo");
    total *= c;
  }
  if (priors.size() == 1) {
    // Streaming log-sum-exp with a running maximum.
    const double beta = beta_bar[0];
    const double scale = signal_scale(n, p);
    double peak = -INFINITY, sum = 0.0;
    for_each_configuration(
        entries, n, p, priors[0],
        [&](std::span<const double>, double contraction, double sq_norm, double log_weight) {
          const double h = log_weight + beta * scale * contraction - 0.5 * beta * beta * n * std::pow(sq_norm / n, p);
          if (h > peak) {
            sum = sum * std::exp(peak - h) + 1.0;
            peak = h;
          } else {
            sum += std::exp(h - peak);
          }
        },
        limit);
    return peak + std::log(sum);
  }
  std::vector<RowTable> tables;
  for (const auto& prior : priors) tables.push_back(build_row_table(entries, n, p, prior, true, limit));
  return JointGibbs(tables, beta_bar).log_partition();
}

inline FreeEnergySample free_energy_exact(const Disorder& d, const std::vector<Prior>& priors,
                                          std::span<const double> beta_bar,
                                          std::uint64_t limit = kDefaultEnumerationLimit) {
  FreeEnergySample sample;
  sample.value = log_partition_exact(d.entries, d.n, d.p, priors, beta_bar, limit) / d.n;
  sample.n = d.n;
  sample.p = d.p;
  sample.beta_bar.assign(beta_bar.begin(), beta_bar.end());
  sample.seed = d.seed;
  sample.config_count = 1;
  for (const auto& prior : priors) sample.config_count *= configuration_count(prior.size(), d.n, limit);
  return sample;
}

/// Exact log-likelihood ratio log f_T(w) / f_W(w) of the spiked versus the
/// pure-noise model at the tensor w. Equals N F_N with w as disorder.
inline double lr_statistic(std::span<const double> w, int n, int p, const std::vector<Prior>& priors,
                           std::span<const double> beta_bar, std::uint64_t limit = kDefaultEnumerationLimit) {
  return log_partition_exact(w, n, p, priors, beta_bar, limit);
}

// ---------------------------------------------------------------------------
// Metropolis sampler

struct ChainOptions {
  long sweeps = 1000;
  long burn_in = 100;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

struct ChainStats {
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
  double acceptance() const { return proposals ? static_cast<double>(accepted) / proposals : 0.0; }
};

namespace detail {

// Contraction of T with e_site at the axis positions in `mask` and x at the
// others.
inline double masked_contraction(std::span<const double> entries, int n, int p, std::span<const double> x, int site,
                                 unsigned mask, int pos, std::size_t offset, std::span<const std::size_t> stride) {
  if (pos == p) return entries[offset];
  if (mask & (1u << pos)) return masked_contraction(entries, n, p, x, site, mask, pos + 1, offset + site * stride[pos], stride);
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    if (x[j] == 0.0) continue;
    s += x[j] * masked_contraction(entries, n, p, x, site, mask, pos + 1, offset + j * stride[pos], stride);
  }
  return s;
}

}  // namespace detail

/// <T, (x + delta e_site)^{(x)p}> - <T, x^{(x)p}> by the multilinear
/// expansion over the nonempty sets of axes pinned to `site`.
inline double contraction_delta(std::span<const double> entries, int n, int p, std::span<const double> x, int site,
                                double delta) {
  std::vector<std::size_t> stride(p);
  std::size_t s = 1;
  for (int a = p - 1; a >= 0; --a, s *= n) stride[a] = s;
  double total = 0.0;
  for (unsigned mask = 1; mask < (1u << p); ++mask)
    total += std::pow(delta, std::popcount(mask)) *
             detail::masked_contraction(entries, n, p, x, site, mask, 0, 0, stride);
  return total;
}

/// Single-site Metropolis chain for the Gibbs measure proportional to
/// exp(H) times the product prior. Each sweep makes k*N proposals; a proposal
/// picks (row, site) uniformly, draws a fresh atom from that row's prior and
/// accepts with probability min(1, exp(dH)). on_snapshot(const
/// SpinAssignment&) is called after every sweep with index >= burn_in.
template <class OnSnapshot>
ChainStats metropolis_chain(std::span<const double> entries, int n, int p, const std::vector<Prior>& priors,
                            std::span<const double> beta_bar, const ChainOptions& opts, OnSnapshot&& on_snapshot) {
  check_beta_bar(priors, beta_bar);
  if (!(opts.sweeps > opts.burn_in && opts.burn_in >= 0)) throw DomainError("metropolis: need sweeps > burn_in >= 0");
  if (entries.size() != tensor_size(n, p)) throw DomainError("metropolis: entry count must be n^p");
  const int k = static_cast<int>(priors.size());
  CounterRng rng(opts.seed, StreamTag::Chain, opts.stream);
  std::vector<std::vector<double>> weights(k);
  for (int r = 0; r < k; ++r)
    for (const auto& a : priors[r].atoms()) weights[r].push_back(a.weight);

  SpinAssignment state{k, n, std::vector<double>(static_cast<std::size_t>(k) * n)};
  for (int r = 0; r < k; ++r)
    for (int i = 0; i < n; ++i) state.row(r)[i] = priors[r][rng.categorical(weights[r])].point;

  // dots[r][q] = sum_i sigma_i(r) sigma_i(q)
  std::vector<std::vector<double>> dots(k, std::vector<double>(k, 0.0));
  for (int r = 0; r < k; ++r)
    for (int q = 0; q < k; ++q)
      for (int i = 0; i < n; ++i) dots[r][q] += state.row(r)[i] * state.row(q)[i];

  const double scale = signal_scale(n, p);
  const double dn = n;
  auto overlap_power = [&](double dot) { return std::pow(dot / dn, p); };

  ChainStats stats;
  for (long sweep = 0; sweep < opts.sweeps; ++sweep) {
    for (long move = 0; move < static_cast<long>(k) * n; ++move) {
      const int r = static_cast<int>(rng.uniform_index(k));
      const int i = static_cast<int>(rng.uniform_index(n));
      const double proposal = priors[r][rng.categorical(weights[r])].point;
      const double current = state.row(r)[i];
      ++stats.proposals;
      const double u = rng.uniform();
      if (proposal == current) {
        ++stats.accepted;
        continue;
      }
      const double delta = proposal - current;
      const double beta = beta_bar[r];
      double dh = 0.0;
      if (beta != 0.0) {
        dh += beta * scale * contraction_delta(entries, n, p, state.row(r), i, delta);
        const double new_self = dots[r][r] + proposal * proposal - current * current;
        dh -= 0.5 * beta * beta * dn * (overlap_power(new_self) - overlap_power(dots[r][r]));
        for (int q = 0; q < k; ++q) {
          if (q == r || beta_bar[q] == 0.0) continue;
          const double new_cross = dots[r][q] + delta * state.row(q)[i];
          dh -= beta * beta_bar[q] * dn * (overlap_power(new_cross) - overlap_power(dots[r][q]));
        }
      }
      if (dh >= 0.0 || u < std::exp(dh)) {
        ++stats.accepted;
        for (int q = 0; q < k; ++q) {
          if (q == r) continue;
          dots[r][q] += delta * state.row(q)[i];
          dots[q][r] = dots[r][q];
        }
        dots[r][r] += proposal * proposal - current * current;
        state.row(r)[i] = proposal;
      }
    }
    if (sweep >= opts.burn_in) on_snapshot(static_cast<const SpinAssignment&>(state));
  }
  return stats;
}

/// Collects the post-burn-in snapshots of a chain.
inline std::vector<SpinAssignment> metropolis_samples(std::span<const double> entries, int n, int p,
                                                      const std::vector<Prior>& priors,
                                                      std::span<const double> beta_bar, const ChainOptions& opts,
                                                      ChainStats* stats = nullptr) {
  std::vector<SpinAssignment> out;
  const ChainStats s =
      metropolis_chain(entries, n, p, priors, beta_bar, opts, [&](const SpinAssignment& a) { out.push_back(a); });
  if (stats) *stats = s;
  return out;
}

/// N^{-1} d/dt log Z at SNRs t * beta_bar, averaged over chain snapshots:
/// (1/N) < sum_r beta_r X_N(sigma(r)) - t sum_{r,r'} beta_r beta_r' N R^p >.
/// F_N(beta_bar) is its integral over t in [0, 1], taken by Simpson's rule on
/// `points` equally spaced times (odd, >= 3). The chain at time index j uses
/// stream opts.stream * points + j.
inline FreeEnergySample free_energy_mc(const Disorder& d, const std::vector<Prior>& priors,
                                       std::span<const double> beta_bar, const ChainOptions& opts, int points = 17) {
  check_beta_bar(priors, beta_bar);
  if (points < 3 || points % 2 == 0) throw DomainError("free_energy_mc: points must be odd and >= 3");
  const int n = d.n, p = d.p, k = static_cast<int>(priors.size());
  const double scale = signal_scale(n, p);
  std::vector<double> slope(points);
  for (int j = 0; j < points; ++j) {
    const double t = static_cast<double>(j) / (points - 1);
    std::vector<double> scaled(beta_bar.begin(), beta_bar.end());
    for (auto& b : scaled) b *= t;
    ChainOptions chain = opts;
    chain.stream = opts.stream * points + j;
    double sum = 0.0;
    long count = 0;
    metropolis_chain(d.entries, n, p, priors, scaled, chain, [&](const SpinAssignment& s) {
      double v = 0.0;
      for (int r = 0; r < k; ++r) {
        if (beta_bar[r] != 0.0) v += beta_bar[r] * scale * contract(d.entries, n, p, s.row(r));
        for (int q = 0; q < k; ++q) v -= t * beta_bar[r] * beta_bar[q] * n * std::pow(overlap(s.row(r), s.row(q)), p);
      }
      sum += v / n;
      ++count;
    });
    slope[j] = sum / count;
  }
  double integral = slope.front() + slope.back();
  for (int j = 1; j + 1 < points; ++j) integral += (j % 2 ? 4.0 : 2.0) * slope[j];
  integral /= 3.0 * (points - 1);

  FreeEnergySample sample;
  sample.value = integral;
  sample.n = n;
  sample.p = p;
  sample.beta_bar.assign(beta_bar.begin(), beta_bar.end());
  sample.method = FreeEnergyMethod::MetropolisMc;
  sample.seed = opts.seed;
  sample.config_count = static_cast<std::uint64_t>(opts.sweeps) * points;
  return sample;
}

// ---------------------------------------------------------------------------
// Overlap moments

enum class OverlapMethod { Exact, MonteCarlo };

struct OverlapMomentOptions {
  int m = 1;
  int replicas = 100;
  std::uint64_t seed = 0;
  OverlapMethod method = OverlapMethod::Exact;
  long sweeps = 2000;  // Monte Carlo only
  long burn_in = 200;
};

struct OverlapMomentResult {
  std::vector<double> estimate;  // per spike component r
  std::vector<double> stderr_;
};

/// Exact Gibbs two-replica average <R(sigma^1(r), sigma^2(r))^{2m}> for
/// component r of a JointGibbs measure.
inline double exact_overlap_moment(const JointGibbs& gibbs, std::size_t r, int m) {
  const int n = gibbs.n();
  if (m == 1) {
    const std::vector<double> c = gibbs.two_point(r);
    double s = 0.0;
    for (double v : c) s += v * v;
    return s / (static_cast<double>(n) * n);
  }
  if (gibbs.size() > (1u << 13)) throw ResourceError("overlap moment: exact m > 1 needs at most 2^13 configurations");
  std::vector<double> prob(gibbs.size());
  std::vector<std::size_t> row_index(gibbs.size());
  for (std::uint64_t c = 0; c < gibbs.size(); ++c) {
    prob[c] = gibbs.probability(c);
    row_index[c] = gibbs.decompose(c)[r];
  }
  const RowTable& t = gibbs.table(r);
  double total = 0.0;
  for (std::size_t a = 0; a < prob.size(); ++a)
    for (std::size_t b = 0; b < prob.size(); ++b)
      total += prob[a] * prob[b] *
               std::pow(overlap(t.configuration(row_index[a]), t.configuration(row_index[b])), 2 * m);
  return total;
}

/// Disorder average of the Gibbs average <R(sigma^1(r), sigma^2(r))^{2m}>
/// for the pure (unspiked) model. The inner average is exact by enumeration
/// or estimated from two independent Metropolis chains on the same disorder.
inline OverlapMomentResult overlap_moment(int n, int p, const std::vector<Prior>& priors,
                                          const std::vector<double>& beta_bar, const OverlapMomentOptions& opts) {
  check_beta_bar(priors, beta_bar);
  if (opts.m < 1) throw DomainError("overlap_moment: m must be >= 1");
  if (opts.replicas < 2) throw DomainError("overlap_moment: at least two replicas required");
  const std::size_t k = priors.size();
  std::vector<std::vector<double>> per_replica(k, std::vector<double>(opts.replicas));
  parallel_for(static_cast<std::size_t>(opts.replicas), [&](std::size_t rep) {
    const Disorder d = sample_disorder(n, p, derive_seed(opts.seed, StreamTag::Replica, rep));
    if (opts.method == OverlapMethod::Exact) {
      std::vector<RowTable> tables;
      for (const auto& prior : priors) tables.push_back(build_row_table(d.entries, n, p, prior, true));
      const JointGibbs gibbs(tables, beta_bar);
      for (std::size_t r = 0; r < k; ++r) per_replica[r][rep] = exact_overlap_moment(gibbs, r, opts.m);
    } else {
      const ChainOptions a{opts.sweeps, opts.burn_in, opts.seed, 2 * rep};
      const ChainOptions b{opts.sweeps, opts.burn_in, opts.seed, 2 * rep + 1};
      const auto first = metropolis_samples(d.entries, n, p, priors, beta_bar, a);
      const auto second = metropolis_samples(d.entries, n, p, priors, beta_bar, b);
      for (std::size_t r = 0; r < k; ++r) {
        std::vector<double> vals(first.size());
        for (std::size_t s = 0; s < first.size(); ++s)
          vals[s] = std::pow(overlap(first[s].row(static_cast<int>(r)), second[s].row(static_cast<int>(r))), 2 * opts.m);
        per_replica[r][rep] = pairwise_sum(vals) / static_cast<double>(vals.size());
      }
    }
  });
  OverlapMomentResult out;
  for (std::size_t r = 0; r < k; ++r) {
    const MeanEstimate est = summarize(per_replica[r]);
    out.estimate.push_back(est.mean);
    out.stderr_.push_back(est.stderr_);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Detection, total variation, fluctuations

struct DetectionResult {
  double type1 = 0.0;  // null tensor declared spiked
  double type2 = 0.0;  // spiked tensor declared null
  double total_error = 0.0;
  double total_error_stderr = 0.0;
  int trials = 0;
};

/// Likelihood-ratio test: declare "spiked" iff log f_T(w)/f_W(w) >= 0.
/// Each trial draws an independent null tensor Y and spiked tensor Y' + spike.
inline DetectionResult detection_experiment(int n, int p, const std::vector<Prior>& priors,
                                            const std::vector<double>& beta_bar, int trials, std::uint64_t seed) {
  check_beta_bar(priors, beta_bar);
  if (trials < 1) throw DomainError("detection_experiment: trials must be >= 1");
  std::vector<double> false_alarm(trials), miss(trials);
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t i) {
    const Disorder null_tensor = sample_disorder(n, p, derive_seed(seed, StreamTag::NullTensor, i));
    const SpikedTensor alt = make_spiked_tensor(n, p, priors, beta_bar, derive_seed(seed, StreamTag::AltTensor, i));
    false_alarm[i] = lr_statistic(null_tensor.entries, n, p, priors, beta_bar) >= 0.0 ? 1.0 : 0.0;
    miss[i] = lr_statistic(alt.entries, n, p, priors, beta_bar) >= 0.0 ? 0.0 : 1.0;
  });
  DetectionResult out;
  out.trials = trials;
  const MeanEstimate a = summarize(false_alarm), b = summarize(miss);
  out.type1 = a.mean;
  out.type2 = b.mean;
  out.total_error = a.mean + b.mean;
  out.total_error_stderr = std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
  return out;
}

struct TvEstimate {
  double tv = 0.0;
  double stderr_ = 0.0;
};

/// d_TV(W, T) = E[(1 - exp(N F_N))_+] with F_N evaluated on null disorder,
/// averaged over independent disorders.
inline TvEstimate estimate_tv(int n, int p, const std::vector<Prior>& priors, const std::vector<double>& beta_bar,
                              int replicas, std::uint64_t seed) {
  check_beta_bar(priors, beta_bar);
  if (replicas < 2) throw DomainError("estimate_tv: at least two replicas required");
  std::vector<double> terms(replicas);
  parallel_for(static_cast<std::size_t>(replicas), [&](std::size_t i) {
    const Disorder d = sample_disorder(n, p, derive_seed(seed, StreamTag::Replica, i));
    terms[i] = std::max(0.0, -std::expm1(log_partition_exact(d.entries, n, p, priors, beta_bar)));
  });
  const MeanEstimate est = summarize(terms);
  return {est.mean, est.stderr_};
}

/// estimate_tv for one prior at several SNRs, reusing each disorder's
/// enumeration across the SNR list. Uses the same disorder seeds as
/// estimate_tv, so entries agree with single-SNR calls.
inline std::vector<TvEstimate> estimate_tv_curve(int n, int p, const Prior& prior, const std::vector<double>& betas,
                                                 int replicas, std::uint64_t seed) {
  if (replicas < 2) throw DomainError("estimate_tv: at least two replicas required");
  std::vector<std::vector<double>> terms(betas.size(), std::vector<double>(replicas));
  parallel_for(static_cast<std::size_t>(replicas), [&](std::size_t i) {
    const Disorder d = sample_disorder(n, p, derive_seed(seed, StreamTag::Replica, i));
    const RowTable table = build_row_table(d.entries, n, p, prior, false);
    for (std::size_t b = 0; b < betas.size(); ++b)
      terms[b][i] = std::max(0.0, -std::expm1(single_row_log_partition(table, betas[b])));
  });
  std::vector<TvEstimate> out;
  for (const auto& t : terms) {
    const MeanEstimate est = summarize(t);
    out.push_back({est.mean, est.stderr_});
  }
  return out;
}

struct FluctuationRow {
  int n = 0;
  double mean = 0.0;
  double variance = 0.0;
  int replicas = 0;
};

/// Sample mean and variance of F_N over independent disorders, per N.
inline std::vector<FluctuationRow> fluctuation_scan(const std::vector<int>& n_list, int p, const Prior& prior,
                                                    double beta, int replicas, std::uint64_t seed) {
  if (replicas < 2) throw DomainError("fluctuation_scan: at least two replicas required");
  std::vector<FluctuationRow> rows;
  for (int n : n_list) {
    std::vector<double> values(replicas);
    parallel_for(static_cast<std::size_t>(replicas), [&](std::size_t i) {
      const Disorder d = sample_disorder(n, p, derive_seed(seed, StreamTag::Replica, i));
      values[i] = log_partition_exact(d.entries, n, p, {prior}, std::vector<double>{beta}) / n;
    });
    const MeanEstimate est = summarize(values);
    rows.push_back({n, est.mean, est.variance, replicas});
  }
  return rows;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("loglog_slope: need matching samples, at least two");
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw DomainError("loglog_slope: values must be positive");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace spiked

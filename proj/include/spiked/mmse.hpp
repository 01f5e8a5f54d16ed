#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "spiked/enumeration.hpp"
#include "spiked/error.hpp"
#include "spiked/parallel.hpp"
#include "spiked/prior.hpp"
#include "spiked/rng.hpp"
#include "spiked/spin_glass.hpp"
#include "spiked/tensor.hpp"

namespace spiked {

inline void check_time(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("t must lie in [0, 1]");
}

/// T_k(t) = Y + sqrt(t) N^{-(p-1)/2} sum_r beta_r u(r)^{(x)p}, rebuilt from the
/// stored noise and spikes whatever scale `spiked` was created with.
inline std::vector<double> interpolated_tensor(const SpikedTensor& spiked, double t) {
  check_time(t);
  std::vector<double> entries = spiked.noise;
  add_spikes(entries, spiked.n, spiked.p, spiked.beta_bar, spiked.spikes, std::sqrt(t));
  return entries;
}

inline std::vector<double> scaled_snr(std::span<const double> beta_bar, double t) {
  std::vector<double> out(beta_bar.begin(), beta_bar.end());
  for (auto& b : out) b *= std::sqrt(t);
  return out;
}

/// F^A_N(t). The auxiliary Hamiltonian equals the model Hamiltonian with
/// disorder T_k(t) and SNRs sqrt(t) beta_bar, so one enumeration suffices.
inline double auxiliary_free_energy(double t, const SpikedTensor& spiked, const std::vector<Prior>& priors,
                                    const std::vector<double>& beta_bar,
                                    std::uint64_t limit = kDefaultEnumerationLimit) {
  check_time(t);
  check_beta_bar(priors, beta_bar);
  if (spiked.beta_bar != beta_bar) throw DomainError("auxiliary_free_energy: beta_bar differs from the tensor's");
  if (t == 0.0) return 0.0;
  const std::vector<double> entries = interpolated_tensor(spiked, t);
  return log_partition_exact(entries, spiked.n, spiked.p, priors, scaled_snr(beta_bar, t), limit) / spiked.n;
}

/// Posterior moment tensors <sigma_{i1}(r) ... sigma_{ip}(r)> under the
/// auxiliary Gibbs measure at time t.
struct PosteriorSummary {
  double t = 0.0;
  std::vector<std::vector<double>> moment_tensor;  // per component, N^p entries
  double partition_log = 0.0;                      // N F^A_N(t)
};

inline PosteriorSummary posterior_summary(double t, const SpikedTensor& spiked, const std::vector<Prior>& priors,
                                          std::uint64_t limit = kDefaultEnumerationLimit) {
  check_beta_bar(priors, spiked.beta_bar);
  const std::vector<double> entries = interpolated_tensor(spiked, t);
  std::vector<RowTable> tables;
  for (const auto& prior : priors) tables.push_back(build_row_table(entries, spiked.n, spiked.p, prior, true, limit));
  const JointGibbs gibbs(tables, scaled_snr(spiked.beta_bar, t));
  PosteriorSummary out;
  out.t = t;
  out.partition_log = gibbs.log_partition();
  for (std::size_t r = 0; r < priors.size(); ++r) out.moment_tensor.push_back(gibbs.moment_tensor(r));
  return out;
}

/// DMSE = sum_r beta_r^2 v_{r,*}^p
inline double dmse(const std::vector<Prior>& priors, std::span<const double> beta_bar, int p) {
  check_beta_bar(priors, beta_bar);
  if (p < 2) throw DomainError("dmse: p must be >= 2");
  double total = 0.0;
  for (std::size_t r = 0; r < priors.size(); ++r)
    total += beta_bar[r] * beta_bar[r] * std::pow(moments(priors[r]).second_moment, p);
  return total;
}

struct MmseEstimate {
  double mmse = 0.0;
  double stderr_ = 0.0;
  double dmse = 0.0;
  int replicas = 0;
};

/// Replicate i draws T_k(t) from derive_seed(seed, AltTensor, i); the
/// estimator sum_r beta_r <sigma(r)^{(x)p}> is scored against
/// sum_r beta_r u(r)^{(x)p}, averaged over the N^p entries.
inline double squared_error(const SpikedTensor& spiked, const PosteriorSummary& post) {
  const int n = spiked.n, p = spiked.p;
  const std::size_t size = tensor_size(n, p);
  std::vector<double> truth(size, 0.0);
  add_spikes(truth, n, p, spiked.beta_bar, spiked.spikes, 1.0 / signal_scale(n, p));
  double total = 0.0;
  for (std::size_t e = 0; e < size; ++e) {
    double estimate = 0.0;
    for (std::size_t r = 0; r < post.moment_tensor.size(); ++r) estimate += spiked.beta_bar[r] * post.moment_tensor[r][e];
    total += (truth[e] - estimate) * (truth[e] - estimate);
  }
  return total / static_cast<double>(size);
}

inline MmseEstimate mmse_exact(int n, int p, const std::vector<Prior>& priors, const std::vector<double>& beta_bar,
                               double t, int replicas, std::uint64_t seed) {
  check_time(t);
  check_beta_bar(priors, beta_bar);
  if (replicas < 2) throw DomainError("mmse_exact: at least two replicas required");
  std::vector<double> errors(replicas);
  parallel_for(static_cast<std::size_t>(replicas), [&](std::size_t i) {
    const SpikedTensor spiked =
        make_spiked_tensor(n, p, priors, beta_bar, derive_seed(seed, StreamTag::AltTensor, i), std::sqrt(t));
    errors[i] = squared_error(spiked, posterior_summary(t, spiked, priors));
  });
  const MeanEstimate est = summarize(errors);
  return {est.mean, est.stderr_, dmse(priors, beta_bar, p), replicas};
}

struct NishimoriResult {
  double lhs = 0.0;  // E <R(sigma(r), u(r'))^p>
  double rhs = 0.0;  // E <R(sigma^1(r), sigma^2(r'))^p>
  double z = 0.0;    // paired mean difference over its standard error
};

/// z-score of paired replicate differences; 0 when they vanish identically.
inline double paired_z(std::span<const double> diffs) {
  const MeanEstimate est = summarize(diffs);
  if (est.stderr_ == 0.0) return est.mean == 0.0 ? 0.0 : (est.mean > 0 ? INFINITY : -INFINITY);
  return est.mean / est.stderr_;
}

/// Both sides use exact Gibbs averages: the planted side contracts the
/// moment tensor of row r with u(r')^{(x)p}, the two-replica side contracts
/// the moment tensors of rows r and r'.
inline NishimoriResult nishimori_residual(int n, int p, const std::vector<Prior>& priors,
                                          const std::vector<double>& beta_bar, double t, int replicas,
                                          std::uint64_t seed, std::size_t r = 0, std::size_t r_prime = 0) {
  check_time(t);
  check_beta_bar(priors, beta_bar);
  if (r >= priors.size() || r_prime >= priors.size()) throw DomainError("nishimori_residual: component out of range");
  if (replicas < 2) throw DomainError("nishimori_residual: at least two replicas required");
  std::vector<double> lhs(replicas), rhs(replicas), diff(replicas);
  const double norm = std::pow(static_cast<double>(n), -p);
  parallel_for(static_cast<std::size_t>(replicas), [&](std::size_t i) {
    const SpikedTensor spiked =
        make_spiked_tensor(n, p, priors, beta_bar, derive_seed(seed, StreamTag::AltTensor, i), std::sqrt(t));
    const PosteriorSummary post = posterior_summary(t, spiked, priors);
    std::vector<double> planted(tensor_size(n, p), 0.0);
    add_spikes(planted, n, p, {1.0}, {spiked.spikes[r_prime]}, 1.0 / signal_scale(n, p));
    const auto& a = post.moment_tensor[r];
    const auto& b = post.moment_tensor[r_prime];
    double left = 0.0, right = 0.0;
    for (std::size_t e = 0; e < a.size(); ++e) {
      left += a[e] * planted[e];
      right += a[e] * b[e];
    }
    lhs[i] = norm * left;
    rhs[i] = norm * right;
    diff[i] = lhs[i] - rhs[i];
  });
  return {summarize(lhs).mean, summarize(rhs).mean, paired_z(diff)};
}

struct DerivativeCheck {
  double derivative = 0.0;  // Richardson-extrapolated d/dt E F^A_N
  double overlap_side = 0.0;  // (1/2) sum_{r,r'} beta_r beta_r' E <R(sigma^1(r), sigma^2(r'))^p>
  double z = 0.0;
};

/// Compares the central difference of E F^A_N at t (steps dt and dt/2,
/// Richardson-combined to cancel the dt^2 term, common random numbers across
/// the stencil) with the overlap expression at t.
inline DerivativeCheck derivative_identity_check(int n, int p, const std::vector<Prior>& priors,
                                                 const std::vector<double>& beta_bar, double t, int replicas,
                                                 double dt, std::uint64_t seed) {
  check_beta_bar(priors, beta_bar);
  if (!(dt > 0.0 && t - dt > 0.0 && t + dt < 1.0)) throw DomainError("derivative_identity_check: need 0 < t-dt, t+dt < 1");
  if (replicas < 2) throw DomainError("derivative_identity_check: at least two replicas required");
  const std::size_t k = priors.size();
  const double norm = std::pow(static_cast<double>(n), -p);
  std::vector<double> deriv(replicas), over(replicas), diff(replicas);
  parallel_for(static_cast<std::size_t>(replicas), [&](std::size_t i) {
    const SpikedTensor spiked =
        make_spiked_tensor(n, p, priors, beta_bar, derive_seed(seed, StreamTag::AltTensor, i), std::sqrt(t));
    auto f = [&](double s) { return auxiliary_free_energy(s, spiked, priors, beta_bar); };
    const double coarse = (f(t + dt) - f(t - dt)) / (2.0 * dt);
    const double fine = (f(t + dt / 2) - f(t - dt / 2)) / dt;
    deriv[i] = (4.0 * fine - coarse) / 3.0;
    const PosteriorSummary post = posterior_summary(t, spiked, priors);
    double total = 0.0;
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t q = 0; q < k; ++q) {
        double dot = 0.0;
        for (std::size_t e = 0; e < post.moment_tensor[r].size(); ++e)
          dot += post.moment_tensor[r][e] * post.moment_tensor[q][e];
        total += 0.5 * beta_bar[r] * beta_bar[q] * norm * dot;
      }
    over[i] = total;
    diff[i] = deriv[i] - over[i];
  });
  return {summarize(deriv).mean, summarize(over).mean, paired_z(diff)};
}

}  // namespace spiked

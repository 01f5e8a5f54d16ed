#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "spiked/error.hpp"
#include "spiked/prior.hpp"
#include "spiked/tensor.hpp"

namespace spiked {

inline constexpr std::uint64_t kDefaultEnumerationLimit = std::uint64_t{1} << 24;

/// |support|^n, or throws ResourceError past `limit`.
inline std::uint64_t configuration_count(std::size_t support, int n, std::uint64_t limit = kDefaultEnumerationLimit) {
  std::uint64_t count = 1;
  for (int i = 0; i < n; ++i) {
    if (count > limit / support) throw ResourceError("enumeration: configuration count exceeds the limit; use Monte Carlo");
    count *= support;
  }
  return count;
}

/// Maintains <T, x^{(x)p}> under single-coordinate updates. The last-axis
/// contraction (N^{p-1} values) is updated in place; the remaining levels
/// are rebuilt, so one update costs about 2 N^{p-1} flops.
class ContractionTracker {
 public:
  ContractionTracker(std::span<const double> entries, int n, int p, std::vector<double> x)
      : entries_(entries), n_(n), p_(p), x_(std::move(x)) {
    if (entries_.size() != tensor_size(n, p)) throw DomainError("ContractionTracker: entry count must be n^p");
    levels_.resize(p);
    std::size_t size = 1;
    for (int l = 0; l < p; ++l) {
      levels_[l].assign(size, 0.0);
      size *= static_cast<std::size_t>(n);
    }
    refresh();
  }

  double value() const noexcept { return levels_[0][0]; }
  std::span<const double> x() const noexcept { return x_; }

  void set(int site, double new_value) {
    const double delta = new_value - x_[site];
    if (delta == 0.0) return;
    x_[site] = new_value;
    if (++updates_since_refresh_ >= kRefreshInterval) {
      refresh();
      return;
    }
    auto& last = levels_[p_ - 1];
    const std::size_t n = static_cast<std::size_t>(n_);
    for (std::size_t i = 0; i < last.size(); ++i) last[i] += delta * entries_[i * n + site];
    rebuild_upper();
  }

  void refresh() {
    updates_since_refresh_ = 0;
    auto& last = levels_[p_ - 1];
    const std::size_t n = static_cast<std::size_t>(n_);
    for (std::size_t i = 0; i < last.size(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += entries_[i * n + j] * x_[j];
      last[i] = s;
    }
    rebuild_upper();
  }

 private:
  static constexpr int kRefreshInterval = 4096;

  void rebuild_upper() {
    const std::size_t n = static_cast<std::size_t>(n_);
    for (int l = p_ - 2; l >= 0; --l) {
      const auto& below = levels_[l + 1];
      auto& here = levels_[l];
      for (std::size_t i = 0; i < here.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += below[i * n + j] * x_[j];
        here[i] = s;
      }
    }
  }

  std::span<const double> entries_;
  int n_, p_;
  std::vector<double> x_;
  std::vector<std::vector<double>> levels_;
  int updates_since_refresh_ = 0;
};

/// Visits every configuration in Lambda^n in reflected mixed-radix Gray
/// order, so consecutive configurations differ in exactly one site. The
/// visit order is fixed by (prior, n).
///
/// visitor(sigma, contraction, sq_norm, log_weight) receives the current
/// configuration, <T, sigma^{(x)p}>, sum_i sigma_i^2 and log mu^{(x)n}(sigma).
template <class Visitor>
void for_each_configuration(std::span<const double> entries, int n, int p, const Prior& prior, Visitor&& visitor,
                            std::uint64_t limit = kDefaultEnumerationLimit) {
  const std::size_t m = prior.size();
  configuration_count(m, n, limit);
  std::vector<double> log_w(m);
  for (std::size_t a = 0; a < m; ++a) log_w[a] = std::log(prior[a].weight);

  std::vector<std::size_t> digit(n, 0);
  std::vector<int> direction(n, +1);
  std::vector<double> sigma(n, prior[0].point);
  double sq_norm = n * prior[0].point * prior[0].point;
  double log_weight = n * log_w[0];
  ContractionTracker tracker(entries, n, p, sigma);

  for (;;) {
    visitor(std::span<const double>(sigma), tracker.value(), sq_norm, log_weight);
    int site = 0;
    for (; site < n; ++site) {
      const long next = static_cast<long>(digit[site]) + direction[site];
      if (next >= 0 && next < static_cast<long>(m)) break;
      direction[site] = -direction[site];
    }
    if (site == n) return;
    const std::size_t old_digit = digit[site];
    const std::size_t new_digit = old_digit + direction[site];
    digit[site] = new_digit;
    const double old_value = sigma[site], new_value = prior[new_digit].point;
    sigma[site] = new_value;
    sq_norm += new_value * new_value - old_value * old_value;
    log_weight += log_w[new_digit] - log_w[old_digit];
    tracker.set(site, new_value);
  }
}

/// Per-row enumeration results for one tensor and one prior: scaled field
/// X_N(sigma), self-overlap R(sigma, sigma) and log prior weight, in Gray
/// order. Configurations themselves are kept when `keep_configurations`.
struct RowTable {
  int n = 0;
  int p = 0;
  std::vector<double> field;         // X_N(sigma)
  std::vector<double> self_overlap;  // R(sigma, sigma)
  std::vector<double> log_weight;
  std::vector<double> configurations;  // count x n, empty unless kept

  std::size_t size() const noexcept { return field.size(); }
  std::span<const double> configuration(std::size_t i) const {
    return std::span<const double>(configurations).subspan(i * n, n);
  }
};

inline RowTable build_row_table(std::span<const double> entries, int n, int p, const Prior& prior,
                                bool keep_configurations, std::uint64_t limit = kDefaultEnumerationLimit) {
  RowTable table;
  table.n = n;
  table.p = p;
  const std::uint64_t count = configuration_count(prior.size(), n, limit);
  table.field.reserve(count);
  table.self_overlap.reserve(count);
  table.log_weight.reserve(count);
  if (keep_configurations) table.configurations.reserve(count * n);
  const double scale = signal_scale(n, p);
  for_each_configuration(
      entries, n, p, prior,
      [&](std::span<const double> sigma, double contraction, double sq_norm, double log_weight) {
        table.field.push_back(scale * contraction);
        table.self_overlap.push_back(sq_norm / n);
        table.log_weight.push_back(log_weight);
        if (keep_configurations) table.configurations.insert(table.configurations.end(), sigma.begin(), sigma.end());
      },
      limit);
  return table;
}

/// log sum_i exp(x_i) with the max shift.
inline double log_sum_exp(std::span<const double> xs) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double x : xs) peak = std::max(peak, x);
  if (!std::isfinite(peak)) return peak;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - peak);
  return peak + std::log(s);
}

/// log of the prior-average of exp(H) for a single row:
///   log sum_sigma mu(sigma) exp(beta X(sigma) - beta^2 N R(sigma,sigma)^p / 2).
inline double single_row_log_partition(const RowTable& table, double beta) {
  const double n = table.n;
  std::vector<double> terms(table.size());
  for (std::size_t i = 0; i < table.size(); ++i)
    terms[i] = table.log_weight[i] + beta * table.field[i] -
               0.5 * beta * beta * n * std::pow(table.self_overlap[i], table.p);
  return log_sum_exp(terms);
}

/// Exact Gibbs measure of the vector-valued Hamiltonian
///   H(sigma_bar) = sum_r beta_r X(sigma(r))
///                  - sum_{r,r'} beta_r beta_r' N R(sigma(r), sigma(r'))^p / 2
/// over the product of the row tables. Joint configurations are indexed
/// mixed-radix with row 0 fastest.
class JointGibbs {
 public:
  JointGibbs(std::span<const RowTable> tables, std::span<const double> beta_bar) : tables_(tables) {
    if (tables.size() != beta_bar.size()) throw DomainError("JointGibbs: one SNR per row required");
    if (tables.empty()) throw DomainError("JointGibbs: no rows");
    n_ = tables[0].n;
    p_ = tables[0].p;
    std::uint64_t total = 1;
    for (const auto& t : tables) {
      if (total > kDefaultEnumerationLimit / std::max<std::size_t>(1, t.size()))
        throw ResourceError("JointGibbs: joint configuration count exceeds the limit");
      total *= t.size();
    }
    if (tables.size() > 1)
      for (const auto& t : tables)
        if (t.configurations.empty()) throw DomainError("JointGibbs: multi-row measures need stored configurations");
    beta_.assign(beta_bar.begin(), beta_bar.end());
    log_terms_.resize(total);
    std::vector<std::size_t> idx(tables.size(), 0);
    const double n = n_;
    for (std::uint64_t c = 0; c < total; ++c) {
      double h = 0.0;
      for (std::size_t r = 0; r < tables.size(); ++r) {
        const auto& t = tables[r];
        const std::size_t i = idx[r];
        h += t.log_weight[i] + beta_[r] * t.field[i] - 0.5 * beta_[r] * beta_[r] * n * std::pow(t.self_overlap[i], p_);
        for (std::size_t s = r + 1; s < tables.size(); ++s) {
          const double cross = overlap_of(r, i, s, idx[s]);
          h -= beta_[r] * beta_[s] * n * std::pow(cross, p_);
        }
      }
      log_terms_[c] = h;
      for (std::size_t r = 0; r < tables.size(); ++r) {
        if (++idx[r] < tables[r].size()) break;
        idx[r] = 0;
      }
    }
    log_partition_ = log_sum_exp(log_terms_);
  }

  int n() const noexcept { return n_; }
  int p() const noexcept { return p_; }
  std::size_t rows() const noexcept { return tables_.size(); }
  std::size_t size() const noexcept { return log_terms_.size(); }

  /// log of the prior-average of exp(H), i.e. N F_N.
  double log_partition() const noexcept { return log_partition_; }
  double free_energy() const noexcept { return log_partition_ / n_; }

  double probability(std::uint64_t c) const { return std::exp(log_terms_[c] - log_partition_); }

  /// Row indices of joint configuration c.
  std::vector<std::size_t> decompose(std::uint64_t c) const {
    std::vector<std::size_t> idx(tables_.size());
    for (std::size_t r = 0; r < tables_.size(); ++r) {
      idx[r] = c % tables_[r].size();
      c /= tables_[r].size();
    }
    return idx;
  }

  /// visitor(probability, row_indices) over all joint configurations.
  template <class Visitor>
  void for_each(Visitor&& visitor) const {
    std::vector<std::size_t> idx(tables_.size(), 0);
    for (std::uint64_t c = 0; c < log_terms_.size(); ++c) {
      visitor(probability(c), std::span<const std::size_t>(idx));
      for (std::size_t r = 0; r < tables_.size(); ++r) {
        if (++idx[r] < tables_[r].size()) break;
        idx[r] = 0;
      }
    }
  }

  const RowTable& table(std::size_t r) const { return tables_[r]; }

  /// Gibbs average of sigma_{i1}(r) ... sigma_{ip}(r) for every p-tuple.
  std::vector<double> moment_tensor(std::size_t r) const {
    require_configurations(r);
    const std::size_t size = tensor_size(n_, p_);
    std::vector<double> out(size, 0.0);
    std::vector<double> outer(size);
    for_each([&](double prob, std::span<const std::size_t> idx) {
      const auto sigma = tables_[r].configuration(idx[r]);
      outer_power(sigma, outer);
      for (std::size_t t = 0; t < size; ++t) out[t] += prob * outer[t];
    });
    return out;
  }

  /// Gibbs average <sigma_i(r) sigma_j(r)> as a row-major n x n matrix.
  std::vector<double> two_point(std::size_t r) const {
    require_configurations(r);
    const std::size_t n = static_cast<std::size_t>(n_);
    std::vector<double> out(n * n, 0.0);
    for_each([&](double prob, std::span<const std::size_t> idx) {
      const auto sigma = tables_[r].configuration(idx[r]);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] += prob * sigma[i] * sigma[j];
    });
    return out;
  }

  /// sigma^{(x)p} written row-major into `out` (size n^p).
  void outer_power(std::span<const double> sigma, std::vector<double>& out) const {
    out.assign(1, 1.0);
    for (int a = 0; a < p_; ++a) {
      std::vector<double> next(out.size() * n_);
      for (std::size_t i = 0; i < out.size(); ++i)
        for (int j = 0; j < n_; ++j) next[i * n_ + j] = out[i] * sigma[j];
      out.swap(next);
    }
  }

 private:
  double overlap_of(std::size_t r, std::size_t i, std::size_t s, std::size_t j) const {
    const auto a = tables_[r].configuration(i);
    const auto b = tables_[s].configuration(j);
    double dot = 0.0;
    for (int q = 0; q < n_; ++q) dot += a[q] * b[q];
    return dot / n_;
  }

  void require_configurations(std::size_t r) const {
    if (tables_[r].configurations.empty()) throw DomainError("JointGibbs: row table was built without configurations");
  }

  std::span<const RowTable> tables_;
  std::vector<double> beta_;
  int n_ = 0, p_ = 0;
  std::vector<double> log_terms_;
  double log_partition_ = 0.0;
};

}  // namespace spiked

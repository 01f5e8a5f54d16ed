#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "spiked/auxiliary.hpp"
#include "spiked/error.hpp"
#include "spiked/parallel.hpp"
#include "spiked/prior.hpp"

namespace spiked {

enum class SearchMethod { Bisection, Grid };

struct ThresholdOptions {
  TimeConvention convention = TimeConvention::BSquaredXiPrime;
  int quad_order = 101;
  double v_step_fraction = 0.001;  // v grid step as a fraction of v_*
  double b_tol = 1e-4;
  SearchMethod method = SearchMethod::Bisection;
  double b_step = 0.001;  // Grid method only
  double scan_step = 0.05;
  double scan_limit = 50.0;
};

struct ThresholdResult {
  double beta_c = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double v_grid_step = 0.0;
  double b_tolerance = 0.0;
  double sup_gamma_at_lo = 0.0;
  double sup_gamma_at_hi = 0.0;
  TimeConvention convention = TimeConvention::BSquaredXiPrime;
  int quad_order = 0;
};

/// Largest b with sup_v Gamma_b(v) <= 0 on the v grid. The supremum is
/// nondecreasing in b, so the sign change is located by an upward scan
/// followed by bisection (or, with SearchMethod::Grid, by a pure scan in
/// steps of b_step).
inline ThresholdResult critical_beta(const Prior& prior, int p, const ThresholdOptions& opts = {}) {
  if (p < 2) throw DomainError("critical_beta: p must be >= 2");
  if (!(opts.b_tol > 0.0)) throw DomainError("critical_beta: b_tol must be positive");
  const AuxiliaryFunctions aux(prior, GammaParams{p, opts.convention, opts.quad_order});
  const double v_step = opts.v_step_fraction * aux.v_star();
  auto sup_at = [&](double b) { return aux.sup_big_gamma(b, v_step).sup; };

  ThresholdResult result;
  result.v_grid_step = v_step;
  result.convention = opts.convention;
  result.quad_order = opts.quad_order;

  const double step = opts.method == SearchMethod::Grid ? opts.b_step : opts.scan_step;
  if (!(step > 0.0)) throw DomainError("critical_beta: scan step must be positive");
  result.b_tolerance = opts.method == SearchMethod::Grid ? step : opts.b_tol;

  double lo = step;
  double sup_lo = sup_at(lo);
  if (sup_lo > 0.0) throw BracketError("critical_beta: sup Gamma already positive at the first scan point");
  double hi = lo, sup_hi = sup_lo;
  for (long k = 2;; ++k) {
    hi = k * step;
    if (hi > opts.scan_limit) throw BracketError("critical_beta: no transition below the scan limit");
    sup_hi = sup_at(hi);
    if (sup_hi > 0.0) break;
    lo = hi;
    sup_lo = sup_hi;
  }

  if (opts.method == SearchMethod::Bisection) {
    while (hi - lo > opts.b_tol) {
      const double mid = 0.5 * (lo + hi);
      const double sup_mid = sup_at(mid);
      if (sup_mid > 0.0) {
        hi = mid;
        sup_hi = sup_mid;
      } else {
        lo = mid;
        sup_lo = sup_mid;
      }
    }
    result.beta_c = 0.5 * (lo + hi);
  } else {
    result.beta_c = lo;
  }
  result.bracket_lo = lo;
  result.bracket_hi = hi;
  result.sup_gamma_at_lo = sup_lo;
  result.sup_gamma_at_hi = sup_hi;
  return result;
}

/// 2 sqrt(-rho log rho - (1-rho) log(1-rho) + rho log 2), with the
/// (1-rho) log(1-rho) term taken as 0 at rho = 1.
inline double h_upper_bound(double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("h_upper_bound: rho must lie in (0, 1]");
  const double tail = rho < 1.0 ? (1.0 - rho) * std::log1p(-rho) : 0.0;
  return 2.0 * std::sqrt(-rho * std::log(rho) - tail + rho * std::log(2.0));
}

struct SweepRow {
  int p = 0;
  double rho = 0.0;
  double beta_c = NAN;
  double bracket_lo = NAN;
  double bracket_hi = NAN;
  double h_bound = NAN;
  std::string error;  // empty when the solve succeeded

  bool ok() const noexcept { return error.empty(); }
};

struct SweepTable {
  std::vector<SweepRow> rows;
};

/// One threshold solve per (p, rho) cell with the sparse Rademacher prior.
/// Rows come out p-major, rho-minor regardless of scheduling; a failing cell
/// is recorded in its row instead of aborting the sweep.
inline SweepTable sweep(const std::vector<int>& p_list, const std::vector<double>& rho_list,
                        const ThresholdOptions& opts = {}) {
  SweepTable table;
  table.rows.resize(p_list.size() * rho_list.size());
  parallel_for(table.rows.size(), [&](std::size_t cell) {
    SweepRow& row = table.rows[cell];
    row.p = p_list[cell / rho_list.size()];
    row.rho = rho_list[cell % rho_list.size()];
    try {
      row.h_bound = h_upper_bound(row.rho);
      const ThresholdResult r = critical_beta(make_sparse_rademacher(row.rho), row.p, opts);
      row.beta_c = r.beta_c;
      row.bracket_lo = r.bracket_lo;
      row.bracket_hi = r.bracket_hi;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return table;
}

/// Per-component thresholds for independent spikes; the undetectable region
/// is the product box (0, beta_{1,c}] x ... x (0, beta_{k,c}].
inline std::vector<ThresholdResult> multi_spike_region(const std::vector<Prior>& priors, int p,
                                                       const ThresholdOptions& opts = {}) {
  for (const auto& prior : priors) assert_centered(prior);
  std::vector<ThresholdResult> out(priors.size());
  parallel_for(priors.size(), [&](std::size_t r) { out[r] = critical_beta(priors[r], p, opts); });
  return out;
}

enum class Region { Undetectable, Detectable };

inline Region classify(const std::vector<ThresholdResult>& thresholds, const std::vector<double>& beta_bar) {
  if (thresholds.size() != beta_bar.size()) throw DomainError("classify: beta_bar length must match thresholds");
  for (std::size_t r = 0; r < beta_bar.size(); ++r) {
    if (beta_bar[r] < 0.0) throw DomainError("classify: SNRs must be nonnegative");
    if (beta_bar[r] > thresholds[r].beta_c) return Region::Detectable;
  }
  return Region::Undetectable;
}

}  // namespace spiked

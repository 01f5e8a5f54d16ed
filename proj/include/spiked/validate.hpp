#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "spiked/auxiliary.hpp"
#include "spiked/io.hpp"
#include "spiked/mmse.hpp"
#include "spiked/prior.hpp"
#include "spiked/spin_glass.hpp"
#include "spiked/threshold.hpp"

namespace spiked {

struct CalibrationOptions {
  std::vector<int> n_list{8, 10, 12, 14};
  double beta_step = 0.1;
  double beta_max = 3.0;
  int replicas = 4000;
  std::uint64_t seed = 20240601;
};

/// Brackets the finite-N detection transition for the Rademacher p-spin
/// model from the TV estimator and checks which time convention's beta_c
/// falls inside.
struct CalibrationResult {
  std::vector<double> betas;
  std::vector<std::vector<TvEstimate>> tv;  // [n index][beta index]
  std::vector<double> tv_slope;             // least-squares d tv / d N per beta
  double beta_lo = NAN;  // largest beta with tv decreasing in N
  double beta_hi = NAN;  // smallest beta with tv > 0.5 at the largest N
  double beta_c_default = NAN;
  double beta_c_alternative = NAN;

  bool default_bracketed() const { return beta_lo <= beta_c_default && beta_c_default <= beta_hi; }
  bool alternative_excluded() const { return beta_c_alternative < beta_lo || beta_c_alternative > beta_hi; }
};

inline double linear_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

inline CalibrationResult convention_calibration(int p = 3, const CalibrationOptions& opts = {}) {
  if (opts.n_list.size() < 2) throw DomainError("calibration: need at least two sizes");
  const Prior prior = make_rademacher();
  CalibrationResult out;
  ThresholdOptions topts;
  out.beta_c_default = critical_beta(prior, p, topts).beta_c;
  topts.convention = TimeConvention::BXiPrime;
  out.beta_c_alternative = critical_beta(prior, p, topts).beta_c;

  const long count = std::lround(opts.beta_max / opts.beta_step);
  for (long i = 1; i <= count; ++i) out.betas.push_back(i * opts.beta_step);
  for (int n : opts.n_list) out.tv.push_back(estimate_tv_curve(n, p, prior, out.betas, opts.replicas, opts.seed));

  std::vector<double> xs(opts.n_list.begin(), opts.n_list.end());
  for (std::size_t b = 0; b < out.betas.size(); ++b) {
    std::vector<double> ys;
    for (const auto& row : out.tv) ys.push_back(row[b].tv);
    out.tv_slope.push_back(linear_slope(xs, ys));
    if (out.tv_slope.back() < 0.0) out.beta_lo = out.betas[b];
    if (std::isnan(out.beta_hi) && out.tv.back()[b].tv > 0.5) out.beta_hi = out.betas[b];
  }
  return out;
}

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

enum class SuiteLevel { Fast, Full };

namespace detail {

inline CheckResult run_check(const std::string& name, const std::function<std::string(bool&)>& body) {
  CheckResult r{name, false, {}};
  try {
    r.detail = body(r.passed);
  } catch (const std::exception& e) {
    r.detail = std::string("exception: ") + e.what();
  }
  return r;
}

}  // namespace detail

/// Fast: analytic identities. Full: adds Monte Carlo and enumeration oracles,
/// the Nishimori z-test and the convention calibration.
inline std::vector<CheckResult> validate_suite(SuiteLevel level) {
  std::vector<CheckResult> out;
  auto add = [&](const std::string& name, const std::function<std::string(bool&)>& body) {
    out.push_back(detail::run_check(name, body));
  };
  const Prior rad = make_rademacher();

  add("prior.sparse_second_moment", [](bool& ok) {
    double worst = 0.0;
    for (int i = 1; i <= 10; ++i) worst = std::max(worst, std::abs(moments(make_sparse_rademacher(0.1 * i)).second_moment - 1.0));
    ok = worst < 1e-12;
    return "max |v_* - 1| = " + format_number(worst);
  });
  add("quadrature.hermite_moments", [](bool& ok) {
    const QuadratureRule rule = gauss_hermite(101);
    const double m2 = rule.expect([](double z) { return z * z; });
    const double m4 = rule.expect([](double z) { return z * z * z * z; });
    ok = std::abs(m2 - 1.0) < 1e-12 && std::abs(m4 - 3.0) < 1e-11;
    return "E z^2 = " + format_number(m2) + ", E z^4 = " + format_number(m4);
  });
  add("auxiliary.zero_values", [&](bool& ok) {
    const AuxiliaryFunctions aux(rad, GammaParams{});
    const double g0 = aux.gamma(0.0, 0.5), gs = aux.gamma(1.0, 0.0), big = aux.big_gamma(1.0, 0.0);
    ok = g0 == 0.0 && gs == 0.0 && big == 0.0;
    return "gamma_0(0.5) = " + format_number(g0) + ", gamma_1(0) = " + format_number(gs) +
           ", Gamma_1(0) = " + format_number(big);
  });
  add("auxiliary.gamma_below_v_star", [&](bool& ok) {
    const AuxiliaryFunctions aux(make_sparse_rademacher(0.3), GammaParams{});
    double worst = -INFINITY;
    for (double b = 0.5; b <= 3.0; b += 0.5) worst = std::max(worst, aux.gamma(b, 1.0) - aux.v_star());
    ok = worst <= 1e-12;
    return "max gamma - v_* = " + format_number(worst);
  });
  add("threshold.h_dominance_rho1", [](bool& ok) {
    const double bc = critical_beta(make_rademacher(), 3).beta_c;
    ok = bc <= h_upper_bound(1.0) + 2e-4;
    return "beta_c = " + format_number(bc) + ", H(1) = " + format_number(h_upper_bound(1.0));
  });
  add("spin_glass.free_energy_at_zero", [&](bool& ok) {
    const Disorder d = sample_disorder(6, 3, 1);
    const double f = free_energy_exact(d, {rad}, std::vector<double>{0.0}).value;
    ok = f == 0.0;
    return "F_N(0) = " + format_number(f);
  });
  add("spin_glass.overlap_law_beta0", [&](bool& ok) {
    OverlapMomentOptions o;
    o.replicas = 2;
    const double v = overlap_moment(6, 3, {rad}, {0.0}, o).estimate[0];
    ok = std::abs(v - 1.0 / 6.0) < 1e-12;
    return "E<R^2> = " + format_number(v) + " at N = 6";
  });
  add("mmse.dmse_formula", [&](bool& ok) {
    const double v = dmse({rad, rad}, std::vector<double>{1.0, 1.0}, 3);
    ok = v == 2.0;
    return "dmse = " + format_number(v);
  });
  if (level == SuiteLevel::Fast) return out;

  add("spin_glass.normalization", [&](bool& ok) {
    std::vector<double> vals(5000);
    const std::vector<double> sigma{1, -1, 1, 1, -1};
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const Disorder d = sample_disorder(5, 3, derive_seed(2, StreamTag::Replica, i));
      const SpinAssignment s{1, 5, sigma};
      vals[i] = std::exp(hamiltonian(d, s, std::vector<double>{0.5}));
    }
    const MeanEstimate e = summarize(vals);
    ok = std::abs(e.mean - 1.0) < 0.05;
    return "mean e^H = " + format_number(e.mean);
  });
  add("spin_glass.jensen", [&](bool& ok) {
    const auto rows = fluctuation_scan({8}, 3, rad, 1.0, 200, 3);
    const double se = std::sqrt(rows[0].variance / rows[0].replicas);
    ok = rows[0].mean <= 3.0 * se;
    return "mean F_N = " + format_number(rows[0].mean) + " +- " + format_number(se);
  });
  add("mmse.nishimori", [&](bool& ok) {
    const NishimoriResult r = nishimori_residual(5, 3, {rad}, {1.0}, 0.7, 500, 4);
    ok = std::abs(r.z) < 3.0;
    return "z = " + format_number(r.z);
  });
  add("mmse.derivative_identity", [&](bool& ok) {
    const DerivativeCheck r = derivative_identity_check(4, 3, {rad}, {1.0}, 0.5, 2000, 0.01, 5);
    ok = std::abs(r.z) < 3.0;
    return "z = " + format_number(r.z);
  });
  add("calibration.time_convention", [](bool& ok) {
    const CalibrationResult c = convention_calibration();
    ok = c.default_bracketed() && c.alternative_excluded();
    return "bracket [" + format_number(c.beta_lo) + ", " + format_number(c.beta_hi) + "], default " +
           format_number(c.beta_c_default) + ", alternative " + format_number(c.beta_c_alternative);
  });
  return out;
}

}  // namespace spiked

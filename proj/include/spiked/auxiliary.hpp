#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "spiked/error.hpp"
#include "spiked/prior.hpp"
#include "spiked/quadrature.hpp"

namespace spiked {

/// How (b, s) maps to the Brownian time at which the geometric Brownian
/// motion Z(a, t) is evaluated inside gamma.
enum class TimeConvention {
  BSquaredXiPrime,  // t = b^2 * p * s^(p-1)   (xi(s) = s^p)
  BXiPrime,         // t = b * p * s^(p-1) / 2 (xi(s) = s^p / 2)
};

inline const char* to_string(TimeConvention c) {
  return c == TimeConvention::BSquaredXiPrime ? "b2xi" : "bxi";
}

struct GammaParams {
  int p = 3;
  TimeConvention convention = TimeConvention::BSquaredXiPrime;
  int quad_order = 101;
};

inline void validate(const GammaParams& params) {
  if (params.p < 2) throw DomainError("gamma: p must be >= 2");
  if (params.quad_order < 21) throw DomainError("gamma: quad_order must be >= 21");
}

/// Gauss-Legendre nodes per panel for the windowed gamma integral.
inline int panel_order(int quad_order) { return std::max(8, (quad_order + 7) / 8); }

inline double effective_time(const GammaParams& params, double b, double s) {
  const double xi_prime = params.p * std::pow(s, params.p - 1);
  return params.convention == TimeConvention::BSquaredXiPrime ? b * b * xi_prime : 0.5 * b * xi_prime;
}

/// xi''(s) for xi(s) = s^p.
inline double xi_second(int p, double s) {
  return p == 2 ? 2.0 : p * (p - 1) * std::pow(s, p - 2);
}

/// Evaluates gamma_b(s), Gamma_b(v) and the grid supremum of Gamma_b for a
/// fixed centered prior, degree p and quadrature rule.
class AuxiliaryFunctions {
 public:
  AuxiliaryFunctions(const Prior& prior, GammaParams params)
      : params_(params), v_star_(moments(prior).second_moment) {
    validate(params_);
    assert_centered(prior);
    rule_ = gauss_hermite(params_.quad_order);
    legendre_ = gauss_legendre(panel_order(params_.quad_order));
    for (const auto& a : prior.atoms()) {
      points_.push_back(a.point);
      log_weights_.push_back(std::log(a.weight));
    }
  }

  AuxiliaryFunctions(const Prior& prior, GammaParams params, QuadratureRule rule)
      : params_(params), v_star_(moments(prior).second_moment), rule_(std::move(rule)) {
    validate(params_);
    legendre_ = gauss_legendre(panel_order(params_.quad_order));
    assert_centered(prior);
    for (const auto& a : prior.atoms()) {
      points_.push_back(a.point);
      log_weights_.push_back(std::log(a.weight));
    }
  }

  const GammaParams& params() const noexcept { return params_; }
  double v_star() const noexcept { return v_star_; }

  /// gamma at Brownian time t, evaluated after the change of measure that
  /// turns g1^2 / g0 into a posterior mean: with the planted observation
  /// y = a t + sqrt(t) z, a ~ prior,
  ///   E[g1(t, sqrt(t) z)^2 / g0(t, sqrt(t) z)] = integral of m(y)^2 p_t(y) dy,
  /// m = g1 / g0 and p_t the Gaussian mixture density of y.
  ///
  /// m(y) switches between atoms across windows of width O(1) in y located at
  /// O(t), which a single Gauss-Hermite rule in z cannot resolve once t is
  /// large. Outside the windows where two exponents g_i differ by less than
  /// kSaturationGap, m is constant to within e^{-kSaturationGap} and those
  /// stretches are integrated exactly with normal tail functions; inside
  /// them composite Gauss-Legendre panels are graded towards the complex
  /// zeros of g0, which lie at |Im y| >= pi / (max a - min a).
  double gamma_at_time(double t) const {
    if (t <= 0.0) return 0.0;
    const double root_t = std::sqrt(t);
    const std::size_t q = points_.size();
    auto exponent = [&](std::size_t i, double y) {
      return log_weights_[i] + points_[i] * y - 0.5 * points_[i] * points_[i] * t;
    };
    auto top_atom = [&](double y) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < q; ++i)
        if (exponent(i, y) > exponent(best, y)) best = i;
      return points_[best];
    };
    // Normal probability of (lo, hi) in z, accurate in either tail.
    auto normal_mass = [](double lo, double hi) {
      constexpr double r = 0.70710678118654752440;
      if (lo >= 0.0) return 0.5 * (std::erfc(lo * r) - std::erfc(hi * r));
      if (hi <= 0.0) return 0.5 * (std::erfc(-hi * r) - std::erfc(-lo * r));
      return 1.0 - 0.5 * (std::erfc(-lo * r) + std::erfc(hi * r));
    };

    std::vector<std::pair<double, double>> windows, bands;
    double spread = 0.0;
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t j = i + 1; j < q; ++j) {
        const double da = points_[i] - points_[j];
        const double cross = (log_weights_[j] - log_weights_[i]) / da + 0.5 * (points_[i] + points_[j]) * t;
        const double band = (std::log(static_cast<double>(q)) + 1.0) / std::abs(da);
        windows.emplace_back(cross - kSaturationGap / std::abs(da), cross + kSaturationGap / std::abs(da));
        bands.emplace_back(cross - band, cross + band);
        spread = std::max(spread, std::abs(da));
      }
    std::sort(windows.begin(), windows.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& w : windows) {
      if (!merged.empty() && w.first <= merged.back().second) merged.back().second = std::max(merged.back().second, w.second);
      else merged.push_back(w);
    }

    // Saturated stretches: (-inf, w_0), (w_0, w_1), ..., (w_last, inf).
    double total = 0.0;
    const std::size_t pieces = merged.size() + 1;
    for (std::size_t k = 0; k < pieces; ++k) {
      const double lo = k == 0 ? -INFINITY : merged[k - 1].second;
      const double hi = k == merged.size() ? INFINITY : merged[k].first;
      const double probe = std::isinf(lo) ? (std::isinf(hi) ? 0.0 : hi - 1.0) : (std::isinf(hi) ? lo + 1.0 : 0.5 * (lo + hi));
      const double a_top = top_atom(probe);
      double mass = 0.0;
      for (std::size_t j = 0; j < q; ++j) {
        const double c = points_[j] * t;
        mass += std::exp(log_weights_[j]) * normal_mass((lo - c) / root_t, (hi - c) / root_t);
      }
      total += a_top * a_top * mass;
    }
    if (merged.empty()) return total;

    // Windows, clipped to where the mixture density is non-negligible.
    const double clip_lo = *std::min_element(points_.begin(), points_.end()) * t - kNormalCutoff * root_t;
    const double clip_hi = *std::max_element(points_.begin(), points_.end()) * t + kNormalCutoff * root_t;
    const double pole_gap = std::numbers::pi / spread;
    auto band_distance = [&](double y) {
      double d = INFINITY;
      for (const auto& b : bands) d = std::min(d, y < b.first ? b.first - y : (y > b.second ? y - b.second : 0.0));
      return d;
    };
    const double inv_norm = 1.0 / (root_t * std::sqrt(2.0 * std::numbers::pi));
    for (const auto& w : merged) {
      double y = std::max(w.first, clip_lo);
      const double end = std::min(w.second, clip_hi);
      while (y < end) {
        // Half width at most a third of the distance to the nearest zero of g0.
        const double width = std::min({0.5 * std::max(pole_gap, band_distance(y)), root_t, end - y});
        const double mid = y + 0.5 * width, half = 0.5 * width;
        double panel = 0.0;
        for (std::size_t k = 0; k < legendre_.nodes.size(); ++k) {
          const double yk = mid + half * legendre_.nodes[k];
          double density = 0.0;
          for (std::size_t j = 0; j < q; ++j) {
            const double z = (yk - points_[j] * t) / root_t;
            density += std::exp(log_weights_[j] - 0.5 * z * z);
          }
          const double m = posterior_mean(yk, t);
          panel += legendre_.weights[k] * m * m * density;
        }
        total += half * inv_norm * panel;
        y += width;
      }
    }
    return total;
  }

  /// The same expectation with the quadrature rule applied directly in z,
  /// E_a sum_q w_q m(a t + sqrt(t) z_q)^2. Accurate only while t is small
  /// enough for the rule to resolve m.
  double gamma_at_time_hermite(double t) const {
    if (t <= 0.0) return 0.0;
    const double root_t = std::sqrt(t);
    double total = 0.0;
    for (std::size_t j = 0; j < points_.size(); ++j) {
      double inner = 0.0;
      for (std::size_t k = 0; k < rule_.nodes.size(); ++k) {
        const double m = posterior_mean(points_[j] * t + root_t * rule_.nodes[k], t);
        inner += rule_.weights[k] * m * m;
      }
      total += std::exp(log_weights_[j]) * inner;
    }
    return total;
  }

  /// The untilted form sum_q w_q g1^2 / g0 at x_q = sqrt(t) z_q, assembled in
  /// log space. Kept as an independent route for cross-checks.
  double gamma_at_time_direct(double t) const {
    if (t <= 0.0) return 0.0;
    const double root_t = std::sqrt(t);
    const std::size_t n_atoms = points_.size();
    std::vector<double> expo(n_atoms);
    double sum = 0.0;
    for (std::size_t q = 0; q < rule_.nodes.size(); ++q) {
      const double x = root_t * rule_.nodes[q];
      double shift = -INFINITY;
      for (std::size_t i = 0; i < n_atoms; ++i) {
        const double a = points_[i];
        expo[i] = log_weights_[i] + a * x - 0.5 * a * a * t;
        shift = std::max(shift, expo[i]);
      }
      double g0 = 0.0, g1 = 0.0;
      for (std::size_t i = 0; i < n_atoms; ++i) {
        const double e = std::exp(expo[i] - shift);
        g0 += e;
        g1 += points_[i] * e;
      }
      if (g1 == 0.0) continue;
      sum += std::exp(std::log(rule_.weights[q]) + shift + 2.0 * std::log(std::abs(g1)) - std::log(g0));
    }
    return sum;
  }

  /// g1(t, x) / g0(t, x) with the max-exponent shift.
  double posterior_mean(double x, double t) const {
    double shift = -INFINITY;
    const std::size_t n_atoms = points_.size();
    for (std::size_t i = 0; i < n_atoms; ++i)
      shift = std::max(shift, log_weights_[i] + points_[i] * x - 0.5 * points_[i] * points_[i] * t);
    double g0 = 0.0, g1 = 0.0;
    for (std::size_t i = 0; i < n_atoms; ++i) {
      const double e =
          std::exp(log_weights_[i] + points_[i] * x - 0.5 * points_[i] * points_[i] * t - shift);
      g0 += e;
      g1 += points_[i] * e;
    }
    return g1 / g0;
  }

  double gamma(double b, double s) const {
    if (b < 0.0 || s < 0.0) throw DomainError("gamma: b and s must be >= 0");
    return gamma_at_time(effective_time(params_, b, s));
  }

  /// Gamma_b(v) = int_0^v xi''(s) (gamma_b(s) - s) ds by adaptive Simpson.
  double big_gamma(double b, double v, double tol = 1e-10) const {
    if (!(v >= 0.0 && v <= v_star_ * (1.0 + 1e-12))) throw DomainError("big_gamma: v must lie in [0, v_*]");
    if (v == 0.0) return 0.0;
    if (b == 0.0) return -(params_.p - 1) * std::pow(v, params_.p);
    const int pieces = std::max(1, static_cast<int>(std::ceil(v / (0.02 * v_star_))));
    const double h = v / pieces;
    double total = 0.0;
    for (int k = 0; k < pieces; ++k) {
      const double lo = k * h, hi = (k + 1 == pieces) ? v : (k + 1) * h;
      total += adaptive_simpson([&](double s) { return integrand(b, s); }, lo, hi, tol / pieces);
    }
    return total;
  }

  struct SupResult {
    double sup;
    double argmax_v;
  };

  /// Maximum of Gamma_b over {v_step, 2 v_step, ..., v_*}. v_* is always on
  /// the grid; v = 0 never is.
  SupResult sup_big_gamma(double b, double v_step) const {
    if (!(v_step > 0.0 && v_step <= v_star_ / 10.0 * (1.0 + 1e-12)))
      throw DomainError("sup_big_gamma: v_step must lie in (0, v_*/10]");
    const std::vector<double> grid = v_grid(v_step);
    SupResult best{-INFINITY, 0.0};
    if (b == 0.0) {
      for (double v : grid) {
        const double g = -(params_.p - 1) * std::pow(v, params_.p);
        if (g > best.sup) best = {g, v};
      }
      return best;
    }
    const double tol_per_unit = 1e-10 / v_star_;
    double accumulated = 0.0;
    double left = 0.0;
    for (double v : grid) {
      accumulated +=
          adaptive_simpson([&](double s) { return integrand(b, s); }, left, v, tol_per_unit * (v - left));
      left = v;
      if (accumulated > best.sup) best = {accumulated, v};
    }
    return best;
  }

  std::vector<double> v_grid(double v_step) const {
    std::vector<double> grid;
    const auto count = static_cast<long>(std::floor(v_star_ / v_step * (1.0 + 1e-12)));
    grid.reserve(count + 1);
    for (long j = 1; j <= count; ++j) grid.push_back(std::min(j * v_step, v_star_));
    if (grid.empty() || grid.back() < v_star_ * (1.0 - 1e-12)) grid.push_back(v_star_);
    else grid.back() = v_star_;
    return grid;
  }

 private:
  double integrand(double b, double s) const { return xi_second(params_.p, s) * (gamma(b, s) - s); }

  static constexpr double kSaturationGap = 40.0;
  static constexpr double kNormalCutoff = 13.0;

  GammaParams params_;
  double v_star_;
  QuadratureRule rule_;
  LegendreRule legendre_;
  std::vector<double> points_;
  std::vector<double> log_weights_;
};

inline double gamma(const Prior& prior, const GammaParams& params, double b, double s, const QuadratureRule& rule) {
  return AuxiliaryFunctions(prior, params, rule).gamma(b, s);
}

inline double big_gamma(const Prior& prior, const GammaParams& params, double b, double v, const QuadratureRule& rule) {
  return AuxiliaryFunctions(prior, params, rule).big_gamma(b, v);
}

inline AuxiliaryFunctions::SupResult sup_big_gamma(const Prior& prior, const GammaParams& params, double b,
                                                   double v_step) {
  return AuxiliaryFunctions(prior, params).sup_big_gamma(b, v_step);
}

}  // namespace spiked

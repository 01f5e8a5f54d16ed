#pragma once

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>

#include "spiked/error.hpp"

namespace spiked {

/// Nodes and weights integrating against the standard normal density.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order = 0;

  template <class F>
  double expect(F&& f) const {
    double sum = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) sum += weights[q] * f(nodes[q]);
    return sum;
  }
};

inline constexpr int kMaxQuadratureOrder = 500;

/// Gauss-Hermite rule for E[f(Z)], Z ~ N(0,1), via the Golub-Welsch
/// eigenproblem on the probabilists' Hermite recurrence
/// He_{n+1}(x) = x He_n(x) - n He_{n-1}(x).
inline QuadratureRule gauss_hermite(int order) {
  if (order < 1) throw DomainError("gauss_hermite: order must be >= 1");
  if (order > kMaxQuadratureOrder) throw ResourceError("gauss_hermite: order exceeds 500");
  QuadratureRule rule;
  rule.order = order;
  if (order == 1) {
    rule.nodes = {0.0};
    rule.weights = {1.0};
    return rule;
  }
  const auto n = static_cast<Eigen::Index>(order);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (Eigen::Index k = 0; k < n - 1; ++k) sub[k] = std::sqrt(static_cast<double>(k + 1));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw DomainError("gauss_hermite: eigensolver failed");

  // Eigenvector components only carry absolute accuracy, so tiny tail
  // weights are recomputed from the Christoffel function
  //   1 / w_i = sum_{k<n} p_k(x_i)^2
  // with orthonormal p_k, after a Newton polish of each eigenvalue.
  std::vector<double> x(order), w(order);
  for (Eigen::Index i = 0; i < n; ++i) {
    long double xi = solver.eigenvalues()[i];
    long double christoffel = 0.0L;
    for (int pass = 0; pass < 3; ++pass) {
      long double prev = 0.0L, cur = 1.0L;
      christoffel = 1.0L;
      for (int k = 0; k < order; ++k) {
        const long double next = (xi * cur - std::sqrt(static_cast<long double>(k)) * prev) /
                                 std::sqrt(static_cast<long double>(k + 1));
        prev = cur;
        cur = next;
        if (k + 1 < order) christoffel += cur * cur;
      }
      // cur = p_n(x), prev = p_{n-1}(x), p_n' = sqrt(n) p_{n-1}
      if (pass < 2) xi -= cur / (std::sqrt(static_cast<long double>(order)) * prev);
    }
    x[i] = static_cast<double>(xi);
    w[i] = static_cast<double>(1.0L / christoffel);
  }
  // Enforce exact symmetry about zero; eigenvalues come out ascending.
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    const int j = order - 1 - i;
    rule.nodes[i] = 0.5 * (x[i] - x[j]);
    rule.weights[i] = 0.5 * (w[i] + w[j]);
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  double total = 0.0;
  for (int i = 0; i < order / 2; ++i) total += rule.weights[i] + rule.weights[order - 1 - i];
  if (order % 2 == 1) total += rule.weights[order / 2];
  for (auto& wi : rule.weights) wi /= total;
  return rule;
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// three-term recurrence.
struct LegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline LegendreRule gauss_legendre(int order) {
  if (order < 1) throw DomainError("gauss_legendre: order must be >= 1");
  if (order > kMaxQuadratureOrder) throw ResourceError("gauss_legendre: order exceeds 500");
  LegendreRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int i = 0; i < (order + 1) / 2; ++i) {
    long double x = std::cos(std::numbers::pi_v<long double> * (i + 0.75L) / (order + 0.5L));
    long double deriv = 1.0L;
    for (int iter = 0; iter < 100; ++iter) {
      long double prev = 1.0L, cur = x;
      for (int k = 2; k <= order; ++k) {
        const long double next = ((2 * k - 1) * x * cur - (k - 1) * prev) / k;
        prev = cur;
        cur = next;
      }
      deriv = order * (x * cur - prev) / (x * x - 1.0L);
      const long double step = cur / deriv;
      x -= step;
      if (std::abs(step) < 1e-19L) break;
    }
    const long double w = 2.0L / ((1.0L - x * x) * deriv * deriv);
    rule.nodes[i] = -static_cast<double>(x);
    rule.nodes[order - 1 - i] = static_cast<double>(x);
    rule.weights[i] = rule.weights[order - 1 - i] = static_cast<double>(w);
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

namespace detail {

template <class F>
double simpson_recurse(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                       int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  // Below the rounding floor of the panel sum further splitting cannot help.
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(left) + std::abs(right));
  if (depth <= 0 || std::abs(delta) <= std::max(15.0 * tol, floor)) return left + right + delta / 15.0;
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature on [a, b] with absolute tolerance `tol`.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol = 1e-10, int max_depth = 30) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_recurse(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace spiked

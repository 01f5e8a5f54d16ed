#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "spiked/error.hpp"

namespace spiked {

struct Atom {
  double point;
  double weight;
};

struct MomentSummary {
  double mean;
  double second_moment;  // v_*
  double support_bound;  // M = max |point|
};

/// A probability measure on a bounded subset of the real line, stored as
/// weighted atoms. Immutable once constructed.
///
/// Weights must be positive and sum to one within 1e-9; they are then
/// renormalized so the stored weights sum to one within rounding. At least
/// two distinct points are required unless the prior is built through
/// `point_mass`, which exists for tests that need a deterministic spike.
class Prior {
 public:
  Prior(std::vector<Atom> atoms, std::string label = "custom") : atoms_(std::move(atoms)), label_(std::move(label)) {
    validate(/*allow_degenerate=*/false);
  }

  static Prior point_mass(double point, std::string label = "point") {
    Prior prior;
    prior.atoms_ = {{point, 1.0}};
    prior.label_ = std::move(label);
    prior.validate(/*allow_degenerate=*/true);
    return prior;
  }

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  const Atom& operator[](std::size_t i) const { return atoms_[i]; }
  const std::string& label() const noexcept { return label_; }
  double support_bound() const noexcept { return support_bound_; }
  bool degenerate() const noexcept { return atoms_.size() < 2; }

  /// Same weights with every point multiplied by `factor`.
  Prior scaled(double factor) const {
    std::vector<Atom> atoms = atoms_;
    for (auto& a : atoms) a.point *= factor;
    if (degenerate()) return point_mass(atoms.front().point, label_);
    return Prior(std::move(atoms), label_);
  }

 private:
  Prior() = default;

  void validate(bool allow_degenerate) {
    if (atoms_.empty()) throw DomainError("prior: no atoms");
    double total = 0.0;
    for (const auto& a : atoms_) {
      if (!std::isfinite(a.point)) throw DomainError("prior: non-finite atom point");
      if (!(a.weight > 0.0) || !std::isfinite(a.weight)) throw DomainError("prior: atom weights must be positive");
      total += a.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      std::ostringstream os;
      os.precision(17);
      os << "prior: weights sum to " << total << ", expected 1";
      throw DomainError(os.str());
    }
    for (auto& a : atoms_) a.weight /= total;
    for (std::size_t i = 0; i < atoms_.size(); ++i)
      for (std::size_t j = i + 1; j < atoms_.size(); ++j)
        if (atoms_[i].point == atoms_[j].point) throw DomainError("prior: duplicate atom point");
    if (!allow_degenerate && atoms_.size() < 2) throw DomainError("prior: at least two distinct points required");
    support_bound_ = 0.0;
    for (const auto& a : atoms_) support_bound_ = std::max(support_bound_, std::abs(a.point));
  }

  std::vector<Atom> atoms_;
  std::string label_;
  double support_bound_ = 0.0;
};

inline Prior make_rademacher() { return Prior({{-1.0, 0.5}, {1.0, 0.5}}, "rademacher"); }

/// (rho/2) at -1/sqrt(rho), (1-rho) at 0, (rho/2) at +1/sqrt(rho).
/// At rho = 1 the zero atom has no mass and is dropped.
inline Prior make_sparse_rademacher(double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw DomainError("sparse rademacher: rho must lie in (0, 1]");
  std::ostringstream label;
  label << "sparse:" << rho;
  if (rho == 1.0) return Prior({{-1.0, 0.5}, {1.0, 0.5}}, label.str());
  const double jump = 1.0 / std::sqrt(rho);
  return Prior({{-jump, rho / 2}, {0.0, 1.0 - rho}, {jump, rho / 2}}, label.str());
}

inline MomentSummary moments(const Prior& prior) {
  MomentSummary m{0.0, 0.0, prior.support_bound()};
  for (const auto& a : prior.atoms()) {
    m.mean += a.weight * a.point;
    m.second_moment += a.weight * a.point * a.point;
  }
  return m;
}

inline void assert_centered(const Prior& prior, double tol = 1e-12) {
  const double mean = moments(prior).mean;
  if (std::abs(mean) > tol) {
    std::ostringstream os;
    os.precision(17);
    os << "prior '" << prior.label() << "' is not centered (mean " << mean << ")";
    throw CenteringError(os.str(), mean);
  }
}

}  // namespace spiked

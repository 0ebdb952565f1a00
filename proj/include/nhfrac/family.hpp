#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nhfrac/geometry.hpp"
#include "nhfrac/space.hpp"

namespace nhfrac {

/// Canonical ball family of a space with the per-ball data the maximal
/// operators and RBMO estimators share: doubling flags, mu(6B), the smallest
/// doubling dilate B~, and point-to-ball incidence.
///
/// Every ball is concentric with a prefix of its center's distance order, so
/// ball sums reduce to prefix sums (see CenterSums). The family keeps a
/// pointer to the space, which must outlive it.
class BallFamily {
 public:
  explicit BallFamily(const Space& space, std::size_t cap = kDefaultFamilyCap)
      : space_(&space), balls_(canonical_ball_family(space, cap)) {
    const std::size_t f = balls_.size();
    count_.resize(f);
    six_measure_.resize(f);
    doubling_.resize(f);
    tilde_radius_.resize(f);
    tilde_count_.resize(f);
    containing_.resize(space.size());
    for (std::size_t i = 0; i < f; ++i) {
      const Ball& b = balls_[i];
      count_[i] = space.ball_count(b.center, b.radius);
      six_measure_[i] = space.ball_measure(b.center, kDoublingFactor * b.radius);
      doubling_[i] = six_measure_[i] <= space.beta0() * b.measure;
      if (doubling_[i]) doubling_list_.push_back(static_cast<std::uint32_t>(i));
      tilde_radius_[i] = doubling_dilate_radius(space, b);
      tilde_count_[i] = space.ball_count(b.center, tilde_radius_[i]);
      b.members.for_each([&](std::size_t p) { containing_[p].push_back(static_cast<std::uint32_t>(i)); });
      max_radius_ = std::max(max_radius_, b.radius);
    }
    for (std::size_t p = 0; p < space.size(); ++p) {
      const bool has_singleton = std::any_of(containing_[p].begin(), containing_[p].end(), [&](std::uint32_t i) {
        return count_[i] == 1 && doubling_[i];
      });
      require(has_singleton, ErrorCode::PreconditionViolation, "point without a doubling singleton ball");
    }
  }

  const Space& space() const noexcept { return *space_; }
  std::size_t size() const noexcept { return balls_.size(); }
  const Ball& ball(std::size_t i) const { return balls_[i]; }
  std::span<const Ball> balls() const noexcept { return balls_; }

  std::size_t count(std::size_t i) const { return count_[i]; }
  bool doubling(std::size_t i) const { return doubling_[i]; }
  double six_measure(std::size_t i) const { return six_measure_[i]; }
  double tilde_radius(std::size_t i) const { return tilde_radius_[i]; }
  std::size_t tilde_count(std::size_t i) const { return tilde_count_[i]; }
  double tilde_measure(std::size_t i) const { return space_->prefix_measure(balls_[i].center, tilde_count_[i]); }
  double max_radius() const noexcept { return max_radius_; }

  /// Radius used for K-coefficients: radius-0 singletons take the smallest
  /// positive grid radius.
  double effective_radius(std::size_t i) const {
    return balls_[i].radius > 0.0 ? balls_[i].radius : space_->min_positive_radius();
  }

  std::span<const std::uint32_t> containing(std::size_t point) const { return containing_[point]; }
  std::span<const std::uint32_t> doubling_indices() const noexcept { return doubling_list_; }

  /// mu(factor * B) for every ball.
  std::vector<double> dilated_measures(double factor) const {
    std::vector<double> out(balls_.size());
    for (std::size_t i = 0; i < balls_.size(); ++i)
      out[i] = space_->ball_measure(balls_[i].center, factor * balls_[i].radius);
    return out;
  }

  /// Calls fn(i, supersets) for every ball i of the selection (doubling balls
  /// only, or all balls), where `supersets` lists the selected balls Q with
  /// members(B_i) a subset of members(Q), B_i itself included.
  template <class Fn>
  void for_each_superset_row(bool doubling_only, Fn&& fn) const {
    std::vector<std::uint32_t> all;
    if (!doubling_only) {
      all.resize(balls_.size());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::uint32_t>(i);
    }
    const std::vector<std::uint32_t>& list = doubling_only ? doubling_list_ : all;
    const std::size_t words = (list.size() + 63) / 64;
    const std::size_t n = space_->size();
    std::vector<std::uint64_t> cols(n * words, 0);
    for (std::size_t pos = 0; pos < list.size(); ++pos)
      balls_[list[pos]].members.for_each(
          [&](std::size_t p) { cols[p * words + pos / 64] |= std::uint64_t{1} << (pos % 64); });
    std::vector<std::uint64_t> row(words);
    std::vector<std::uint32_t> supersets;
    for (std::size_t pos = 0; pos < list.size(); ++pos) {
      const Ball& b = balls_[list[pos]];
      auto ord = space_->order(b.center);
      const std::size_t c = count_[list[pos]];
      std::copy_n(cols.begin() + static_cast<std::ptrdiff_t>(ord[0] * words), words, row.begin());
      for (std::size_t m = 1; m < c; ++m) {
        const std::uint64_t* col = cols.data() + ord[m] * words;
        for (std::size_t w = 0; w < words; ++w) row[w] &= col[w];
      }
      supersets.clear();
      for (std::size_t w = 0; w < words; ++w) {
        std::uint64_t bits = row[w];
        while (bits != 0) {
          supersets.push_back(list[w * 64 + static_cast<std::size_t>(std::countr_zero(bits))]);
          bits &= bits - 1;
        }
      }
      fn(static_cast<std::size_t>(list[pos]), std::span<const std::uint32_t>(supersets));
    }
  }

 private:
  const Space* space_;
  std::vector<Ball> balls_;
  std::vector<std::size_t> count_;
  std::vector<double> six_measure_;
  std::vector<bool> doubling_;
  std::vector<double> tilde_radius_;
  std::vector<std::size_t> tilde_count_;
  std::vector<std::vector<std::uint32_t>> containing_;
  std::vector<std::uint32_t> doubling_list_;
  double max_radius_ = 0.0;
};

/// Weighted prefix sums of a function g along every center's distance order,
/// so that sum_{y in B} g(y) mu({y}) is O(1) for any ball concentric with a
/// family ball.
class CenterSums {
 public:
  CenterSums(const Space& space, std::span<const double> g) : n_(space.size()), sums_(n_ * (n_ + 1), 0.0) {
    require(g.size() == n_, ErrorCode::InvalidInput, "function length differs from the point count");
    for (std::size_t c = 0; c < n_; ++c) {
      auto ord = space.order(c);
      double* s = sums_.data() + c * (n_ + 1);
      for (std::size_t m = 0; m < n_; ++m) s[m + 1] = s[m] + g[ord[m]] * space.weight(ord[m]);
    }
  }
  double sum(std::size_t center, std::size_t count) const { return sums_[center * (n_ + 1) + count]; }

 private:
  std::size_t n_;
  std::vector<double> sums_;
};

/// K^(beta)_{B,Q} for family balls B, tabulated by shell count. Radius-0
/// singletons use the smallest positive grid radius as r_B, and outer radii
/// below r_B give N_{B,Q} = 0.
class KTable {
 public:
  KTable(const BallFamily& family, double beta) : family_(&family), beta_(beta) {
    const Space& space = family.space();
    require(beta >= 0.0 && beta < space.dim_n(), ErrorCode::PreconditionViolation, "beta must lie in [0, dim_n)");
    const double exponent = 1.0 - beta / space.dim_n();
    cumulative_.resize(family.size());
    if (space.size() < 2) {
      for (auto& c : cumulative_) c.assign(1, 1.0);
      return;
    }
    for (std::size_t i = 0; i < family.size(); ++i) {
      const std::size_t center = family.ball(i).center;
      const double r0 = family.effective_radius(i);
      const std::size_t shells = shell_count(r0, family.max_radius());
      auto& cum = cumulative_[i];
      cum.assign(shells + 1, 1.0);
      double r = r0;
      for (std::size_t s = 1; s <= shells; ++s) {
        r *= 6.0;
        cum[s] = cum[s - 1] + std::pow(space.ball_measure(center, r) / lambda_eval(space, center, r), exponent);
      }
    }
  }

  double beta() const noexcept { return beta_; }

  std::size_t shells(std::size_t inner, double outer_radius) const {
    return shell_count(family_->effective_radius(inner), outer_radius);
  }

  double operator()(std::size_t inner, double outer_radius) const {
    if (family_->space().size() < 2) return 1.0;
    const std::size_t s = shells(inner, outer_radius);
    const auto& cum = cumulative_[inner];
    if (s < cum.size()) return cum[s];
    return k_coefficient(family_->space(), family_->ball(inner).center, family_->effective_radius(inner),
                         outer_radius, beta_);
  }

 private:
  const BallFamily* family_;
  double beta_;
  std::vector<std::vector<double>> cumulative_;
};

}  // namespace nhfrac

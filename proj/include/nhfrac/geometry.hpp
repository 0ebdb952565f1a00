#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "nhfrac/errors.hpp"
#include "nhfrac/member_set.hpp"
#include "nhfrac/space.hpp"

namespace nhfrac {

/// Closed ball B(center, radius) = {y : d(center, y) <= radius}.
struct Ball {
  std::size_t center = 0;
  double radius = 0.0;
  MemberSet members;
  double measure = 0.0;
};

/// Doubling pair (B, Q) together with N_{B,Q}.
struct BallPair {
  Ball inner;
  Ball outer;
  std::size_t n_bq = 0;
};

inline constexpr std::size_t kDefaultFamilyCap = 200000;
inline constexpr double kDoublingFactor = 6.0;

inline Ball make_ball(const Space& space, std::size_t center, double radius) {
  require(center < space.size(), ErrorCode::InvalidInput, "ball center out of range");
  require(radius >= 0.0 && std::isfinite(radius), ErrorCode::InvalidInput, "ball radius must be nonnegative");
  const std::size_t count = space.ball_count(center, radius);
  return Ball{center, radius, space.members(center, count), space.prefix_measure(center, count)};
}

/// Smallest integer N >= 0 with 6^N * inner_radius >= outer_radius. A relative
/// slack of 1e-12 absorbs rounding in radii that are exact 6-adic multiples.
inline std::size_t shell_count(double inner_radius, double outer_radius) {
  std::size_t n = 0;
  double r = inner_radius;
  const double target = outer_radius * (1.0 - 1e-12);
  while (r < target) {
    r *= 6.0;
    ++n;
  }
  return n;
}

/// All distinct balls B(c, r), c a point and r on the canonical radius grid.
/// Balls are deduplicated by member set, keeping the smallest generating
/// radius (then the lowest center). Output is ordered by center, then radius.
inline std::vector<Ball> canonical_ball_family(const Space& space, std::size_t cap = kDefaultFamilyCap) {
  const std::size_t n = space.size();
  std::vector<Ball> balls;
  std::unordered_map<MemberSet, std::size_t, MemberSetHash> seen;
  for (std::size_t c = 0; c < n; ++c) {
    auto dist = space.sorted_distances(c);
    auto ord = space.order(c);
    MemberSet members(n);
    for (std::size_t m = 0; m < n; ++m) {
      members.set(ord[m]);
      if (m + 1 < n && dist[m + 1] == dist[m]) continue;
      const double radius = dist[m];
      auto [it, inserted] = seen.try_emplace(members, balls.size());
      if (inserted) {
        balls.push_back(Ball{c, radius, members, space.prefix_measure(c, m + 1)});
        if (balls.size() > cap)
          throw Error(ErrorCode::FamilyTooLarge, "canonical ball family exceeds " + std::to_string(cap) +
                                                     " balls; subsample the space or raise the cap");
      } else if (radius < balls[it->second].radius) {
        balls[it->second].center = c;
        balls[it->second].radius = radius;
      }
    }
  }
  std::stable_sort(balls.begin(), balls.end(), [](const Ball& a, const Ball& b) {
    return a.center != b.center ? a.center < b.center : a.radius < b.radius;
  });
  return balls;
}

inline Ball dilate(const Space& space, const Ball& ball, double factor) {
  require(factor > 0.0 && std::isfinite(factor), ErrorCode::InvalidInput, "dilation factor must be positive");
  return make_ball(space, ball.center, factor * ball.radius);
}

/// mu(alpha B) <= beta mu(B).
inline bool is_doubling(const Space& space, const Ball& ball, double alpha, double beta) {
  return space.ball_measure(ball.center, alpha * ball.radius) <= beta * ball.measure;
}

/// (6, beta0)-doubling.
inline bool is_doubling(const Space& space, const Ball& ball) {
  return is_doubling(space, ball, kDoublingFactor, space.beta0());
}

/// Exponent k of the smallest (6, beta0)-doubling ball of the form 6^k B.
/// Terminates because a dilate that covers the whole space is doubling.
inline std::size_t doubling_exponent(const Space& space, const Ball& ball) {
  std::size_t k = 0;
  double r = ball.radius;
  for (;;) {
    const std::size_t count = space.ball_count(ball.center, r);
    const double mu = space.prefix_measure(ball.center, count);
    if (space.ball_measure(ball.center, kDoublingFactor * r) <= space.beta0() * mu) return k;
    r *= kDoublingFactor;
    ++k;
  }
}

inline double doubling_dilate_radius(const Space& space, const Ball& ball) {
  return ball.radius * std::pow(kDoublingFactor, static_cast<double>(doubling_exponent(space, ball)));
}

/// B~: the smallest (6, beta0)-doubling ball of the form 6^k B.
inline Ball smallest_doubling_dilate(const Space& space, const Ball& ball) {
  double r = ball.radius;
  for (std::size_t k = doubling_exponent(space, ball); k > 0; --k) r *= kDoublingFactor;
  return make_ball(space, ball.center, r);
}

/// Layer sum over the 6-adic dilates of the inner ball:
///   K^(beta)_{B,Q} = 1 + sum_{k=1}^{N_{B,Q}} [mu(6^k B) / lambda(x_B, 6^k r_B)]^(1 - beta/n).
/// Only the inner ball's center, the inner radius and the outer radius matter.
inline double k_coefficient(const Space& space, std::size_t center, double inner_radius, double outer_radius,
                            double beta) {
  if (!(inner_radius > 0.0))
    throw Error(ErrorCode::DegenerateBall, "K-coefficient needs a positive inner radius", {center});
  require(beta >= 0.0 && beta < space.dim_n(), ErrorCode::PreconditionViolation, "beta must lie in [0, dim_n)");
  const double exponent = 1.0 - beta / space.dim_n();
  const std::size_t shells = shell_count(inner_radius, outer_radius);
  double k = 1.0;
  double r = inner_radius;
  for (std::size_t s = 1; s <= shells; ++s) {
    r *= 6.0;
    k += std::pow(space.ball_measure(center, r) / lambda_eval(space, center, r), exponent);
  }
  return k;
}

inline double k_coefficient(const Space& space, const Ball& inner, const Ball& outer, double beta) {
  require(outer.radius >= inner.radius, ErrorCode::PreconditionViolation,
          "outer radius must not be smaller than the inner radius");
  return k_coefficient(space, inner.center, inner.radius, outer.radius, beta);
}

/// Greedy disjoint selection for the 5r-covering: balls are visited by
/// decreasing radius (ties by center, then input order) and kept when their
/// member set misses every kept ball. The union of the input is contained in
/// the union of the `dilation`-dilates of the kept balls; this is re-checked
/// and a failure raises COVER_GUARANTEE_FAILED.
inline std::vector<Ball> greedy_disjoint_cover(const Space& space, std::span<const Ball> balls,
                                               double dilation = 5.0) {
  require(!balls.empty(), ErrorCode::PreconditionViolation, "cover needs at least one ball");
  require(dilation >= 5.0, ErrorCode::PreconditionViolation, "cover dilation must be at least 5");
  std::vector<std::size_t> idx(balls.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (balls[a].radius != balls[b].radius) return balls[a].radius > balls[b].radius;
    return balls[a].center < balls[b].center;
  });
  const std::size_t n = space.size();
  MemberSet taken(n);
  std::vector<Ball> kept;
  for (std::size_t i : idx) {
    if (balls[i].members.intersects(taken)) continue;
    taken |= balls[i].members;
    kept.push_back(balls[i]);
  }
  MemberSet input(n), covered(n);
  for (const auto& b : balls) input |= b.members;
  for (const auto& b : kept) covered |= dilate(space, b, dilation).members;
  if (!input.is_subset_of(covered)) {
    std::vector<std::size_t> missing;
    input.for_each([&](std::size_t p) {
      if (!covered.test(p)) missing.push_back(p);
    });
    throw Error(ErrorCode::CoverGuaranteeFailed, "dilated cover misses a point of the input union", missing);
  }
  return kept;
}

}  // namespace nhfrac

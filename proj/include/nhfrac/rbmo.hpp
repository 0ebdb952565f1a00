#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "nhfrac/errors.hpp"
#include "nhfrac/family.hpp"
#include "nhfrac/field.hpp"
#include "nhfrac/geometry.hpp"
#include "nhfrac/report.hpp"
#include "nhfrac/space.hpp"

namespace nhfrac {

inline constexpr double kDefaultRho = 6.0;

inline double mean_on_ball(const Space& space, const FieldFunction& f, const Ball& ball) {
  require(f.size() == space.size(), ErrorCode::InvalidInput, "function length differs from the point count");
  double s = 0.0;
  ball.members.for_each([&](std::size_t p) { s += f[p] * space.weight(p); });
  return s / ball.measure;
}

/// Norms at round-off level of sup |b| count as zero: a constant b gives
/// about 1e-15 rather than 0 once ball means go through prefix sums.
inline bool negligible_rbmo(double norm, const FieldFunction& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) m = std::max(m, std::abs(b[i]));
  return !(norm > 1e-12 * std::max(1.0, m));
}

struct RbmoEstimate {
  double norm_value = 0.0;
  double rho = kDefaultRho;
  double oscillation_term = 0.0;
  double pair_term = 0.0;
  Ball witness_osc;
  BallPair witness_pair;
};

namespace detail {

/// Number of points of B~ for the ball B(center, radius).
inline std::size_t tilde_count(const Space& space, std::size_t center, double radius) {
  double r = radius;
  for (;;) {
    const std::size_t count = space.ball_count(center, r);
    if (space.ball_measure(center, kDoublingFactor * r) <= space.beta0() * space.prefix_measure(center, count))
      return count;
    r *= kDoublingFactor;
  }
}

/// Lower mu-median of f over the first `count` points of center's order.
inline double weighted_median(const Space& space, const FieldFunction& f, std::size_t center, std::size_t count,
                              std::vector<std::pair<double, double>>& scratch) {
  const auto ord = space.order(center);
  scratch.clear();
  double total = 0.0;
  for (std::size_t m = 0; m < count; ++m) {
    scratch.emplace_back(f[ord[m]], space.weight(ord[m]));
    total += space.weight(ord[m]);
  }
  std::sort(scratch.begin(), scratch.end());
  double acc = 0.0;
  for (const auto& [v, w] : scratch) {
    acc += w;
    if (acc >= 0.5 * total) return v;
  }
  return scratch.back().first;
}

inline std::vector<double> medians(const BallFamily& fam, const FieldFunction& f) {
  std::vector<std::pair<double, double>> scratch;
  std::vector<double> out(fam.size());
  for (std::size_t i = 0; i < fam.size(); ++i)
    out[i] = weighted_median(fam.space(), f, fam.ball(i).center, fam.count(i), scratch);
  return out;
}

inline RbmoEstimate rbmo_from_centers(const BallFamily& fam, const FieldFunction& b, double rho,
                                      const std::vector<double>& center_value, const std::vector<double>& pair_value,
                                      bool doubling_pairs) {
  const Space& space = fam.space();
  const KTable kt(fam, 0.0);
  const auto dil = fam.dilated_measures(rho);
  RbmoEstimate est;
  est.rho = rho;
  std::size_t wosc = 0;
  for (std::size_t i = 0; i < fam.size(); ++i) {
    const auto ord = space.order(fam.ball(i).center);
    double s = 0.0;
    for (std::size_t m = 0; m < fam.count(i); ++m) s += std::abs(b[ord[m]] - center_value[i]) * space.weight(ord[m]);
    const double v = s / dil[i];
    if (v > est.oscillation_term) est.oscillation_term = v, wosc = i;
  }
  std::size_t wb = 0, wq = 0;
  fam.for_each_superset_row(doubling_pairs, [&](std::size_t bi, std::span<const std::uint32_t> sup) {
    for (auto q : sup) {
      const double v = std::abs(pair_value[bi] - pair_value[q]) / kt(bi, fam.ball(q).radius);
      if (v > est.pair_term) est.pair_term = v, wb = bi, wq = q;
    }
  });
  est.norm_value = std::max(est.oscillation_term, est.pair_term);
  est.witness_osc = fam.ball(wosc);
  est.witness_pair = BallPair{fam.ball(wb), fam.ball(wq), kt.shells(wb, fam.ball(wq).radius)};
  return est;
}

}  // namespace detail

/// RBMO norm with b_B = m_{B~}(b): the larger of
///   max_B mu(rho B)^-1 sum_B |b - m_{B~} b| mu   and
///   max over nested doubling pairs B ⊆ Q of |m_B b - m_Q b| / K_{B,Q}.
inline RbmoEstimate rbmo_norm(const BallFamily& fam, const FieldFunction& b, double rho = kDefaultRho) {
  require(rho > 1.0 && std::isfinite(rho), ErrorCode::PreconditionViolation, "rho must exceed 1");
  require(b.size() == fam.space().size(), ErrorCode::InvalidInput, "function length differs from the point count");
  const CenterSums sums(fam.space(), b.values());
  std::vector<double> tilde(fam.size()), mean(fam.size());
  for (std::size_t i = 0; i < fam.size(); ++i) {
    const auto c = fam.ball(i).center;
    tilde[i] = sums.sum(c, fam.tilde_count(i)) / fam.tilde_measure(i);
    mean[i] = sums.sum(c, fam.count(i)) / fam.ball(i).measure;
  }
  return detail::rbmo_from_centers(fam, b, rho, tilde, mean, true);
}

/// RBMO constant for the assignment b_B = lower mu-median of b on B, with the
/// pair condition over every nested pair B ⊆ Q of family balls.
inline RbmoEstimate rbmo_norm_assignment(const BallFamily& fam, const FieldFunction& b, double rho = kDefaultRho) {
  require(rho > 1.0 && std::isfinite(rho), ErrorCode::PreconditionViolation, "rho must exceed 1");
  require(b.size() == fam.space().size(), ErrorCode::InvalidInput, "function length differs from the point count");
  const auto med = detail::medians(fam, b);
  return detail::rbmo_from_centers(fam, b, rho, med, med, false);
}

/// Largest over smallest RBMO norm across the given rho values.
inline double rho_ratio(const BallFamily& fam, const FieldFunction& b, std::span<const double> rhos) {
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    const double v = rbmo_norm(fam, b, rhos[i]).norm_value;
    lo = i == 0 ? v : std::min(lo, v);
    hi = std::max(hi, v);
  }
  require(!negligible_rbmo(lo, b), ErrorCode::ZeroRbmo, "b has zero RBMO norm");
  return hi / lo;
}

/// Growth of ball means along the dilates 6^k (6/5) B, k = 1, 2, ... until
/// the dilate holds the whole space, against k ||b||_*. Two forms are fitted:
/// means over the smallest doubling dilates, and medians with the assignment
/// norm. Radius-0 balls start from the smallest positive grid radius.
inline VerificationReport telescoping_check(const BallFamily& fam, const FieldFunction& b) {
  const Space& space = fam.space();
  VerificationReport rep;
  rep.id = "telescoping";
  const double norm = rbmo_norm(fam, b).norm_value;
  if (negligible_rbmo(norm, b)) {
    rep.details["vacuous"] = true;
    return rep;
  }
  const double norm_a = rbmo_norm_assignment(fam, b).norm_value;
  const CenterSums sums(space, b.values());
  std::vector<std::pair<double, double>> scratch;
  double c_tilde = 0.0, c_median = 0.0;
  for (std::size_t i = 0; i < fam.size(); ++i) {
    const std::size_t c = fam.ball(i).center;
    const double m0 = sums.sum(c, fam.tilde_count(i)) / fam.tilde_measure(i);
    const double b0 = detail::weighted_median(space, b, c, fam.count(i), scratch);
    double r = fam.effective_radius(i) * 1.2;
    for (std::size_t k = 1;; ++k) {
      r *= 6.0;
      const std::size_t tc = detail::tilde_count(space, c, r);
      const double mk = sums.sum(c, tc) / space.prefix_measure(c, tc);
      c_tilde = std::max(c_tilde, std::abs(m0 - mk) / (static_cast<double>(k) * norm));
      const std::size_t count = space.ball_count(c, r);
      const double bk = detail::weighted_median(space, b, c, count, scratch);
      if (!negligible_rbmo(norm_a, b)) c_median = std::max(c_median, std::abs(b0 - bk) / (static_cast<double>(k) * norm_a));
      if (count == space.size()) break;
    }
  }
  rep.ratios = {c_tilde, c_median};
  rep.fitted_constant = std::max(c_tilde, c_median);
  rep.pass = std::isfinite(rep.fitted_constant);
  rep.details["vacuous"] = false;
  rep.details["tilde_constant"] = c_tilde;
  rep.details["median_constant"] = c_median;
  rep.details["rbmo_norm"] = norm;
  rep.details["rbmo_norm_assignment"] = norm_a;
  return rep;
}

/// max_B { mu(rho B)^-1 sum_B |b - m_{B~} b|^p mu }^{1/p} / ||b||_* for each p.
inline VerificationReport john_nirenberg_check(const BallFamily& fam, const FieldFunction& b,
                                               std::span<const double> p_grid, double rho = kDefaultRho) {
  const Space& space = fam.space();
  VerificationReport rep;
  rep.id = "john_nirenberg";
  const double norm = rbmo_norm(fam, b, rho).norm_value;
  if (negligible_rbmo(norm, b)) {
    rep.details["vacuous"] = true;
    return rep;
  }
  const CenterSums sums(space, b.values());
  const auto dil = fam.dilated_measures(rho);
  nlohmann::json per_p = nlohmann::json::array();
  for (double p : p_grid) {
    require(p >= 1.0 && std::isfinite(p), ErrorCode::PreconditionViolation, "p must lie in [1, inf)");
    double best = 0.0;
    for (std::size_t i = 0; i < fam.size(); ++i) {
      const std::size_t c = fam.ball(i).center;
      const double m = sums.sum(c, fam.tilde_count(i)) / fam.tilde_measure(i);
      const auto ord = space.order(c);
      double s = 0.0;
      for (std::size_t t = 0; t < fam.count(i); ++t) s += std::pow(std::abs(b[ord[t]] - m), p) * space.weight(ord[t]);
      best = std::max(best, std::pow(s / dil[i], 1.0 / p));
    }
    rep.ratios.push_back(best / norm);
    per_p.push_back({{"p", p}, {"constant", best / norm}});
  }
  rep.fitted_constant = rep.ratios.empty() ? 0.0 : *std::max_element(rep.ratios.begin(), rep.ratios.end());
  rep.pass = std::isfinite(rep.fitted_constant);
  rep.details["vacuous"] = false;
  rep.details["per_p"] = per_p;
  rep.details["rbmo_norm"] = norm;
  return rep;
}

}  // namespace nhfrac

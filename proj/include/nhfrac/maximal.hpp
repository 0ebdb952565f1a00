#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "nhfrac/errors.hpp"
#include "nhfrac/family.hpp"
#include "nhfrac/field.hpp"
#include "nhfrac/report.hpp"
#include "nhfrac/space.hpp"

namespace nhfrac {

/// (sum |f|^p mu)^(1/p); p = infinity gives max |f|.
inline double lp_norm(const Space& space, const FieldFunction& f, double p) {
  require(f.size() == space.size(), ErrorCode::InvalidInput, "function length differs from the point count");
  require(p >= 1.0, ErrorCode::PreconditionViolation, "p must be at least 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i]));
    return m;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += std::pow(std::abs(f[i]), p) * space.weight(i);
  return std::pow(s, 1.0 / p);
}

namespace detail {

inline std::vector<double> ball_means(const BallFamily& fam, const CenterSums& sums) {
  std::vector<double> m(fam.size());
  for (std::size_t i = 0; i < fam.size(); ++i) m[i] = sums.sum(fam.ball(i).center, fam.count(i)) / fam.ball(i).measure;
  return m;
}

inline std::vector<double> tilde_means(const BallFamily& fam, const CenterSums& sums) {
  std::vector<double> m(fam.size());
  for (std::size_t i = 0; i < fam.size(); ++i)
    m[i] = sums.sum(fam.ball(i).center, fam.tilde_count(i)) / fam.tilde_measure(i);
  return m;
}

/// out(x) = max of value[i] over balls i containing x (doubling balls only
/// when asked); points with no such ball get 0.
inline FieldFunction spread_max(const BallFamily& fam, const std::vector<double>& value, bool doubling_only) {
  const std::size_t n = fam.space().size();
  std::vector<double> out(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    double m = 0.0;
    for (auto i : fam.containing(x))
      if (!doubling_only || fam.doubling(i)) m = std::max(m, value[i]);
    out[x] = m;
  }
  return FieldFunction(std::move(out));
}

inline std::vector<double> abs_values(const FieldFunction& f, double power = 1.0) {
  std::vector<double> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = power == 1.0 ? std::abs(f[i]) : std::pow(std::abs(f[i]), power);
  return v;
}

}  // namespace detail

/// Non-centered doubling maximal function: max over (6, beta0)-doubling
/// family balls B containing x of the mean of |f| on B.
inline FieldFunction doubling_maximal(const BallFamily& fam, const FieldFunction& f) {
  const CenterSums sums(fam.space(), detail::abs_values(f));
  return detail::spread_max(fam, detail::ball_means(fam, sums), true);
}

/// The two suprema of the sharp maximal function, per point.
struct SharpParts {
  FieldFunction oscillation;  // sup_{B ∋ x} mu(6B)^-1 sum_B |f - m_{B~} f| mu
  FieldFunction pair;         // sup over doubling B ∋ x, B ⊆ Q doubling of |m_B f - m_Q f| / K_{B,Q}
  FieldFunction total;
};

/// Sharp maximal parts for a batch of functions sharing one family and one
/// K table. The superset rows are computed once for the whole batch.
inline std::vector<SharpParts> sharp_maximal_parts(const BallFamily& fam, const KTable& kt,
                                                   std::span<const FieldFunction> fs) {
  const Space& space = fam.space();
  const std::size_t nf = fs.size(), nb = fam.size();
  std::vector<std::vector<double>> mean(nf), osc(nf), pair(nf, std::vector<double>(nb, 0.0));
  for (std::size_t j = 0; j < nf; ++j) {
    require(fs[j].size() == space.size(), ErrorCode::InvalidInput, "function length differs from the point count");
    const CenterSums sums(space, fs[j].values());
    mean[j] = detail::ball_means(fam, sums);
    const auto tilde = detail::tilde_means(fam, sums);
    osc[j].resize(nb);
    for (std::size_t i = 0; i < nb; ++i) {
      const auto ord = space.order(fam.ball(i).center);
      double s = 0.0;
      for (std::size_t m = 0; m < fam.count(i); ++m) s += std::abs(fs[j][ord[m]] - tilde[i]) * space.weight(ord[m]);
      osc[j][i] = s / fam.six_measure(i);
    }
  }
  std::vector<double> kinv;
  fam.for_each_superset_row(true, [&](std::size_t b, std::span<const std::uint32_t> sup) {
    kinv.resize(sup.size());
    for (std::size_t t = 0; t < sup.size(); ++t) kinv[t] = 1.0 / kt(b, fam.ball(sup[t]).radius);
    for (std::size_t j = 0; j < nf; ++j) {
      const double mb = mean[j][b];
      const double* mq = mean[j].data();
      double best = 0.0;
      for (std::size_t t = 0; t < sup.size(); ++t) best = std::max(best, std::abs(mb - mq[sup[t]]) * kinv[t]);
      pair[j][b] = best;
    }
  });
  std::vector<SharpParts> out;
  out.reserve(nf);
  for (std::size_t j = 0; j < nf; ++j) {
    SharpParts p{detail::spread_max(fam, osc[j], false), detail::spread_max(fam, pair[j], true), {}};
    p.total = p.oscillation + p.pair;
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<FieldFunction> sharp_maximal_batch(const BallFamily& fam, const KTable& kt,
                                                      std::span<const FieldFunction> fs) {
  std::vector<FieldFunction> out;
  for (auto& p : sharp_maximal_parts(fam, kt, fs)) out.push_back(std::move(p.total));
  return out;
}

/// Sharp maximal function M^{#,(beta)} f: the oscillation supremum plus the
/// doubling-pair supremum.
inline FieldFunction sharp_maximal(const BallFamily& fam, const FieldFunction& f, double beta) {
  const KTable kt(fam, beta);
  return sharp_maximal_batch(fam, kt, std::span<const FieldFunction>(&f, 1)).front();
}

struct MaximalConfig {
  double r = 1.0;
  double eta = 5.0;
  double beta = 0.0;

  void validate(const Space& space) const {
    require(r >= 1.0 && std::isfinite(r), ErrorCode::PreconditionViolation, "r must be at least 1");
    require(eta >= 5.0 && std::isfinite(eta), ErrorCode::PreconditionViolation, "eta must be at least 5");
    require(beta >= 0.0 && beta < space.dim_n(), ErrorCode::PreconditionViolation, "beta must lie in [0, dim_n)");
    require(beta * r < space.dim_n(), ErrorCode::PreconditionViolation, "r must be below dim_n / beta");
  }
  /// Weak-type exponent n r / (n - beta r).
  double weak_exponent(const Space& space) const { return space.dim_n() * r / (space.dim_n() - beta * r); }
};

/// M^{(beta)}_{r,(eta)} f(x) = sup_{B ∋ x} { mu(eta B)^{-(1 - beta r / n)} sum_B |f|^r mu }^{1/r}.
inline FieldFunction fractional_maximal(const BallFamily& fam, const FieldFunction& f, const MaximalConfig& cfg) {
  const Space& space = fam.space();
  cfg.validate(space);
  require(f.size() == space.size(), ErrorCode::InvalidInput, "function length differs from the point count");
  const CenterSums sums(space, detail::abs_values(f, cfg.r));
  const auto dil = fam.dilated_measures(cfg.eta);
  const double e = 1.0 - cfg.beta * cfg.r / space.dim_n();
  std::vector<double> v(fam.size());
  for (std::size_t i = 0; i < fam.size(); ++i) {
    const double s = sums.sum(fam.ball(i).center, fam.count(i));
    v[i] = std::pow(s / std::pow(dil[i], e), 1.0 / cfg.r);
  }
  return detail::spread_max(fam, v, false);
}

/// Level-set check mu({M f > t}) <= (C ||f||_r / t)^q, q = n r / (n - beta r).
/// Each level contributes the smallest admissible C, t mu(E_t)^{1/q} / ||f||_r.
inline VerificationReport weak_type_check(const BallFamily& fam, const FieldFunction& f, const MaximalConfig& cfg,
                                          std::span<const double> levels) {
  const Space& space = fam.space();
  VerificationReport rep;
  rep.id = "weak_type";
  const auto mf = fractional_maximal(fam, f, cfg);
  const double q = cfg.weak_exponent(space);
  const double norm = lp_norm(space, f, cfg.r);
  double worst = 0.0;
  for (double t : levels) {
    require(t > 0.0 && std::isfinite(t), ErrorCode::PreconditionViolation, "levels must be positive");
    double mu = 0.0;
    for (std::size_t x = 0; x < space.size(); ++x)
      if (mf[x] > t) mu += space.weight(x);
    const double c = mu > 0.0 ? t * std::pow(mu, 1.0 / q) / norm : 0.0;
    rep.ratios.push_back(c);
    worst = std::max(worst, c);
  }
  rep.fitted_constant = worst;
  rep.pass = std::isfinite(worst);
  rep.details["q"] = q;
  rep.details["norm_r"] = norm;
  return rep;
}

}  // namespace nhfrac

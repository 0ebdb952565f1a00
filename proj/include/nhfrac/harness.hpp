#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nhfrac/errors.hpp"
#include "nhfrac/family.hpp"
#include "nhfrac/field.hpp"
#include "nhfrac/generators.hpp"
#include "nhfrac/geometry.hpp"
#include "nhfrac/maximal.hpp"
#include "nhfrac/operators.hpp"
#include "nhfrac/random.hpp"
#include "nhfrac/rbmo.hpp"
#include "nhfrac/reference.hpp"
#include "nhfrac/report.hpp"
#include "nhfrac/space.hpp"

namespace nhfrac {

inline constexpr double kExactSlack = 1e-10;
inline constexpr std::size_t kHarnessMaxOrder = 4;

struct ExperimentConfig {
  SpaceFamily space_family;
  WeightScheme weights;
  double alpha = 0.4;
  double p = 2.0;
  double r = 1.5;
  double epsilon = 1.0;
  std::size_t k = 1;
  std::size_t trials = 50;
  std::uint64_t seed = 1;
};

/// Checks the boundedness hypotheses 0 < alpha < n, 1 < p < n / alpha and
/// 1 < r < p, and returns q with 1/q = 1/p - alpha/n.
inline double derived_q(const ExperimentConfig& cfg, double dim_n) {
  auto infeasible = [](const std::string& m) { throw Error(ErrorCode::ConfigInfeasible, m); };
  if (!(cfg.alpha > 0.0 && cfg.alpha < dim_n)) infeasible("alpha must lie in (0, n)");
  if (!(cfg.p > 1.0)) infeasible("p must exceed 1");
  if (!(cfg.p < dim_n / cfg.alpha)) infeasible("p must be below n / alpha");
  if (!(cfg.r > 1.0 && cfg.r < cfg.p)) infeasible("r must lie in (1, p)");
  if (!(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0)) infeasible("epsilon must lie in (0, 1]");
  if (cfg.trials < 1) infeasible("trials must be at least 1");
  return 1.0 / (1.0 / cfg.p - cfg.alpha / dim_n);
}

inline Space experiment_space(const ExperimentConfig& cfg) {
  return generate_space(cfg.space_family, cfg.weights, cfg.seed);
}

/// Largest over smallest value. All-zero input gives 1; a mix of zero and
/// nonzero values gives infinity.
inline double spread_ratio(std::span<const double> v) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double x : v) lo = std::min(lo, x), hi = std::max(hi, x);
  if (v.empty() || hi == 0.0) return 1.0;
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

namespace detail {

inline bool is_zero(const FieldFunction& f) {
  return std::all_of(f.values().begin(), f.values().end(), [](double v) { return v == 0.0; });
}

inline std::size_t argmax_abs(const FieldFunction& f) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < f.size(); ++i)
    if (std::abs(f[i]) > std::abs(f[best])) best = i;
  return best;
}

/// Shared trial loop: ratio_t = ||op(f_t)||_q / (scale ||f_t||_p), f_t = 0 skipped.
inline VerificationReport ratio_experiment(const std::string& id, const Space& space, const ExperimentConfig& cfg,
                                           double q, double scale,
                                           const std::function<FieldFunction(const FieldFunction&)>& op) {
  VerificationReport rep;
  rep.id = id;
  rep.seed = cfg.seed;
  const auto fs = generate_test_functions(space, FunctionScheme::Mixed, cfg.trials, cfg.seed);
  double worst = -1.0;
  std::size_t skipped = 0;
  for (std::size_t t = 0; t < fs.size(); ++t) {
    if (is_zero(fs[t])) {
      ++skipped;
      continue;
    }
    const auto out = op(fs[t]);
    const double ratio = lp_norm(space, out, q) / (scale * lp_norm(space, fs[t], cfg.p));
    rep.ratios.push_back(ratio);
    if (ratio > worst) {
      worst = ratio;
      rep.witness_function = t;
      rep.witness_point = argmax_abs(out);
    }
  }
  rep.fitted_constant = std::max(worst, 0.0);
  rep.pass = std::isfinite(rep.fitted_constant);
  rep.details["q"] = q;
  rep.details["dim_n"] = space.dim_n();
  rep.details["points"] = space.size();
  rep.details["skipped_zero_functions"] = skipped;
  return rep;
}

inline double rbmo_or_throw(const BallFamily& fam, const FieldFunction& b, std::size_t index) {
  const double v = rbmo_norm(fam, b).norm_value;
  if (negligible_rbmo(v, b)) throw Error(ErrorCode::ZeroRbmo, "b_" + std::to_string(index + 1) + " has zero RBMO norm");
  return v;
}

}  // namespace detail

/// ||I_alpha f||_q / ||f||_p over the trial functions.
inline VerificationReport bound_experiment_I(const ExperimentConfig& cfg) {
  const Space space = experiment_space(cfg);
  const double q = derived_q(cfg, space.dim_n());
  const auto kernel = standard_kernel(space, cfg.alpha, cfg.epsilon);
  return detail::ratio_experiment("bound_fractional_integral", space, cfg, q, 1.0,
                                  [&](const FieldFunction& f) { return apply_fractional_integral(space, kernel, f); });
}

/// ||I_{alpha, b}f||_q / (prod ||b_i||_* ||f||_p) over the trial functions.
/// Order 1 is the commutator experiment.
inline VerificationReport bound_experiment_multilinear(const ExperimentConfig& cfg,
                                                       std::span<const FieldFunction> b_vec) {
  const Space space = experiment_space(cfg);
  const double q = derived_q(cfg, space.dim_n());
  require(!b_vec.empty() && b_vec.size() <= kHarnessMaxOrder, ErrorCode::PreconditionViolation,
          "the harness supports 1 <= k <= 4");
  for (const auto& b : b_vec) require(b.size() == space.size(), ErrorCode::InvalidInput, "b length differs from the space");
  const BallFamily fam(space);
  double product = 1.0;
  std::vector<double> norms;
  for (std::size_t i = 0; i < b_vec.size(); ++i) {
    norms.push_back(detail::rbmo_or_throw(fam, b_vec[i], i));
    product *= norms.back();
  }
  const auto kernel = standard_kernel(space, cfg.alpha, cfg.epsilon);
  auto rep = detail::ratio_experiment(b_vec.size() == 1 ? "bound_commutator" : "bound_multilinear", space, cfg, q,
                                      product, [&](const FieldFunction& f) {
                                        return multilinear_commutator(space, kernel, b_vec, f);
                                      });
  rep.details["rbmo_norms"] = norms;
  rep.details["k"] = b_vec.size();
  return rep;
}

/// ||[b, I_alpha] f||_q / (||b||_* ||f||_p) over the trial functions.
inline VerificationReport bound_experiment_commutator(const ExperimentConfig& cfg, const FieldFunction& b) {
  return bound_experiment_multilinear(cfg, std::span<const FieldFunction>(&b, 1));
}

enum class DominationVariant { FractionalIntegral, Commutator, Multilinear };

/// Number of right-hand-side terms of the multilinear sharp estimate:
/// two leading terms plus one per sigma in C_i^k, 1 <= i <= k - 1.
inline std::size_t domination_term_count(std::size_t k) {
  std::size_t count = 2;
  for (std::size_t i = 1; i + 1 <= k; ++i) count += sigma_subsets(k, i).size();
  return count;
}

/// Pointwise sharp-maximal dominations, LHS = M^{#,(alpha)}(T f):
///   FractionalIntegral: T = I_alpha,  RHS = M^{(alpha)}_{r,(5)} f
///   Commutator: T = [b, I_alpha],  RHS = ||b||_* [M^{(alpha)}_{r,(5)} f + M_{r,(6)}(I_alpha f) + I_alpha |f|]
///   Multilinear: T = I_{alpha,b},   RHS = ||b||_* {M_{r,(6)}(I_alpha f) + M^{(alpha)}_{r,(5)} f}
///                                    + sum_{i=1}^{k-1} sum_sigma ||b_sigma||_* M_{r,(6)}(I_{alpha,b_sigma'} f)
/// The fitted constant is the largest LHS / RHS over points and trials.
inline VerificationReport pointwise_domination_check(const ExperimentConfig& cfg, DominationVariant variant,
                                                     std::span<const FieldFunction> b_vec = {}) {
  const Space space = experiment_space(cfg);
  derived_q(cfg, space.dim_n());
  const std::size_t k = b_vec.size();
  if (variant == DominationVariant::FractionalIntegral)
    require(k == 0, ErrorCode::PreconditionViolation, "the fractional-integral variant takes no b");
  else if (variant == DominationVariant::Commutator)
    require(k == 1, ErrorCode::PreconditionViolation, "the commutator variant takes exactly one b");
  else
    require(k >= 1 && k <= kHarnessMaxOrder, ErrorCode::PreconditionViolation, "the multilinear variant takes 1 <= k <= 4 functions");
  for (const auto& b : b_vec) require(b.size() == space.size(), ErrorCode::InvalidInput, "b length differs from the space");

  const BallFamily fam(space);
  const auto kernel = standard_kernel(space, cfg.alpha, cfg.epsilon);
  const KTable kt(fam, cfg.alpha);
  std::vector<double> norms;
  for (std::size_t i = 0; i < k; ++i) norms.push_back(detail::rbmo_or_throw(fam, b_vec[i], i));
  auto norm_of = [&](std::span<const std::size_t> idx) {
    double v = 1.0;
    for (auto i : idx) v *= norms[i - 1];
    return v;
  };
  std::vector<std::size_t> all(k);
  for (std::size_t i = 0; i < k; ++i) all[i] = i + 1;

  const MaximalConfig frac{cfg.r, 5.0, cfg.alpha};
  const MaximalConfig plain{cfg.r, 6.0, 0.0};
  const auto fs = generate_test_functions(space, FunctionScheme::Mixed, cfg.trials, cfg.seed);

  std::vector<FieldFunction> inner;
  std::vector<FieldFunction> rhs;
  for (const auto& f : fs) {
    FieldFunction r = fractional_maximal(fam, f, frac);
    switch (variant) {
      case DominationVariant::FractionalIntegral:
        inner.push_back(apply_fractional_integral(space, kernel, f));
        break;
      case DominationVariant::Commutator: {
        inner.push_back(commutator(space, kernel, b_vec[0], f));
        const auto If = apply_fractional_integral(space, kernel, f);
        r = norms[0] * (r + fractional_maximal(fam, If, plain) + apply_fractional_integral(space, kernel, abs(f)));
        break;
      }
      case DominationVariant::Multilinear: {
        inner.push_back(multilinear_commutator(space, kernel, b_vec, f));
        const auto If = apply_fractional_integral(space, kernel, f);
        r = norm_of(all) * (fractional_maximal(fam, If, plain) + r);
        for (std::size_t i = 1; i < k; ++i)
          for (const auto& sub : sigma_subsets(k, i)) {
            const auto bs = select_functions(b_vec, sub.sigma_prime);
            r = r + norm_of(sub.sigma) * fractional_maximal(fam, multilinear_commutator(space, kernel, bs, f), plain);
          }
        break;
      }
    }
    rhs.push_back(std::move(r));
  }
  const auto lhs = sharp_maximal_batch(fam, kt, inner);

  VerificationReport rep;
  rep.id = variant == DominationVariant::FractionalIntegral ? "domination_fractional_integral"
           : variant == DominationVariant::Commutator ? "domination_commutator"
                                                 : "domination_multilinear";
  rep.seed = cfg.seed;
  double worst = 0.0;
  std::size_t zero_rhs_points = 0;
  for (std::size_t t = 0; t < fs.size(); ++t) {
    double trial_max = 0.0;
    for (std::size_t x = 0; x < space.size(); ++x) {
      if (rhs[t][x] == 0.0) {
        ++zero_rhs_points;
        if (lhs[t][x] != 0.0)
          throw Error(ErrorCode::DominationDegenerate,
                      "right side vanishes where the sharp maximal function is " + std::to_string(lhs[t][x]),
                      {t, x});
        continue;
      }
      const double ratio = lhs[t][x] / rhs[t][x];
      trial_max = std::max(trial_max, ratio);
      if (ratio > worst) {
        worst = ratio;
        rep.witness_function = t;
        rep.witness_point = x;
      }
    }
    rep.ratios.push_back(trial_max);
  }
  rep.fitted_constant = worst;
  rep.pass = std::isfinite(worst);
  rep.details["zero_rhs_points"] = zero_rhs_points;
  rep.details["term_count"] = variant == DominationVariant::Multilinear ? domination_term_count(k) : 0;
  rep.details["rbmo_norms"] = norms;
  rep.details["family_size"] = fam.size();
  return rep;
}

/// Properties of the K-coefficients along concentric chains:
///   K_{B,Q} <= K_{B,R} for concentric B ⊆ Q ⊆ R (distance radii), exact;
///   K_{Q,R} <= K_{B,R} and K_{B,R} <= C (K_{B,Q} + K_{Q,R}) on 6-adic chains, C fitted;
///   K_{B,Q} <= 1 + N_{B,Q} and every layer term in [0, 1], exact;
///   sup K_{B,Q} over r_Q <= 36 r_B, fitted;
///   sup K_{B,6^N B} over non-doubling 6B, ..., 6^N B, fitted;
///   B~ = 6^k B with 6^j B not doubling for j < k, exact.
inline VerificationReport k_properties_suite(const BallFamily& fam, std::span<const double> betas) {
  const Space& space = fam.space();
  VerificationReport rep;
  rep.id = "k_properties";
  std::size_t monotone_violations = 0, bound_violations = 0, summand_violations = 0, tilde_violations = 0;
  std::size_t chains = 0;
  double quasi_c = 0.0, comparable_k = 0.0, nondoubling_k = 0.0;
  const double slack = kExactSlack;
  if (space.size() < 2) {
    rep.details["vacuous"] = true;
    return rep;
  }
  const double diam = space.diameter();
  for (double beta : betas) {
    const double e = 1.0 - beta / space.dim_n();
    // Concentric chains through the distance radii of each center.
    for (std::size_t x = 0; x < space.size(); ++x) {
      const auto radii = upper_doubling_radii(space, x);
      for (std::size_t i = 0; i < radii.size(); ++i) {
        double prev = 0.0;
        for (std::size_t j = i; j < radii.size(); ++j) {
          const double kv = k_coefficient(space, x, radii[i], radii[j], beta);
          const auto n_bq = shell_count(radii[i], radii[j]);
          if (kv + slack * kv < prev) ++monotone_violations;
          if (kv > (1.0 + static_cast<double>(n_bq)) * (1.0 + slack)) ++bound_violations;
          if (radii[j] <= 36.0 * radii[i] * (1.0 + 1e-12)) comparable_k = std::max(comparable_k, kv);
          prev = kv;
        }
      }
    }
    // 6-adic chains B, 6^i B, 6^j B from every family ball.
    for (std::size_t b = 0; b < fam.size(); ++b) {
      const std::size_t c = fam.ball(b).center;
      std::vector<double> radius{fam.effective_radius(b)};
      std::vector<double> term{0.0};
      while (radius.back() < diam) {
        const double r = radius.back() * 6.0;
        const double t = std::pow(space.ball_measure(c, r) / lambda_eval(space, c, r), e);
        if (t < 0.0 || t > 1.0 + slack) ++summand_violations;
        radius.push_back(r);
        term.push_back(t);
      }
      const std::size_t levels = radius.size();
      std::vector<double> cum(levels, 1.0);
      for (std::size_t s = 1; s < levels; ++s) cum[s] = cum[s - 1] + term[s];
      for (std::size_t i = 0; i < levels; ++i)
        for (std::size_t j = i; j < levels; ++j) {
          const double k_qr = k_coefficient(space, c, radius[i], radius[j], beta);
          const double k_bq = cum[i], k_br = cum[j];
          if (k_bq > k_br * (1.0 + slack) || k_qr > k_br * (1.0 + slack)) ++monotone_violations;
          quasi_c = std::max(quasi_c, k_br / (k_bq + k_qr));
          ++chains;
        }
      std::size_t n_nd = 0;
      while (n_nd + 1 < levels) {
        const double r = radius[n_nd + 1];
        const double mu = space.ball_measure(c, r);
        if (space.ball_measure(c, 6.0 * r) <= space.beta0() * mu) break;
        ++n_nd;
        nondoubling_k = std::max(nondoubling_k, cum[n_nd]);
      }
    }
  }
  for (std::size_t b = 0; b < fam.size(); ++b) {
    const Ball& ball = fam.ball(b);
    const std::size_t k = doubling_exponent(space, ball);
    double r = ball.radius;
    for (std::size_t j = 0; j < k; ++j, r *= kDoublingFactor)
      if (is_doubling(space, make_ball(space, ball.center, r))) ++tilde_violations;
    if (!is_doubling(space, make_ball(space, ball.center, r))) ++tilde_violations;
    if (std::abs(r - fam.tilde_radius(b)) > 1e-12 * std::max(1.0, r)) ++tilde_violations;
  }
  rep.fitted_constant = quasi_c;
  rep.ratios = {quasi_c, comparable_k, nondoubling_k};
  rep.pass = monotone_violations == 0 && bound_violations == 0 && summand_violations == 0 && tilde_violations == 0;
  rep.details["monotonicity_violations"] = monotone_violations;
  rep.details["bound_violations"] = bound_violations;
  rep.details["summand_violations"] = summand_violations;
  rep.details["tilde_violations"] = tilde_violations;
  rep.details["chains"] = chains;
  rep.details["quasi_triangle_constant"] = quasi_c;
  rep.details["comparable_size_constant"] = comparable_k;
  rep.details["nondoubling_chain_constant"] = nondoubling_k;
  return rep;
}

/// Greedy cover on `count` random sets of family balls: the kept balls are
/// pairwise disjoint and their 5-dilates cover the input union.
inline VerificationReport cover_check(const BallFamily& fam, std::size_t rounds, std::size_t balls_per_round,
                                      std::uint64_t seed) {
  const Space& space = fam.space();
  VerificationReport rep;
  rep.id = "cover";
  rep.seed = seed;
  std::size_t violations = 0;
  for (std::size_t t = 0; t < rounds; ++t) {
    Rng rng = make_rng(seed, 0xc0 + t);
    std::vector<Ball> input;
    for (std::size_t i = 0; i < balls_per_round; ++i) input.push_back(fam.ball(uniform_index(rng, fam.size())));
    const auto kept = greedy_disjoint_cover(space, input);
    for (std::size_t a = 0; a < kept.size(); ++a)
      for (std::size_t b = a + 1; b < kept.size(); ++b)
        if (kept[a].members.intersects(kept[b].members)) ++violations;
    MemberSet covered(space.size());
    for (const auto& b : kept) covered |= dilate(space, b, 5.0).members;
    for (const auto& b : input)
      if (!b.members.is_subset_of(covered)) ++violations;
    rep.ratios.push_back(static_cast<double>(kept.size()));
  }
  rep.pass = violations == 0;
  rep.details["violations"] = violations;
  return rep;
}

namespace detail {

inline double max_abs_diff(const FieldFunction& a, const FieldFunction& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(const FieldFunction& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

inline bool close(double a, double b, double slack = kExactSlack) {
  return std::abs(a - b) <= slack * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace detail

/// Every exact property on one generated space. Each named check lands in
/// details.checks; the report passes iff all of them pass.
inline VerificationReport run_exact_suite(const SpaceFamily& family, std::uint64_t seed,
                                          const WeightScheme& weights = {}) {
  VerificationReport rep;
  rep.id = "exact_suite";
  rep.seed = seed;
  nlohmann::json checks = nlohmann::json::object();
  bool all = true;
  auto record = [&](const std::string& name, bool ok, nlohmann::json info = nlohmann::json::object()) {
    info["pass"] = ok;
    checks[name] = std::move(info);
    all = all && ok;
  };

  const Space space = generate_space(family, weights, seed);
  const std::size_t n = space.size();

  // Metric axioms, re-verified exhaustively.
  {
    std::size_t bad = 0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        if (space.distance(a, b) != space.distance(b, a) || (a == b) != (space.distance(a, b) == 0.0)) ++bad;
        for (std::size_t c = 0; c < n; ++c)
          if (space.distance(a, c) > space.distance(a, b) + space.distance(b, c) + kMetricTolerance) ++bad;
      }
    record("metric_axioms", bad == 0, {{"violations", bad}});
  }

  // mu(B) <= lambda(x, r) <= C_lambda lambda(x, r/2), and lambda(x, r) <= C~ lambda(y, r).
  {
    const auto ud = check_upper_doubling(space);
    std::size_t bad = 0;
    for (std::size_t x = 0; x < n; ++x)
      for (double r : space.radius_grid()) {
        if (r <= 0.0) continue;
        if (space.lambda(x, r) > space.c_lambda() * space.lambda(x, 0.5 * r) * (1.0 + kExactSlack)) ++bad;
        for (std::size_t y = 0; y < n; ++y)
          if (space.distance(x, y) <= r && space.lambda(x, r) > space.c_tilde() * space.lambda(y, r) * (1.0 + kExactSlack))
            ++bad;
      }
    record("upper_doubling_chain", ud.pass && bad == 0, {{"max_ratio", ud.fitted_constant}, {"violations", bad}});
    const double beta0_floor = std::max(std::pow(space.c_lambda(), 3.0 * std::log2(6.0)), std::pow(6.0, space.dim_n()));
    record("beta0_threshold", space.beta0() > beta0_floor, {{"beta0", space.beta0()}});
  }

  const BallFamily fam(space);
  const auto fs = generate_test_functions(space, FunctionScheme::Mixed, 10, seed);

  // |f| <= N f.
  {
    double worst = 0.0;
    for (const auto& f : fs) {
      const auto nf = doubling_maximal(fam, f);
      for (std::size_t x = 0; x < n; ++x)
        worst = std::max(worst, (std::abs(f[x]) - nf[x]) / std::max(1.0, std::abs(f[x])));
    }
    record("doubling_maximal_dominates", worst <= kExactSlack, {{"max_excess", worst}});
  }

  // r-monotonicity of M^{(beta)}_{r,(eta)}.
  {
    const double beta = 0.25 * space.dim_n();
    const double rs[] = {1.0, 1.5, 2.0, 3.0};
    double worst = 0.0;
    for (const auto& f : fs)
      for (std::size_t a = 0; a + 1 < std::size(rs); ++a) {
        const auto lo = fractional_maximal(fam, f, {rs[a], 5.0, beta});
        const auto hi = fractional_maximal(fam, f, {rs[a + 1], 5.0, beta});
        for (std::size_t x = 0; x < n; ++x) worst = std::max(worst, (lo[x] - hi[x]) / std::max(1.0, hi[x]));
      }
    record("fractional_maximal_r_monotone", worst <= kExactSlack, {{"max_excess", worst}});
  }

  {
    const double betas[] = {0.0, 0.5 * space.dim_n()};
    const auto kp = k_properties_suite(fam, betas);
    record("k_coefficients", kp.pass, kp.details);
  }

  {
    const auto cv = cover_check(fam, 8, std::min<std::size_t>(200, 3 * n), seed);
    record("cover", cv.pass, cv.details);
  }

  const double alpha = 0.4 * space.dim_n();
  const auto kernel = standard_kernel(space, alpha);
  {
    const auto sz = check_kernel_size(space, kernel);
    record("kernel_size", sz.pass && sz.fitted_constant <= 1.0 + 1e-12, {{"constant", sz.fitted_constant}});
  }

  // Constant b kills the commutator; b -> -b flips its sign.
  {
    const auto cb = FieldFunction::constant(n, 3.25);
    double worst = 0.0;
    bool antisymmetric = true;
    for (const auto& f : fs) {
      worst = std::max(worst, detail::max_abs(commutator(space, kernel, cb, f)));
      const auto b = log_distance_field(space, 0);
      const auto plus = commutator(space, kernel, b, f);
      const auto minus = commutator(space, kernel, -1.0 * b, f);
      for (std::size_t x = 0; x < n; ++x) antisymmetric = antisymmetric && minus[x] == -plus[x];
    }
    record("commutator_constant_b", worst <= kExactSlack, {{"max_abs", worst}});
    record("commutator_antisymmetric", antisymmetric);
  }

  // Closed form against the nested recursion, k <= 4.
  std::vector<FieldFunction> bs;
  {
    Rng rng = make_rng(seed, 0xb0);
    for (std::size_t i = 0; i < kHarnessMaxOrder; ++i) {
      std::vector<double> v(n);
      for (auto& x : v) x = standard_normal(rng);
      bs.emplace_back(std::move(v));
    }
    double worst = 0.0;
    for (std::size_t k = 1; k <= kHarnessMaxOrder; ++k) {
      const std::span<const FieldFunction> sub(bs.data(), k);
      for (std::size_t t = 0; t < 3; ++t) {
        const auto fast = multilinear_commutator(space, kernel, sub, fs[t]);
        const auto slow = reference::nested_commutator(space, kernel, sub, fs[t]);
        worst = std::max(worst, detail::max_abs_diff(fast, slow) / std::max(1.0, detail::max_abs(slow)));
      }
    }
    record("multilinear_closed_form", worst <= kExactSlack, {{"max_rel_diff", worst}});
  }

  {
    Rng rng = make_rng(seed, 0xe0);
    std::vector<ExpansionSample> samples;
    for (std::size_t s = 0; s < 64; ++s) {
      const Ball& b = fam.ball(uniform_index(rng, fam.size()));
      samples.push_back({uniform_index(rng, n), uniform_index(rng, n), smallest_doubling_dilate(space, b)});
    }
    bool ok = true;
    double worst = 0.0;
    for (std::size_t k = 1; k <= kHarnessMaxOrder; ++k) {
      const auto pe = verify_product_expansion(space, std::span<const FieldFunction>(bs.data(), k), samples);
      ok = ok && pe.pass;
      worst = std::max(worst, pe.fitted_constant);
    }
    record("product_expansion", ok, {{"max_discrepancy", worst}});
  }

  // RBMO shift and scale invariance; sharp maximal shift invariance.
  {
    const auto b = log_distance_field(space, n / 2);
    const double base = rbmo_norm(fam, b).norm_value;
    const double shifted = rbmo_norm(fam, b + 7.5).norm_value;
    const double scaled = rbmo_norm(fam, -2.5 * b).norm_value;
    record("rbmo_shift_scale", base > 0.0 && detail::close(base, shifted) && detail::close(2.5 * base, scaled),
           {{"norm", base}, {"shifted", shifted}, {"scaled", scaled}});
    const double constant = rbmo_norm(fam, FieldFunction::constant(n, -1.5)).norm_value;
    record("rbmo_constant_zero", constant <= kExactSlack * 1.5, {{"norm", constant}});

    const KTable kt(fam, 0.0);
    std::vector<FieldFunction> plain(fs.begin(), fs.begin() + 4), moved;
    for (const auto& f : plain) moved.push_back(f + 11.0);
    const auto a = sharp_maximal_batch(fam, kt, plain);
    const auto c = sharp_maximal_batch(fam, kt, moved);
    double worst = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t)
      worst = std::max(worst, detail::max_abs_diff(a[t], c[t]) / std::max(1.0, detail::max_abs(a[t])));
    record("sharp_maximal_shift", worst <= kExactSlack, {{"max_rel_diff", worst}});
  }

  rep.pass = all;
  rep.details["checks"] = checks;
  rep.details["points"] = n;
  rep.details["family_size"] = fam.size();
  return rep;
}

/// Strong-type ratio ||M^{(beta)}_{r,(eta)} f||_q / ||f||_p, 1/q = 1/p - beta/n.
inline VerificationReport strong_type_experiment(const BallFamily& fam, const MaximalConfig& cfg, double p,
                                                 std::span<const FieldFunction> fs) {
  const Space& space = fam.space();
  cfg.validate(space);
  require(cfg.r < p && cfg.beta * p < space.dim_n(), ErrorCode::ConfigInfeasible,
          "strong type needs r < p < n / beta");
  const double q = 1.0 / (1.0 / p - cfg.beta / space.dim_n());
  VerificationReport rep;
  rep.id = "strong_type";
  double worst = 0.0;
  for (std::size_t t = 0; t < fs.size(); ++t) {
    const double den = lp_norm(space, fs[t], p);
    if (den == 0.0) continue;
    const double ratio = lp_norm(space, fractional_maximal(fam, fs[t], cfg), q) / den;
    rep.ratios.push_back(ratio);
    if (ratio > worst) worst = ratio, rep.witness_function = t;
  }
  rep.fitted_constant = worst;
  rep.pass = std::isfinite(worst);
  rep.details["q"] = q;
  return rep;
}

/// ||M_{r,(eta)} f||_q / ||f||_q for q > r.
inline VerificationReport lq_maximal_experiment(const BallFamily& fam, double r, double eta, double q,
                                                std::span<const FieldFunction> fs) {
  const Space& space = fam.space();
  require(q > r, ErrorCode::ConfigInfeasible, "q must exceed r");
  const MaximalConfig cfg{r, eta, 0.0};
  VerificationReport rep;
  rep.id = "lq_maximal";
  double worst = 0.0;
  for (std::size_t t = 0; t < fs.size(); ++t) {
    const double den = lp_norm(space, fs[t], q);
    if (den == 0.0) continue;
    const double ratio = lp_norm(space, fractional_maximal(fam, fs[t], cfg), q) / den;
    rep.ratios.push_back(ratio);
    if (ratio > worst) worst = ratio, rep.witness_function = t;
  }
  rep.fitted_constant = worst;
  rep.pass = std::isfinite(worst);
  return rep;
}

/// ||N f||_p / ||M^{#,(beta)} f||_p over mean-zero functions.
inline VerificationReport sharp_control_experiment(const BallFamily& fam, double beta, double p,
                                                   std::span<const FieldFunction> fs) {
  const Space& space = fam.space();
  VerificationReport rep;
  rep.id = "sharp_control";
  const KTable kt(fam, beta);
  for (const auto& f : fs) {
    double mean = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) mean += f[i] * space.weight(i), scale += std::abs(f[i]) * space.weight(i);
    require(std::abs(mean) <= 1e-12 * std::max(1.0, scale), ErrorCode::PreconditionViolation,
            "the sharp control experiment takes mean-zero functions");
  }
  const auto sharp = sharp_maximal_batch(fam, kt, fs);
  double worst = 0.0;
  for (std::size_t t = 0; t < fs.size(); ++t) {
    const double num = lp_norm(space, doubling_maximal(fam, fs[t]), p);
    const double den = lp_norm(space, sharp[t], p);
    if (num == 0.0) continue;
    const double ratio = den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
    rep.ratios.push_back(ratio);
    if (ratio > worst) worst = ratio, rep.witness_function = t;
  }
  rep.fitted_constant = worst;
  rep.pass = std::isfinite(worst);
  return rep;
}

}  // namespace nhfrac

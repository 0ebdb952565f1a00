#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nhfrac/errors.hpp"
#include "nhfrac/field.hpp"
#include "nhfrac/geometry.hpp"
#include "nhfrac/random.hpp"
#include "nhfrac/report.hpp"
#include "nhfrac/space.hpp"

namespace nhfrac {

inline constexpr std::size_t kExhaustiveRegularityLimit = 48;
inline constexpr std::size_t kSampledRegularityCount = 1000000;
inline constexpr std::uint64_t kRegularitySeed = 0x72656775ULL;
inline constexpr std::size_t kMaxCommutatorOrder = 6;

/// Kernel of order alpha and regularity epsilon, stored as a dense n x n
/// table whose diagonal is never read.
struct FractionalKernel {
  double alpha = 0.0;
  double epsilon = 1.0;
  std::size_t n = 0;
  std::vector<double> values;
  double size_constant = 0.0;
  double regularity_constant = 0.0;
  double regularity_scale = 2.0;

  double operator()(std::size_t x, std::size_t y) const { return values[x * n + y]; }

  FractionalKernel scaled(double t) const {
    require(t > 0.0 && std::isfinite(t), ErrorCode::InvalidInput, "kernel scale must be positive");
    FractionalKernel k = *this;
    for (auto& v : k.values) v *= t;
    k.size_constant *= t;
    k.regularity_constant *= t;
    return k;
  }
};

namespace detail {

inline void check_kernel_parameters(const Space& space, double alpha, double epsilon) {
  require(alpha > 0.0 && alpha < space.dim_n(), ErrorCode::PreconditionViolation, "alpha must lie in (0, dim_n)");
  require(epsilon > 0.0 && epsilon <= 1.0, ErrorCode::PreconditionViolation, "epsilon must lie in (0, 1]");
}

inline double size_weight(const Space& space, double alpha, std::size_t x, std::size_t y) {
  return std::pow(lambda_eval(space, x, space.distance(x, y)), 1.0 - alpha / space.dim_n());
}

struct RegularityScan {
  double max_value = 0.0;
  std::size_t admissible = 0;
  std::size_t wx = 0, wxp = 0, wy = 0;
  bool sampled = false;
};

inline RegularityScan scan_regularity(const Space& space, const FractionalKernel& k) {
  RegularityScan out;
  const std::size_t n = space.size();
  auto visit = [&](std::size_t x, std::size_t xp, std::size_t y) {
    if (x == xp) return;
    const double dxxp = space.distance(x, xp), dxy = space.distance(x, y);
    if (k.regularity_scale * dxxp > dxy) return;
    ++out.admissible;
    const double diff = std::abs(k(x, y) - k(xp, y)) + std::abs(k(y, x) - k(y, xp));
    const double v = diff * std::pow(dxy / dxxp, k.epsilon) * size_weight(space, k.alpha, x, y);
    if (out.admissible == 1 || v > out.max_value) {
      out.max_value = v;
      out.wx = x, out.wxp = xp, out.wy = y;
    }
  };
  if (n <= kExhaustiveRegularityLimit) {
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t xp = 0; xp < n; ++xp)
        for (std::size_t y = 0; y < n; ++y) visit(x, xp, y);
  } else {
    out.sampled = true;
    Rng rng = make_rng(kRegularitySeed);
    for (std::size_t s = 0; s < kSampledRegularityCount; ++s) {
      const std::size_t x = uniform_index(rng, n), xp = uniform_index(rng, n), y = uniform_index(rng, n);
      visit(x, xp, y);
    }
  }
  return out;
}

}  // namespace detail

/// Kernel from an explicit n x n table (diagonal ignored). The size and
/// regularity constants are the tightest values over the space.
inline FractionalKernel make_kernel(const Space& space, double alpha, double epsilon, std::vector<double> values,
                                    double regularity_scale = 2.0) {
  detail::check_kernel_parameters(space, alpha, epsilon);
  const std::size_t n = space.size();
  require(values.size() == n * n, ErrorCode::InvalidInput, "kernel table must have n * n entries");
  require(regularity_scale >= 1.0, ErrorCode::PreconditionViolation, "regularity scale must be at least 1");
  FractionalKernel k;
  k.alpha = alpha;
  k.epsilon = epsilon;
  k.n = n;
  k.values = std::move(values);
  k.regularity_scale = regularity_scale;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      if (x == y) continue;
      require(std::isfinite(k(x, y)), ErrorCode::InvalidInput, "kernel values must be finite");
      k.size_constant = std::max(k.size_constant, std::abs(k(x, y)) * detail::size_weight(space, alpha, x, y));
    }
  k.regularity_constant = detail::scan_regularity(space, k).max_value;
  return k;
}

/// K(x, y) = lambda(x, d(x, y))^(alpha/n - 1), which meets the size bound
/// with constant 1.
inline FractionalKernel standard_kernel(const Space& space, double alpha, double epsilon = 1.0,
                                        double regularity_scale = 2.0) {
  detail::check_kernel_parameters(space, alpha, epsilon);
  const std::size_t n = space.size();
  std::vector<double> values(n * n, 0.0);
  const double e = alpha / space.dim_n() - 1.0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      if (x != y) values[x * n + y] = std::pow(lambda_eval(space, x, space.distance(x, y)), e);
  return make_kernel(space, alpha, epsilon, std::move(values), regularity_scale);
}

inline VerificationReport check_kernel_size(const Space& space, const FractionalKernel& k) {
  VerificationReport rep;
  rep.id = "kernel_size";
  std::size_t wx = 0, wy = 0;
  double worst = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x)
    for (std::size_t y = 0; y < space.size(); ++y) {
      if (x == y) continue;
      const double v = std::abs(k(x, y)) * detail::size_weight(space, k.alpha, x, y);
      if (v > worst) worst = v, wx = x, wy = y;
    }
  rep.fitted_constant = worst;
  rep.pass = worst <= k.size_constant * (1.0 + 1e-12);
  rep.witness_point = wx;
  rep.details["declared"] = k.size_constant;
  rep.details["witness_pair"] = {wx, wy};
  return rep;
}

inline VerificationReport check_kernel_regularity(const Space& space, const FractionalKernel& k) {
  VerificationReport rep;
  rep.id = "kernel_regularity";
  rep.seed = kRegularitySeed;
  const auto scan = detail::scan_regularity(space, k);
  rep.fitted_constant = scan.max_value;
  rep.details["declared"] = k.regularity_constant;
  rep.details["admissible_triples"] = scan.admissible;
  rep.details["sampled"] = scan.sampled;
  rep.details["regularity_scale"] = k.regularity_scale;
  if (scan.admissible == 0) {
    rep.pass = true;
    rep.details["vacuous"] = true;
    return rep;
  }
  rep.details["vacuous"] = false;
  rep.pass = std::isfinite(scan.max_value) && scan.max_value <= k.regularity_constant * (1.0 + 1e-12);
  rep.witness_point = scan.wx;
  rep.details["witness_triple"] = {scan.wx, scan.wxp, scan.wy};
  return rep;
}

/// I_alpha f(x) = sum_{y != x} K(x, y) f(y) mu({y}).
inline FieldFunction apply_fractional_integral(const Space& space, const FractionalKernel& k,
                                               const FieldFunction& f) {
  const std::size_t n = space.size();
  require(f.size() == n, ErrorCode::InvalidInput, "function length differs from the point count");
  std::vector<double> fw(n), out(n, 0.0);
  for (std::size_t y = 0; y < n; ++y) fw[y] = f[y] * space.weight(y);
  for (std::size_t x = 0; x < n; ++x) {
    const double* row = k.values.data() + x * n;
    double s = 0.0;
    for (std::size_t y = 0; y < n; ++y)
      if (y != x) s += row[y] * fw[y];
    out[x] = s;
  }
  return FieldFunction(std::move(out));
}

/// Iterated commutator [b_k, [b_{k-1}, ..., [b_1, I_alpha]]] f via the
/// closed form sum_{y != x} prod_i (b_i(x) - b_i(y)) K(x, y) f(y) mu({y}).
inline FieldFunction multilinear_commutator(const Space& space, const FractionalKernel& k,
                                            std::span<const FieldFunction> b_vec, const FieldFunction& f) {
  if (b_vec.size() > kMaxCommutatorOrder)
    throw Error(ErrorCode::KTooLarge, "commutator order " + std::to_string(b_vec.size()) + " exceeds 6");
  const std::size_t n = space.size();
  require(f.size() == n, ErrorCode::InvalidInput, "function length differs from the point count");
  for (const auto& b : b_vec) require(b.size() == n, ErrorCode::InvalidInput, "b length differs from the point count");
  if (b_vec.empty()) return apply_fractional_integral(space, k, f);
  std::vector<double> out(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    double s = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      if (y == x) continue;
      double prod = k(x, y) * f[y] * space.weight(y);
      for (const auto& b : b_vec) prod *= b[x] - b[y];
      s += prod;
    }
    out[x] = s;
  }
  return FieldFunction(std::move(out));
}

/// [b, I_alpha] f = b I_alpha f - I_alpha(b f), evaluated as
/// sum_{y != x} (b(x) - b(y)) K(x, y) f(y) mu({y}) so that it coincides with
/// the order-1 multilinear commutator.
inline FieldFunction commutator(const Space& space, const FractionalKernel& k, const FieldFunction& b,
                                const FieldFunction& f) {
  return multilinear_commutator(space, k, std::span<const FieldFunction>(&b, 1), f);
}

/// sigma is an i-subset of {1, ..., k}; sigma_prime is its complement. Both
/// are strictly increasing and 1-based.
struct IndexSubset {
  std::size_t k = 0;
  std::vector<std::size_t> sigma;
  std::vector<std::size_t> sigma_prime;
};

/// All i-subsets of {1, ..., k} in lexicographic order.
inline std::vector<IndexSubset> sigma_subsets(std::size_t k, std::size_t i) {
  require(i <= k, ErrorCode::PreconditionViolation, "subset size exceeds k");
  std::vector<IndexSubset> out;
  std::vector<std::size_t> cur(i);
  for (std::size_t j = 0; j < i; ++j) cur[j] = j + 1;
  for (;;) {
    IndexSubset s{k, cur, {}};
    for (std::size_t v = 1, j = 0; v <= k; ++v) {
      if (j < i && cur[j] == v)
        ++j;
      else
        s.sigma_prime.push_back(v);
    }
    out.push_back(std::move(s));
    std::size_t j = i;
    while (j > 0 && cur[j - 1] == k - i + j) --j;
    if (j == 0) break;
    ++cur[j - 1];
    for (std::size_t t = j; t < i; ++t) cur[t] = cur[t - 1] + 1;
  }
  return out;
}

inline std::vector<FieldFunction> select_functions(std::span<const FieldFunction> b_vec, std::span<const std::size_t> idx) {
  std::vector<FieldFunction> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(b_vec[i - 1]);
  return out;
}

/// One evaluation site of the product expansion: points y, z and a ball
/// (normally some B~) whose means enter the right-hand side.
struct ExpansionSample {
  std::size_t y = 0;
  std::size_t z = 0;
  Ball ball;
};

/// Checks prod_i (b_i(z) - m_i) = sum_{i=0}^{k} sum_{sigma in C_i^k}
/// [b(z) - b(y)]_{sigma'} [b(y) - m]_sigma with m_i the mean of b_i on the
/// sample's ball.
inline VerificationReport verify_product_expansion(const Space& space, std::span<const FieldFunction> b_vec,
                                                   std::span<const ExpansionSample> samples) {
  const std::size_t k = b_vec.size();
  if (k > kMaxCommutatorOrder) throw Error(ErrorCode::KTooLarge, "product expansion order exceeds 6");
  VerificationReport rep;
  rep.id = "product_expansion";
  std::vector<std::vector<IndexSubset>> subsets;
  for (std::size_t i = 0; i <= k; ++i) subsets.push_back(sigma_subsets(k, i));
  double worst = 0.0, magnitude = 0.0;
  std::vector<double> m(k);
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto& smp = samples[s];
    for (std::size_t i = 0; i < k; ++i) {
      double acc = 0.0;
      smp.ball.members.for_each([&](std::size_t p) { acc += b_vec[i][p] * space.weight(p); });
      m[i] = acc / smp.ball.measure;
    }
    double lhs = 1.0;
    for (std::size_t i = 0; i < k; ++i) lhs *= b_vec[i][smp.z] - m[i];
    double rhs = 0.0, abs_sum = 0.0;
    for (const auto& level : subsets)
      for (const auto& sub : level) {
        double t = 1.0;
        for (auto j : sub.sigma_prime) t *= b_vec[j - 1][smp.z] - b_vec[j - 1][smp.y];
        for (auto j : sub.sigma) t *= b_vec[j - 1][smp.y] - m[j - 1];
        rhs += t;
        abs_sum += std::abs(t);
      }
    const double gap = std::abs(lhs - rhs);
    rep.ratios.push_back(gap);
    magnitude = std::max({magnitude, std::abs(lhs), abs_sum});
    if (s == 0 || gap > worst) {
      worst = gap;
      rep.witness_point = smp.z;
    }
  }
  rep.fitted_constant = worst;
  rep.pass = worst <= 1e-10 * (1.0 + magnitude);
  rep.details["max_discrepancy"] = worst;
  rep.details["max_magnitude"] = magnitude;
  rep.details["samples"] = samples.size();
  return rep;
}

}  // namespace nhfrac

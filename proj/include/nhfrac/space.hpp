#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nhfrac/errors.hpp"
#include "nhfrac/member_set.hpp"
#include "nhfrac/random.hpp"
#include "nhfrac/report.hpp"

namespace nhfrac {

/// lambda(x, r) = c * r^k, the same for every point.
struct PowerLambda {
  double c = 1.0;
  double k = 1.0;
};

/// Step-function dominating function. `values[x][j]` is lambda(x, radii[j]).
/// Off-table radii take the value at the smallest tabulated radius >= r;
/// radii past the last entry take the last value.
struct TableLambda {
  std::vector<double> radii;
  std::vector<std::vector<double>> values;
};

class DominatingSpec {
 public:
  static DominatingSpec power(double c, double k) {
    require(c > 0.0 && std::isfinite(c), ErrorCode::InvalidInput, "power lambda needs c > 0");
    require(k > 0.0 && std::isfinite(k), ErrorCode::InvalidInput, "power lambda needs k > 0");
    return DominatingSpec(PowerLambda{c, k});
  }

  static DominatingSpec table(std::vector<double> radii, std::vector<std::vector<double>> values) {
    require(!radii.empty(), ErrorCode::InvalidInput, "table lambda needs at least one radius");
    for (std::size_t j = 0; j < radii.size(); ++j) {
      require(radii[j] > 0.0 && std::isfinite(radii[j]), ErrorCode::InvalidInput, "table radii must be positive");
      require(j == 0 || radii[j] > radii[j - 1], ErrorCode::InvalidInput, "table radii must be strictly increasing");
    }
    for (std::size_t x = 0; x < values.size(); ++x) {
      require(values[x].size() == radii.size(), ErrorCode::InvalidInput,
              "table row " + std::to_string(x) + " has wrong length");
      for (std::size_t j = 0; j < radii.size(); ++j) {
        require(values[x][j] > 0.0 && std::isfinite(values[x][j]), ErrorCode::InvalidInput,
                "table values must be positive");
        if (j > 0 && values[x][j] < values[x][j - 1])
          throw Error(ErrorCode::LambdaNotMonotone,
                      "lambda(" + std::to_string(x) + ", r) decreases at r = " + std::to_string(radii[j]), {x});
      }
    }
    return DominatingSpec(TableLambda{std::move(radii), std::move(values)});
  }

  bool is_power() const noexcept { return std::holds_alternative<PowerLambda>(spec_); }
  const PowerLambda* as_power() const noexcept { return std::get_if<PowerLambda>(&spec_); }
  const TableLambda* as_table() const noexcept { return std::get_if<TableLambda>(&spec_); }

  /// True when lambda(x, r) does not depend on x.
  bool point_independent() const noexcept { return is_power(); }

  // Raw value; a power spec gives 0 at r = 0.
  double evaluate(std::size_t x, double r) const {
    if (const auto* p = as_power()) return r <= 0.0 ? 0.0 : p->c * std::pow(r, p->k);
    const auto& t = std::get<TableLambda>(spec_);
    auto it = std::lower_bound(t.radii.begin(), t.radii.end(), r);
    std::size_t j = it == t.radii.end() ? t.radii.size() - 1 : static_cast<std::size_t>(it - t.radii.begin());
    return t.values[x][j];
  }

 private:
  explicit DominatingSpec(std::variant<PowerLambda, TableLambda> s) : spec_(std::move(s)) {}
  std::variant<PowerLambda, TableLambda> spec_;
};

class Space;
inline Space build_space(std::vector<double> distances, std::vector<double> weights, DominatingSpec lambda,
                         std::optional<double> dim_n = std::nullopt);

/// Finite metric measure space with an atomic measure and a dominating
/// function. Immutable after `build_space`.
class Space {
 public:
  std::size_t size() const noexcept { return n_; }

  double distance(std::size_t i, std::size_t j) const { return distances_[i * n_ + j]; }
  std::span<const double> distance_row(std::size_t i) const { return {distances_.data() + i * n_, n_}; }
  const std::vector<double>& distances() const noexcept { return distances_; }

  double weight(std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }
  double total_measure() const noexcept { return total_measure_; }

  const DominatingSpec& lambda_spec() const noexcept { return lambda_; }
  double lambda(std::size_t x, double r) const { return lambda_.evaluate(x, r); }

  double dim_n() const noexcept { return dim_n_; }
  double c_lambda() const noexcept { return c_lambda_; }
  double c_tilde() const noexcept { return c_tilde_; }
  double beta0() const noexcept { return beta0_; }

  /// Sorted canonical radius grid: 0, every distinct pairwise distance, and
  /// their 6^k and 6^k * 6/5 dilates (k >= 0) up to 6 * diameter.
  std::span<const double> radius_grid() const noexcept { return grid_; }
  /// Smallest positive grid radius (the minimum pairwise distance); 0 for a
  /// one-point space.
  double min_positive_radius() const noexcept { return min_distance_; }
  double diameter() const noexcept { return diameter_; }

  /// Points ordered by distance from `center` (ties by index).
  std::span<const std::uint32_t> order(std::size_t center) const { return {order_.data() + center * n_, n_}; }
  std::span<const double> sorted_distances(std::size_t center) const {
    return {sorted_dist_.data() + center * n_, n_};
  }
  /// Number of points in the closed ball B(center, r).
  std::size_t ball_count(std::size_t center, double r) const {
    auto d = sorted_distances(center);
    return static_cast<std::size_t>(std::upper_bound(d.begin(), d.end(), r) - d.begin());
  }
  /// Measure of the first `count` points in `center`'s distance order.
  double prefix_measure(std::size_t center, std::size_t count) const {
    return prefix_weight_[center * (n_ + 1) + count];
  }
  double ball_measure(std::size_t center, double r) const { return prefix_measure(center, ball_count(center, r)); }

  MemberSet members(std::size_t center, std::size_t count) const {
    MemberSet s(n_);
    auto ord = order(center);
    for (std::size_t m = 0; m < count; ++m) s.set(ord[m]);
    return s;
  }

 private:
  friend Space build_space(std::vector<double>, std::vector<double>, DominatingSpec, std::optional<double>);

  std::size_t n_ = 0;
  std::vector<double> distances_;
  std::vector<double> weights_;
  double total_measure_ = 0.0;
  DominatingSpec lambda_ = DominatingSpec::power(1.0, 1.0);
  double dim_n_ = 1.0;
  double c_lambda_ = 1.0;
  double c_tilde_ = 1.0;
  double beta0_ = 1.0;
  std::vector<double> grid_;
  double min_distance_ = 0.0;
  double diameter_ = 0.0;
  std::vector<std::uint32_t> order_;
  std::vector<double> sorted_dist_;
  std::vector<double> prefix_weight_;
};

inline constexpr double kMetricTolerance = 1e-12;
inline constexpr std::size_t kExhaustiveTriangleLimit = 64;
inline constexpr std::size_t kSampledTriangleCount = 100000;

namespace detail {

inline std::vector<double> make_radius_grid(const std::vector<double>& distinct, double diameter) {
  std::vector<double> grid{0.0};
  const double cap = 6.0 * diameter;
  for (double d : distinct) {
    for (double r = d; r <= cap; r *= 6.0) {
      grid.push_back(r);
      if (r * 1.2 <= cap) grid.push_back(r * 1.2);
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

inline void check_metric(std::size_t n, std::vector<double>& d) {
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i * n + i] != 0.0)
      throw Error(ErrorCode::MetricViolation, "nonzero self-distance at point " + std::to_string(i), {i, i, i});
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = d[i * n + j], b = d[j * n + i];
      if (!std::isfinite(a) || !std::isfinite(b) || a <= 0.0 || b <= 0.0)
        throw Error(ErrorCode::MetricViolation,
                    "distance between distinct points " + std::to_string(i) + ", " + std::to_string(j) +
                        " must be positive and finite",
                    {i, j, j});
      if (std::abs(a - b) > kMetricTolerance * std::max(1.0, std::abs(a)))
        throw Error(ErrorCode::MetricViolation,
                    "asymmetric distance between " + std::to_string(i) + " and " + std::to_string(j), {i, j, i});
      d[j * n + i] = a;
    }
  }
  const double scale = std::max(1.0, *std::max_element(d.begin(), d.end()));
  auto violates = [&](std::size_t a, std::size_t b, std::size_t c) {
    return d[a * n + c] > d[a * n + b] + d[b * n + c] + kMetricTolerance * scale;
  };
  auto fail = [&](std::size_t a, std::size_t b, std::size_t c) {
    throw Error(ErrorCode::MetricViolation,
                "triangle inequality fails: d(" + std::to_string(a) + "," + std::to_string(c) + ") > d(" +
                    std::to_string(a) + "," + std::to_string(b) + ") + d(" + std::to_string(b) + "," +
                    std::to_string(c) + ")",
                {a, b, c});
  };
  if (n <= kExhaustiveTriangleLimit) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t c = a + 1; c < n; ++c)
        for (std::size_t b = 0; b < n; ++b)
          if (b != a && b != c && violates(a, b, c)) fail(a, b, c);
  } else {
    Rng rng = make_rng(0x7472696eULL);
    for (std::size_t s = 0; s < kSampledTriangleCount; ++s) {
      const std::size_t a = uniform_index(rng, n), b = uniform_index(rng, n), c = uniform_index(rng, n);
      if (violates(a, b, c)) fail(a, b, c);
    }
  }
}

}  // namespace detail

/// Greedy upper bound on the geometric doubling constant N0: the largest
/// number of half-radius balls (centered anywhere in the space) the greedy
/// set cover needs for any ball B(x, r), r ranging over the distances from x.
inline std::size_t estimate_geometric_doubling(const Space& space) {
  const std::size_t n = space.size();
  std::size_t best = 1;
  std::vector<std::size_t> candidates;
  for (std::size_t x = 0; x < n; ++x) {
    auto ord = space.order(x);
    auto dist = space.sorted_distances(x);
    for (std::size_t m = 1; m < n; ++m) {
      if (m + 1 < n && dist[m + 1] == dist[m]) continue;  // not the last point at this radius
      const double r = dist[m];
      const std::size_t count = m + 1;
      MemberSet uncovered(n);
      for (std::size_t i = 0; i < count; ++i) uncovered.set(ord[i]);
      // Half-radius balls that can touch B(x, r) are centered within 1.5 r of x.
      const std::size_t reach = space.ball_count(x, 1.5 * r);
      candidates.assign(ord.begin(), ord.begin() + static_cast<std::ptrdiff_t>(reach));
      std::sort(candidates.begin(), candidates.end());
      const MemberSet ball = uncovered;
      std::vector<MemberSet> halves;
      halves.reserve(candidates.size());
      for (std::size_t y : candidates) {
        MemberSet h = space.members(y, space.ball_count(y, 0.5 * r));
        h &= ball;
        halves.push_back(std::move(h));
      }
      std::size_t used = 0;
      while (!uncovered.empty()) {
        std::size_t pick = 0, gain = 0;
        for (std::size_t c = 0; c < halves.size(); ++c) {
          MemberSet t = halves[c];
          t &= uncovered;
          const std::size_t g = t.count();
          if (g > gain) gain = g, pick = c;
        }
        halves[pick].for_each([&](std::size_t i) { uncovered.reset(i); });
        ++used;
      }
      best = std::max(best, used);
    }
  }
  return best;
}

/// Builds and validates a space from a row-major n x n distance table.
/// `dim_n` defaults to log2 of the estimated geometric doubling constant
/// (1 when that estimate is 1). c_lambda and c_tilde are the tightest
/// constants over the canonical radius grid; beta0 is 1.01 times the smallest
/// admissible doubling threshold.
inline Space build_space(std::vector<double> distances, std::vector<double> weights, DominatingSpec lambda,
                         std::optional<double> dim_n) {
  const std::size_t n = weights.size();
  require(n >= 1, ErrorCode::InvalidInput, "space needs at least one point");
  require(distances.size() == n * n, ErrorCode::InvalidInput,
          "distance table has " + std::to_string(distances.size()) + " entries, expected " + std::to_string(n * n));
  for (std::size_t i = 0; i < n; ++i)
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
      throw Error(ErrorCode::NonpositiveWeight, "weight of point " + std::to_string(i) + " is not positive", {i});
  if (const auto* t = lambda.as_table())
    require(t->values.size() == n, ErrorCode::InvalidInput, "table lambda needs one row per point");
  detail::check_metric(n, distances);

  Space s;
  s.n_ = n;
  s.distances_ = std::move(distances);
  s.weights_ = std::move(weights);
  s.total_measure_ = std::accumulate(s.weights_.begin(), s.weights_.end(), 0.0);
  s.lambda_ = std::move(lambda);

  s.order_.resize(n * n);
  s.sorted_dist_.resize(n * n);
  s.prefix_weight_.assign(n * (n + 1), 0.0);
  std::vector<std::uint32_t> idx(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::iota(idx.begin(), idx.end(), 0u);
    auto row = s.distance_row(c);
    std::stable_sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) { return row[a] < row[b]; });
    for (std::size_t m = 0; m < n; ++m) {
      s.order_[c * n + m] = idx[m];
      s.sorted_dist_[c * n + m] = row[idx[m]];
      s.prefix_weight_[c * (n + 1) + m + 1] = s.prefix_weight_[c * (n + 1) + m] + s.weights_[idx[m]];
    }
  }

  std::vector<double> distinct;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) distinct.push_back(s.distance(i, j));
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  s.min_distance_ = distinct.empty() ? 0.0 : distinct.front();
  s.diameter_ = distinct.empty() ? 0.0 : distinct.back();
  s.grid_ = detail::make_radius_grid(distinct, s.diameter_);

  if (dim_n) {
    require(*dim_n > 0.0 && std::isfinite(*dim_n), ErrorCode::InvalidInput, "dim_n must be positive");
    s.dim_n_ = *dim_n;
  } else {
    const auto n0 = estimate_geometric_doubling(s);
    s.dim_n_ = n0 >= 2 ? std::log2(static_cast<double>(n0)) : 1.0;
  }
  if (const auto* p = s.lambda_.as_power())
    require(p->k <= s.dim_n_ * (1.0 + 1e-12), ErrorCode::InvalidInput, "power lambda exponent k exceeds dim_n");

  const std::size_t rows = s.lambda_.point_independent() ? 1 : n;
  double c_lambda = 1.0;
  for (std::size_t x = 0; x < rows; ++x) {
    double prev = 0.0;
    for (double r : s.grid_) {
      if (r <= 0.0) continue;
      const double v = s.lambda(x, r);
      if (v < prev)
        throw Error(ErrorCode::LambdaNotMonotone, "lambda(" + std::to_string(x) + ", r) decreases on the grid", {x});
      prev = v;
      c_lambda = std::max(c_lambda, v / s.lambda(x, 0.5 * r));
    }
  }
  s.c_lambda_ = c_lambda;

  double c_tilde = 1.0;
  if (!s.lambda_.point_independent()) {
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) {
        if (x == y) continue;
        auto from = std::lower_bound(s.grid_.begin(), s.grid_.end(), s.distance(x, y));
        for (auto it = from; it != s.grid_.end(); ++it) c_tilde = std::max(c_tilde, s.lambda(x, *it) / s.lambda(y, *it));
      }
  }
  s.c_tilde_ = c_tilde;

  const double threshold = std::max(std::pow(s.c_lambda_, 3.0 * std::log2(6.0)), std::pow(6.0, s.dim_n_));
  s.beta0_ = 1.01 * threshold;
  return s;
}

/// Space with the Euclidean metric on `coords` (one vector per point).
inline Space build_space_from_coords(const std::vector<std::vector<double>>& coords, std::vector<double> weights,
                                     DominatingSpec lambda, std::optional<double> dim_n = std::nullopt) {
  const std::size_t n = coords.size();
  require(weights.size() == n, ErrorCode::InvalidInput, "weights and coords differ in length");
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    require(coords[i].size() == coords[0].size(), ErrorCode::InvalidInput, "coordinate vectors differ in length");
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t a = 0; a < coords[i].size(); ++a) {
        const double t = coords[i][a] - coords[j][a];
        s += t * t;
      }
      d[i * n + j] = d[j * n + i] = std::sqrt(s);
    }
  }
  return build_space(std::move(d), std::move(weights), std::move(lambda), dim_n);
}

/// lambda(x, r) for use as a denominator: r = 0 is rejected because the
/// dominating function is only defined for positive radii.
inline double lambda_eval(const Space& space, std::size_t x, double r) {
  require(x < space.size(), ErrorCode::InvalidInput, "point index out of range");
  if (!(r > 0.0))
    throw Error(ErrorCode::LambdaAtZero, "lambda(" + std::to_string(x) + ", 0) requested; exclude the diagonal", {x});
  return space.lambda(x, r);
}

/// Radii at which the upper-doubling bound mu(B(x,r)) <= lambda(x,r) is
/// tested for center x: the distances from x and the smallest positive grid
/// radius. Checking these covers every radius >= that smallest radius.
inline std::vector<double> upper_doubling_radii(const Space& space, std::size_t x) {
  std::vector<double> radii;
  if (space.size() < 2) return radii;
  radii.push_back(space.min_positive_radius());
  for (double d : space.sorted_distances(x))
    if (d > 0.0) radii.push_back(d);
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  return radii;
}

/// Verifies mu(B(x,r)) <= lambda(x,r) on every positive-radius canonical ball.
/// Radius-0 singletons are outside the domain of lambda and are skipped.
inline VerificationReport check_upper_doubling(const Space& space, double slack = 1e-12) {
  VerificationReport rep;
  rep.id = "upper_doubling";
  double worst = 0.0;
  std::size_t wc = 0;
  double wr = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x) {
    for (double r : upper_doubling_radii(space, x)) {
      const double ratio = space.ball_measure(x, r) / space.lambda(x, r);
      if (ratio > worst) worst = ratio, wc = x, wr = r;
    }
  }
  rep.fitted_constant = worst;
  rep.pass = worst <= 1.0 + slack;
  rep.witness_point = wc;
  rep.details["max_ratio"] = worst;
  rep.details["witness_center"] = wc;
  rep.details["witness_radius"] = wr;
  return rep;
}

}  // namespace nhfrac

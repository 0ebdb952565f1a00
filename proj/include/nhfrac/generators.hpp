#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nhfrac/errors.hpp"
#include "nhfrac/field.hpp"
#include "nhfrac/random.hpp"
#include "nhfrac/space.hpp"

namespace nhfrac {

enum class SpaceKind { Grid1D, Grid2D, Random, Clustered };

/// Generated space family. `n` is the point count for GRID_1D, RANDOM and
/// CLUSTERED and the side length for GRID_2D. A missing seed means "use the
/// experiment seed".
struct SpaceFamily {
  SpaceKind kind = SpaceKind::Grid1D;
  std::size_t n = 16;
  std::size_t clusters = 4;
  std::optional<std::uint64_t> seed;
};

enum class WeightKind { Uniform, Lognormal, PowerLaw };

struct WeightScheme {
  WeightKind kind = WeightKind::Uniform;
  double exponent = 1.0;  // power-law exponent, or lognormal sigma
  std::optional<std::uint64_t> seed;
};

namespace detail {

inline std::uint64_t parse_u64(std::string_view s, const std::string& what) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw Error(ErrorCode::InvalidInput, "bad integer in " + what);
  return v;
}

inline double parse_real(std::string_view s, const std::string& what) {
  try {
    std::size_t used = 0;
    const std::string str(s);
    const double v = std::stod(str, &used);
    if (used != str.size() || !std::isfinite(v)) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidInput, "bad real in " + what);
  }
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

/// Parses grid1d:n, grid2d:n, random:n[:seed], clustered:n[:clusters[:seed]].
inline std::optional<SpaceFamily> parse_space_family(std::string_view spec) {
  const auto parts = detail::split(spec, ':');
  const std::string what = "space generator '" + std::string(spec) + "'";
  SpaceFamily fam;
  if (parts[0] == "grid1d" && parts.size() == 2) {
    fam.kind = SpaceKind::Grid1D;
  } else if (parts[0] == "grid2d" && parts.size() == 2) {
    fam.kind = SpaceKind::Grid2D;
  } else if (parts[0] == "random" && (parts.size() == 2 || parts.size() == 3)) {
    fam.kind = SpaceKind::Random;
    if (parts.size() == 3) fam.seed = detail::parse_u64(parts[2], what);
  } else if (parts[0] == "clustered" && parts.size() >= 2 && parts.size() <= 4) {
    fam.kind = SpaceKind::Clustered;
    if (parts.size() >= 3) fam.clusters = detail::parse_u64(parts[2], what);
    if (parts.size() == 4) fam.seed = detail::parse_u64(parts[3], what);
  } else {
    return std::nullopt;
  }
  fam.n = detail::parse_u64(parts[1], what);
  require(fam.n >= 1, ErrorCode::InvalidInput, what + " needs at least one point");
  require(fam.clusters >= 1, ErrorCode::InvalidInput, what + " needs at least one cluster");
  return fam;
}

/// Parses uniform, lognormal[:sigma[:seed]], powerlaw[:exponent].
inline WeightScheme parse_weight_scheme(std::string_view spec) {
  const auto parts = detail::split(spec, ':');
  const std::string what = "weight scheme '" + std::string(spec) + "'";
  WeightScheme w;
  if (parts[0] == "uniform" && parts.size() == 1) {
    w.kind = WeightKind::Uniform;
  } else if (parts[0] == "lognormal" && parts.size() <= 3) {
    w.kind = WeightKind::Lognormal;
    w.exponent = parts.size() >= 2 ? detail::parse_real(parts[1], what) : 0.5;
    if (parts.size() == 3) w.seed = detail::parse_u64(parts[2], what);
  } else if (parts[0] == "powerlaw" && parts.size() <= 2) {
    w.kind = WeightKind::PowerLaw;
    w.exponent = parts.size() == 2 ? detail::parse_real(parts[1], what) : 1.0;
  } else {
    throw Error(ErrorCode::InvalidInput, "unknown " + what);
  }
  return w;
}

inline std::vector<double> make_weights(std::size_t n, const WeightScheme& scheme, std::uint64_t seed) {
  std::vector<double> w(n, 1.0);
  switch (scheme.kind) {
    case WeightKind::Uniform:
      break;
    case WeightKind::Lognormal: {
      Rng rng = make_rng(scheme.seed.value_or(seed), 0x77);
      for (auto& v : w) v = std::exp(scheme.exponent * standard_normal(rng));
      break;
    }
    case WeightKind::PowerLaw:
      for (std::size_t i = 0; i < n; ++i) w[i] = std::pow(static_cast<double>(i + 1), -scheme.exponent);
      break;
  }
  double total = 0.0;
  for (double v : w) total += v;
  for (auto& v : w) v /= total;
  return w;
}

/// Smallest c with mu(B(x, r)) <= c r^k at every radius the upper-doubling
/// check inspects.
inline double fit_power_constant(const Space& space, double k) {
  double c = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x)
    for (double r : upper_doubling_radii(space, x)) c = std::max(c, space.ball_measure(x, r) / std::pow(r, k));
  return c > 0.0 ? c : space.total_measure();
}

/// Point coordinates of a generated family: grids and random clouds live in
/// the unit interval or square, so refining n keeps the geometry fixed.
inline std::vector<std::vector<double>> family_coords(const SpaceFamily& fam, std::uint64_t seed) {
  std::vector<std::vector<double>> pts;
  const std::uint64_t s = fam.seed.value_or(seed);
  switch (fam.kind) {
    case SpaceKind::Grid1D:
      for (std::size_t i = 0; i < fam.n; ++i)
        pts.push_back({fam.n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(fam.n - 1)});
      break;
    case SpaceKind::Grid2D: {
      const double h = fam.n == 1 ? 0.0 : 1.0 / static_cast<double>(fam.n - 1);
      for (std::size_t i = 0; i < fam.n; ++i)
        for (std::size_t j = 0; j < fam.n; ++j) pts.push_back({static_cast<double>(i) * h, static_cast<double>(j) * h});
      break;
    }
    case SpaceKind::Random: {
      Rng rng = make_rng(s, 0x70);
      for (std::size_t i = 0; i < fam.n; ++i) pts.push_back({uniform01(rng), uniform01(rng)});
      break;
    }
    case SpaceKind::Clustered: {
      Rng rng = make_rng(s, 0x63);
      std::vector<std::vector<double>> centers;
      for (std::size_t c = 0; c < fam.clusters; ++c) centers.push_back({uniform01(rng), uniform01(rng)});
      for (std::size_t i = 0; i < fam.n; ++i) {
        const auto& c = centers[i % fam.clusters];
        pts.push_back({c[0] + 0.05 * standard_normal(rng), c[1] + 0.05 * standard_normal(rng)});
      }
      break;
    }
  }
  return pts;
}

inline double family_dimension(const SpaceFamily& fam) { return fam.kind == SpaceKind::Grid1D ? 1.0 : 2.0; }

/// Builds a generated space with lambda = c r^n, n the family dimension and
/// c the tightest constant for which the upper-doubling bound holds.
inline Space generate_space(const SpaceFamily& fam, const WeightScheme& weights, std::uint64_t seed) {
  const auto coords = family_coords(fam, seed);
  const auto w = make_weights(coords.size(), weights, seed);
  const double dim = family_dimension(fam);
  const Space probe = build_space_from_coords(coords, w, DominatingSpec::power(1.0, dim), dim);
  return build_space(probe.distances(), w, DominatingSpec::power(fit_power_constant(probe, dim), dim), dim);
}

enum class FunctionScheme { Indicator, PointMass, BallIndicator, RandomSign, SmoothDecay, LogDistance, Mixed };

inline std::optional<FunctionScheme> parse_function_scheme(std::string_view s) {
  if (s == "indicator") return FunctionScheme::Indicator;
  if (s == "point-mass") return FunctionScheme::PointMass;
  if (s == "ball") return FunctionScheme::BallIndicator;
  if (s == "sign") return FunctionScheme::RandomSign;
  if (s == "smooth") return FunctionScheme::SmoothDecay;
  if (s == "log") return FunctionScheme::LogDistance;
  if (s == "mixed") return FunctionScheme::Mixed;
  return std::nullopt;
}

/// log(1 + d(x, x0) / d_min).
inline FieldFunction log_distance_field(const Space& space, std::size_t x0) {
  std::vector<double> v(space.size(), 0.0);
  const double dmin = space.min_positive_radius();
  if (dmin > 0.0)
    for (std::size_t x = 0; x < space.size(); ++x) v[x] = std::log1p(space.distance(x, x0) / dmin);
  return FieldFunction(std::move(v));
}

inline FieldFunction subtract_mean(const Space& space, const FieldFunction& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * space.weight(i);
  return f + (-s / space.total_measure());
}

namespace detail {

inline FieldFunction make_test_function(const Space& space, FunctionScheme kind, std::size_t index, Rng& rng) {
  const std::size_t n = space.size();
  std::vector<double> v(n, 0.0);
  const double diam = space.diameter() > 0.0 ? space.diameter() : 1.0;
  switch (kind) {
    case FunctionScheme::Indicator:
      v[index % n] = 1.0;
      break;
    case FunctionScheme::PointMass:
      v[uniform_index(rng, n)] = 1.0;
      break;
    case FunctionScheme::BallIndicator: {
      const std::size_t c = uniform_index(rng, n);
      const double r = uniform01(rng) * 0.5 * diam;
      for (std::size_t x = 0; x < n; ++x)
        if (space.distance(c, x) <= r) v[x] = 1.0;
      break;
    }
    case FunctionScheme::RandomSign:
      for (auto& x : v) x = uniform01(rng) < 0.5 ? -1.0 : 1.0;
      break;
    case FunctionScheme::SmoothDecay: {
      const std::size_t c = uniform_index(rng, n);
      for (std::size_t x = 0; x < n; ++x) v[x] = std::exp(-8.0 * space.distance(c, x) / diam);
      break;
    }
    case FunctionScheme::LogDistance:
      return log_distance_field(space, uniform_index(rng, n));
    case FunctionScheme::Mixed:
      break;
  }
  return FieldFunction(std::move(v));
}

}  // namespace detail

/// Deterministic family of test functions. Function t draws from its own
/// stream (seed, t). MIXED cycles point mass, ball indicator, random sign,
/// smooth decay and log distance. INDICATOR with count = n is the standard
/// basis.
inline std::vector<FieldFunction> generate_test_functions(const Space& space, FunctionScheme scheme, std::size_t count,
                                                          std::uint64_t seed, bool mean_zero = false) {
  require(count >= 1, ErrorCode::PreconditionViolation, "count must be at least 1");
  static constexpr FunctionScheme cycle[] = {FunctionScheme::PointMass, FunctionScheme::BallIndicator,
                                             FunctionScheme::RandomSign, FunctionScheme::SmoothDecay,
                                             FunctionScheme::LogDistance};
  std::vector<FieldFunction> out;
  out.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    Rng rng = make_rng(seed, t);
    const auto kind = scheme == FunctionScheme::Mixed ? cycle[t % 5] : scheme;
    auto f = detail::make_test_function(space, kind, t, rng);
    out.push_back(mean_zero ? subtract_mean(space, f) : std::move(f));
  }
  return out;
}

}  // namespace nhfrac

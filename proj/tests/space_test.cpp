#include <cmath>

#include <gtest/gtest.h>

#include "nhfrac/nhfrac.hpp"
#include "support/brute.hpp"

using namespace nhfrac;

TEST(Space, TwoPointBasics) {
  const Space s = brute::two_point();
  EXPECT_EQ(s.size(), 2u);
  EXPECT_DOUBLE_EQ(s.total_measure(), 2.0);
  EXPECT_DOUBLE_EQ(s.diameter(), 1.0);
  EXPECT_DOUBLE_EQ(s.min_positive_radius(), 1.0);
  EXPECT_EQ(estimate_geometric_doubling(s), 2u);
  EXPECT_DOUBLE_EQ(s.dim_n(), 1.0);
  EXPECT_DOUBLE_EQ(s.c_lambda(), 2.0);
  EXPECT_DOUBLE_EQ(s.c_tilde(), 1.0);
  EXPECT_NEAR(s.beta0(), 1.01 * std::pow(2.0, 3.0 * std::log2(6.0)), 1e-9);
  EXPECT_EQ(s.ball_count(0, 0.0), 1u);
  EXPECT_EQ(s.ball_count(0, 1.0), 2u);  // closed balls
  EXPECT_DOUBLE_EQ(s.ball_measure(1, 0.999), 1.0);
}

TEST(Space, RadiusGrid) {
  const Space s = brute::two_point();
  const std::vector<double> expect{0.0, 1.0, 1.2, 6.0};
  auto g = s.radius_grid();
  ASSERT_EQ(g.size(), expect.size());
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_DOUBLE_EQ(g[i], expect[i]);
}

TEST(Space, UpperDoublingPassesAndFails) {
  EXPECT_TRUE(check_upper_doubling(brute::two_point()).pass);
  const auto rep = check_upper_doubling(brute::two_point(1.0, 3.0));
  EXPECT_FALSE(rep.pass);
  EXPECT_DOUBLE_EQ(rep.fitted_constant, 2.0);
  EXPECT_EQ(rep.details["witness_radius"].get<double>(), 1.0);
}

TEST(Space, TriangleViolationNamesTriple) {
  try {
    build_space({0, 1, 3, 1, 0, 1, 3, 1, 0}, {1, 1, 1}, DominatingSpec::power(1, 1));
    FAIL() << "expected a metric violation";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MetricViolation);
    EXPECT_EQ(e.witness(), (std::vector<std::size_t>{0, 1, 2}));
  }
}

TEST(Space, RejectsBadInput) {
  auto code = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidInput;  // unreachable in these cases
  };
  EXPECT_EQ(code([] { build_space({0, 1, 1, 0}, {1, 0}, DominatingSpec::power(1, 1)); }),
            ErrorCode::NonpositiveWeight);
  EXPECT_EQ(code([] { build_space({0, 1, 2, 0}, {1, 1}, DominatingSpec::power(1, 1)); }), ErrorCode::MetricViolation);
  EXPECT_EQ(code([] { build_space({0, 0, 0, 0}, {1, 1}, DominatingSpec::power(1, 1)); }), ErrorCode::MetricViolation);
  EXPECT_EQ(code([] { DominatingSpec::table({1, 2}, {{3, 2}}); }), ErrorCode::LambdaNotMonotone);
  EXPECT_THROW(build_space({0, 1, 1, 0}, {1, 1}, DominatingSpec::power(1, 2)), Error);  // k above dim_n
}

TEST(Space, TableLambdaRoundsUp) {
  const auto spec = DominatingSpec::table({1.0, 2.0}, {{3.0, 5.0}, {3.0, 5.0}});
  const Space s = build_space({0, 1, 1, 0}, {1, 1}, spec);
  EXPECT_DOUBLE_EQ(s.lambda(0, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(s.lambda(0, 1.5), 5.0);
  EXPECT_DOUBLE_EQ(s.lambda(1, 9.0), 5.0);
  EXPECT_THROW(lambda_eval(s, 0, 0.0), Error);
}

TEST(Space, PrefixMeasureMatchesBrute) {
  const Space s = generate_space(*parse_space_family("random:20"), parse_weight_scheme("lognormal"), 3);
  const brute::Raw raw(s);
  for (std::size_t c = 0; c < s.size(); ++c)
    for (std::size_t y = 0; y < s.size(); ++y) {
      const double r = s.distance(c, y);
      EXPECT_NEAR(s.ball_measure(c, r), raw.measure(c, r), 1e-14);
    }
}

TEST(Space, GeneratedSpacesAreUpperDoubling) {
  for (const char* spec : {"grid1d:30", "grid2d:5", "random:40", "clustered:40"})
    for (const char* w : {"uniform", "lognormal:1", "powerlaw:1.5"}) {
      const Space s = generate_space(*parse_space_family(spec), parse_weight_scheme(w), 5);
      EXPECT_TRUE(check_upper_doubling(s).pass) << spec << " " << w;
      EXPECT_NEAR(s.total_measure(), 1.0, 1e-12);
    }
}

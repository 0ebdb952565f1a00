#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "nhfrac/nhfrac.hpp"
#include "support/brute.hpp"

using namespace nhfrac;

TEST(Geometry, TwoPointFamily) {
  const Space s = brute::two_point();
  const auto fam = canonical_ball_family(s);
  ASSERT_EQ(fam.size(), 3u);
  std::size_t singletons = 0;
  for (const auto& b : fam) {
    if (b.members.count() == 1) {
      ++singletons;
      EXPECT_EQ(b.radius, 0.0);
      EXPECT_TRUE(is_doubling(s, b));
    } else {
      EXPECT_EQ(b.center, 0u);
      EXPECT_EQ(b.radius, 1.0);
    }
  }
  EXPECT_EQ(singletons, 2u);
}

TEST(Geometry, DilateAndDoubling) {
  const Space s = brute::two_point();
  const Ball b = make_ball(s, 0, 0.5);
  EXPECT_EQ(b.members.count(), 1u);
  EXPECT_EQ(dilate(s, b, 6.0).members.indices(), (std::vector<std::size_t>{0, 1}));

  const Space heavy = build_space({0, 1, 1, 0}, {1, 1e6}, DominatingSpec::power(2e6, 1));
  EXPECT_FALSE(is_doubling(heavy, make_ball(heavy, 0, 0.5), 2.0, 2.0));
  EXPECT_TRUE(is_doubling(heavy, make_ball(heavy, 1, 0.5), 2.0, 2.0));
}

TEST(Geometry, KCoefficientTwoPoint) {
  const Space s = brute::two_point();
  EXPECT_NEAR(k_coefficient(s, 0, 1.0, 36.0, 0.0), 1.0 + 1.0 / 6 + 1.0 / 36, 1e-15);
  EXPECT_DOUBLE_EQ(k_coefficient(s, 0, 1.0, 1.0, 0.0), 1.0);
  EXPECT_EQ(shell_count(1.0, 36.0), 2u);
  EXPECT_EQ(shell_count(1.0, 37.0), 3u);
  EXPECT_EQ(shell_count(2.0, 1.0), 0u);
  EXPECT_THROW(k_coefficient(s, 0, 0.0, 1.0, 0.0), Error);
  // beta = 1/2 turns each layer t into t^(1/2)
  EXPECT_NEAR(k_coefficient(s, 0, 1.0, 36.0, 0.5), 1.0 + std::sqrt(1.0 / 6) + std::sqrt(1.0 / 36), 1e-15);
}

TEST(Geometry, FamilyMatchesBrute) {
  for (const char* spec : {"random:15", "clustered:18:3", "grid2d:4"}) {
    const Space s = generate_space(*parse_space_family(spec), parse_weight_scheme("lognormal"), 9);
    const brute::Raw raw(s);
    auto lib = canonical_ball_family(s);
    auto ref = raw.family();
    ASSERT_EQ(lib.size(), ref.size()) << spec;
    for (const auto& b : ref) {
      auto it = std::find_if(lib.begin(), lib.end(), [&](const Ball& l) {
        for (std::size_t p = 0; p < s.size(); ++p)
          if (l.members.test(p) != b.in[p]) return false;
        return true;
      });
      ASSERT_NE(it, lib.end());
      EXPECT_EQ(it->center, b.center);
      EXPECT_EQ(it->radius, b.radius);
      EXPECT_NEAR(it->measure, raw.measure(b.center, b.radius), 1e-14);
    }
  }
}

TEST(Geometry, KTableMatchesBrute) {
  const Space s = generate_space(*parse_space_family("random:14"), {}, 4);
  const brute::Raw raw(s);
  const BallFamily fam(s);
  for (double beta : {0.0, 0.7}) {
    const KTable kt(fam, beta);
    for (std::size_t i = 0; i < fam.size(); ++i)
      for (std::size_t j = 0; j < fam.size(); j += 3) {
        const double outer = fam.ball(j).radius;
        EXPECT_NEAR(kt(i, outer), raw.kcoef(fam.ball(i).center, fam.ball(i).radius, outer, beta), 1e-12);
      }
  }
}

TEST(Geometry, TildeIsSmallestDoublingDilate) {
  const Space s = generate_space(*parse_space_family("clustered:30"), parse_weight_scheme("powerlaw:2"), 2);
  const brute::Raw raw(s);
  const BallFamily fam(s);
  for (std::size_t i = 0; i < fam.size(); ++i) {
    const Ball& b = fam.ball(i);
    EXPECT_DOUBLE_EQ(fam.tilde_radius(i), raw.tilde(b.center, b.radius));
    EXPECT_EQ(fam.doubling(i), raw.doubling(b.center, b.radius));
    EXPECT_TRUE(is_doubling(s, smallest_doubling_dilate(s, b)));
  }
}

TEST(Geometry, GreedyCover) {
  const Space s = generate_space(*parse_space_family("random:50"), {}, 8);
  const BallFamily fam(s);
  const auto rep = cover_check(fam, 20, 12, 3);
  EXPECT_TRUE(rep.pass) << to_json(rep).dump();
  EXPECT_THROW(greedy_disjoint_cover(s, std::span<const Ball>{}), Error);
  std::vector<Ball> one{fam.ball(0)};
  EXPECT_THROW(greedy_disjoint_cover(s, one, 4.0), Error);
}

TEST(Geometry, FamilyCap) {
  const Space s = generate_space(*parse_space_family("random:30"), {}, 1);
  EXPECT_THROW(canonical_ball_family(s, 10), Error);
}

TEST(Geometry, SupersetRowsMatchInclusion) {
  const Space s = generate_space(*parse_space_family("random:25"), {}, 6);
  const BallFamily fam(s);
  for (bool only : {true, false}) {
    std::size_t rows = 0;
    fam.for_each_superset_row(only, [&](std::size_t b, std::span<const std::uint32_t> sup) {
      ++rows;
      std::size_t expect = 0;
      for (std::size_t q = 0; q < fam.size(); ++q)
        if ((!only || fam.doubling(q)) && fam.ball(b).members.is_subset_of(fam.ball(q).members)) ++expect;
      EXPECT_EQ(sup.size(), expect);
    });
    EXPECT_EQ(rows, only ? fam.doubling_indices().size() : fam.size());
  }
}

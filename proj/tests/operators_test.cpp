#include <cmath>

#include <gtest/gtest.h>

#include "nhfrac/nhfrac.hpp"
#include "nhfrac/reference.hpp"
#include "support/brute.hpp"

using namespace nhfrac;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

}  // namespace

TEST(Operators, TwoPointOracles) {
  const Space s = brute::two_point();
  const auto k = standard_kernel(s, 0.5);
  EXPECT_NEAR(k(0, 1), kInvSqrt2, 1e-15);
  EXPECT_NEAR(k(1, 0), kInvSqrt2, 1e-15);

  const FieldFunction f({0.0, 1.0});
  const auto i_f = apply_fractional_integral(s, k, f);
  EXPECT_NEAR(i_f[0], kInvSqrt2, 1e-15);
  EXPECT_EQ(i_f[1], 0.0);

  const FieldFunction b({0.0, 1.0});
  EXPECT_NEAR(commutator(s, k, b, f)[0], -kInvSqrt2, 1e-15);
  const std::vector<FieldFunction> bb{b, b};
  EXPECT_NEAR(multilinear_commutator(s, k, bb, f)[0], k(0, 1), 1e-15);
}

TEST(Operators, MatchesBruteIntegrals) {
  const Space s = generate_space(*parse_space_family("random:24"), parse_weight_scheme("lognormal"), 11);
  const brute::Raw raw(s);
  const auto k = standard_kernel(s, 0.6);
  const auto fs = generate_test_functions(s, FunctionScheme::Mixed, 10, 4);
  const auto b = log_distance_field(s, 3);
  for (const auto& f : fs) {
    EXPECT_LT(brute::max_diff(raw.fractional_integral(0.6, f.vector()), apply_fractional_integral(s, k, f)), 1e-11);
    EXPECT_LT(brute::max_diff(raw.commutator(0.6, b.vector(), f.vector()), commutator(s, k, b, f)), 1e-10);
  }
}

TEST(Operators, ClosedFormMatchesNestedRecursion) {
  const Space s = generate_space(*parse_space_family("grid2d:4"), {}, 1);
  const auto k = standard_kernel(s, 0.8);
  const auto fs = generate_test_functions(s, FunctionScheme::Mixed, 4, 2);
  std::vector<FieldFunction> bs;
  for (std::size_t i = 0; i < 4; ++i) bs.push_back(log_distance_field(s, 5 * i));
  for (std::size_t order = 1; order <= 4; ++order) {
    std::span<const FieldFunction> prefix(bs.data(), order);
    for (const auto& f : fs) {
      const auto a = multilinear_commutator(s, k, prefix, f);
      const auto r = reference::nested_commutator(s, k, prefix, f);
      for (std::size_t x = 0; x < s.size(); ++x) EXPECT_NEAR(a[x], r[x], 1e-9 * (1.0 + std::abs(r[x])));
    }
  }
}

TEST(Operators, CommutatorInvariances) {
  const Space s = generate_space(*parse_space_family("random:20"), {}, 2);
  const auto k = standard_kernel(s, 0.5);
  const auto f = generate_test_functions(s, FunctionScheme::RandomSign, 1, 3)[0];
  const auto b = log_distance_field(s, 0);
  const auto zero = commutator(s, k, FieldFunction::constant(s.size(), 4.0), f);
  for (std::size_t x = 0; x < s.size(); ++x) EXPECT_EQ(zero[x], 0.0);
  const auto c1 = commutator(s, k, b, f);
  const auto c2 = commutator(s, k, b + 7.0, f);
  const auto neg = commutator(s, k, -1.0 * b, f);
  for (std::size_t x = 0; x < s.size(); ++x) {
    EXPECT_NEAR(c1[x], c2[x], 1e-12 * (1.0 + std::abs(c1[x])));
    EXPECT_NEAR(c1[x], -neg[x], 1e-15);
  }
}

TEST(Operators, SigmaSubsets) {
  const auto subs = sigma_subsets(3, 2);
  ASSERT_EQ(subs.size(), 3u);
  EXPECT_EQ(subs[0].sigma, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(subs[0].sigma_prime, (std::vector<std::size_t>{3}));
  EXPECT_EQ(subs[1].sigma, (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(subs[2].sigma, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(subs[2].sigma_prime, (std::vector<std::size_t>{1}));
  EXPECT_EQ(sigma_subsets(4, 0).size(), 1u);
  EXPECT_TRUE(sigma_subsets(4, 0)[0].sigma.empty());
  for (std::size_t k = 1; k <= 6; ++k) {
    std::size_t total = 0;
    for (std::size_t i = 0; i <= k; ++i) total += sigma_subsets(k, i).size();
    EXPECT_EQ(total, std::size_t{1} << k);
  }
  EXPECT_THROW(sigma_subsets(2, 3), Error);

  const std::vector<FieldFunction> bs{FieldFunction({1.0}), FieldFunction({2.0}), FieldFunction({3.0})};
  const std::vector<std::size_t> idx{1, 3};
  const auto sel = select_functions(bs, idx);
  ASSERT_EQ(sel.size(), 2u);
  EXPECT_EQ(sel[1][0], 3.0);
}

TEST(Operators, OrderLimit) {
  const Space s = brute::two_point();
  const auto k = standard_kernel(s, 0.5);
  const std::vector<FieldFunction> bs(7, FieldFunction({0.0, 1.0}));
  try {
    multilinear_commutator(s, k, bs, FieldFunction({1.0, 1.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::KTooLarge);
  }
}

TEST(Operators, ProductExpansion) {
  const Space s = generate_space(*parse_space_family("random:16"), {}, 3);
  const BallFamily fam(s);
  std::vector<FieldFunction> bs;
  for (std::size_t i = 0; i < 5; ++i) bs.push_back(log_distance_field(s, i));
  std::vector<ExpansionSample> samples;
  for (std::size_t t = 0; t < 20; ++t)
    samples.push_back({t % s.size(), (3 * t + 1) % s.size(), smallest_doubling_dilate(s, fam.ball(t % fam.size()))});
  for (std::size_t k = 1; k <= 5; ++k) {
    const auto rep = verify_product_expansion(s, std::span<const FieldFunction>(bs.data(), k), samples);
    EXPECT_TRUE(rep.pass) << to_json(rep).dump();
  }
}

TEST(Operators, KernelChecks) {
  const auto two = check_kernel_regularity(brute::two_point(), standard_kernel(brute::two_point(), 0.5));
  EXPECT_TRUE(two.pass);
  EXPECT_TRUE(two.details["vacuous"].get<bool>());

  const Space s = generate_space(*parse_space_family("grid1d:20"), {}, 1);
  const auto k = standard_kernel(s, 0.4);
  const auto size = check_kernel_size(s, k);
  EXPECT_TRUE(size.pass);
  EXPECT_NEAR(size.fitted_constant, 1.0, 1e-12);
  const auto reg = check_kernel_regularity(s, k);
  EXPECT_TRUE(reg.pass);
  EXPECT_GT(reg.details["admissible_triples"].get<std::size_t>(), 0u);
  EXPECT_NEAR(check_kernel_size(s, k.scaled(3.0)).fitted_constant, 3.0, 1e-12);

  EXPECT_THROW(standard_kernel(s, 0.0), Error);
  EXPECT_THROW(standard_kernel(s, 1.0), Error);
  EXPECT_THROW(standard_kernel(s, 0.5, 0.0), Error);
}

#include <cmath>

#include <gtest/gtest.h>

#include "nhfrac/nhfrac.hpp"

using namespace nhfrac;

namespace {

ExperimentConfig small_config(const char* space) {
  ExperimentConfig cfg;
  cfg.space_family = *parse_space_family(space);
  cfg.trials = 8;
  return cfg;
}

}  // namespace

TEST(Harness, DerivedExponent) {
  ExperimentConfig cfg;
  EXPECT_NEAR(derived_q(cfg, 1.0), 10.0, 1e-12);  // 1/q = 1/2 - 0.4
  cfg.p = 3.0;
  try {
    derived_q(cfg, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigInfeasible);
  }
  cfg = {};
  cfg.r = 2.5;
  EXPECT_THROW(derived_q(cfg, 1.0), Error);
  cfg = {};
  cfg.alpha = 1.0;
  EXPECT_THROW(derived_q(cfg, 1.0), Error);
}

TEST(Harness, SpreadRatio) {
  const double v[] = {2.0, 4.0, 3.0};
  EXPECT_DOUBLE_EQ(spread_ratio(v), 2.0);
}

TEST(Harness, TermCount) {
  for (std::size_t k = 1; k <= 6; ++k) EXPECT_EQ(domination_term_count(k), std::size_t{1} << k);
}

TEST(Harness, ExactSuitePasses) {
  for (const char* spec : {"grid1d:10", "random:20"}) {
    const auto rep = run_exact_suite(*parse_space_family(spec), 3);
    EXPECT_TRUE(rep.pass) << to_json(rep).dump(1);
  }
}

TEST(Harness, Deterministic) {
  const auto a = to_json(run_exact_suite(*parse_space_family("random:16"), 9)).dump();
  const auto b = to_json(run_exact_suite(*parse_space_family("random:16"), 9)).dump();
  EXPECT_EQ(a, b);
  const auto c = to_json(bound_experiment_I(small_config("grid1d:24"))).dump();
  const auto d = to_json(bound_experiment_I(small_config("grid1d:24"))).dump();
  EXPECT_EQ(c, d);
}

TEST(Harness, BoundExperiments) {
  auto cfg = small_config("grid1d:32");
  const auto i = bound_experiment_I(cfg);
  EXPECT_TRUE(i.pass);
  EXPECT_EQ(i.ratios.size(), cfg.trials);
  EXPECT_GT(i.fitted_constant, 0.0);

  const Space s = experiment_space(cfg);
  const auto b = log_distance_field(s, 0);
  const auto c1 = bound_experiment_commutator(cfg, b);
  EXPECT_EQ(c1.id, "bound_commutator");
  // [2b, I] = 2 [b, I] and ||2b|| = 2 ||b||
  const auto c2 = bound_experiment_commutator(cfg, 2.0 * b);
  EXPECT_NEAR(c1.fitted_constant, c2.fitted_constant, 1e-10 * c1.fitted_constant);
  const std::vector<FieldFunction> bs{b, log_distance_field(s, s.size() - 1)};
  EXPECT_EQ(bound_experiment_multilinear(cfg, bs).id, "bound_multilinear");
  EXPECT_THROW(bound_experiment_commutator(cfg, FieldFunction::constant(s.size(), 1.0)), Error);
}

TEST(Harness, Dominations) {
  auto cfg = small_config("grid1d:24");
  cfg.p = 2.25;
  cfg.r = 2.0;
  const Space s = experiment_space(cfg);
  const std::vector<FieldFunction> bs{log_distance_field(s, 0), log_distance_field(s, s.size() - 1)};
  const auto a = pointwise_domination_check(cfg, DominationVariant::FractionalIntegral);
  const auto b = pointwise_domination_check(cfg, DominationVariant::Commutator, std::span(bs.data(), 1));
  const auto c = pointwise_domination_check(cfg, DominationVariant::Multilinear, bs);
  for (const auto* r : {&a, &b, &c}) {
    EXPECT_TRUE(r->pass) << to_json(*r).dump();
    EXPECT_GT(r->fitted_constant, 0.0);
    EXPECT_TRUE(std::isfinite(r->fitted_constant));
  }
}

TEST(Harness, KProperties) {
  const Space s = generate_space(*parse_space_family("random:30"), {}, 2);
  const BallFamily fam(s);
  const double betas[] = {0.0, 1.0};
  const auto rep = k_properties_suite(fam, betas);
  EXPECT_TRUE(rep.pass) << to_json(rep).dump();
  EXPECT_LE(rep.fitted_constant, 1.0 + 1e-12);
}

TEST(Harness, MaximalExperiments) {
  const Space s = generate_space(*parse_space_family("random:40"), {}, 3);
  const BallFamily fam(s);
  const auto fs = generate_test_functions(s, FunctionScheme::Mixed, 6, 3);
  const auto st = strong_type_experiment(fam, MaximalConfig{1.5, 5, 0.5}, 2.0, fs);
  EXPECT_TRUE(st.pass);
  EXPECT_TRUE(lq_maximal_experiment(fam, 1.5, 5, 3.0, fs).pass);
  const auto mz = generate_test_functions(s, FunctionScheme::Mixed, 6, 3, true);
  EXPECT_TRUE(sharp_control_experiment(fam, 0.0, 2.0, mz).pass);
  EXPECT_THROW(sharp_control_experiment(fam, 0.0, 2.0, fs), Error);
}

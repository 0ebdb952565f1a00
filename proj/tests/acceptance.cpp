// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "nhfrac/nhfrac.hpp"
#include "nhfrac/reference.hpp"
#include "support/brute.hpp"

using namespace nhfrac;

namespace {

// Frozen baselines, recorded from the first full run.
constexpr double kBaseI64 = 1.5058, kBaseI256 = 1.7338;
constexpr double kBaseComm64 = 1.000, kBaseMulti64 = 0.497, kBaseComm256 = 1.153, kBaseMulti256 = 0.443;
constexpr double kBaseDomI = 0.86, kBaseDomComm = 0.292, kBaseDomMulti = 0.144;
constexpr double kBaseWeak = 0.95, kBaseStrong = 1.04, kBaseLq = 1.07, kBaseSharp = 0.96;
constexpr double kBaseRhoRatio = 1.0;

const std::uint64_t kSeeds[] = {1, 2, 3, 4, 5};

struct Outcome {
  bool pass = true;
  std::string note;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!note.empty()) note += "; ";
      note += what;
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

bool within(double v, double base, double factor) { return v <= base * factor && v >= base / factor; }

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

ExperimentConfig grid_config(std::size_t n, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.space_family = *parse_space_family("grid1d:" + std::to_string(n));
  cfg.seed = seed;
  return cfg;
}

Outcome exact_suite() {
  Outcome o;
  for (const char* spec : {"grid1d:16", "grid2d:8", "random:64"})
    for (auto seed : kSeeds) {
      const auto rep = run_exact_suite(*parse_space_family(spec), seed);
      o.expect(rep.pass, std::string(spec) + " seed " + std::to_string(seed) + " failed");
    }
  const auto a = to_json(run_exact_suite(*parse_space_family("random:64"), 7)).dump();
  const auto b = to_json(run_exact_suite(*parse_space_family("random:64"), 7)).dump();
  o.expect(a == b, "reports differ between identical runs");
  o.note = o.pass ? "3 spaces x 5 seeds, reports byte-identical" : o.note;
  return o;
}

Outcome two_point() {
  Outcome o;
  const double tol = 1e-12, inv_sqrt2 = 1.0 / std::sqrt(2.0);
  auto eq = [&](double got, double want, const char* what) {
    o.expect(std::abs(got - want) <= tol, std::string(what) + " = " + fmt(got) + ", want " + fmt(want));
  };
  const Space s = brute::two_point();
  const brute::Raw raw(s);
  const BallFamily fam(s);
  const auto k = standard_kernel(s, 0.5);
  const FieldFunction f({0.0, 1.0});
  const FieldFunction b({0.0, 1.0});

  o.expect(fam.size() == 3, "family size");
  eq(k(0, 1), inv_sqrt2, "K(a,b)");
  const auto i_f = apply_fractional_integral(s, k, f);
  eq(i_f[0], inv_sqrt2, "I f(a)");
  eq(i_f[1], 0.0, "I f(b)");
  eq(i_f[0], raw.fractional_integral(0.5, f.vector())[0], "I f(a) brute");
  eq(commutator(s, k, b, f)[0], -inv_sqrt2, "[b,I] f(a)");
  eq(commutator(s, k, b, f)[0], raw.commutator(0.5, b.vector(), f.vector())[0], "[b,I] f(a) brute");
  const std::vector<FieldFunction> bb{b, b};
  eq(multilinear_commutator(s, k, bb, f)[0], inv_sqrt2, "k=2 commutator at a");
  eq(reference::nested_commutator(s, k, bb, f)[0], inv_sqrt2, "k=2 nested at a");
  eq(k_coefficient(s, 0, 1.0, 36.0, 0.0), 1.0 + 1.0 / 6 + 1.0 / 36, "K_{B,Q}");
  eq(raw.kcoef(0, 1.0, 36.0, 0.0), 1.0 + 1.0 / 6 + 1.0 / 36, "K_{B,Q} brute");
  eq(mean_on_ball(s, f, make_ball(s, 0, 1.0)), 0.5, "mean on B(a,1)");
  const auto nf = doubling_maximal(fam, f);
  eq(nf[0], 0.5, "N f(a)");
  eq(nf[1], 1.0, "N f(b)");
  const auto mf = fractional_maximal(fam, f, MaximalConfig{1.0, 5.0, 0.5});
  eq(mf[0], inv_sqrt2, "M f(a)");
  eq(mf[1], 1.0, "M f(b)");
  const auto sh = sharp_maximal(fam, f, 0.0);
  eq(sh[0], 1.0, "sharp f(a)");
  eq(sh[1], 1.0, "sharp f(b)");
  eq(sh[0], raw.sharp(f.vector(), 0.0)[0], "sharp brute");
  eq(rbmo_norm(fam, b).norm_value, 0.5, "RBMO norm");
  eq(raw.rbmo(b.vector(), 6.0), 0.5, "RBMO brute");
  eq(lp_norm(s, FieldFunction({1.0, 1.0}), 2.0), std::sqrt(2.0), "L2 norm");
  eq(check_upper_doubling(brute::two_point(1.0, 3.0)).fitted_constant, 2.0, "upper doubling ratio");
  o.expect(estimate_geometric_doubling(s) == 2, "N0");
  if (o.pass) o.note = "all two-point values match to 1e-12";
  return o;
}

Outcome boundedness() {
  Outcome o;
  std::vector<double> c64, c256;
  for (auto seed : kSeeds) {
    c64.push_back(bound_experiment_I(grid_config(64, seed)).fitted_constant);
    c256.push_back(bound_experiment_I(grid_config(256, seed)).fitted_constant);
  }
  const double m64 = max_of(c64), m256 = max_of(c256);
  const double size_factor = std::max(m64, m256) / std::min(m64, m256);
  const double seed_factor = std::max(spread_ratio(c64), spread_ratio(c256));
  o.expect(std::isfinite(m64) && std::isfinite(m256), "non-finite constant");
  o.expect(size_factor <= 1.5, "size factor " + fmt(size_factor));
  o.expect(seed_factor <= 1.2, "seed factor " + fmt(seed_factor));
  o.expect(within(m64, kBaseI64, 1.2) && within(m256, kBaseI256, 1.2), "drift from frozen baseline");
  o.note = "C64=" + fmt(m64) + " C256=" + fmt(m256) + " size factor " + fmt(size_factor) + " seed factor " +
           fmt(seed_factor) + (o.pass ? "" : "; " + o.note);
  return o;
}

Outcome commutators() {
  Outcome o;
  std::vector<double> k1, k2;
  double scale_gap = 0.0;
  for (std::size_t n : {64, 256})
    for (auto seed : kSeeds) {
      const auto cfg = grid_config(n, seed);
      const Space s = experiment_space(cfg);
      const std::vector<FieldFunction> bs{log_distance_field(s, 0), log_distance_field(s, s.size() - 1)};
      const auto r1 = bound_experiment_commutator(cfg, bs[0]);
      const auto r2 = bound_experiment_multilinear(cfg, bs);
      if (n == 64) k1.push_back(r1.fitted_constant), k2.push_back(r2.fitted_constant);
      if (n == 64 && seed == 1) {
        const auto d1 = bound_experiment_commutator(cfg, 2.0 * bs[0]);
        const std::vector<FieldFunction> doubled{2.0 * bs[0], 2.0 * bs[1]};
        const auto d2 = bound_experiment_multilinear(cfg, doubled);
        for (std::size_t t = 0; t < r1.ratios.size(); ++t)
          scale_gap = std::max({scale_gap, std::abs(d1.ratios[t] - r1.ratios[t]) / r1.ratios[t],
                                std::abs(d2.ratios[t] - r2.ratios[t]) / r2.ratios[t]});
      }
      o.expect(std::isfinite(r1.fitted_constant) && std::isfinite(r2.fitted_constant), "non-finite constant");
      o.expect(r1.fitted_constant <= 2.0 * (n == 64 ? kBaseComm64 : kBaseComm256) &&
                   r2.fitted_constant <= 2.0 * (n == 64 ? kBaseMulti64 : kBaseMulti256),
               "above 2x frozen baseline at n=" + std::to_string(n));
    }
  o.expect(spread_ratio(k1) <= 2.0 && spread_ratio(k2) <= 2.0, "seed spread");
  // pow with a non-integer q keeps the L^q norm from scaling bit-exactly
  o.expect(scale_gap <= 1e-12, "ratios change under b -> 2b");
  o.note = "k=1 C=" + fmt(max_of(k1)) + " (spread " + fmt(spread_ratio(k1)) + "), k=2 C=" + fmt(max_of(k2)) +
           " (spread " + fmt(spread_ratio(k2)) + "), b->2b relative change " + fmt(scale_gap) +
           (o.pass ? "" : "; " + o.note);
  return o;
}

Outcome dominations() {
  Outcome o;
  std::vector<double> dom_i, dom_comm, dom_multi;
  for (auto seed : kSeeds) {
    ExperimentConfig cfg = grid_config(64, seed);
    cfg.r = 2.0;
    cfg.p = 2.25;
    cfg.trials = 100;
    const Space s = experiment_space(cfg);
    const std::vector<FieldFunction> bs{log_distance_field(s, 0), log_distance_field(s, s.size() - 1)};
    // a point with RHS = 0 and LHS != 0 raises DOMINATION_DEGENERATE
    dom_i.push_back(pointwise_domination_check(cfg, DominationVariant::FractionalIntegral).fitted_constant);
    dom_comm.push_back(pointwise_domination_check(cfg, DominationVariant::Commutator, std::span(bs.data(), 1)).fitted_constant);
    dom_multi.push_back(pointwise_domination_check(cfg, DominationVariant::Multilinear, bs).fitted_constant);
  }
  for (const auto* v : {&dom_i, &dom_comm, &dom_multi}) {
    o.expect(std::all_of(v->begin(), v->end(), [](double c) { return std::isfinite(c) && c > 0.0; }),
             "non-finite constant");
    o.expect(spread_ratio(*v) <= 2.0, "seed spread " + fmt(spread_ratio(*v)));
  }
  o.expect(within(max_of(dom_i), kBaseDomI, 2.0) && within(max_of(dom_comm), kBaseDomComm, 2.0) &&
               within(max_of(dom_multi), kBaseDomMulti, 2.0),
           "drift from frozen baseline");
  bool counts = true;
  for (std::size_t k = 1; k <= kHarnessMaxOrder; ++k) {
    std::size_t total = 0;
    for (std::size_t i = 0; i <= k; ++i) total += sigma_subsets(k, i).size();
    counts = counts && total == domination_term_count(k) && total == (std::size_t{1} << k);
  }
  o.expect(counts, "term count");
  o.note = "C = " + fmt(max_of(dom_i)) + ", " + fmt(max_of(dom_comm)) + ", " + fmt(max_of(dom_multi)) + "; term counts 2^k" +
           (o.pass ? "" : "; " + o.note);
  return o;
}

Outcome maximal_types() {
  Outcome o;
  std::vector<double> weak, strong, lq, sharp;
  const MaximalConfig wc{1.5, 5.0, 0.5};
  for (auto seed : kSeeds) {
    const Space s = generate_space(*parse_space_family("random:128"), {}, seed);
    const BallFamily fam(s);
    const auto fs = generate_test_functions(s, FunctionScheme::Mixed, 20, seed);
    double w = 0.0;
    for (const auto& f : fs) {
      const double top = lp_norm(s, fractional_maximal(fam, f, wc), INFINITY);
      std::vector<double> levels;
      for (int i = 0; i < 16; ++i) levels.push_back(top * std::pow(0.7, i));
      w = std::max(w, weak_type_check(fam, f, wc, levels).fitted_constant);
    }
    weak.push_back(w);
    strong.push_back(strong_type_experiment(fam, wc, 2.0, fs).fitted_constant);
    lq.push_back(lq_maximal_experiment(fam, 1.5, 5.0, 3.0, fs).fitted_constant);
    const auto mz = generate_test_functions(s, FunctionScheme::Mixed, 20, seed, true);
    sharp.push_back(sharp_control_experiment(fam, 0.0, 2.0, mz).fitted_constant);
  }
  const std::pair<const std::vector<double>*, double> all[] = {
      {&weak, kBaseWeak}, {&strong, kBaseStrong}, {&lq, kBaseLq}, {&sharp, kBaseSharp}};
  for (const auto& [v, base] : all) {
    o.expect(std::all_of(v->begin(), v->end(), [](double c) { return std::isfinite(c) && c > 0.0; }),
             "non-finite constant");
    o.expect(spread_ratio(*v) <= 2.0, "seed spread " + fmt(spread_ratio(*v)));
    o.expect(within(max_of(*v), base, 2.0), "drift from frozen baseline");
  }
  o.note = "weak " + fmt(max_of(weak)) + ", strong " + fmt(max_of(strong)) + ", lq " + fmt(max_of(lq)) +
           ", sharp (mean-zero) " + fmt(max_of(sharp)) + (o.pass ? "" : "; " + o.note);
  return o;
}

Outcome rbmo_suites() {
  Outcome o;
  std::vector<double> tel, med, jn, rho;
  const double ps[] = {1.0, 2.0, 4.0};
  const double rhos[] = {2.0, 6.0, 10.0};
  for (auto seed : kSeeds) {
    const Space s = generate_space(*parse_space_family("random:64"), {}, seed);
    const BallFamily fam(s);
    const auto b = log_distance_field(s, 0);
    const auto t = telescoping_check(fam, b);
    tel.push_back(t.ratios.at(0));
    med.push_back(t.ratios.at(1));
    jn.push_back(john_nirenberg_check(fam, b, ps).fitted_constant);
    rho.push_back(rho_ratio(fam, b, rhos));
  }
  for (const auto* v : {&tel, &med, &jn}) {
    o.expect(std::all_of(v->begin(), v->end(), [](double c) { return std::isfinite(c) && c > 0.0; }),
             "non-finite constant");
    o.expect(spread_ratio(*v) <= 2.0, "seed spread " + fmt(spread_ratio(*v)));
  }
  o.expect(max_of(rho) <= kBaseRhoRatio * 1.5, "rho ratio " + fmt(max_of(rho)));
  o.note = "telescoping " + fmt(max_of(tel)) + "/" + fmt(max_of(med)) + ", JN " + fmt(max_of(jn)) + ", rho ratio " +
           fmt(max_of(rho)) + (o.pass ? "" : "; " + o.note);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "exact suite", 60, exact_suite},
      {2, "two-point oracles", 1, two_point},
      {3, "fractional integral boundedness", 120, boundedness},
      {4, "commutator stability", 300, commutators},
      {5, "pointwise dominations", 300, dominations},
      {6, "maximal weak/strong type", 120, maximal_types},
      {7, "rbmo suites", 60, rbmo_suites},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Stopwatch sw;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note = e.what();
    }
    const double t = sw.seconds();
    if (t > c.limit) o.pass = false, o.note += "; over time limit";
    std::printf("%s criterion %d (%s): %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.note.c_str(), t);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nhfrac/nhfrac.hpp"

using namespace nhfrac;
using nlohmann::json;

namespace {

struct Options {
  std::string space;
  std::string weights = "uniform";
  std::string function;
  std::vector<std::string> b;
  std::string config;
  std::string out;
  std::string format = "structured";
  std::string suite = "exact";
  std::string export_path;
  std::string scheme = "mixed";
  double alpha = 0.4;
  double epsilon = 1.0;
  double p = 2.0;
  double r = 1.5;
  double eta = 5.0;
  double beta = 0.0;
  double rho = 6.0;
  double radius = 1.0;
  double outer_radius = 1.0;
  double tolerance = 2.0;
  std::size_t center = 0;
  std::size_t trials = 50;
  std::size_t count = 64;
  std::size_t levels = 16;
  std::size_t seeds = 3;
  std::uint64_t seed = 1;
  bool timing = false;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput:
    case ErrorCode::MetricViolation:
    case ErrorCode::NonpositiveWeight:
    case ErrorCode::LambdaNotMonotone:
      return 1;
    case ErrorCode::CoverGuaranteeFailed:
    case ErrorCode::DominationDegenerate:
      return 3;
    default:
      return 2;
  }
}

json function_json(const FieldFunction& f) { return f.vector(); }

void print_text(std::ostream& os, const json& doc) {
  for (const auto& [key, value] : doc.items()) {
    if (key == "details" && value.is_object()) {
      for (const auto& [k, v] : value.items()) os << "  " << k << ": " << v.dump() << '\n';
    } else {
      os << key << ": " << value.dump() << '\n';
    }
  }
}

void emit(const Options& o, const VerificationReport& rep) {
  const json doc = to_json(rep, o.timing);
  std::ostringstream ss;
  if (o.format == "text")
    print_text(ss, doc);
  else
    ss << doc.dump(2) << '\n';
  if (o.out.empty()) {
    std::cout << ss.str();
  } else {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw Error(ErrorCode::InvalidInput, "cannot write '" + o.out + "'");
    f << ss.str();
  }
}

// Failed runs still produce one document, naming the error and its witness.
void emit_error(const Options& o, const std::string& code, const std::string& message,
                const std::vector<std::size_t>& witness) {
  VerificationReport rep;
  rep.id = "error";
  rep.pass = false;
  rep.seed = o.seed;
  rep.details["code"] = code;
  rep.details["message"] = message;
  rep.details["witness"] = witness;
  try {
    emit(o, rep);
  } catch (const std::exception&) {
    std::cout << to_json(rep).dump(2) << '\n';
  }
}

Space load(const Options& o) {
  if (o.space.empty()) throw Error(ErrorCode::InvalidInput, "--space is required");
  return io::load_space(o.space, o.seed, parse_weight_scheme(o.weights));
}

FieldFunction load_fn(const std::string& path, const Space& s) { return io::load_function(path, s.size()); }

std::vector<FieldFunction> load_bs(const Options& o, const Space& s) {
  std::vector<FieldFunction> out;
  for (const auto& p : o.b) out.push_back(load_fn(p, s));
  return out;
}

FieldFunction require_function(const Options& o, const Space& s) {
  if (o.function.empty()) throw Error(ErrorCode::InvalidInput, "--function is required");
  return load_fn(o.function, s);
}

VerificationReport space_check(const Options& o) {
  const Space s = load(o);
  auto rep = check_upper_doubling(s);
  rep.id = "space_check";
  rep.seed = o.seed;
  rep.details["points"] = s.size();
  rep.details["dim_n"] = s.dim_n();
  rep.details["c_lambda"] = s.c_lambda();
  rep.details["c_tilde"] = s.c_tilde();
  rep.details["beta0"] = s.beta0();
  rep.details["geometric_doubling_n0"] = estimate_geometric_doubling(s);
  rep.details["total_measure"] = s.total_measure();
  rep.details["family_size"] = canonical_ball_family(s).size();
  if (!o.export_path.empty()) {
    std::ofstream f(o.export_path, std::ios::binary);
    if (!f) throw Error(ErrorCode::InvalidInput, "cannot write '" + o.export_path + "'");
    f << io::space_to_json(s).dump(1) << '\n';
  }
  return rep;
}

VerificationReport kernel_check(const Options& o) {
  const Space s = load(o);
  const auto k = standard_kernel(s, o.alpha, o.epsilon);
  const auto size = check_kernel_size(s, k);
  const auto reg = check_kernel_regularity(s, k);
  VerificationReport rep;
  rep.id = "kernel_check";
  rep.seed = o.seed;
  rep.pass = size.pass && reg.pass;
  rep.fitted_constant = reg.fitted_constant;
  rep.ratios = {size.fitted_constant, reg.fitted_constant};
  rep.details["size"] = to_json(size);
  rep.details["regularity"] = to_json(reg);
  if (!o.export_path.empty()) {
    std::ofstream f(o.export_path, std::ios::binary);
    if (!f) throw Error(ErrorCode::InvalidInput, "cannot write '" + o.export_path + "'");
    io::write_kernel(f, k);
  }
  return rep;
}

VerificationReport operator_report(const std::string& id, const Options& o, const FieldFunction& out) {
  VerificationReport rep;
  rep.id = id;
  rep.seed = o.seed;
  rep.details["values"] = function_json(out);
  return rep;
}

VerificationReport apply_cmd(const Options& o) {
  const Space s = load(o);
  const auto f = require_function(o, s);
  return operator_report("apply", o, apply_fractional_integral(s, standard_kernel(s, o.alpha, o.epsilon), f));
}

VerificationReport commutator_cmd(const Options& o) {
  const Space s = load(o);
  const auto f = require_function(o, s);
  const auto bs = load_bs(o, s);
  if (bs.size() != 1) throw Error(ErrorCode::InvalidInput, "commutator takes exactly one --b");
  return operator_report("commutator", o, commutator(s, standard_kernel(s, o.alpha, o.epsilon), bs[0], f));
}

VerificationReport multilinear_cmd(const Options& o) {
  const Space s = load(o);
  const auto f = require_function(o, s);
  const auto bs = load_bs(o, s);
  if (bs.empty()) throw Error(ErrorCode::InvalidInput, "multilinear needs at least one --b");
  return operator_report("multilinear", o, multilinear_commutator(s, standard_kernel(s, o.alpha, o.epsilon), bs, f));
}

VerificationReport maximal_cmd(const Options& o) {
  const Space s = load(o);
  const auto f = require_function(o, s);
  const BallFamily fam(s);
  const MaximalConfig cfg{o.r, o.eta, o.beta};
  const auto nf = doubling_maximal(fam, f);
  const auto mf = fractional_maximal(fam, f, cfg);
  VerificationReport rep;
  rep.id = "maximal";
  rep.seed = o.seed;
  bool dominated = true;
  for (std::size_t x = 0; x < s.size(); ++x) dominated = dominated && std::abs(f[x]) <= nf[x] * (1.0 + kExactSlack);
  rep.pass = dominated;
  rep.details["doubling_maximal"] = function_json(nf);
  rep.details["fractional_maximal"] = function_json(mf);
  rep.details["lp_norms"] = {{"f", lp_norm(s, f, o.p)}, {"doubling_maximal", lp_norm(s, nf, o.p)},
                             {"fractional_maximal", lp_norm(s, mf, o.p)}};
  return rep;
}

VerificationReport sharp_cmd(const Options& o) {
  const Space s = load(o);
  const auto f = require_function(o, s);
  const BallFamily fam(s);
  const KTable kt(fam, o.beta);
  const auto parts = sharp_maximal_parts(fam, kt, std::span<const FieldFunction>(&f, 1)).front();
  auto rep = operator_report("sharp", o, parts.total);
  rep.details["oscillation"] = function_json(parts.oscillation);
  rep.details["pair"] = function_json(parts.pair);
  return rep;
}

json ball_json(const Ball& b) {
  return {{"center", b.center}, {"radius", b.radius}, {"members", b.members.indices()}, {"measure", b.measure}};
}

json estimate_json(const RbmoEstimate& e) {
  return {{"norm", e.norm_value},
          {"rho", e.rho},
          {"oscillation_term", e.oscillation_term},
          {"pair_term", e.pair_term},
          {"witness_osc", ball_json(e.witness_osc)},
          {"witness_pair",
           {{"inner", ball_json(e.witness_pair.inner)},
            {"outer", ball_json(e.witness_pair.outer)},
            {"n_bq", e.witness_pair.n_bq}}}};
}

VerificationReport rbmo_cmd(const Options& o) {
  const Space s = load(o);
  const auto b = o.function.empty() && o.b.size() == 1 ? load_fn(o.b[0], s) : require_function(o, s);
  const BallFamily fam(s);
  const auto e = rbmo_norm(fam, b, o.rho);
  const auto a = rbmo_norm_assignment(fam, b, o.rho);
  VerificationReport rep;
  rep.id = "rbmo";
  rep.seed = o.seed;
  rep.fitted_constant = e.norm_value;
  rep.details["mean_form"] = estimate_json(e);
  rep.details["median_form"] = estimate_json(a);
  return rep;
}

VerificationReport kcoeff_cmd(const Options& o) {
  const Space s = load(o);
  if (o.center >= s.size()) throw Error(ErrorCode::InvalidInput, "--center is out of range");
  const double k = k_coefficient(s, o.center, o.radius, o.outer_radius, o.beta);
  VerificationReport rep;
  rep.id = "kcoeff";
  rep.seed = o.seed;
  rep.fitted_constant = k;
  rep.details["k"] = k;
  rep.details["n_bq"] = shell_count(o.radius, o.outer_radius);
  rep.details["bound"] = 1.0 + static_cast<double>(shell_count(o.radius, o.outer_radius));
  rep.pass = k <= 1.0 + static_cast<double>(shell_count(o.radius, o.outer_radius)) + kExactSlack;
  return rep;
}

VerificationReport cover_cmd(const Options& o) {
  const Space s = load(o);
  const BallFamily fam(s);
  Rng rng = make_rng(o.seed, 0xc0);
  std::vector<Ball> input;
  for (std::size_t i = 0; i < o.count; ++i) input.push_back(fam.ball(uniform_index(rng, fam.size())));
  const auto kept = greedy_disjoint_cover(s, input);
  VerificationReport rep;
  rep.id = "cover";
  rep.seed = o.seed;
  json balls = json::array();
  for (const auto& b : kept) balls.push_back(ball_json(b));
  bool disjoint = true;
  for (std::size_t a = 0; a < kept.size(); ++a)
    for (std::size_t c = a + 1; c < kept.size(); ++c) disjoint = disjoint && !kept[a].members.intersects(kept[c].members);
  rep.pass = disjoint;
  rep.details["input_balls"] = input.size();
  rep.details["kept"] = balls;
  return rep;
}

VerificationReport weaktype_cmd(const Options& o) {
  const Space s = load(o);
  const auto f = require_function(o, s);
  const BallFamily fam(s);
  const MaximalConfig cfg{o.r, o.eta, o.beta};
  const double top = lp_norm(s, fractional_maximal(fam, f, cfg), INFINITY);
  std::vector<double> levels;
  for (std::size_t i = 0; i < o.levels; ++i) levels.push_back(top > 0.0 ? top * std::pow(0.7, i) : std::pow(0.5, i));
  auto rep = weak_type_check(fam, f, cfg, levels);
  rep.seed = o.seed;
  rep.details["levels"] = levels;
  return rep;
}

ExperimentConfig experiment_config(const Options& o) {
  if (!o.config.empty()) return io::parse_config(io::read_file(o.config));
  ExperimentConfig cfg;
  const auto fam = parse_space_family(o.space);
  if (!fam) throw Error(ErrorCode::InvalidInput, "--space must be a generator (grid1d:n, grid2d:n, random:n[:seed])");
  cfg.space_family = *fam;
  cfg.weights = parse_weight_scheme(o.weights);
  cfg.alpha = o.alpha;
  cfg.p = o.p;
  cfg.r = o.r;
  cfg.epsilon = o.epsilon;
  cfg.trials = o.trials;
  cfg.seed = o.seed;
  return cfg;
}

std::vector<FieldFunction> log_fields(const Space& s, std::size_t k) {
  std::vector<FieldFunction> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(log_distance_field(s, i * (s.size() - 1) / std::max<std::size_t>(1, k - 1)));
  return out;
}

/// Runs `one` for seeds seed, seed+1, ... and checks the fitted constants
/// agree within the tolerance factor.
VerificationReport across_seeds(const Options& o, const std::string& id,
                                const std::function<VerificationReport(ExperimentConfig)>& one) {
  const ExperimentConfig base = experiment_config(o);
  VerificationReport rep;
  rep.id = id;
  rep.seed = base.seed;
  json runs = json::array();
  for (std::size_t i = 0; i < std::max<std::size_t>(1, o.seeds); ++i) {
    ExperimentConfig cfg = base;
    cfg.seed = base.seed + i;
    const auto r = one(cfg);
    rep.ratios.push_back(r.fitted_constant);
    runs.push_back(to_json(r));
  }
  const double spread = spread_ratio(rep.ratios);
  rep.fitted_constant = *std::max_element(rep.ratios.begin(), rep.ratios.end());
  rep.pass = std::isfinite(rep.fitted_constant) && spread <= o.tolerance;
  rep.details["seed_spread"] = spread;
  rep.details["tolerance"] = o.tolerance;
  rep.details["runs"] = runs;
  return rep;
}

VerificationReport verify_cmd(const Options& o) {
  const std::string& suite = o.suite;
  if (suite == "exact") {
    const auto fam = parse_space_family(o.space);
    if (!fam) throw Error(ErrorCode::InvalidInput, "--space must be a generator for the exact suite");
    return run_exact_suite(*fam, o.seed, parse_weight_scheme(o.weights));
  }
  if (suite == "bound") return across_seeds(o, "verify_bound", [](ExperimentConfig c) { return bound_experiment_I(c); });
  if (suite == "commutator" || suite == "multilinear") {
    const std::size_t k = suite == "commutator" ? 1 : std::max<std::size_t>(2, o.b.empty() ? 2 : o.b.size());
    return across_seeds(o, "verify_" + suite, [&](ExperimentConfig c) {
      const Space s = experiment_space(c);
      const auto bs = o.b.empty() ? log_fields(s, k) : load_bs(o, s);
      return bound_experiment_multilinear(c, bs);
    });
  }
  if (suite == "domination") {
    return across_seeds(o, "verify_domination", [&](ExperimentConfig c) {
      const Space s = experiment_space(c);
      const auto bs = o.b.empty() ? log_fields(s, 2) : load_bs(o, s);
      if (bs.empty()) return pointwise_domination_check(c, DominationVariant::FractionalIntegral);
      if (bs.size() == 1) return pointwise_domination_check(c, DominationVariant::Commutator, bs);
      return pointwise_domination_check(c, DominationVariant::Multilinear, bs);
    });
  }
  if (suite == "kprops") {
    const Space s = load(o);
    const BallFamily fam(s);
    const double betas[] = {0.0, o.beta};
    auto rep = k_properties_suite(fam, betas);
    rep.seed = o.seed;
    return rep;
  }
  if (suite == "rbmo") {
    const Space s = load(o);
    const BallFamily fam(s);
    const auto b = o.b.empty() ? log_distance_field(s, 0) : load_fn(o.b[0], s);
    const double ps[] = {1.0, 2.0, 4.0};
    const double rhos[] = {2.0, 6.0, 10.0};
    const auto tel = telescoping_check(fam, b);
    const auto jn = john_nirenberg_check(fam, b, ps, o.rho);
    VerificationReport rep;
    rep.id = "verify_rbmo";
    rep.seed = o.seed;
    rep.pass = tel.pass && jn.pass;
    rep.fitted_constant = std::max(tel.fitted_constant, jn.fitted_constant);
    rep.details["telescoping"] = to_json(tel);
    rep.details["john_nirenberg"] = to_json(jn);
    rep.details["rho_ratio"] = rho_ratio(fam, b, rhos);
    return rep;
  }
  throw Error(ErrorCode::InvalidInput,
              "unknown suite '" + suite + "' (exact, bound, commutator, multilinear, domination, kprops, rbmo)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional integrals, commutators and maximal operators on finite metric measure spaces"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--space", o.space, "space file or generator (grid1d:n, grid2d:n, random:n[:seed], clustered:n[:k[:seed]])");
    sub->add_option("--weights", o.weights, "weight scheme for generated spaces (uniform, lognormal[:sigma], powerlaw[:a])");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--out", o.out, "write the report here instead of stdout");
    sub->add_option("--format", o.format, "text or structured")->check(CLI::IsMember({"text", "structured", "json"}));
    sub->add_flag("--timing", o.timing, "include wall time in the report");
  };
  auto kernel_opts = [&](CLI::App* sub) {
    sub->add_option("--alpha", o.alpha, "order of the fractional kernel");
    sub->add_option("--epsilon", o.epsilon, "regularity of the fractional kernel");
  };

  std::vector<std::pair<CLI::App*, std::function<VerificationReport(const Options&)>>> subs;
  auto add = [&](const char* name, const char* help, std::function<VerificationReport(const Options&)> fn) {
    auto* sub = app.add_subcommand(name, help);
    common(sub);
    subs.emplace_back(sub, std::move(fn));
    return sub;
  };

  auto* sc = add("space-check", "validate a space and report its structural constants", space_check);
  sc->add_option("--export", o.export_path, "write the space as a distance-matrix document");
  auto* kc = add("kernel-check", "size and regularity constants of the standard kernel", kernel_check);
  kernel_opts(kc);
  kc->add_option("--export", o.export_path, "write off-diagonal kernel entries as 'i j value' lines");
  auto* ap = add("apply", "fractional integral of a function", apply_cmd);
  kernel_opts(ap);
  ap->add_option("--function", o.function, "function file");
  auto* cm = add("commutator", "commutator [b, I_alpha] f", commutator_cmd);
  kernel_opts(cm);
  cm->add_option("--function", o.function, "function file");
  cm->add_option("--b", o.b, "b function file");
  auto* ml = add("multilinear", "iterated commutator with b_1, ..., b_k", multilinear_cmd);
  kernel_opts(ml);
  ml->add_option("--function", o.function, "function file");
  ml->add_option("--b", o.b, "b function file (repeatable)");
  auto* mx = add("maximal", "doubling and fractional maximal functions", maximal_cmd);
  mx->add_option("--function", o.function, "function file");
  mx->add_option("--r", o.r, "exponent r");
  mx->add_option("--eta", o.eta, "dilation eta");
  mx->add_option("--beta", o.beta, "fractional parameter beta");
  mx->add_option("--p", o.p, "norm exponent for the reported norms");
  auto* sh = add("sharp", "sharp maximal function", sharp_cmd);
  sh->add_option("--function", o.function, "function file");
  sh->add_option("--beta", o.beta, "K-coefficient parameter beta");
  auto* rb = add("rbmo", "RBMO norm with witnesses", rbmo_cmd);
  rb->add_option("--function,--b", o.function, "function file");
  rb->add_option("--rho", o.rho, "dilation rho");
  auto* kf = add("kcoeff", "K-coefficient of two concentric radii", kcoeff_cmd);
  kf->add_option("--center", o.center, "center point index");
  kf->add_option("--radius", o.radius, "inner radius");
  kf->add_option("--outer-radius", o.outer_radius, "outer radius");
  kf->add_option("--beta", o.beta, "parameter beta");
  auto* cv = add("cover", "greedy disjoint selection over random family balls", cover_cmd);
  cv->add_option("--count", o.count, "number of input balls");
  auto* wt = add("weaktype", "level-set check of the fractional maximal function", weaktype_cmd);
  wt->add_option("--function", o.function, "function file");
  wt->add_option("--r", o.r, "exponent r");
  wt->add_option("--eta", o.eta, "dilation eta");
  wt->add_option("--beta", o.beta, "fractional parameter beta");
  wt->add_option("--levels", o.levels, "number of levels");
  auto* vf = add("verify", "run a verification suite", verify_cmd);
  kernel_opts(vf);
  vf->add_option("--suite", o.suite, "exact, bound, commutator, multilinear, domination, kprops, rbmo");
  vf->add_option("--config", o.config, "experiment config file");
  vf->add_option("--b", o.b, "b function file (repeatable)");
  vf->add_option("--p", o.p, "exponent p");
  vf->add_option("--r", o.r, "exponent r");
  vf->add_option("--beta", o.beta, "parameter beta");
  vf->add_option("--rho", o.rho, "dilation rho");
  vf->add_option("--trials", o.trials, "trial functions per run");
  vf->add_option("--seeds", o.seeds, "number of consecutive seeds");
  vf->add_option("--tolerance", o.tolerance, "allowed max/min factor across seeds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    for (auto& [sub, fn] : subs) {
      if (!sub->parsed()) continue;
      Stopwatch sw;
      auto rep = fn(o);
      rep.wall_time_seconds = sw.seconds();
      emit(o, rep);
      return rep.pass ? 0 : 3;
    }
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    emit_error(o, std::string(to_string(e.code())), e.what(), e.witness());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    emit_error(o, "INVALID_INPUT", e.what(), {});
    return 1;
  }
  return 1;
}

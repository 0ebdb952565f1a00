#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nhfrac/errors.hpp"
#include "nhfrac/field.hpp"
#include "nhfrac/generators.hpp"
#include "nhfrac/harness.hpp"
#include "nhfrac/operators.hpp"
#include "nhfrac/space.hpp"

namespace nhfrac::io {

using nlohmann::json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail {

inline json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidInput, what + " is not valid JSON: " + e.what());
  }
}

inline void only_fields(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw Error(ErrorCode::InvalidInput, "field '" + where + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items())
    if (!ok.count(key)) throw Error(ErrorCode::InvalidInput, "unknown field '" + where + "." + key + "'");
}

inline const json& field(const json& obj, const std::string& where, const char* name) {
  if (!obj.contains(name)) throw Error(ErrorCode::InvalidInput, "missing field '" + where + "." + name + "'");
  return obj.at(name);
}

inline double real(const json& v, const std::string& name) {
  if (!v.is_number()) throw Error(ErrorCode::InvalidInput, "field '" + name + "' must be a number");
  return v.get<double>();
}

inline std::vector<double> reals(const json& v, const std::string& name) {
  if (!v.is_array()) throw Error(ErrorCode::InvalidInput, "field '" + name + "' must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(real(v[i], name + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<std::vector<double>> matrix(const json& v, const std::string& name) {
  if (!v.is_array()) throw Error(ErrorCode::InvalidInput, "field '" + name + "' must be an array of arrays");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(reals(v[i], name + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace detail

/// Space document:
///   {"points": {"coords": [[...], ...]} | {"distance_matrix": [[...], ...]},
///    "weights": [...],
///    "lambda": {"type": "power", "c": c, "k": k} | {"type": "table", "radii": [...], "values": [[...], ...]},
///    "dim_n": n}
/// "dim_n" and the power "c" are optional; a missing c is fitted to the data.
inline Space parse_space(const std::string& text) {
  using namespace detail;
  const json doc = parse_json(text, "space file");
  only_fields(doc, "space", {"points", "weights", "lambda", "dim_n"});
  const json& pts = field(doc, "space", "points");
  only_fields(pts, "points", {"coords", "distance_matrix"});
  if (pts.contains("coords") == pts.contains("distance_matrix"))
    throw Error(ErrorCode::InvalidInput, "field 'points' needs exactly one of 'coords' or 'distance_matrix'");
  const auto weights = reals(field(doc, "space", "weights"), "weights");
  std::optional<double> dim;
  if (doc.contains("dim_n")) dim = real(doc.at("dim_n"), "dim_n");

  std::vector<double> flat;
  const std::size_t n = weights.size();
  if (pts.contains("coords")) {
    const auto coords = matrix(pts.at("coords"), "points.coords");
    if (coords.size() != n) throw Error(ErrorCode::InvalidInput, "field 'points.coords' length differs from 'weights'");
    flat.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (coords[i].size() != coords[0].size())
        throw Error(ErrorCode::InvalidInput, "field 'points.coords' rows differ in length");
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t a = 0; a < coords[i].size(); ++a) s += (coords[i][a] - coords[j][a]) * (coords[i][a] - coords[j][a]);
        flat[i * n + j] = std::sqrt(s);
      }
    }
  } else {
    const auto m = matrix(pts.at("distance_matrix"), "points.distance_matrix");
    if (m.size() != n) throw Error(ErrorCode::InvalidInput, "field 'points.distance_matrix' size differs from 'weights'");
    for (const auto& row : m) {
      if (row.size() != n) throw Error(ErrorCode::InvalidInput, "field 'points.distance_matrix' is not square");
      flat.insert(flat.end(), row.begin(), row.end());
    }
  }

  const json& lam = field(doc, "space", "lambda");
  if (!lam.is_object() || !lam.contains("type") || !lam.at("type").is_string())
    throw Error(ErrorCode::InvalidInput, "field 'lambda.type' must be \"power\" or \"table\"");
  const auto type = lam.at("type").get<std::string>();
  if (type == "power") {
    only_fields(lam, "lambda", {"type", "c", "k"});
    const double k = real(field(lam, "lambda", "k"), "lambda.k");
    if (lam.contains("c"))
      return build_space(std::move(flat), weights, DominatingSpec::power(real(lam.at("c"), "lambda.c"), k), dim);
    const Space probe = build_space(flat, weights, DominatingSpec::power(1.0, k), dim);
    return build_space(std::move(flat), weights, DominatingSpec::power(fit_power_constant(probe, k), k),
                       probe.dim_n());
  }
  if (type == "table") {
    only_fields(lam, "lambda", {"type", "radii", "values"});
    auto spec = DominatingSpec::table(reals(field(lam, "lambda", "radii"), "lambda.radii"),
                                      matrix(field(lam, "lambda", "values"), "lambda.values"));
    return build_space(std::move(flat), weights, std::move(spec), dim);
  }
  throw Error(ErrorCode::InvalidInput, "field 'lambda.type' must be \"power\" or \"table\"");
}

/// Space argument: a built-in generator string (grid1d:n, grid2d:n,
/// random:n[:seed], clustered:n[:clusters[:seed]]) or a space file path.
inline Space load_space(const std::string& arg, std::uint64_t seed, const WeightScheme& weights = {}) {
  if (const auto fam = parse_space_family(arg)) return generate_space(*fam, weights, seed);
  return parse_space(read_file(arg));
}

inline json space_to_json(const Space& space) {
  json doc;
  const std::size_t n = space.size();
  json rows = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    auto row = space.distance_row(i);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  doc["points"] = {{"distance_matrix", rows}};
  doc["weights"] = std::vector<double>(space.weights().begin(), space.weights().end());
  if (const auto* p = space.lambda_spec().as_power()) {
    doc["lambda"] = {{"type", "power"}, {"c", p->c}, {"k", p->k}};
  } else {
    const auto* t = space.lambda_spec().as_table();
    doc["lambda"] = {{"type", "table"}, {"radii", t->radii}, {"values", t->values}};
  }
  doc["dim_n"] = space.dim_n();
  return doc;
}

/// Function file: a JSON array of reals or whitespace-separated reals.
inline FieldFunction parse_function(const std::string& text, std::size_t expected, const std::string& name) {
  std::vector<double> v;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    v = detail::reals(detail::parse_json(text, name), name);
  } else {
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidInput, name + ": '" + tok + "' is not a real number");
      }
    }
  }
  if (v.size() != expected)
    throw Error(ErrorCode::InvalidInput, name + " has " + std::to_string(v.size()) + " values, the space has " +
                                             std::to_string(expected) + " points");
  return FieldFunction(std::move(v));
}

inline FieldFunction load_function(const std::string& path, std::size_t expected) {
  return parse_function(read_file(path), expected, "function file '" + path + "'");
}

/// Experiment config document with the ExperimentConfig field names.
inline ExperimentConfig parse_config(const std::string& text) {
  using namespace detail;
  const json doc = parse_json(text, "config file");
  if (doc.is_object() && doc.contains("q"))
    throw Error(ErrorCode::InvalidInput, "field 'q' is derived from p, alpha and n and cannot be given");
  only_fields(doc, "config", {"space_family", "weight_scheme", "alpha", "p", "r", "epsilon", "k", "trials", "seed"});
  ExperimentConfig cfg;
  const auto& fam = field(doc, "config", "space_family");
  if (!fam.is_string()) throw Error(ErrorCode::InvalidInput, "field 'space_family' must be a string");
  const auto parsed = parse_space_family(fam.get<std::string>());
  if (!parsed) throw Error(ErrorCode::InvalidInput, "field 'space_family' is not a known generator");
  cfg.space_family = *parsed;
  if (doc.contains("weight_scheme")) {
    if (!doc.at("weight_scheme").is_string())
      throw Error(ErrorCode::InvalidInput, "field 'weight_scheme' must be a string");
    cfg.weights = parse_weight_scheme(doc.at("weight_scheme").get<std::string>());
  }
  if (doc.contains("alpha")) cfg.alpha = real(doc.at("alpha"), "alpha");
  if (doc.contains("p")) cfg.p = real(doc.at("p"), "p");
  if (doc.contains("r")) cfg.r = real(doc.at("r"), "r");
  if (doc.contains("epsilon")) cfg.epsilon = real(doc.at("epsilon"), "epsilon");
  auto count = [&](const char* name) {
    const auto& v = doc.at(name);
    if (!v.is_number_unsigned()) throw Error(ErrorCode::InvalidInput, std::string("field '") + name + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
  };
  if (doc.contains("k")) cfg.k = count("k");
  if (doc.contains("trials")) cfg.trials = count("trials");
  if (doc.contains("seed")) cfg.seed = count("seed");
  return cfg;
}

/// Off-diagonal kernel entries as "i j value" lines.
inline void write_kernel(std::ostream& out, const FractionalKernel& k) {
  out << std::setprecision(17);
  for (std::size_t x = 0; x < k.n; ++x)
    for (std::size_t y = 0; y < k.n; ++y)
      if (x != y) out << x << ' ' << y << ' ' << k(x, y) << '\n';
}

}  // namespace nhfrac::io

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace nhfrac {

/// Result of a property or bound experiment. Everything except the wall time
/// is a deterministic function of the inputs and the seed.
struct VerificationReport {
  std::string id;
  bool pass = true;
  double fitted_constant = 0.0;
  std::vector<double> ratios;
  std::uint64_t seed = 0;
  std::optional<std::size_t> witness_function;
  std::optional<std::size_t> witness_point;
  nlohmann::json details = nlohmann::json::object();
  double wall_time_seconds = 0.0;
};

inline nlohmann::json to_json(const VerificationReport& r, bool include_timing = false) {
  nlohmann::json j;
  j["id"] = r.id;
  j["pass"] = r.pass;
  j["fitted_constant"] = r.fitted_constant;
  j["ratios"] = r.ratios;
  j["seed"] = r.seed;
  j["witness_function"] = r.witness_function ? nlohmann::json(*r.witness_function) : nlohmann::json();
  j["witness_point"] = r.witness_point ? nlohmann::json(*r.witness_point) : nlohmann::json();
  j["details"] = r.details;
  if (include_timing) j["wall_time_seconds"] = r.wall_time_seconds;
  return j;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace nhfrac

#pragma once

// JSON report emitted by the command-line tool.  Schema is stable; complex
// numbers are [re, im] arrays; timings live under a single "timings_ms" key
// so reports can be compared for determinism after dropping it.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ellsos/theta.hpp"
#include "ellsos/version.hpp"

namespace ellsos {

using json = nlohmann::json;

inline json to_json(cx v) { return json::array({v.real(), v.imag()}); }

struct CheckResult {
  std::string name;
  std::string context;           // e.g. "L=3 method=permsum"
  std::optional<cx> value;       // computed quantity, when one exists
  std::optional<double> residual;
  std::optional<double> tolerance;
  bool pass = true;
  std::string note;              // failure reason / caught error text

  json to_json_obj() const {
    json j{{"name", name}, {"pass", pass}};
    if (!context.empty()) j["context"] = context;
    if (value) j["value"] = to_json(*value);
    if (residual) j["residual"] = *residual;
    if (tolerance) j["tolerance"] = *tolerance;
    if (!note.empty()) j["note"] = note;
    return j;
  }
};

struct ReportDocument {
  std::string command;
  json input = json::object();
  std::uint64_t rng_seed = 0;
  std::vector<CheckResult> results;
  bool pass = true;
  double total_ms = 0.0;

  void add(CheckResult r) {
    pass = pass && r.pass;
    results.push_back(std::move(r));
  }

  json to_json_obj() const {
    json arr = json::array();
    for (const auto& r : results) arr.push_back(r.to_json_obj());
    return json{{"tool", "ellsos"},
                {"version", version},
                {"command", command},
                {"input", input},
                {"seed", rng_seed},
                {"results", arr},
                {"pass", pass},
                {"timings_ms", json{{"total", total_ms}}}};
  }
};

}  // namespace ellsos

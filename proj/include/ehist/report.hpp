#pragma once

// Machine-readable results of a CLI run.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace ehist {

struct Verdict {
  std::string name;
  // "eq": |value - expected| <= tolerance
  // "le": value <= expected + tolerance
  // "ge": value >= expected - tolerance
  // "lt": value < expected (strict)
  std::string relation;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;

  static Verdict eq(std::string name, double value, double expected, double tolerance);
  static Verdict le(std::string name, double value, double bound, double tolerance);
  static Verdict ge(std::string name, double value, double bound, double tolerance);
  static Verdict lt(std::string name, double value, double bound);

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct Report {
  std::string task;
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json results = nlohmann::json::object();
  std::vector<Verdict> verdicts;
  nlohmann::json tolerances = nlohmann::json::object();
  std::optional<std::uint64_t> seed;
  std::optional<double> wall_time_s;

  bool all_pass() const;
  void add(Verdict v) { verdicts.push_back(std::move(v)); }

  friend bool operator==(const Report&, const Report&) = default;
};

void to_json(nlohmann::json& j, const Verdict& v);
void from_json(const nlohmann::json& j, Verdict& v);
void to_json(nlohmann::json& j, const Report& r);
void from_json(const nlohmann::json& j, Report& r);

// Pretty JSON; doubles are printed with round-trip precision.
std::string to_structured(const Report& r);
Report parse_report(const std::string& text);
// Human-readable table.
std::string to_table(const Report& r);

}  // namespace ehist

#include "ehist/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace ehist {

using nlohmann::json;

Verdict Verdict::eq(std::string name, double value, double expected, double tolerance) {
  return {std::move(name), "eq", value, expected, tolerance, std::abs(value - expected) <= tolerance};
}

Verdict Verdict::le(std::string name, double value, double bound, double tolerance) {
  return {std::move(name), "le", value, bound, tolerance, value <= bound + tolerance};
}

Verdict Verdict::ge(std::string name, double value, double bound, double tolerance) {
  return {std::move(name), "ge", value, bound, tolerance, value >= bound - tolerance};
}

Verdict Verdict::lt(std::string name, double value, double bound) {
  return {std::move(name), "lt", value, bound, 0.0, value < bound};
}

bool Report::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

void to_json(json& j, const Verdict& v) {
  j = json{{"name", v.name},         {"relation", v.relation},   {"value", v.value},
           {"expected", v.expected}, {"tolerance", v.tolerance}, {"pass", v.pass}};
}

void from_json(const json& j, Verdict& v) {
  j.at("name").get_to(v.name);
  j.at("relation").get_to(v.relation);
  j.at("value").get_to(v.value);
  j.at("expected").get_to(v.expected);
  j.at("tolerance").get_to(v.tolerance);
  j.at("pass").get_to(v.pass);
}

void to_json(json& j, const Report& r) {
  j = json{{"task", r.task},
           {"inputs", r.inputs},
           {"results", r.results},
           {"verdicts", r.verdicts},
           {"tolerances", r.tolerances},
           {"seed", r.seed ? json(*r.seed) : json(nullptr)}};
  if (r.wall_time_s) j["wall_time_s"] = *r.wall_time_s;
}

void from_json(const json& j, Report& r) {
  j.at("task").get_to(r.task);
  r.inputs = j.at("inputs");
  r.results = j.at("results");
  j.at("verdicts").get_to(r.verdicts);
  r.tolerances = j.at("tolerances");
  const json& seed = j.at("seed");
  r.seed = seed.is_null() ? std::nullopt : std::optional<std::uint64_t>(seed.get<std::uint64_t>());
  if (j.contains("wall_time_s")) {
    r.wall_time_s = j.at("wall_time_s").get<double>();
  } else {
    r.wall_time_s.reset();
  }
}

std::string to_structured(const Report& r) { return json(r).dump(2) + "\n"; }

Report parse_report(const std::string& text) { return json::parse(text).get<Report>(); }

namespace {

std::string scalar(const json& v) {
  if (v.is_number_float()) {
    std::ostringstream os;
    os << std::setprecision(12) << v.get<double>();
    return os.str();
  }
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

// Large arrays are summarized; the structured report keeps them whole.
std::string cell(const json& value) {
  if (value.is_primitive()) return scalar(value);
  const std::string full = value.dump();
  if (full.size() <= 160 || !value.is_array()) return full;
  if (!value.empty() && value[0].is_array() && !value[0].empty() && value[0][0].is_array()) {
    return "<" + std::to_string(value.size()) + "x" + std::to_string(value[0].size()) + " matrix>";
  }
  return "<array of " + std::to_string(value.size()) + ">";
}

void rows(std::ostringstream& os, const json& obj, std::size_t width) {
  for (const auto& [key, value] : obj.items()) {
    os << "  " << std::left << std::setw(static_cast<int>(width)) << key << "  ";
    os << cell(value) << "\n";
  }
}

std::size_t key_width(const json& obj) {
  std::size_t w = 8;
  for (const auto& [key, value] : obj.items()) w = std::max(w, key.size());
  return w;
}

}  // namespace

std::string to_table(const Report& r) {
  std::ostringstream os;
  os << "task: " << r.task << "\n";
  if (r.seed) os << "seed: " << *r.seed << "\n";
  if (!r.results.empty()) {
    os << "results:\n";
    rows(os, r.results, key_width(r.results));
  }
  if (!r.verdicts.empty()) {
    std::size_t w = 8;
    for (const auto& v : r.verdicts) w = std::max(w, v.name.size());
    os << "verdicts:\n";
    for (const auto& v : r.verdicts) {
      os << "  " << (v.pass ? "PASS" : "FAIL") << "  " << std::left << std::setw(static_cast<int>(w)) << v.name
         << std::setprecision(12) << "  value=" << v.value << "  " << v.relation << " " << v.expected
         << "  tol=" << v.tolerance << "\n";
    }
  }
  if (r.wall_time_s) os << "wall time: " << std::setprecision(4) << *r.wall_time_s << " s\n";
  return os.str();
}

}  // namespace ehist

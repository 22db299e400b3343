#pragma once

// Scenario files (version 1): a JSON document holding a time grid, bridges,
// named histories and a task block. docs/scenario-format.md has the schema.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ehist/errors.hpp"
#include "ehist/histories.hpp"
#include "ehist/lgi.hpp"
#include "ehist/path_integral.hpp"

namespace ehist::scenario {

using nlohmann::json;

inline constexpr int kVersion = 1;

// Malformed input. `where` is a field path such as histories[1].terms[0],
// or "line L, column C" for syntax errors.
class ScenarioError : public ValidationError {
 public:
  ScenarioError(std::string where, const std::string& message);
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

struct NamedHistory {
  std::string name;
  HistoryVector history;
};

struct Scenario {
  int version = kVersion;
  std::optional<TimeGrid> grid;
  std::optional<BridgingSchedule> schedule;
  std::vector<NamedHistory> histories;
  json task = json::object();  // empty when absent
  json document;

  std::string task_type() const;
  const NamedHistory& history(const std::string& name, const std::string& where) const;
};

Scenario parse(std::string_view text);
Scenario load(const std::string& path);

// Field decoders. Complex numbers are [re, im] or plain reals, vectors are
// arrays of complex numbers and matrices arrays of rows.
cplx to_complex(const json& j, const std::string& where);
CVector to_vector(const json& j, const std::string& where);
CMatrix to_matrix(const json& j, const std::string& where);
double to_number(const json& j, const std::string& where);
std::int64_t to_integer(const json& j, const std::string& where);
bool to_bool(const json& j, const std::string& where);
std::string to_string(const json& j, const std::string& where);

json from_complex(cplx z);
json from_vector(const CVector& v);
json from_matrix(const CMatrix& m);

// Field `key` of `obj`, or nullptr when absent.
const json* find(const json& obj, const std::string& key);
const json& require(const json& obj, const std::string& key, const std::string& where);
// Throws ScenarioError for any key of obj not in `allowed`.
void only_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where);

// Terms of a history on `grid`: {"terms": [{"amplitude": z, "slots": [...]}]}.
HistoryVector parse_history(const json& h, const TimeGrid& grid, const std::string& where);

// The per-slot specification used inside history terms: "identity",
// "ket:K", {"ket": [...]} or {"projector": M}.
CMatrix slot_operator(const json& entry, Index dim, const std::string& where);

path::PathExpansion to_path_expansion(const json& task, const std::string& where);
// Explicit LGI settings: rho (or psi), evolution, alice [A1, A2], bob [B1, B2].
lgi::LgiScenario to_lgi_scenario(const json& task, const std::string& where);

}  // namespace ehist::scenario

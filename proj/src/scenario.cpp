#include "ehist/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace ehist::scenario {

ScenarioError::ScenarioError(std::string where, const std::string& message)
    : ValidationError("scenario: " + where + ": " + message), where_(std::move(where)) {}

namespace {

std::string at(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }
std::string at(const std::string& where, std::size_t i) { return where + "[" + std::to_string(i) + "]"; }

// Runs f, tagging library validation errors with the field path.
template <class F>
auto tagged(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const ScenarioError&) {
    throw;
  } catch (const Error& e) {
    throw ScenarioError(where, e.what());
  }
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

TimeGrid parse_grid(const json& g, const std::string& where) {
  if (!g.is_object()) throw ScenarioError(where, "expected an object");
  only_keys(g, {"slots", "dim", "dims", "labels"}, where);
  std::vector<Index> dims;
  if (const json* ds = find(g, "dims")) {
    if (!ds->is_array() || ds->empty()) throw ScenarioError(at(where, "dims"), "expected a nonempty array");
    for (std::size_t i = 0; i < ds->size(); ++i) dims.push_back(to_integer((*ds)[i], at(at(where, "dims"), i)));
    if (const json* s = find(g, "slots")) {
      if (to_integer(*s, at(where, "slots")) != static_cast<std::int64_t>(dims.size())) {
        throw ScenarioError(at(where, "slots"), "disagrees with the length of dims");
      }
    }
  } else {
    const auto slots = to_integer(require(g, "slots", where), at(where, "slots"));
    const auto dim = to_integer(require(g, "dim", where), at(where, "dim"));
    if (slots < 1) throw ScenarioError(at(where, "slots"), "must be at least 1");
    dims.assign(static_cast<std::size_t>(slots), dim);
  }
  std::vector<double> labels;
  if (const json* ls = find(g, "labels")) {
    if (!ls->is_array() || ls->size() != dims.size()) {
      throw ScenarioError(at(where, "labels"), "expected one label per slot");
    }
    for (std::size_t i = 0; i < ls->size(); ++i) labels.push_back(to_number((*ls)[i], at(at(where, "labels"), i)));
  } else {
    for (std::size_t i = 0; i < dims.size(); ++i) labels.push_back(static_cast<double>(i));
  }
  return tagged(where, [&] { return TimeGrid(labels, dims); });
}

CMatrix parse_bridge(const json& b, const TimeGrid& grid, std::size_t i, const std::string& where) {
  const Index d = grid.dim(i);
  if (grid.dim(i + 1) != d) throw ScenarioError(where, "bridged slots must have equal dimension");
  if (b.is_string()) {
    const std::string name = b.get<std::string>();
    if (name == "identity") return identity(d);
    if (name == "hadamard") {
      if (d != 2) throw ScenarioError(where, "hadamard needs qubit slots");
      return hadamard();
    }
    throw ScenarioError(where, "unknown bridge '" + name + "' (identity, hadamard)");
  }
  if (!b.is_object()) throw ScenarioError(where, "expected a name or an object");
  if (const json* u = find(b, "unitary")) {
    only_keys(b, {"unitary"}, where);
    return to_matrix(*u, at(where, "unitary"));
  }
  if (const json* h = find(b, "hamiltonian")) {
    only_keys(b, {"hamiltonian", "dt"}, where);
    const CMatrix hm = to_matrix(*h, at(where, "hamiltonian"));
    const double dt = find(b, "dt") ? to_number(b["dt"], at(where, "dt")) : grid.label(i + 1) - grid.label(i);
    return tagged(at(where, "hamiltonian"), [&] { return expm_hermitian(hm, dt); });
  }
  throw ScenarioError(where, "expected 'unitary' or 'hamiltonian'");
}

}  // namespace

HistoryVector parse_history(const json& h, const TimeGrid& grid, const std::string& where) {
  const json& terms = require(h, "terms", where);
  const std::string tw = at(where, "terms");
  if (!terms.is_array()) throw ScenarioError(tw, "expected an array");
  std::vector<HistoryTerm> out;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const std::string w = at(tw, t);
    const json& term = terms[t];
    if (!term.is_object()) throw ScenarioError(w, "expected an object");
    only_keys(term, {"amplitude", "slots"}, w);
    const cplx amp = find(term, "amplitude") ? to_complex(term["amplitude"], at(w, "amplitude")) : cplx(1.0);
    const json& slots = require(term, "slots", w);
    if (!slots.is_array() || slots.size() != grid.size()) {
      throw ScenarioError(at(w, "slots"), "expected " + std::to_string(grid.size()) + " slot specs in time order");
    }
    std::vector<CMatrix> ops;
    for (std::size_t s = 0; s < slots.size(); ++s) {
      ops.push_back(slot_operator(slots[s], grid.dim(s), at(at(w, "slots"), s)));
    }
    out.push_back({amp, tagged(at(w, "slots"), [&] { return ElementaryHistory(grid, ops); })});
  }
  return HistoryVector(grid, std::move(out));
}

std::string Scenario::task_type() const {
  const json* t = find(task, "type");
  return t ? t->get<std::string>() : std::string();
}

const NamedHistory& Scenario::history(const std::string& name, const std::string& where) const {
  for (const auto& h : histories) {
    if (h.name == name) return h;
  }
  throw ScenarioError(where, "no history named '" + name + "'");
}

const json* find(const json& obj, const std::string& key) {
  if (!obj.is_object()) return nullptr;
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object()) throw ScenarioError(where, "expected an object");
  const json* v = find(obj, key);
  if (!v) throw ScenarioError(at(where, key), "missing required field");
  return *v;
}

void only_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ScenarioError(at(where, key), "unknown field");
  }
}

cplx to_complex(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    const cplx z(j[0].get<double>(), j[1].get<double>());
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw ScenarioError(where, "non-finite number");
    return z;
  }
  throw ScenarioError(where, "expected a complex number [re, im] or a real");
}

CVector to_vector(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ScenarioError(where, "expected a nonempty array of complex numbers");
  CVector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = to_complex(j[i], at(where, i));
  return v;
}

CMatrix to_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw ScenarioError(where, "expected an array of rows");
  const std::size_t cols = j[0].size();
  CMatrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string rw = at(where, r);
    if (!j[r].is_array() || j[r].size() != cols) throw ScenarioError(rw, "rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Index>(r), static_cast<Index>(c)) = to_complex(j[r][c], at(rw, c));
    }
  }
  return m;
}

double to_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ScenarioError(where, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ScenarioError(where, "non-finite number");
  return x;
}

std::int64_t to_integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ScenarioError(where, "expected an integer");
  return j.get<std::int64_t>();
}

bool to_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) throw ScenarioError(where, "expected true or false");
  return j.get<bool>();
}

std::string to_string(const json& j, const std::string& where) {
  if (!j.is_string()) throw ScenarioError(where, "expected a string");
  return j.get<std::string>();
}

json from_complex(cplx z) { return json::array({z.real(), z.imag()}); }

json from_vector(const CVector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(from_complex(v(i)));
  return out;
}

json from_matrix(const CMatrix& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(from_complex(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

CMatrix slot_operator(const json& entry, Index dim, const std::string& where) {
  if (entry.is_string()) {
    const std::string s = entry.get<std::string>();
    if (s == "identity") return identity(dim);
    if (s.rfind("ket:", 0) == 0) {
      std::size_t used = 0;
      long k = -1;
      try {
        k = std::stol(s.substr(4), &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != s.size() - 4 || k < 0 || k >= dim) {
        throw ScenarioError(where, "ket label must be an integer in [0, " + std::to_string(dim) + ")");
      }
      return projector(basis_vector(dim, k));
    }
    throw ScenarioError(where, "unknown slot operator '" + s + "' (identity, ket:K)");
  }
  if (entry.is_object()) {
    if (const json* k = find(entry, "ket")) {
      only_keys(entry, {"ket"}, where);
      const CVector v = to_vector(*k, at(where, "ket"));
      if (v.size() != dim) throw ScenarioError(at(where, "ket"), "length must equal the slot dimension");
      if (!(v.norm() > 1e-12)) throw ScenarioError(at(where, "ket"), "zero vector");
      return projector(v / v.norm());
    }
    if (const json* p = find(entry, "projector")) {
      only_keys(entry, {"projector"}, where);
      const CMatrix m = to_matrix(*p, at(where, "projector"));
      if (m.rows() != dim || m.cols() != dim) {
        throw ScenarioError(at(where, "projector"), "must be square of the slot dimension");
      }
      return m;
    }
  }
  throw ScenarioError(where, "expected \"identity\", \"ket:K\", {\"ket\": ...} or {\"projector\": ...}");
}

path::PathExpansion to_path_expansion(const json& task, const std::string& where) {
  only_keys(task, {"type", "hamiltonian", "hamiltonians", "total_time", "slices", "bases", "initial", "final", "cap"},
            where);
  path::PathExpansion p;
  if (const json* h = find(task, "hamiltonian")) {
    if (find(task, "hamiltonians")) throw ScenarioError(at(where, "hamiltonians"), "give hamiltonian or hamiltonians");
    p.hamiltonians.push_back(to_matrix(*h, at(where, "hamiltonian")));
  } else {
    const json& hs = require(task, "hamiltonians", where);
    if (!hs.is_array() || hs.empty()) throw ScenarioError(at(where, "hamiltonians"), "expected a nonempty array");
    for (std::size_t i = 0; i < hs.size(); ++i) {
      p.hamiltonians.push_back(to_matrix(hs[i], at(at(where, "hamiltonians"), i)));
    }
  }
  p.total_time = to_number(require(task, "total_time", where), at(where, "total_time"));
  const auto n = to_integer(require(task, "slices", where), at(where, "slices"));
  if (n < 0) throw ScenarioError(at(where, "slices"), "must be nonnegative");
  p.slices = static_cast<std::size_t>(n);
  if (const json* bs = find(task, "bases")) {
    if (!bs->is_array()) throw ScenarioError(at(where, "bases"), "expected an array");
    for (std::size_t i = 0; i < bs->size(); ++i) p.bases.push_back(to_matrix((*bs)[i], at(at(where, "bases"), i)));
  }
  p.initial = to_vector(require(task, "initial", where), at(where, "initial"));
  p.final = to_vector(require(task, "final", where), at(where, "final"));
  tagged(where, [&] {
    p.validate();
    return 0;
  });
  return p;
}

lgi::LgiScenario to_lgi_scenario(const json& task, const std::string& where) {
  auto pair = [&](const char* key) {
    const json& arr = require(task, key, where);
    if (!arr.is_array() || arr.size() != 2) throw ScenarioError(at(where, key), "expected two observables");
    std::array<lgi::DichotomicObservable, 2> out{
        tagged(at(at(where, key), 0), [&] { return lgi::DichotomicObservable(to_matrix(arr[0], at(at(where, key), 0))); }),
        tagged(at(at(where, key), 1), [&] { return lgi::DichotomicObservable(to_matrix(arr[1], at(at(where, key), 1))); })};
    return out;
  };
  CMatrix rho;
  if (const json* r = find(task, "rho")) {
    rho = to_matrix(*r, at(where, "rho"));
  } else {
    const CVector psi = to_vector(require(task, "psi", where), at(where, "psi"));
    if (!(psi.norm() > 1e-12)) throw ScenarioError(at(where, "psi"), "zero vector");
    rho = projector(psi / psi.norm());
  }
  lgi::LgiScenario sc{.rho = rho,
                      .evolution = find(task, "evolution") ? to_matrix(task["evolution"], at(where, "evolution"))
                                                           : identity(rho.rows()),
                      .alice = pair("alice"),
                      .bob = pair("bob")};
  tagged(where, [&] {
    sc.validate();
    return 0;
  });
  return sc;
}

Scenario parse(std::string_view text) {
  Scenario sc;
  try {
    sc.document = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ScenarioError("line " + std::to_string(line) + ", column " + std::to_string(col), e.what());
  }
  const json& doc = sc.document;
  if (!doc.is_object()) throw ScenarioError("(root)", "expected an object");
  only_keys(doc, {"version", "grid", "bridges", "histories", "task", "description"}, "");
  const auto version = to_integer(require(doc, "version", ""), "version");
  if (version != kVersion) throw ScenarioError("version", "unsupported version " + std::to_string(version));
  sc.version = static_cast<int>(version);

  if (const json* g = find(doc, "grid")) sc.grid = parse_grid(*g, "grid");

  if (const json* bs = find(doc, "bridges")) {
    if (!sc.grid) throw ScenarioError("bridges", "needs a grid");
    if (!bs->is_array() || bs->size() + 1 != sc.grid->size()) {
      throw ScenarioError("bridges", "expected " + std::to_string(sc.grid->size() - 1) + " bridges, B(t_{i+1}, t_i)");
    }
    std::vector<CMatrix> bridges;
    for (std::size_t i = 0; i < bs->size(); ++i) bridges.push_back(parse_bridge((*bs)[i], *sc.grid, i, at("bridges", i)));
    sc.schedule = tagged("bridges", [&] { return BridgingSchedule(*sc.grid, bridges); });
  } else if (sc.grid) {
    sc.schedule = BridgingSchedule::identity(*sc.grid);
  }

  if (const json* hs = find(doc, "histories")) {
    if (!sc.grid) throw ScenarioError("histories", "needs a grid");
    if (!hs->is_array()) throw ScenarioError("histories", "expected an array");
    for (std::size_t i = 0; i < hs->size(); ++i) {
      const std::string w = at("histories", i);
      const json& h = (*hs)[i];
      if (!h.is_object()) throw ScenarioError(w, "expected an object");
      only_keys(h, {"name", "terms"}, w);
      const std::string name = find(h, "name") ? to_string(h["name"], at(w, "name")) : "h" + std::to_string(i);
      for (const auto& prev : sc.histories) {
        if (prev.name == name) throw ScenarioError(at(w, "name"), "duplicate history name '" + name + "'");
      }
      sc.histories.push_back({name, parse_history(h, *sc.grid, w)});
    }
  }

  if (const json* t = find(doc, "task")) {
    if (!t->is_object()) throw ScenarioError("task", "expected an object");
    to_string(require(*t, "type", "task"), "task.type");
    sc.task = *t;
  }
  return sc;
}

Scenario load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

}  // namespace ehist::scenario

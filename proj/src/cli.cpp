#include "ehist/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "ehist/errors.hpp"
#include "ehist/lgi.hpp"
#include "ehist/mzi.hpp"
#include "ehist/path_integral.hpp"
#include "ehist/scenario.hpp"
#include "ehist/temporal.hpp"

namespace ehist::cli {

namespace {

using nlohmann::json;
using scenario::from_complex;
using scenario::from_matrix;
using scenario::ScenarioError;

json from_real_vector(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

scenario::Scenario load_required(const Options& o) {
  if (!o.scenario) throw ValidationError(o.command + ": a scenario file is required");
  return scenario::load(*o.scenario);
}

// The task block of `sc` when it is of `type`, an empty object when there is
// no task block.
json task_for(const scenario::Scenario& sc, const std::string& type) {
  const std::string t = sc.task_type();
  if (t.empty()) return json::object();
  if (t != type) throw ScenarioError("task.type", "is '" + t + "' but the command expects '" + type + "'");
  return sc.task;
}

const scenario::NamedHistory& pick_history(const scenario::Scenario& sc, const json& task) {
  if (const json* name = scenario::find(task, "history")) {
    return sc.history(scenario::to_string(*name, "task.history"), "task.history");
  }
  if (sc.histories.size() != 1) throw ScenarioError("task.history", "required when the scenario holds several histories");
  return sc.histories.front();
}

std::vector<const scenario::NamedHistory*> pick_histories(const scenario::Scenario& sc, const json& task,
                                                          const char* key) {
  std::vector<const scenario::NamedHistory*> out;
  if (const json* names = scenario::find(task, key)) {
    const std::string w = std::string("task.") + key;
    if (!names->is_array()) throw ScenarioError(w, "expected an array of history names");
    for (std::size_t i = 0; i < names->size(); ++i) {
      const std::string wi = w + "[" + std::to_string(i) + "]";
      out.push_back(&sc.history(scenario::to_string((*names)[i], wi), wi));
    }
  } else {
    for (const auto& h : sc.histories) out.push_back(&h);
  }
  if (out.empty()) throw ScenarioError("histories", "no histories given");
  return out;
}

// Numeric expectations in task.expect become verdicts.
void expectations(Report& r, const json& task, const json& computed, double tol) {
  const json* ex = scenario::find(task, "expect");
  if (!ex) return;
  if (!ex->is_object()) throw ScenarioError("task.expect", "expected an object");
  for (const auto& [key, value] : ex->items()) {
    const std::string w = "task.expect." + key;
    if (!computed.contains(key) || !computed[key].is_number()) throw ScenarioError(w, "no such scalar result");
    r.add(Verdict::eq(key, computed[key].get<double>(), scenario::to_number(value, w), tol));
  }
}

std::uint64_t seed_or(const Options& o, const json& task, std::uint64_t fallback) {
  if (o.seed) return *o.seed;
  if (const json* s = scenario::find(task, "seed")) return static_cast<std::uint64_t>(scenario::to_integer(*s, "task.seed"));
  return fallback;
}

std::size_t restarts_or(const Options& o, const json& task, std::size_t fallback) {
  std::int64_t r = static_cast<std::int64_t>(fallback);
  if (o.restarts) {
    r = static_cast<std::int64_t>(*o.restarts);
  } else if (const json* s = scenario::find(task, "restarts")) {
    r = scenario::to_integer(*s, "task.restarts");
  }
  if (r < 1) throw ValidationError("restarts must be at least 1");
  return static_cast<std::size_t>(r);
}

Index dim_or(const Options& o, const json& task, const char* key, Index fallback) {
  Index d = fallback;
  if (o.dim) {
    d = *o.dim;
  } else if (const json* s = scenario::find(task, key)) {
    d = scenario::to_integer(*s, std::string("task.") + key);
  }
  if (d < 2) throw ValidationError("dimension must be at least 2");
  return d;
}

Report check_consistency_cmd(const Options& o) {
  const auto sc = load_required(o);
  const json task = task_for(sc, "consistency");
  scenario::only_keys(task, {"type", "members", "coefficients", "fit_completeness", "assert"}, "task");
  const auto members = pick_histories(sc, task, "members");
  std::vector<HistoryVector> hs;
  json names = json::array();
  for (const auto* m : members) {
    hs.push_back(m->history);
    names.push_back(m->name);
  }
  ConsistencyOptions opts;
  opts.tol = o.tol;
  if (const json* c = scenario::find(task, "coefficients")) {
    if (!c->is_array() || c->size() != hs.size()) {
      throw ScenarioError("task.coefficients", "expected one coefficient per member");
    }
    std::vector<cplx> cs;
    for (std::size_t i = 0; i < c->size(); ++i) {
      cs.push_back(scenario::to_complex((*c)[i], "task.coefficients[" + std::to_string(i) + "]"));
    }
    opts.coefficients = cs;
  }
  if (const json* f = scenario::find(task, "fit_completeness")) opts.fit_completeness = scenario::to_bool(*f, "task.fit_completeness");
  const bool asserted = scenario::find(task, "assert") ? scenario::to_bool(task["assert"], "task.assert") : true;

  const ConsistencyReport cr = check_consistency(HistoryFamily(hs, *sc.schedule), opts);
  Report r;
  r.results["members"] = names;
  r.results["gram"] = from_matrix(cr.gram);
  r.results["normalized_gram"] = from_matrix(cr.normalized_gram);
  r.results["max_off_diagonal"] = cr.max_off_diagonal;
  r.results["consistent"] = cr.consistent;
  r.results["zero_weight_members"] = cr.zero_weight_members;
  r.results["non_normalized_members"] = cr.non_normalized_members;
  r.results["duplicate_pairs"] = cr.duplicate_pairs;
  if (cr.completeness_residual) {
    r.results["completeness_residual"] = *cr.completeness_residual;
    json cs = json::array();
    for (cplx z : cr.completeness_coefficients) cs.push_back(from_complex(z));
    r.results["completeness_coefficients"] = cs;
  }
  if (asserted) r.add(Verdict::lt("consistent", cr.max_off_diagonal, o.tol));
  return r;
}

Report weight_cmd(const Options& o) {
  const auto sc = load_required(o);
  const json task = task_for(sc, "weight");
  scenario::only_keys(task, {"type", "histories", "rho", "expect"}, "task");
  std::optional<CMatrix> rho;
  if (const json* m = scenario::find(task, "rho")) rho = scenario::to_matrix(*m, "task.rho");
  Report r;
  json weights = json::object();
  for (const auto* h : pick_histories(sc, task, "histories")) {
    weights[h->name] = rho ? weight(h->history, *sc.schedule, *rho) : weight(h->history, *sc.schedule);
  }
  r.results["weights"] = weights;
  expectations(r, task, weights, o.tol);
  return r;
}

Report reduce_cmd(const Options& o) {
  const auto sc = load_required(o);
  const json task = task_for(sc, "reduce");
  scenario::only_keys(task, {"type", "history", "traced", "absorb_bridges", "basis_rotations", "target", "expect"},
                      "task");
  const auto& h = pick_history(sc, task);
  const json& traced_j = scenario::require(task, "traced", "task");
  if (!traced_j.is_array()) throw ScenarioError("task.traced", "expected an array of slot indices");
  std::vector<std::size_t> traced;
  for (std::size_t i = 0; i < traced_j.size(); ++i) {
    const auto s = scenario::to_integer(traced_j[i], "task.traced[" + std::to_string(i) + "]");
    if (s < 0) throw ScenarioError("task.traced[" + std::to_string(i) + "]", "must be nonnegative");
    traced.push_back(static_cast<std::size_t>(s));
  }
  temporal::ReductionOptions opts;
  opts.tol = o.tol;
  if (const json* a = scenario::find(task, "absorb_bridges")) opts.absorb_bridges = scenario::to_bool(*a, "task.absorb_bridges");
  if (const json* rots = scenario::find(task, "basis_rotations")) {
    if (!rots->is_array()) throw ScenarioError("task.basis_rotations", "expected an array");
    for (std::size_t i = 0; i < rots->size(); ++i) {
      const std::string w = "task.basis_rotations[" + std::to_string(i) + "]";
      const auto slot = scenario::to_integer(scenario::require((*rots)[i], "slot", w), w + ".slot");
      opts.basis_rotations.emplace_back(static_cast<std::size_t>(slot),
                                        scenario::to_matrix(scenario::require((*rots)[i], "unitary", w), w + ".unitary"));
    }
  }
  const auto red = temporal::partial_trace_times(h.history, *sc.schedule, traced, opts);
  Report r;
  json res;
  res["history"] = h.name;
  res["retained"] = red.retained;
  res["trace"] = red.trace;
  res["purity"] = red.purity();
  res["eigenvalues"] = from_real_vector(red.eigenvalues());
  res["operator"] = from_matrix(red.op);
  res["dropped_bridges"] = red.dropped_bridges;
  if (const json* t = scenario::find(task, "target")) {
    scenario::only_keys(*t, {"terms"}, "task.target");
    const HistoryVector target = scenario::parse_history(*t, red.grid, "task.target");
    res["fidelity"] = temporal::fidelity(red, temporal::tensor_normalize(target), o.tol);
  }
  r.results = res;
  expectations(r, task, res, o.tol);
  return r;
}

Report entanglement_cmd(const Options& o) {
  const auto sc = load_required(o);
  const json task = task_for(sc, "entanglement");
  scenario::only_keys(task, {"type", "history", "cut", "expect"}, "task");
  const auto& h = pick_history(sc, task);
  const auto cut = scenario::find(task, "cut") ? scenario::to_integer(task["cut"], "task.cut") : 1;
  if (cut < 1 || static_cast<std::size_t>(cut) >= h.history.grid().size()) {
    throw ScenarioError("task.cut", "must split the grid into two nonempty parts");
  }
  const auto spectrum = temporal::temporal_schmidt(h.history, static_cast<std::size_t>(cut));
  Report r;
  json res;
  res["history"] = h.name;
  res["cut"] = cut;
  res["schmidt"] = spectrum;
  res["schmidt_rank"] = std::count_if(spectrum.begin(), spectrum.end(), [&](double s) { return s > o.tol; });
  res["entropy"] = entanglement_entropy(spectrum);
  res["tensor_norm_squared"] = temporal::tensor_norm_squared(h.history);
  res["weight"] = weight(h.history, *sc.schedule);
  r.results = res;
  expectations(r, task, res, o.tol);
  return r;
}

Report mzi_demo_cmd(const Options& o) {
  const BridgingSchedule s = mzi::schedule();
  Report r;
  const double w2 = weight(mzi::full_history(2), s);
  const double w1 = weight(mzi::full_history(1), s);
  ConsistencyOptions copts;
  copts.tol = o.tol;
  const ConsistencyReport cr = check_consistency(mzi::t1_branch_family(), copts);

  temporal::ReductionOptions absorb;
  absorb.tol = o.tol;
  absorb.absorb_bridges = true;
  const auto lam = temporal::partial_trace_times(mzi::lambda(), s, {0, 2}, absorb);
  const double f_lam = temporal::fidelity(lam, mzi::lambda1(), o.tol);
  const auto psi = temporal::partial_trace_times(mzi::psi(), mzi::psi_schedule(), {1}, absorb);
  const double f_psi = temporal::fidelity(psi, mzi::lambda1(), o.tol);

  r.results["bridges"] = {"hadamard", "identity", "hadamard"};
  r.results["weight_phi32_end"] = w2;
  r.results["weight_phi31_end"] = w1;
  r.results["t1_family_max_off_diagonal"] = cr.max_off_diagonal;
  r.results["lambda_reduced_fidelity"] = f_lam;
  r.results["lambda_reduced_purity"] = lam.purity();
  r.results["psi_reduced_fidelity"] = f_psi;
  r.results["psi_reduced_purity"] = psi.purity();
  r.add(Verdict::eq("weight_phi32_end", w2, 1.0, o.tol));
  r.add(Verdict::eq("weight_phi31_end", w1, 0.0, o.tol));
  r.add(Verdict::lt("t1_family_consistent", cr.max_off_diagonal, o.tol));
  r.add(Verdict::eq("lambda_reduced_fidelity", f_lam, 1.0, o.tol));
  r.add(Verdict::eq("lambda_reduced_purity", lam.purity(), 1.0, o.tol));
  r.add(Verdict::eq("psi_reduced_fidelity", f_psi, 0.5, o.tol));
  r.add(Verdict::eq("psi_reduced_purity", psi.purity(), 0.5, o.tol));
  return r;
}

Report monogamy_cmd(const Options& o) {
  json task = json::object();
  std::optional<scenario::Scenario> sc;
  if (o.scenario) {
    sc = scenario::load(*o.scenario);
    task = task_for(*sc, "monogamy");
    scenario::only_keys(task, {"type", "slot_dim", "restarts", "seed", "history"}, "task");
  }
  Report r;
  temporal::MonogamyRecord rec;
  if (sc && scenario::find(task, "history")) {
    const auto& h = pick_history(*sc, task);
    rec = temporal::monogamy_evaluate(temporal::tensor_normalize(h.history));
    r.results["history"] = h.name;
  } else {
    const auto d = dim_or(o, task, "slot_dim", 2);
    const auto restarts = restarts_or(o, task, 200);
    const auto seed = seed_or(o, task, 1);
    rec = temporal::monogamy_search(static_cast<std::size_t>(d), restarts, seed);
    r.seed = seed;
    r.results["slot_dim"] = d;
    r.results["restarts"] = restarts;
    r.results["best_restart"] = rec.restart;
    r.results["parameters"] = rec.parameters;
  }
  r.results["f12"] = rec.f12;
  r.results["f23"] = rec.f23;
  r.results["objective"] = rec.objective;
  r.tolerances["monogamy_threshold"] = 0.95;
  r.add(Verdict::lt("monogamy", rec.objective, 0.95));
  return r;
}

json settings_json(const lgi::LgiScenario& sc) {
  return {{"rho", from_matrix(sc.rho)},
          {"evolution", from_matrix(sc.evolution)},
          {"alice", {from_matrix(sc.alice[0].matrix()), from_matrix(sc.alice[1].matrix())}},
          {"bob", {from_matrix(sc.bob[0].matrix()), from_matrix(sc.bob[1].matrix())}}};
}

Report lgi_cmd(const Options& o) {
  json task = json::object();
  if (o.scenario) {
    const auto sc = scenario::load(*o.scenario);
    task = task_for(sc, "lgi");
  }
  Report r;
  lgi::LgiReport lr = [&] {
    if (scenario::find(task, "alice")) {
      scenario::only_keys(task, {"type", "rho", "psi", "evolution", "alice", "bob"}, "task");
      return lgi::evaluate(scenario::to_lgi_scenario(task, "task"));
    }
    scenario::only_keys(task, {"type", "dim", "restarts", "seed"}, "task");
    const auto d = dim_or(o, task, "dim", 2);
    const auto restarts = restarts_or(o, task, 20);
    const auto seed = seed_or(o, task, 0);
    r.seed = seed;
    r.results["dim"] = d;
    r.results["restarts"] = restarts;
    return lgi::optimize_s_lgi(d, restarts, seed);
  }();
  const auto tc = lgi::check_tsirelson_conditions(lr.settings);
  json c = json::array();
  double cmax = 0.0;
  for (const auto& row : lr.c) {
    c.push_back({row[0], row[1]});
    cmax = std::max({cmax, std::abs(row[0]), std::abs(row[1])});
  }
  r.results["c"] = c;
  r.results["s_lgi"] = lr.s_lgi;
  r.results["classical_max"] = lr.classical_max;
  r.results["tsirelson"] = lgi::kTsirelson;
  r.results["operator_norm"] = lr.operator_norm;
  r.results["settings"] = settings_json(lr.settings);
  r.results["conditions"] = {{"max_commutator", tc.max_commutator},
                             {"max_square_defect", tc.max_square_defect},
                             {"max_correlator_defect", tc.max_correlator_defect},
                             {"w_trace", tc.w_trace},
                             {"w_min_eigenvalue", tc.w_min_eigenvalue}};
  r.tolerances["bound"] = 1e-9;
  r.add(Verdict::le("correlators_bounded", cmax, 1.0, o.tol));
  r.add(Verdict::le("s_lgi_below_tsirelson", lr.s_lgi, lgi::kTsirelson, 1e-9));
  r.add(Verdict::le("operator_norm_below_tsirelson", lr.operator_norm, lgi::kTsirelson, 1e-9));
  r.add(Verdict::eq("embedded_observables_commute", tc.max_commutator, 0.0, o.tol));
  r.add(Verdict::eq("history_state_reproduces_c", tc.max_correlator_defect, 0.0, o.tol));
  if (!scenario::find(task, "alice") && lr.settings.dim() == 2) {
    r.tolerances["attainment"] = 1e-6;
    r.add(Verdict::ge("s_lgi_attains_tsirelson", lr.s_lgi, lgi::kTsirelson, 1e-6));
  }
  return r;
}

Report classical_bound_cmd(const Options&) {
  const auto b = lgi::classical_bound();
  Report r;
  r.results["classical_max"] = b.max;
  r.results["classical_min"] = b.min;
  r.results["maximizer_count"] = b.maximizers.size();
  r.results["maximizers"] = b.maximizers;
  r.add(Verdict::eq("classical_max", b.max, 2.0, 0.0));
  return r;
}

Report path_integral_cmd(const Options& o) {
  const auto sc = load_required(o);
  const json task = task_for(sc, "path-integral");
  if (task.empty()) throw ScenarioError("task", "a path-integral task block is required");
  const path::PathExpansion p = scenario::to_path_expansion(task, "task");
  std::uint64_t cap = path::kDefaultTupleCap;
  if (o.cap) {
    cap = *o.cap;
  } else if (const json* c = scenario::find(task, "cap")) {
    cap = static_cast<std::uint64_t>(scenario::to_integer(*c, "task.cap"));
  }
  const cplx sum = path::amplitude_sum(p, cap);
  const cplx direct = path::direct_amplitude(p);
  const CMatrix osum = path::operator_sum(p, cap);
  const CMatrix odirect = path::direct_operator(p);
  Report r;
  r.results["tuples"] = path::tuple_count(p, cap);
  r.results["amplitude_sum"] = from_complex(sum);
  r.results["direct_amplitude"] = from_complex(direct);
  r.results["amplitude_defect"] = std::abs(sum - direct);
  r.results["operator_defect"] = max_abs(osum - odirect);
  r.tolerances["cap"] = cap;
  r.add(Verdict::eq("amplitude_matches_direct", std::abs(sum - direct), 0.0, o.tol));
  r.add(Verdict::eq("operator_matches_direct", max_abs(osum - odirect), 0.0, o.tol));
  if (p.hamiltonians.size() == 1) {
    double defect = 0.0;
    for (std::size_t n = 0; n < p.slices; ++n) {
      path::PathExpansion q = p;
      q.slices = n;
      q.bases.clear();
      defect = std::max(defect, std::abs(path::amplitude_sum(q, cap) - sum));
    }
    r.results["slice_invariance_defect"] = defect;
    r.add(Verdict::eq("slice_invariance", defect, 0.0, o.tol));
  }
  return r;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = {"check-consistency", "weight",   "reduce",
                                                 "entanglement",      "mzi-demo", "monogamy",
                                                 "lgi-scan",          "classical-bound", "path-integral-check"};
  return names;
}

Report execute(const Options& o) {
  if (!(o.tol > 0.0)) throw ValidationError("--tol must be positive");
  Report r;
  const auto start = std::chrono::steady_clock::now();
  if (o.command == "check-consistency") {
    r = check_consistency_cmd(o);
  } else if (o.command == "weight") {
    r = weight_cmd(o);
  } else if (o.command == "reduce") {
    r = reduce_cmd(o);
  } else if (o.command == "entanglement") {
    r = entanglement_cmd(o);
  } else if (o.command == "mzi-demo") {
    r = mzi_demo_cmd(o);
  } else if (o.command == "monogamy") {
    r = monogamy_cmd(o);
  } else if (o.command == "lgi-scan") {
    r = lgi_cmd(o);
  } else if (o.command == "classical-bound") {
    r = classical_bound_cmd(o);
  } else if (o.command == "path-integral-check") {
    r = path_integral_cmd(o);
  } else {
    throw ValidationError("unknown command '" + o.command + "'");
  }
  r.task = o.command;
  r.inputs["command"] = o.command;
  r.inputs["scenario"] = o.scenario ? json(*o.scenario) : json(nullptr);
  r.inputs["tol"] = o.tol;
  if (o.seed) r.inputs["seed"] = *o.seed;
  if (o.restarts) r.inputs["restarts"] = *o.restarts;
  if (o.dim) r.inputs["dim"] = *o.dim;
  if (o.cap) r.inputs["cap"] = *o.cap;
  r.tolerances["tol"] = o.tol;
  if (o.timing) r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entangled consistent histories: checks and demonstrations", "ehist"};
  Options o;
  std::string scenario_path, out_path;
  std::uint64_t seed = 0, cap = 0;
  std::size_t restarts = 0;
  Index dim = 0;
  app.add_option("command", o.command, "Command to run")->required()->check(CLI::IsMember(commands()));
  app.add_option("scenario", scenario_path, "Scenario file (JSON, version 1)");
  auto* out_opt = app.add_option("--out", out_path, "Also write the structured report to PATH");
  app.add_option("--tol", o.tol, "Verdict tolerance")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "Random seed");
  auto* restarts_opt = app.add_option("--restarts", restarts, "Optimizer restarts");
  auto* dim_opt = app.add_option("--dim", dim, "Slot or system dimension");
  auto* cap_opt = app.add_option("--cap", cap, "Enumeration cap for path sums");
  app.add_option("--format", o.format, "Standard output format")
      ->check(CLI::IsMember({"table", "structured"}))
      ->capture_default_str();
  app.add_flag("--timing", o.timing, "Record wall time in the report");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  if (!scenario_path.empty()) o.scenario = scenario_path;
  if (*out_opt) o.out = out_path;
  if (*seed_opt) o.seed = seed;
  if (*restarts_opt) o.restarts = restarts;
  if (*dim_opt) o.dim = dim;
  if (*cap_opt) o.cap = cap;

  Report r;
  try {
    r = execute(o);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  const std::string structured = to_structured(r);
  out << (o.format == "structured" ? structured : to_table(r));
  if (o.out) {
    std::ofstream f(*o.out);
    if (!(f << structured)) {
      err << "error: cannot write " << *o.out << "\n";
      return kExitInputError;
    }
  }
  return r.all_pass() ? kExitOk : kExitVerdictFail;
}

}  // namespace ehist::cli

#include "ehist/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "ehist/errors.hpp"
#include "ehist/nelder_mead.hpp"
#include "ehist/random.hpp"

namespace ehist::temporal {

namespace {

// Flattened offsets of every multi-index over the listed factors.
std::vector<Index> factor_offsets(const FactorShape& shape, const std::vector<std::size_t>& factors) {
  std::vector<Index> strides(shape.size(), 1);
  for (std::size_t f = shape.size(); f-- > 1;) strides[f - 1] = strides[f] * shape.dims[f];
  std::vector<Index> out{0};
  for (std::size_t f : factors) {
    std::vector<Index> next;
    next.reserve(out.size() * static_cast<std::size_t>(shape.dims[f]));
    for (Index base : out) {
      for (Index k = 0; k < shape.dims[f]; ++k) next.push_back(base + k * strides[f]);
    }
    out = std::move(next);
  }
  return out;
}

std::vector<std::size_t> sorted_unique_slots(std::vector<std::size_t> slots, std::size_t n, const char* what) {
  std::sort(slots.begin(), slots.end());
  if (std::adjacent_find(slots.begin(), slots.end()) != slots.end()) {
    throw ValidationError(std::string(what) + ": duplicate slot");
  }
  if (!slots.empty() && slots.back() >= n) throw OutOfRange(std::string(what) + ": slot out of range");
  return slots;
}

HistoryVector conjugate_slots(const HistoryVector& h, const std::vector<CMatrix>& frames) {
  std::vector<HistoryTerm> terms;
  terms.reserve(h.terms().size());
  for (const auto& t : h.terms()) {
    std::vector<CMatrix> ops;
    ops.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const CMatrix p = frames[i].adjoint() * t.history.op(i) * frames[i];
      ops.push_back(0.5 * (p + p.adjoint()));
    }
    terms.push_back({t.amplitude, ElementaryHistory(h.grid(), std::move(ops))});
  }
  return HistoryVector(h.grid(), std::move(terms));
}

}  // namespace

CVector history_tensor(const HistoryVector& h) {
  const TimeGrid& grid = h.grid();
  const Index total = grid.operator_shape().total();
  CVector y = CVector::Zero(total);
  for (const auto& t : h.terms()) {
    CMatrix v = vectorize(t.history.op(grid.size() - 1));
    for (std::size_t i = grid.size() - 1; i-- > 0;) v = kron(v, vectorize(t.history.op(i)));
    y += t.amplitude * v.col(0);
  }
  return y;
}

cplx tensor_inner_product(const HistoryVector& a, const HistoryVector& b) {
  if (!(a.grid() == b.grid())) throw ValidationError("tensor_inner_product: grid mismatch");
  return history_tensor(a).dot(history_tensor(b));
}

double tensor_norm_squared(const HistoryVector& h) { return history_tensor(h).squaredNorm(); }

HistoryVector tensor_normalize(const HistoryVector& h, double tol) {
  const double n2 = tensor_norm_squared(h);
  if (!(n2 > tol)) throw ValidationError("tensor_normalize: zero history");
  return cplx(1.0 / std::sqrt(n2)) * h;
}

double ReducedHistoryOperator::purity() const {
  if (!(trace > 0.0)) return 0.0;
  return (op * op).trace().real() / (trace * trace);
}

Eigen::VectorXd ReducedHistoryOperator::eigenvalues() const { return hermitian_eigenvalues(op); }

CMatrix ReducedHistoryOperator::in_projector_basis() const {
  if (retained.size() != 1) throw ValidationError("in_projector_basis: needs a single retained slot");
  const Index d = grid.dim(0);
  CMatrix m(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) m(i, j) = op(i * d + i, j * d + j);
  }
  return m;
}

ReducedHistoryOperator reduce_history_tensor(const CVector& y, const TimeGrid& grid,
                                             const std::vector<std::size_t>& traced_in,
                                             const ReductionOptions& options) {
  const std::size_t n = grid.size();
  const FactorShape shape = grid.operator_shape();
  if (y.size() != shape.total()) throw DimensionMismatch("reduce_history_tensor: tensor length does not match grid");
  const auto traced = sorted_unique_slots(traced_in, n, "partial_trace_times");
  if (traced.size() == n) throw ValidationError("partial_trace_times: at least one slot must be retained");

  CVector coeffs = y;
  for (const auto& [slot, v] : options.basis_rotations) {
    if (!std::binary_search(traced.begin(), traced.end(), slot)) {
      throw ValidationError("partial_trace_times: basis rotation given for a retained slot");
    }
    if (v.rows() != grid.dim(slot) || v.cols() != grid.dim(slot) || unitarity_defect(v) > 1e-12) {
      throw ValidationError("partial_trace_times: basis rotation must be a unitary on the slot space");
    }
    // vec(V X V^dagger) = (V (x) conj V) vec(X); coefficients are the adjoint map.
    const CMatrix w = kron(v, v.conjugate());
    coeffs = apply_on_factor(coeffs, shape, n - 1 - slot, w.adjoint());
  }

  ReducedHistoryOperator r{.retained = {}, .grid = grid, .op = {}, .trace = 0.0, .frames = {}, .dropped_bridges = {}};
  std::vector<std::size_t> keep_factors;
  std::vector<std::size_t> trace_factors;
  for (std::size_t f = 0; f < n; ++f) {
    const std::size_t slot = n - 1 - f;
    if (std::binary_search(traced.begin(), traced.end(), slot)) {
      trace_factors.push_back(f);
    } else {
      keep_factors.push_back(f);
    }
  }
  for (std::size_t slot = 0; slot < n; ++slot) {
    if (!std::binary_search(traced.begin(), traced.end(), slot)) r.retained.push_back(slot);
  }
  r.grid = grid.subgrid(r.retained);

  const auto keep_off = factor_offsets(shape, keep_factors);
  const auto trace_off = factor_offsets(shape, trace_factors);
  // Column k holds (e_k | y) as a vector on the retained slots.
  CMatrix slices(static_cast<Index>(keep_off.size()), static_cast<Index>(trace_off.size()));
  for (std::size_t k = 0; k < trace_off.size(); ++k) {
    for (std::size_t a = 0; a < keep_off.size(); ++a) {
      slices(static_cast<Index>(a), static_cast<Index>(k)) = coeffs(keep_off[a] + trace_off[k]);
    }
  }
  r.op = slices * slices.adjoint();
  r.trace = r.op.trace().real();
  for (std::size_t slot : r.retained) r.frames.push_back(identity(grid.dim(slot)));
  return r;
}

ReducedHistoryOperator partial_trace_times(const HistoryVector& h, const BridgingSchedule& s,
                                           const std::vector<std::size_t>& traced_in,
                                           const ReductionOptions& options) {
  if (!(h.grid() == s.grid())) throw ValidationError("partial_trace_times: schedule grid mismatch");
  const TimeGrid& grid = h.grid();
  const std::size_t n = grid.size();
  const auto traced = sorted_unique_slots(traced_in, n, "partial_trace_times");
  auto is_traced = [&](std::size_t slot) { return std::binary_search(traced.begin(), traced.end(), slot); };

  std::vector<std::size_t> dropped;
  std::vector<CMatrix> frames;
  HistoryVector work = h;
  if (options.absorb_bridges) {
    if (!grid.uniform_dim()) throw UnsupportedReduction("partial_trace_times: absorbing bridges needs equal slot dimensions");
    for (std::size_t i = 0; i < n; ++i) frames.push_back(s.between(i, 0));
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!s.is_identity_bridge(i)) dropped.push_back(i);
    }
    if (!dropped.empty()) work = conjugate_slots(h, frames);
  } else {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (s.is_identity_bridge(i)) continue;
      if (is_traced(i) || is_traced(i + 1)) {
        throw UnsupportedReduction("partial_trace_times: bridge B(t_" + std::to_string(i + 1) + ", t_" +
                                   std::to_string(i) +
                                   ") touches a traced slot and is not the identity; absorb bridges first");
      }
      dropped.push_back(i);
    }
  }

  const double n2 = tensor_norm_squared(work);
  if (std::abs(n2 - 1.0) > options.tol) {
    throw ValidationError("partial_trace_times: history must have unit tensor norm (got " + std::to_string(n2) + ")");
  }

  ReducedHistoryOperator r = reduce_history_tensor(history_tensor(work), grid, traced, options);
  if (!frames.empty()) {
    r.frames.clear();
    for (std::size_t slot : r.retained) r.frames.push_back(frames[slot]);
  }
  r.dropped_bridges = std::move(dropped);
  return r;
}

double fidelity(const ReducedHistoryOperator& r, const HistoryVector& target, double tol) {
  if (target.grid().dims() != r.grid.dims()) {
    throw DimensionMismatch("fidelity: target slots do not match the retained slots");
  }
  const HistoryVector framed = conjugate_slots(target, r.frames);
  const CVector t = history_tensor(framed);
  if (std::abs(t.squaredNorm() - 1.0) > tol) throw ValidationError("fidelity: target must have unit tensor norm");
  return t.dot(r.op * t).real();
}

HistoryVector max_entangled_history(std::size_t n, std::size_t cap) {
  if (n < 2 || n >= cap) {
    throw OutOfRange("max_entangled_history: N must satisfy 2 <= N < " + std::to_string(cap));
  }
  const auto d = static_cast<Index>(n);
  const TimeGrid grid = TimeGrid::uniform(2, d);
  std::vector<HistoryTerm> terms;
  const cplx amp = 1.0 / std::sqrt(static_cast<double>(n));
  for (Index i = 0; i < d; ++i) {
    const CMatrix p = projector(basis_vector(d, i));
    terms.push_back({amp, ElementaryHistory(grid, {p, p})});
  }
  return HistoryVector(grid, std::move(terms));
}

HistoryVector tau_ghz(std::size_t n) {
  if (n < 2) throw OutOfRange("tau_ghz: N must be at least 2");
  const TimeGrid grid = TimeGrid::uniform(n, 2);
  const cplx amp = 1.0 / std::sqrt(2.0);
  std::vector<HistoryTerm> terms;
  for (Index k = 0; k < 2; ++k) {
    terms.push_back({amp, ElementaryHistory(grid, std::vector<CMatrix>(n, projector(basis_vector(2, k))))});
  }
  return HistoryVector(grid, std::move(terms));
}

HistoryVector tau_w(std::size_t n) {
  if (n < 2) throw OutOfRange("tau_w: N must be at least 2");
  const TimeGrid grid = TimeGrid::uniform(n, 2);
  const cplx amp = 1.0 / std::sqrt(static_cast<double>(n));
  const CMatrix p0 = projector(basis_vector(2, 0));
  const CMatrix p1 = projector(basis_vector(2, 1));
  std::vector<HistoryTerm> terms;
  for (std::size_t excited = n; excited-- > 0;) {
    std::vector<CMatrix> ops(n, p0);
    ops[excited] = p1;
    terms.push_back({amp, ElementaryHistory(grid, std::move(ops))});
  }
  return HistoryVector(grid, std::move(terms));
}

std::vector<double> temporal_schmidt(const HistoryVector& h, std::size_t cut) {
  return schmidt(history_tensor(h), h.grid().operator_shape(), cut);
}

MonogamyRecord monogamy_evaluate(const HistoryVector& h) {
  const TimeGrid& grid = h.grid();
  if (grid.size() != 3 || !grid.uniform_dim()) {
    throw ValidationError("monogamy: needs a three-slot history with equal slot dimensions");
  }
  const auto d = static_cast<std::size_t>(grid.dim(0));
  const BridgingSchedule trivial = BridgingSchedule::identity(grid);
  const HistoryVector target = max_entangled_history(d, std::max(kDefaultMaxEntangledCap, d + 1));

  MonogamyRecord rec;
  rec.f12 = fidelity(partial_trace_times(h, trivial, {0}), target);
  rec.f23 = fidelity(partial_trace_times(h, trivial, {2}), target);
  rec.objective = std::min(rec.f12, rec.f23);
  return rec;
}

HistoryVector monogamy_candidate(std::size_t slot_dim, const std::vector<double>& parameters) {
  const auto d = static_cast<Index>(slot_dim);
  const std::size_t count = slot_dim * slot_dim * slot_dim;
  if (slot_dim < 2) throw ValidationError("monogamy: slot dimension must be at least 2");
  if (parameters.size() != 2 * count) throw ValidationError("monogamy: expected 2 d^3 parameters");
  double n2 = 0.0;
  for (double p : parameters) n2 += p * p;
  if (!(n2 > 0.0)) throw ValidationError("monogamy: all amplitudes are zero");
  const double scale = 1.0 / std::sqrt(n2);

  const TimeGrid grid = TimeGrid::uniform(3, d);
  std::vector<CMatrix> proj;
  for (Index k = 0; k < d; ++k) proj.push_back(projector(basis_vector(d, k)));
  std::vector<HistoryTerm> terms;
  terms.reserve(count);
  for (Index a = 0; a < d; ++a) {      // t_3
    for (Index b = 0; b < d; ++b) {    // t_2
      for (Index c = 0; c < d; ++c) {  // t_1
        const auto i = static_cast<std::size_t>((a * d + b) * d + c);
        const cplx amp(parameters[2 * i] * scale, parameters[2 * i + 1] * scale);
        terms.push_back({amp, ElementaryHistory(grid, {proj[c], proj[b], proj[a]})});
      }
    }
  }
  return HistoryVector(grid, std::move(terms));
}

MonogamyRecord monogamy_search(std::size_t slot_dim, std::size_t restarts, std::uint64_t seed,
                               const MonogamyOptions& options) {
  if (slot_dim < 2) throw ValidationError("monogamy_search: slot dimension must be at least 2");
  if (restarts < 1) throw ValidationError("monogamy_search: at least one restart required");
  const std::size_t nparams = 2 * slot_dim * slot_dim * slot_dim;

  // Same reductions as monogamy_evaluate, on the tensor of the candidate
  // assembled directly from its amplitudes.
  const auto d = static_cast<Index>(slot_dim);
  const Index d2 = d * d;
  const TimeGrid grid = TimeGrid::uniform(3, d);
  const CVector target = history_tensor(max_entangled_history(slot_dim, std::max(kDefaultMaxEntangledCap, slot_dim + 1)));
  auto objective = [&](std::span<const double> x) {
    double n2 = 0.0;
    for (double v : x) n2 += v * v;
    if (!(n2 > 1e-300)) return 0.0;
    const double scale = 1.0 / std::sqrt(n2);
    CVector y = CVector::Zero(d2 * d2 * d2);
    for (Index a = 0; a < d; ++a) {
      for (Index b = 0; b < d; ++b) {
        for (Index c = 0; c < d; ++c) {
          const auto i = static_cast<std::size_t>((a * d + b) * d + c);
          y(((a * d + a) * d2 + (b * d + b)) * d2 + (c * d + c)) = cplx(x[2 * i], x[2 * i + 1]) * scale;
        }
      }
    }
    const CMatrix r12 = reduce_history_tensor(y, grid, {0}).op;
    const CMatrix r23 = reduce_history_tensor(y, grid, {2}).op;
    const double f12 = target.dot(r12 * target).real();
    const double f23 = target.dot(r23 * target).real();
    return -std::min(f12, f23);
  };

  std::vector<MonogamyRecord> results(restarts);
  auto run_restart = [&](std::size_t r) {
    Rng rng = substream(seed, r);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> x0(nparams);
    for (double& v : x0) v = normal(rng);
    NelderMeadOptions nm;
    nm.max_evaluations = options.max_evaluations;
    nm.initial_step = 0.3;
    const NelderMeadResult res = nelder_mead(objective, x0, nm);
    MonogamyRecord rec = monogamy_evaluate(monogamy_candidate(slot_dim, res.x));
    rec.parameters = res.x;
    rec.restart = r;
    results[r] = std::move(rec);
  };

  std::size_t threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  threads = std::min(threads, restarts);
  if (threads <= 1) {
    for (std::size_t r = 0; r < restarts; ++r) run_restart(r);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t r = w; r < restarts; r += threads) run_restart(r);
      });
    }
    for (auto& t : pool) t.join();
  }

  std::size_t best = 0;
  for (std::size_t r = 1; r < restarts; ++r) {
    if (results[r].objective > results[best].objective) best = r;
  }
  return results[best];
}

}  // namespace ehist::temporal

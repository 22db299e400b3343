#include "ehist/histories.hpp"

#include <cmath>
#include <string>

#include "ehist/errors.hpp"

namespace ehist {

namespace {

void require_same_grid(const TimeGrid& a, const TimeGrid& b, const char* what) {
  if (!(a == b)) throw ValidationError(std::string(what) + ": histories live on different time grids");
}

}  // namespace

// ---------------------------------------------------------------------------
// TimeGrid

TimeGrid::TimeGrid(std::vector<double> labels, std::vector<Index> dims)
    : labels_(std::move(labels)), dims_(std::move(dims)) {
  if (labels_.empty()) throw ValidationError("time grid needs at least one slot");
  if (labels_.size() != dims_.size()) throw ValidationError("time grid: one dimension per slot required");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (!std::isfinite(labels_[i])) throw ValidationError("time grid: non-finite label");
    if (i > 0 && !(labels_[i] > labels_[i - 1])) {
      throw ValidationError("time grid: labels must be strictly increasing");
    }
    if (dims_[i] < 2) throw ValidationError("time grid: slot dimension must be at least 2");
  }
}

TimeGrid TimeGrid::uniform(std::size_t slots, Index dim) {
  std::vector<double> labels(slots);
  for (std::size_t i = 0; i < slots; ++i) labels[i] = static_cast<double>(i);
  return TimeGrid(std::move(labels), std::vector<Index>(slots, dim));
}

bool TimeGrid::uniform_dim() const {
  for (Index d : dims_) {
    if (d != dims_.front()) return false;
  }
  return true;
}

TimeGrid TimeGrid::subgrid(const std::vector<std::size_t>& slots) const {
  std::vector<double> labels;
  std::vector<Index> dims;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    if (slots[k] >= size()) throw OutOfRange("subgrid: slot out of range");
    if (k > 0 && slots[k] <= slots[k - 1]) throw ValidationError("subgrid: slots must be sorted and unique");
    labels.push_back(labels_[slots[k]]);
    dims.push_back(dims_[slots[k]]);
  }
  return TimeGrid(std::move(labels), std::move(dims));
}

FactorShape TimeGrid::operator_shape() const {
  FactorShape shape;
  for (std::size_t f = 0; f < size(); ++f) {
    const Index d = dims_[size() - 1 - f];
    shape.dims.push_back(d * d);
  }
  return shape;
}

// ---------------------------------------------------------------------------
// ElementaryHistory

ElementaryHistory::ElementaryHistory(TimeGrid grid, std::vector<CMatrix> ops, double tol)
    : grid_(std::move(grid)), ops_(std::move(ops)) {
  if (ops_.size() != grid_.size()) {
    throw ValidationError("elementary history: expected " + std::to_string(grid_.size()) + " slot operators, got " +
                          std::to_string(ops_.size()));
  }
  identity_.resize(ops_.size());
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    const CMatrix& p = ops_[i];
    if (p.rows() != grid_.dim(i) || p.cols() != grid_.dim(i)) {
      throw DimensionMismatch("elementary history: slot " + std::to_string(i) + " operator has wrong dimension");
    }
    require_finite(p, "elementary history");
    if (!is_projector(p, tol)) {
      throw ValidationError("elementary history: slot " + std::to_string(i) +
                            " operator is not a Hermitian idempotent");
    }
    identity_[i] = is_identity(p, tol);
  }
}

bool ElementaryHistory::same_ops(const ElementaryHistory& other, double tol) const {
  if (!(grid_ == other.grid_)) return false;
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    if (max_abs(ops_[i] - other.ops_[i]) > tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// HistoryVector

HistoryVector::HistoryVector(TimeGrid grid) : grid_(std::move(grid)) {}

HistoryVector::HistoryVector(ElementaryHistory h, cplx amplitude) : grid_(h.grid()) {
  terms_.push_back({amplitude, std::move(h)});
}

HistoryVector::HistoryVector(TimeGrid grid, std::vector<HistoryTerm> terms)
    : grid_(std::move(grid)), terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    require_same_grid(grid_, t.history.grid(), "history vector");
    if (!std::isfinite(t.amplitude.real()) || !std::isfinite(t.amplitude.imag())) {
      throw ValidationError("history vector: non-finite amplitude");
    }
  }
}

HistoryVector HistoryVector::product(const TimeGrid& grid, std::vector<CMatrix> ops) {
  return HistoryVector(ElementaryHistory(grid, std::move(ops)));
}

HistoryVector HistoryVector::canonicalized(double tol) const {
  std::vector<HistoryTerm> merged;
  for (const auto& t : terms_) {
    bool found = false;
    for (auto& m : merged) {
      if (m.history.same_ops(t.history, tol)) {
        m.amplitude += t.amplitude;
        found = true;
        break;
      }
    }
    if (!found) merged.push_back(t);
  }
  return HistoryVector(grid_, std::move(merged));
}

HistoryVector HistoryVector::operator+(const HistoryVector& other) const {
  require_same_grid(grid_, other.grid_, "history sum");
  std::vector<HistoryTerm> terms = terms_;
  terms.insert(terms.end(), other.terms_.begin(), other.terms_.end());
  return HistoryVector(grid_, std::move(terms));
}

HistoryVector HistoryVector::operator-(const HistoryVector& other) const { return *this + cplx(-1.0) * other; }

HistoryVector operator*(cplx s, const HistoryVector& h) {
  std::vector<HistoryTerm> terms = h.terms_;
  for (auto& t : terms) t.amplitude *= s;
  return HistoryVector(h.grid_, std::move(terms));
}

HistoryVector odot(const HistoryVector& later, const HistoryVector& earlier) {
  const TimeGrid& a = later.grid();
  const TimeGrid& b = earlier.grid();
  if (!(a.labels().front() > b.labels().back())) {
    throw GridConflict("odot: time ranges overlap or are out of order (later operand must follow the earlier one)");
  }
  std::vector<double> labels = b.labels();
  labels.insert(labels.end(), a.labels().begin(), a.labels().end());
  std::vector<Index> dims = b.dims();
  dims.insert(dims.end(), a.dims().begin(), a.dims().end());
  TimeGrid grid(std::move(labels), std::move(dims));

  std::vector<HistoryTerm> terms;
  for (const auto& ta : later.terms()) {
    for (const auto& tb : earlier.terms()) {
      std::vector<CMatrix> ops = tb.history.ops();
      ops.insert(ops.end(), ta.history.ops().begin(), ta.history.ops().end());
      terms.push_back({ta.amplitude * tb.amplitude, ElementaryHistory(grid, std::move(ops))});
    }
  }
  return HistoryVector(grid, std::move(terms));
}

// ---------------------------------------------------------------------------
// BridgingSchedule

BridgingSchedule::BridgingSchedule(TimeGrid grid, std::vector<CMatrix> bridges, double unitary_tol)
    : grid_(std::move(grid)), bridges_(std::move(bridges)) {
  if (bridges_.size() + 1 != grid_.size()) {
    throw ValidationError("bridging schedule: expected " + std::to_string(grid_.size() - 1) + " bridges, got " +
                          std::to_string(bridges_.size()));
  }
  for (std::size_t i = 0; i < bridges_.size(); ++i) {
    const CMatrix& b = bridges_[i];
    if (b.rows() != grid_.dim(i + 1) || b.cols() != grid_.dim(i)) {
      throw DimensionMismatch("bridging schedule: bridge " + std::to_string(i) + " has wrong shape");
    }
    require_finite(b, "bridging schedule");
    if (unitarity_defect(b) > unitary_tol) {
      throw ValidationError("bridging schedule: bridge " + std::to_string(i) + " is not unitary");
    }
  }
}

BridgingSchedule BridgingSchedule::identity(const TimeGrid& grid) {
  std::vector<CMatrix> bridges;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (grid.dim(i) != grid.dim(i + 1)) throw DimensionMismatch("identity bridging needs equal slot dimensions");
    bridges.push_back(ehist::identity(grid.dim(i)));
  }
  return BridgingSchedule(grid, std::move(bridges));
}

BridgingSchedule BridgingSchedule::from_hamiltonian(const TimeGrid& grid, const CMatrix& h) {
  std::vector<CMatrix> bridges;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (grid.dim(i) != h.rows() || grid.dim(i + 1) != h.rows()) {
      throw DimensionMismatch("hamiltonian bridging: dimension mismatch");
    }
    bridges.push_back(expm_hermitian(h, grid.label(i + 1) - grid.label(i)));
  }
  return BridgingSchedule(grid, std::move(bridges));
}

CMatrix BridgingSchedule::between(std::size_t to, std::size_t from) const {
  if (to >= grid_.size() || from >= grid_.size()) throw OutOfRange("bridge: slot out of range");
  if (to == from) return ehist::identity(grid_.dim(to));
  if (to < from) return between(from, to).adjoint();
  CMatrix u = bridges_[from];
  for (std::size_t i = from + 1; i < to; ++i) u = bridges_[i] * u;
  return u;
}

bool BridgingSchedule::is_identity_bridge(std::size_t slot, double tol) const {
  return is_identity(bridges_.at(slot), tol);
}

// ---------------------------------------------------------------------------
// Chain operators and the history inner product

ChainOperator chain_operator(const HistoryVector& h, const BridgingSchedule& s) {
  require_same_grid(h.grid(), s.grid(), "chain_operator");
  const TimeGrid& grid = h.grid();
  if (!grid.uniform_dim()) throw ValidationError("chain_operator: all slots must share one dimension");
  const Index d = grid.dim(0);
  CMatrix k = CMatrix::Zero(d, d);
  for (const auto& t : h.terms()) {
    CMatrix chain = t.history.op(0);
    for (std::size_t i = 1; i < grid.size(); ++i) {
      chain = s.bridge(i - 1) * chain;
      if (!t.history.is_identity_at(i)) chain = t.history.op(i) * chain;
    }
    k += t.amplitude * chain;
  }
  return k;
}

cplx inner_product(const HistoryVector& a, const HistoryVector& b, const BridgingSchedule& s) {
  require_same_grid(a.grid(), b.grid(), "inner_product");
  const CMatrix ka = chain_operator(a, s);
  const CMatrix kb = chain_operator(b, s);
  return (ka.adjoint() * kb).trace();
}

double weight(const HistoryVector& h, const BridgingSchedule& s) {
  const CMatrix k = chain_operator(h, s);
  return k.squaredNorm();
}

double weight(const HistoryVector& h, const BridgingSchedule& s, const CMatrix& rho) {
  const CMatrix k = chain_operator(h, s);
  if (rho.rows() != k.cols() || rho.cols() != k.cols()) throw DimensionMismatch("weight: density matrix dimension");
  require_finite(rho, "weight");
  if (hermiticity_defect(rho) > 1e-12) throw ValidationError("weight: density matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (rho + rho.adjoint()));
  const Eigen::VectorXd& p = eig.eigenvalues();
  if (p.minCoeff() < -1e-10) throw ValidationError("weight: density matrix is not positive semidefinite");
  if (std::abs(p.sum() - 1.0) > 1e-12) throw ValidationError("weight: density matrix does not have unit trace");
  double w = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (p(i) <= 0.0) continue;
    w += p(i) * (k * eig.eigenvectors().col(i)).squaredNorm();
  }
  return w;
}

HistoryVector normalize(const HistoryVector& h, const BridgingSchedule& s, double tol) {
  const double w = weight(h, s);
  if (!(w > tol)) {
    throw InconsistentHistory("normalize: history has zero weight (dynamically impossible), cannot normalize");
  }
  return cplx(1.0 / std::sqrt(w)) * h;
}

// ---------------------------------------------------------------------------
// Families

HistoryFamily::HistoryFamily(std::vector<HistoryVector> members, BridgingSchedule schedule)
    : members_(std::move(members)), schedule_(std::move(schedule)) {
  if (members_.empty()) throw ValidationError("history family is empty");
  for (const auto& m : members_) require_same_grid(m.grid(), schedule_.grid(), "history family");
}

HistoryFamily tree_family(const CVector& psi0, const BridgingSchedule& s, const std::vector<CMatrix>& bases) {
  const TimeGrid& grid = s.grid();
  if (bases.size() + 1 != grid.size()) throw ValidationError("tree_family: one basis per branching slot required");
  if (psi0.size() != grid.dim(0)) throw DimensionMismatch("tree_family: initial state dimension");
  const double n0 = psi0.norm();
  if (!(n0 > 0.0)) throw ValidationError("tree_family: zero initial state");
  for (std::size_t i = 0; i < bases.size(); ++i) {
    if (bases[i].rows() != grid.dim(i + 1) || bases[i].cols() != grid.dim(i + 1)) {
      throw DimensionMismatch("tree_family: basis " + std::to_string(i) + " has wrong shape");
    }
    if (unitarity_defect(bases[i]) > 1e-12) throw ValidationError("tree_family: basis is not orthonormal");
  }

  std::vector<std::vector<CMatrix>> branches{{projector(psi0 / n0)}};
  for (std::size_t i = 0; i < bases.size(); ++i) {
    std::vector<std::vector<CMatrix>> next;
    for (const auto& b : branches) {
      for (Index k = 0; k < bases[i].cols(); ++k) {
        auto ext = b;
        ext.push_back(projector(bases[i].col(k)));
        next.push_back(std::move(ext));
      }
    }
    branches = std::move(next);
  }
  std::vector<HistoryVector> members;
  members.reserve(branches.size());
  for (auto& ops : branches) members.push_back(HistoryVector::product(grid, std::move(ops)));
  return HistoryFamily(std::move(members), s);
}

ConsistencyReport check_consistency(const HistoryFamily& f, const ConsistencyOptions& options) {
  const auto n = static_cast<Index>(f.size());
  std::vector<CMatrix> chains;
  chains.reserve(f.size());
  for (const auto& m : f.members()) chains.push_back(chain_operator(m, f.schedule()));

  ConsistencyReport r;
  r.tolerance = options.tol;
  r.gram = CMatrix::Zero(n, n);
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) r.gram(a, b) = (chains[a].adjoint() * chains[b]).trace();
  }

  r.normalized_gram = CMatrix::Zero(n, n);
  for (Index a = 0; a < n; ++a) {
    const double wa = r.gram(a, a).real();
    if (wa <= options.tol) {
      r.zero_weight_members.push_back(static_cast<std::size_t>(a));
    } else if (std::abs(wa - 1.0) > options.tol) {
      r.non_normalized_members.push_back(static_cast<std::size_t>(a));
    }
  }
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      const double wa = r.gram(a, a).real();
      const double wb = r.gram(b, b).real();
      if (wa > options.tol && wb > options.tol) r.normalized_gram(a, b) = r.gram(a, b) / std::sqrt(wa * wb);
      if (a != b) r.max_off_diagonal = std::max(r.max_off_diagonal, std::abs(r.gram(a, b)));
      if (a < b && std::abs(std::abs(r.normalized_gram(a, b)) - 1.0) <= options.tol) {
        r.duplicate_pairs.emplace_back(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
      }
    }
  }
  r.consistent = r.max_off_diagonal < options.tol;

  const TimeGrid& grid = f.schedule().grid();
  if (options.coefficients || options.fit_completeness) {
    const CVector target = vectorize(f.schedule().between(grid.size() - 1, 0));
    CMatrix a(target.size(), n);
    for (Index k = 0; k < n; ++k) a.col(k) = vectorize(chains[k]);
    CVector c;
    if (options.coefficients) {
      if (static_cast<Index>(options.coefficients->size()) != n) {
        throw ValidationError("check_consistency: one completeness coefficient per member required");
      }
      c = Eigen::Map<const CVector>(options.coefficients->data(), n);
    } else {
      c = a.completeOrthogonalDecomposition().solve(target);
    }
    r.completeness_residual = (a * c - target).norm();
    r.completeness_coefficients.assign(c.data(), c.data() + c.size());
  }
  return r;
}

}  // namespace ehist

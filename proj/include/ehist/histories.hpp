#pragma once

// History vectors over a fixed time grid, bridging schedules and the
// chain-operator machinery built on them.
//
// Slots are indexed in time order: slot 0 is t_0, slot n-1 is the latest
// time. Whenever a history is flattened into a tensor the latest slot becomes
// the leftmost factor.

#include <cstddef>
#include <optional>
#include <vector>

#include "ehist/linalg.hpp"

namespace ehist {

class TimeGrid {
 public:
  // Labels must be strictly increasing, dims >= 2.
  TimeGrid(std::vector<double> labels, std::vector<Index> dims);
  // Slots labelled 0, 1, ..., slots-1, all of dimension `dim`.
  static TimeGrid uniform(std::size_t slots, Index dim);

  std::size_t size() const { return labels_.size(); }
  double label(std::size_t slot) const { return labels_.at(slot); }
  Index dim(std::size_t slot) const { return dims_.at(slot); }
  const std::vector<double>& labels() const { return labels_; }
  const std::vector<Index>& dims() const { return dims_; }
  bool uniform_dim() const;

  // Grid restricted to `slots` (sorted, unique).
  TimeGrid subgrid(const std::vector<std::size_t>& slots) const;
  // Operator-space shape (d^2 per slot), latest slot leftmost.
  FactorShape operator_shape() const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  std::vector<double> labels_;
  std::vector<Index> dims_;
};

// One operator per slot, each a Hermitian idempotent (identity included).
class ElementaryHistory {
 public:
  ElementaryHistory(TimeGrid grid, std::vector<CMatrix> ops, double tol = 1e-10);

  const TimeGrid& grid() const { return grid_; }
  const std::vector<CMatrix>& ops() const { return ops_; }
  const CMatrix& op(std::size_t slot) const { return ops_.at(slot); }
  bool is_identity_at(std::size_t slot) const { return identity_.at(slot); }
  // Entrywise comparison of all slot operators.
  bool same_ops(const ElementaryHistory& other, double tol) const;

 private:
  TimeGrid grid_;
  std::vector<CMatrix> ops_;
  std::vector<bool> identity_;
};

struct HistoryTerm {
  cplx amplitude;
  ElementaryHistory history;
};

class HistoryVector {
 public:
  // The zero history.
  explicit HistoryVector(TimeGrid grid);
  explicit HistoryVector(ElementaryHistory h, cplx amplitude = 1.0);
  HistoryVector(TimeGrid grid, std::vector<HistoryTerm> terms);

  // Product history P_{n-1} (.) ... (.) P_0 from ops in time order.
  static HistoryVector product(const TimeGrid& grid, std::vector<CMatrix> ops);

  const TimeGrid& grid() const { return grid_; }
  const std::vector<HistoryTerm>& terms() const { return terms_; }

  // Duplicate elementary histories merged, zero amplitudes kept.
  HistoryVector canonicalized(double tol = 1e-12) const;

  HistoryVector operator+(const HistoryVector& other) const;
  HistoryVector operator-(const HistoryVector& other) const;
  friend HistoryVector operator*(cplx s, const HistoryVector& h);

 private:
  TimeGrid grid_;
  std::vector<HistoryTerm> terms_;
};

// later (.) earlier: the grids must be disjoint with every label of `later`
// above every label of `earlier`.
HistoryVector odot(const HistoryVector& later, const HistoryVector& earlier);

// Unitary bridges B(t_{i+1}, t_i) for each adjacent slot pair.
class BridgingSchedule {
 public:
  BridgingSchedule(TimeGrid grid, std::vector<CMatrix> bridges, double unitary_tol = 1e-12);

  static BridgingSchedule identity(const TimeGrid& grid);
  // B(t_{i+1}, t_i) = exp(-i H (t_{i+1} - t_i)) using the grid labels.
  static BridgingSchedule from_hamiltonian(const TimeGrid& grid, const CMatrix& h);

  const TimeGrid& grid() const { return grid_; }
  // B(t_{slot+1}, t_slot).
  const CMatrix& bridge(std::size_t slot) const { return bridges_.at(slot); }
  const std::vector<CMatrix>& bridges() const { return bridges_; }
  // B(t_to, t_from) for any pair of slots, composed from adjacent bridges;
  // backwards pairs give the adjoint.
  CMatrix between(std::size_t to, std::size_t from) const;
  bool is_identity_bridge(std::size_t slot, double tol = 1e-12) const;

 private:
  TimeGrid grid_;
  std::vector<CMatrix> bridges_;
};

using ChainOperator = CMatrix;

// K = P_n B(t_n, t_{n-1}) P_{n-1} ... B(t_1, t_0) P_0, linear in the terms.
ChainOperator chain_operator(const HistoryVector& h, const BridgingSchedule& s);

// (a|b) = Tr[K(a)^dagger K(b)].
cplx inner_product(const HistoryVector& a, const HistoryVector& b, const BridgingSchedule& s);

double weight(const HistoryVector& h, const BridgingSchedule& s);
// Weight for a mixed initial state: sum_k p_k <psi_k| K^dagger K |psi_k> over
// the eigen-ensemble of rho.
double weight(const HistoryVector& h, const BridgingSchedule& s, const CMatrix& rho);

// h / sqrt((h|h)). Throws InconsistentHistory when the weight is <= tol.
HistoryVector normalize(const HistoryVector& h, const BridgingSchedule& s, double tol = 1e-10);

class HistoryFamily {
 public:
  HistoryFamily(std::vector<HistoryVector> members, BridgingSchedule schedule);

  const std::vector<HistoryVector>& members() const { return members_; }
  const BridgingSchedule& schedule() const { return schedule_; }
  std::size_t size() const { return members_.size(); }

 private:
  std::vector<HistoryVector> members_;
  BridgingSchedule schedule_;
};

// Every branch [e^{n}_{k_n}] (.) ... (.) [e^{1}_{k_1}] (.) [psi0] of a tree
// rooted in the pure state psi0. bases[i] holds the orthonormal basis (as
// columns) used at slot i + 1.
HistoryFamily tree_family(const CVector& psi0, const BridgingSchedule& s, const std::vector<CMatrix>& bases);

struct ConsistencyOptions {
  double tol = 1e-10;
  std::optional<std::vector<cplx>> coefficients;
  // Least-squares fit of c_alpha in sum_alpha c_alpha K(H^alpha) = B(t_n, t_0).
  bool fit_completeness = false;
};

struct ConsistencyReport {
  CMatrix gram;             // (H^a|H^b)
  CMatrix normalized_gram;  // gram / sqrt(w_a w_b); zero-weight rows left at 0
  double max_off_diagonal = 0.0;
  bool consistent = false;
  std::vector<std::size_t> zero_weight_members;
  // Members whose raw weight is neither 0 nor 1 within tol.
  std::vector<std::size_t> non_normalized_members;
  // Pairs of members whose normalized overlap has magnitude 1 within tol.
  std::vector<std::pair<std::size_t, std::size_t>> duplicate_pairs;
  std::optional<double> completeness_residual;
  std::vector<cplx> completeness_coefficients;
  double tolerance = 0.0;
};

ConsistencyReport check_consistency(const HistoryFamily& f, const ConsistencyOptions& options = {});

}  // namespace ehist

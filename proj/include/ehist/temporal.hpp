#pragma once

// Temporal entanglement of history vectors.
//
// A history is treated here as a vector of the tensor algebra
// L(H_{t_n}) (x) ... (x) L(H_{t_0}) with the Hilbert-Schmidt inner product on
// each slot, so (A_n (.) ... (.) A_0 | B_n (.) ... (.) B_0) = prod_i Tr(A_i^dagger B_i).
// Rank-1 computational projectors [e_k] are orthonormal in this product, and
// the operator-space vectorization (row-major per slot, latest slot leftmost)
// is what partial traces, Schmidt spectra and fidelities act on.

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "ehist/histories.hpp"

namespace ehist::temporal {

// Flattened operator-space vector of a history.
CVector history_tensor(const HistoryVector& h);
cplx tensor_inner_product(const HistoryVector& a, const HistoryVector& b);
double tensor_norm_squared(const HistoryVector& h);
HistoryVector tensor_normalize(const HistoryVector& h, double tol = 1e-12);

struct ReductionOptions {
  double tol = 1e-10;
  // Rewrite every slot operator as B(t_i,t_0)^dagger P_i B(t_i,t_0) and drop
  // the bridges before reducing. Without it, a non-identity bridge touching a
  // traced slot is an UnsupportedReduction.
  bool absorb_bridges = false;
  // Per traced slot, a unitary V; the traced family becomes {V E_ab V^dagger}
  // instead of the matrix units E_ab = |a><b|.
  std::vector<std::pair<std::size_t, CMatrix>> basis_rotations;
};

struct ReducedHistoryOperator {
  std::vector<std::size_t> retained;  // slot indices of the parent grid, time order
  TimeGrid grid;                      // parent grid restricted to `retained`
  CMatrix op;                         // on the retained operator space, latest slot leftmost
  double trace = 0.0;
  // Frame U_i applied to retained slot i (identity unless bridges were absorbed).
  std::vector<CMatrix> frames;
  // Non-identity bridges of the parent schedule that the reduction dropped.
  std::vector<std::size_t> dropped_bridges;

  double purity() const;
  Eigen::VectorXd eigenvalues() const;
  // Matrix <<[e_i]| r |[e_j]>> for a single retained slot.
  CMatrix in_projector_basis() const;
};

// Tr_{traced} |h)(h| = sum_k (e_k|h)(h|e_k) over a complete orthonormal family
// on the traced slots. h must have unit tensor norm.
ReducedHistoryOperator partial_trace_times(const HistoryVector& h, const BridgingSchedule& s,
                                           const std::vector<std::size_t>& traced,
                                           const ReductionOptions& options = {});

// Same reduction for an already-flattened history tensor on `grid`.
ReducedHistoryOperator reduce_history_tensor(const CVector& y, const TimeGrid& grid,
                                             const std::vector<std::size_t>& traced,
                                             const ReductionOptions& options = {});

// (target| r |target) with the target expressed in the reduction's frames.
double fidelity(const ReducedHistoryOperator& r, const HistoryVector& target, double tol = 1e-10);

inline constexpr std::size_t kDefaultMaxEntangledCap = 64;

// (1/sqrt N) sum_i [e_i] (.) [e_i] on two N-dimensional slots.
HistoryVector max_entangled_history(std::size_t n, std::size_t cap = kDefaultMaxEntangledCap);
// (|e_0)^{(.)N} + |e_1)^{(.)N}) / sqrt 2 on qubit slots.
HistoryVector tau_ghz(std::size_t n);
// Equal superposition of the N single-excitation histories on qubit slots.
HistoryVector tau_w(std::size_t n);

// Schmidt coefficients of the history tensor between the `cut` latest slots
// and the rest.
std::vector<double> temporal_schmidt(const HistoryVector& h, std::size_t cut);

struct MonogamyRecord {
  std::vector<double> parameters;  // real/imag pairs of the d^3 projector-chain amplitudes
  double f12 = 0.0;                // fidelity of the {t_3, t_2} reduction with Psi_+
  double f23 = 0.0;                // fidelity of the {t_2, t_1} reduction with Psi_+
  double objective = 0.0;          // min(f12, f23)
  std::size_t restart = 0;
};

// Fidelities of the two overlapping pair reductions of a normalized
// three-slot history with identity bridging.
MonogamyRecord monogamy_evaluate(const HistoryVector& h);

// History sum_{abc} c_abc [e_a] (.) [e_b] (.) [e_c] from 2 d^3 real parameters,
// tensor-normalized.
HistoryVector monogamy_candidate(std::size_t slot_dim, const std::vector<double>& parameters);

struct MonogamyOptions {
  std::size_t max_evaluations = 3000;
  std::size_t threads = 0;  // 0: hardware concurrency
};

// Maximizes min(F12, F23) by Nelder-Mead from `restarts` random starts.
// Deterministic in `seed`; ties resolve to the lowest restart index.
MonogamyRecord monogamy_search(std::size_t slot_dim, std::size_t restarts, std::uint64_t seed,
                               const MonogamyOptions& options = {});

}  // namespace ehist::temporal

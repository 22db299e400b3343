#pragma once

// Finite-dimensional path sums: the propagator <x_E| U(T) |x_S> expanded over
// complete sets of rank-1 projectors inserted at n intermediate times.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "ehist/histories.hpp"

namespace ehist::path {

inline constexpr std::uint64_t kDefaultTupleCap = 1'000'000;

struct PathExpansion {
  // One Hamiltonian for all n + 1 steps, or one per step (piecewise constant).
  std::vector<CMatrix> hamiltonians;
  double total_time = 0.0;
  std::size_t slices = 0;  // number of intermediate insertions n; delta t = T / (n + 1)
  // Orthonormal basis (columns) per intermediate slice; empty means computational.
  std::vector<CMatrix> bases;
  CVector initial;  // |x_S>
  CVector final;    // |x_E>

  static PathExpansion time_independent(CMatrix h, double total_time, std::size_t slices, CVector initial,
                                        CVector final);

  Index dim() const;
  double step() const { return total_time / static_cast<double>(slices + 1); }
  const CMatrix& hamiltonian(std::size_t step) const;
  CMatrix basis(std::size_t slice) const;
  // Throws on any broken invariant.
  void validate() const;
};

// Number of intermediate label tuples, d^n; throws ScenarioTooLarge above cap.
std::uint64_t tuple_count(const PathExpansion& p, std::uint64_t cap = kDefaultTupleCap);

// Step propagators exp(-i H_k delta t), k = 0..n.
std::vector<CMatrix> step_propagators(const PathExpansion& p);

// Sum over all tuples of <x_E|U_n|b_n><b_n| ... |b_1><b_1|U_0|x_S>.
cplx amplitude_sum(const PathExpansion& p, std::uint64_t cap = kDefaultTupleCap);

// Sum over all tuples of K([x_E] (.) [b_n] (.) ... (.) [b_1] (.) [x_S]) with the
// step propagators as bridges.
CMatrix operator_sum(const PathExpansion& p, std::uint64_t cap = kDefaultTupleCap);

// <x_E| U_n ... U_0 |x_S> without insertions.
cplx direct_amplitude(const PathExpansion& p);
// |x_E><x_E| U_n ... U_0 |x_S><x_S|.
CMatrix direct_operator(const PathExpansion& p);

// The elementary summand history for one label tuple (labels[i] at slice i+1).
HistoryVector summand_history(const PathExpansion& p, const std::vector<Index>& labels);
BridgingSchedule summand_schedule(const PathExpansion& p);

// Piecewise-constant samples of H(t) at the midpoints of n + 1 equal steps.
std::vector<CMatrix> sample_hamiltonian(const std::function<CMatrix(double)>& h, double total_time,
                                        std::size_t slices);

struct ConvergencePoint {
  std::size_t slices = 0;
  cplx amplitude;
  double deviation = 0.0;  // |amplitude - reference|
};

// Path sums of a smooth H(t) for each slice count, against a midpoint
// product of `reference_steps` steps.
std::vector<ConvergencePoint> convergence_scan(const std::function<CMatrix(double)>& h, double total_time,
                                               const CVector& initial, const CVector& final,
                                               const std::vector<std::size_t>& slice_counts,
                                               std::size_t reference_steps = 4096,
                                               std::uint64_t cap = kDefaultTupleCap);

}  // namespace ehist::path

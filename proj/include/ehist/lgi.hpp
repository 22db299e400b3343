#pragma once

// Temporal CHSH (Leggett-Garg type) correlations between a measurement at t_1
// and one at t_2 on the same system.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "ehist/histories.hpp"

namespace ehist::lgi {

inline const double kTsirelson = 2.0 * std::sqrt(2.0);

class DichotomicObservable {
 public:
  // Hermitian with M^2 = I within tol.
  explicit DichotomicObservable(const CMatrix& m, double tol = 1e-10);
  // n . sigma for a qubit; n is normalized.
  static DichotomicObservable bloch(double x, double y, double z);

  const CMatrix& matrix() const { return m_; }
  // Spectral projector onto eigenvalue `sign` (+1 or -1).
  const CMatrix& projector(int sign) const;
  Index dim() const { return m_.rows(); }

 private:
  CMatrix m_;
  CMatrix plus_;
  CMatrix minus_;
};

struct LgiScenario {
  CMatrix rho;        // state at t_0, measured first at t_1
  CMatrix evolution;  // U between t_1 and t_2
  std::array<DichotomicObservable, 2> alice;  // A_1, A_2 at t_1
  std::array<DichotomicObservable, 2> bob;    // B_1, B_2 at t_2

  Index dim() const { return rho.rows(); }
  void validate() const;
};

// c_ij from the sequential Born rule, i, j in {1, 2}.
double correlator_born(const LgiScenario& sc, int i, int j);
// c_ij as the signed sum of weights of the two-time histories [Pi_b] (.) [Pi_a]
// with bridge U and initial state rho.
double correlator_histories(const LgiScenario& sc, int i, int j);
// Both routes; throws std::logic_error if they disagree by more than 1e-12.
double sequential_correlator(const LgiScenario& sc, int i, int j);

using CorrelatorTable = std::array<std::array<double, 2>, 2>;
CorrelatorTable correlators(const LgiScenario& sc);

// c_11 + c_12 + c_21 - c_22.
double s_lgi(const LgiScenario& sc);

struct ClassicalBound {
  int max = 0;
  int min = 0;
  // Assignments (a_1, a_2, b_1, b_2) attaining the maximum.
  std::vector<std::array<int, 4>> maximizers;
};

// Exhaustive enumeration of a1 b1 + a1 b2 + a2 b1 - a2 b2 over a_i, b_j = +-1.
ClassicalBound classical_bound();
int classical_max();

struct ChshNorm {
  double value = 0.0;
  CVector witness;  // top eigenvector on H_{t_2} (x) H_{t_1}
};

// Largest eigenvalue of A_1 B_1 + A_1 B_2 + A_2 B_1 - A_2 B_2 with
// A_i = I (.) A_i and B_j = B_j (.) I on the two-slot space.
ChshNorm chsh_operator_norm(const DichotomicObservable& a1, const DichotomicObservable& a2,
                            const DichotomicObservable& b1, const DichotomicObservable& b2);
// Above, via the full CHSH matrix; exposed for reporting.
CMatrix chsh_operator(const DichotomicObservable& a1, const DichotomicObservable& a2,
                      const DichotomicObservable& b1, const DichotomicObservable& b2);

// The two-time history state W of a scenario: the operator on
// H_{t_2} (x) H_{t_1} with Tr((B (x) A) W) = (1/2) Tr(B U {A, rho} U^dagger)
// for all A, B. Hermitian with unit trace; not positive in general.
CMatrix history_state(const LgiScenario& sc);

struct TsirelsonConditions {
  double max_commutator = 0.0;      // ||[A_k, B_l]|| for the embedded observables
  double max_square_defect = 0.0;   // ||A_k^2 - I||, ||B_l^2 - I||
  double max_correlator_defect = 0.0;  // |Tr(A_k B_l W) - c_kl|
  double w_trace = 0.0;
  double w_min_eigenvalue = 0.0;
};

TsirelsonConditions check_tsirelson_conditions(const LgiScenario& sc);

struct LgiReport {
  CorrelatorTable c{};
  double s_lgi = 0.0;
  int classical_max = 0;
  double operator_norm = 0.0;
  LgiScenario settings;  // witness scenario
  std::size_t restarts = 0;
  std::uint64_t seed = 0;
};

LgiReport evaluate(const LgiScenario& sc);

// Maximizes s_lgi over observables, the initial state and U by Nelder-Mead.
// Restart 0 starts from the identity settings (all observables sigma_z-like,
// U = I, rho = |e_0><e_0|); later restarts are random.
LgiReport optimize_s_lgi(Index dim, std::size_t restarts, std::uint64_t seed,
                         std::size_t max_evaluations = 6000);

// Scenario for a parameter vector, as searched by optimize_s_lgi.
LgiScenario scenario_from_parameters(Index dim, const std::vector<double>& x);
std::size_t parameter_count(Index dim);

}  // namespace ehist::lgi

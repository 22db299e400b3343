#pragma once

// Dense complex linear algebra used by every other module.
//
// Tensor factor convention: in a FactorShape the leftmost factor (index 0) is
// the most significant digit of the flattened index. Histories map their
// latest time slot onto factor 0, so H_{t_n} (x) ... (x) H_{t_0} flattens in
// the order it is written.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ehist {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Index = Eigen::Index;

struct Tolerances {
  double logical = 1e-10;    // verdicts and physical assertions
  double algebraic = 1e-12;  // exact identities (unitarity, hermiticity)
};

struct FactorShape {
  std::vector<Index> dims;

  std::size_t size() const { return dims.size(); }
  // Product of factor dimensions; throws ScenarioTooLarge on overflow.
  Index total() const;
};

CMatrix kron(const CMatrix& a, const CMatrix& b);

// Partial trace keeping the factors listed in `keep` (any order, no
// duplicates). Retained factors stay in their original relative order.
CMatrix ptrace(const CMatrix& m, const FactorShape& shape, std::span<const std::size_t> keep);

// exp(-i * scale * h) for Hermitian h, via eigendecomposition.
CMatrix expm_hermitian(const CMatrix& h, double scale, double hermitian_tol = 1e-12);

// Schmidt coefficients of `v` across the cut between factors [0, cut) and
// [cut, n). The vector is normalized first; a zero vector is rejected.
std::vector<double> schmidt(const CVector& v, const FactorShape& shape, std::size_t cut);

// Shannon entropy (base 2) of the squared Schmidt coefficients.
double entanglement_entropy(std::span<const double> schmidt_coefficients);

// Applies `op` to a single tensor factor of `v`.
CVector apply_on_factor(const CVector& v, const FactorShape& shape, std::size_t factor,
                        const CMatrix& op);

bool all_finite(const CMatrix& m);
void require_finite(const CMatrix& m, std::string_view what);
void require_square(const CMatrix& m, std::string_view what);
double hermiticity_defect(const CMatrix& m);
double unitarity_defect(const CMatrix& u);
double max_abs(const CMatrix& m);
bool is_projector(const CMatrix& p, double tol);
bool is_identity(const CMatrix& m, double tol);

CMatrix identity(Index d);
CVector basis_vector(Index d, Index k);
CMatrix projector(const CVector& ket);
// Row-major vectorization: vec(X)[r * cols + c] = X(r, c), so that
// vec(A)^dagger vec(B) = Tr(A^dagger B).
CVector vectorize(const CMatrix& m);
CMatrix unvectorize(const CVector& v, Index rows, Index cols);

CMatrix hadamard();
CMatrix pauli_x();
CMatrix pauli_y();
CMatrix pauli_z();

// Eigenvalues of a Hermitian matrix, ascending.
Eigen::VectorXd hermitian_eigenvalues(const CMatrix& h);

}  // namespace ehist

#include "ehist/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ehist/errors.hpp"

namespace ehist {

namespace {

Index checked_mul(Index a, Index b) {
  Index out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw ScenarioTooLarge("tensor dimension overflows the index type");
  }
  return out;
}

std::vector<Index> strides_of(const FactorShape& shape) {
  std::vector<Index> strides(shape.size(), 1);
  for (std::size_t f = shape.size(); f-- > 1;) {
    strides[f - 1] = strides[f] * shape.dims[f];
  }
  return strides;
}

// Flattened offsets of every multi-index over `factors`.
std::vector<Index> offsets_over(const FactorShape& shape, const std::vector<Index>& strides,
                                const std::vector<std::size_t>& factors) {
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

void check_shape(const FactorShape& shape) {
  if (shape.dims.empty()) throw DimensionMismatch("factor shape has no factors");
  for (Index d : shape.dims) {
    if (d < 1) throw DimensionMismatch("factor dimension must be positive");
  }
}

}  // namespace

Index FactorShape::total() const {
  Index out = 1;
  for (Index d : dims) out = checked_mul(out, d);
  return out;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  const Index rows = checked_mul(a.rows(), b.rows());
  const Index cols = checked_mul(a.cols(), b.cols());
  checked_mul(rows, cols);
  CMatrix out(rows, cols);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CMatrix ptrace(const CMatrix& m, const FactorShape& shape, std::span<const std::size_t> keep) {
  check_shape(shape);
  const Index n = shape.total();
  if (m.rows() != n || m.cols() != n) {
    throw DimensionMismatch("ptrace: matrix is " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + " but shape implies " + std::to_string(n));
  }
  if (keep.empty()) throw DimensionMismatch("ptrace: keep set is empty");

  std::vector<std::size_t> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  if (std::adjacent_find(kept.begin(), kept.end()) != kept.end()) {
    throw DimensionMismatch("ptrace: duplicate factor in keep set");
  }
  if (kept.back() >= shape.size()) throw DimensionMismatch("ptrace: keep index out of range");

  std::vector<std::size_t> traced;
  for (std::size_t f = 0; f < shape.size(); ++f) {
    if (!std::binary_search(kept.begin(), kept.end(), f)) traced.push_back(f);
  }

  const auto strides = strides_of(shape);
  const auto keep_off = offsets_over(shape, strides, kept);
  const auto trace_off = offsets_over(shape, strides, traced);
  const auto out_dim = static_cast<Index>(keep_off.size());

  CMatrix out = CMatrix::Zero(out_dim, out_dim);
  for (Index a = 0; a < out_dim; ++a) {
    for (Index b = 0; b < out_dim; ++b) {
      cplx acc = 0.0;
      for (Index t : trace_off) acc += m(keep_off[a] + t, keep_off[b] + t);
      out(a, b) = acc;
    }
  }
  return out;
}

CMatrix expm_hermitian(const CMatrix& h, double scale, double hermitian_tol) {
  require_square(h, "expm_hermitian");
  require_finite(h, "expm_hermitian");
  if (!std::isfinite(scale)) throw ValidationError("expm_hermitian: scale is not finite");
  if (hermiticity_defect(h) > hermitian_tol) {
    throw ValidationError("expm_hermitian: argument is not Hermitian");
  }
  const CMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(sym);
  if (eig.info() != Eigen::Success) throw ValidationError("expm_hermitian: eigensolver failed");
  const Eigen::VectorXd& w = eig.eigenvalues();
  CVector phases(w.size());
  for (Index k = 0; k < w.size(); ++k) phases(k) = std::exp(cplx(0.0, -scale * w(k)));
  const CMatrix& v = eig.eigenvectors();
  return v * phases.asDiagonal() * v.adjoint();
}

std::vector<double> schmidt(const CVector& v, const FactorShape& shape, std::size_t cut) {
  check_shape(shape);
  if (v.size() != shape.total()) throw DimensionMismatch("schmidt: vector length does not match shape");
  if (cut == 0 || cut >= shape.size()) throw DimensionMismatch("schmidt: cut must split the factors");
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw ValidationError("schmidt: zero or non-finite vector");

  Index left = 1;
  for (std::size_t f = 0; f < cut; ++f) left *= shape.dims[f];
  const Index right = v.size() / left;
  // Row-major flattening: index = l * right + r.
  CMatrix m(left, right);
  for (Index l = 0; l < left; ++l) {
    for (Index r = 0; r < right; ++r) m(l, r) = v(l * right + r) / norm;
  }
  Eigen::JacobiSVD<CMatrix> svd(m);
  const Eigen::VectorXd& s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

double entanglement_entropy(std::span<const double> schmidt_coefficients) {
  double h = 0.0;
  for (double s : schmidt_coefficients) {
    const double p = s * s;
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

CVector apply_on_factor(const CVector& v, const FactorShape& shape, std::size_t factor,
                        const CMatrix& op) {
  check_shape(shape);
  if (factor >= shape.size()) throw DimensionMismatch("apply_on_factor: factor out of range");
  const Index d = shape.dims[factor];
  if (op.rows() != d || op.cols() != d) throw DimensionMismatch("apply_on_factor: operator dimension");
  if (v.size() != shape.total()) throw DimensionMismatch("apply_on_factor: vector length");

  Index inner = 1;
  for (std::size_t f = factor + 1; f < shape.size(); ++f) inner *= shape.dims[f];
  const Index outer = v.size() / (inner * d);
  CVector out(v.size());
  for (Index o = 0; o < outer; ++o) {
    for (Index in = 0; in < inner; ++in) {
      for (Index r = 0; r < d; ++r) {
        cplx acc = 0.0;
        for (Index c = 0; c < d; ++c) acc += op(r, c) * v((o * d + c) * inner + in);
        out((o * d + r) * inner + in) = acc;
      }
    }
  }
  return out;
}

bool all_finite(const CMatrix& m) {
  for (Index i = 0; i < m.size(); ++i) {
    const cplx z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

void require_finite(const CMatrix& m, std::string_view what) {
  if (!all_finite(m)) throw ValidationError(std::string(what) + ": matrix has non-finite entries");
}

void require_square(const CMatrix& m, std::string_view what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionMismatch(std::string(what) + ": expected a non-empty square matrix");
  }
}

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double hermiticity_defect(const CMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return max_abs(m - m.adjoint());
}

double unitarity_defect(const CMatrix& u) {
  if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
  return max_abs(u.adjoint() * u - identity(u.rows()));
}

bool is_projector(const CMatrix& p, double tol) {
  if (p.rows() != p.cols()) return false;
  return hermiticity_defect(p) <= tol && max_abs(p * p - p) <= tol;
}

bool is_identity(const CMatrix& m, double tol) {
  return m.rows() == m.cols() && max_abs(m - identity(m.rows())) <= tol;
}

CMatrix identity(Index d) { return CMatrix::Identity(d, d); }

CVector basis_vector(Index d, Index k) {
  if (k < 0 || k >= d) throw OutOfRange("basis_vector: index " + std::to_string(k) + " out of range");
  CVector e = CVector::Zero(d);
  e(k) = 1.0;
  return e;
}

CMatrix projector(const CVector& ket) { return ket * ket.adjoint(); }

CVector vectorize(const CMatrix& m) {
  CVector v(m.size());
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) v(r * m.cols() + c) = m(r, c);
  }
  return v;
}

CMatrix unvectorize(const CVector& v, Index rows, Index cols) {
  if (v.size() != rows * cols) throw DimensionMismatch("unvectorize: length mismatch");
  CMatrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = v(r * cols + c);
  }
  return m;
}

CMatrix hadamard() {
  const double s = 1.0 / std::sqrt(2.0);
  CMatrix h(2, 2);
  h << s, s, s, -s;
  return h;
}

CMatrix pauli_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

CMatrix pauli_y() {
  CMatrix m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}

CMatrix pauli_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Eigen::VectorXd hermitian_eigenvalues(const CMatrix& h) {
  require_square(h, "hermitian_eigenvalues");
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues();
}

}  // namespace ehist

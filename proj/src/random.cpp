#include "ehist/random.hpp"

#include <cmath>

namespace ehist {

Rng substream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

CMatrix random_complex(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const double re = n(rng);
      const double im = n(rng);
      m(i, j) = cplx(re, im);
    }
  }
  return m;
}

CMatrix random_hermitian(Index d, Rng& rng) {
  const CMatrix a = random_complex(d, d, rng);
  return 0.5 * (a + a.adjoint());
}

CMatrix random_unitary(Index d, Rng& rng) {
  const CMatrix z = random_complex(d, d, rng);
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ() * CMatrix::Identity(d, d);
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index k = 0; k < d; ++k) {
    const double mag = std::abs(r(k, k));
    if (mag > 0.0) q.col(k) *= r(k, k) / mag;
  }
  return q;
}

CVector random_ket(Index d, Rng& rng) {
  CVector v = random_complex(d, 1, rng).col(0);
  return v / v.norm();
}

CMatrix random_density(Index d, Rng& rng) {
  const CMatrix g = random_complex(d, d, rng);
  CMatrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

CMatrix random_dichotomic(Index d, Rng& rng, bool allow_trivial) {
  const Index lo = allow_trivial ? 0 : 1;
  const Index hi = allow_trivial ? d : d - 1;
  std::uniform_int_distribution<Index> count(lo, hi);
  const Index minus = count(rng);
  Eigen::VectorXd signs = Eigen::VectorXd::Ones(d);
  for (Index k = 0; k < minus; ++k) signs(d - 1 - k) = -1.0;
  const CMatrix v = random_unitary(d, rng);
  return v * signs.cast<cplx>().asDiagonal() * v.adjoint();
}

}  // namespace ehist

#include "ehist/lgi.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ehist/errors.hpp"
#include "ehist/nelder_mead.hpp"
#include "ehist/random.hpp"

namespace ehist::lgi {

namespace {

void check_index(int i) {
  if (i != 1 && i != 2) throw OutOfRange("correlator index must be 1 or 2");
}

CMatrix hermitian_from(std::span<const double> x, Index d) {
  CMatrix k = CMatrix::Zero(d, d);
  std::size_t p = 0;
  for (Index r = 0; r < d; ++r) k(r, r) = x[p++];
  for (Index r = 0; r < d; ++r) {
    for (Index c = r + 1; c < d; ++c) {
      k(r, c) = cplx(x[p], x[p + 1]);
      k(c, r) = std::conj(k(r, c));
      p += 2;
    }
  }
  return k;
}

CMatrix alternating_signs(Index d) {
  CMatrix m = CMatrix::Zero(d, d);
  for (Index k = 0; k < d; ++k) m(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
  return m;
}

}  // namespace

DichotomicObservable::DichotomicObservable(const CMatrix& m, double tol) {
  require_square(m, "dichotomic observable");
  require_finite(m, "dichotomic observable");
  if (hermiticity_defect(m) > tol) throw ValidationError("dichotomic observable: matrix is not Hermitian");
  m_ = 0.5 * (m + m.adjoint());
  const Index d = m_.rows();
  if (max_abs(m_ * m_ - identity(d)) > tol) {
    throw ValidationError("dichotomic observable: M^2 != I (eigenvalues must be +-1)");
  }
  plus_ = 0.5 * (identity(d) + m_);
  minus_ = 0.5 * (identity(d) - m_);
}

DichotomicObservable DichotomicObservable::bloch(double x, double y, double z) {
  const double n = std::sqrt(x * x + y * y + z * z);
  if (!(n > 0.0)) throw ValidationError("bloch: zero direction");
  return DichotomicObservable((x * pauli_x() + y * pauli_y() + z * pauli_z()) / n);
}

const CMatrix& DichotomicObservable::projector(int sign) const {
  if (sign == 1) return plus_;
  if (sign == -1) return minus_;
  throw OutOfRange("dichotomic observable: outcome must be +1 or -1");
}

void LgiScenario::validate() const {
  const Index d = rho.rows();
  if (rho.cols() != d || d < 2) throw DimensionMismatch("lgi scenario: density matrix must be square, d >= 2");
  require_finite(rho, "lgi scenario");
  if (hermiticity_defect(rho) > 1e-12) throw ValidationError("lgi scenario: density matrix is not Hermitian");
  if (std::abs(rho.trace() - cplx(1.0)) > 1e-12) throw ValidationError("lgi scenario: density matrix trace != 1");
  if (hermitian_eigenvalues(rho).minCoeff() < -1e-10) {
    throw ValidationError("lgi scenario: density matrix is not positive semidefinite");
  }
  if (evolution.rows() != d || evolution.cols() != d) throw DimensionMismatch("lgi scenario: evolution dimension");
  if (unitarity_defect(evolution) > 1e-12) throw ValidationError("lgi scenario: evolution is not unitary");
  for (const auto* o : {&alice[0], &alice[1], &bob[0], &bob[1]}) {
    if (o->dim() != d) throw DimensionMismatch("lgi scenario: observable dimension");
  }
}

double correlator_born(const LgiScenario& sc, int i, int j) {
  check_index(i);
  check_index(j);
  const auto& a = sc.alice[static_cast<std::size_t>(i - 1)];
  const auto& b = sc.bob[static_cast<std::size_t>(j - 1)];
  const CMatrix& u = sc.evolution;
  double c = 0.0;
  for (int sa : {1, -1}) {
    const CMatrix& pa = a.projector(sa);
    const CMatrix evolved = u * pa * sc.rho * pa * u.adjoint();
    for (int sb : {1, -1}) {
      const CMatrix& pb = b.projector(sb);
      c += sa * sb * (pb * evolved * pb).trace().real();
    }
  }
  return c;
}

double correlator_histories(const LgiScenario& sc, int i, int j) {
  check_index(i);
  check_index(j);
  const auto& a = sc.alice[static_cast<std::size_t>(i - 1)];
  const auto& b = sc.bob[static_cast<std::size_t>(j - 1)];
  const TimeGrid grid({1.0, 2.0}, {sc.dim(), sc.dim()});
  const BridgingSchedule s(grid, {sc.evolution});
  double c = 0.0;
  for (int sa : {1, -1}) {
    for (int sb : {1, -1}) {
      const HistoryVector h(ElementaryHistory(grid, {a.projector(sa), b.projector(sb)}, 1e-9));
      c += sa * sb * weight(h, s, sc.rho);
    }
  }
  return c;
}

double sequential_correlator(const LgiScenario& sc, int i, int j) {
  const double born = correlator_born(sc, i, j);
  const double hist = correlator_histories(sc, i, j);
  if (std::abs(born - hist) > 1e-12) {
    throw std::logic_error("sequential_correlator: Born-rule and history-weight routes disagree by " +
                           std::to_string(std::abs(born - hist)));
  }
  return born;
}

CorrelatorTable correlators(const LgiScenario& sc) {
  sc.validate();
  CorrelatorTable c{};
  for (int i = 1; i <= 2; ++i) {
    for (int j = 1; j <= 2; ++j) c[i - 1][j - 1] = sequential_correlator(sc, i, j);
  }
  return c;
}

double s_lgi(const LgiScenario& sc) {
  const auto c = correlators(sc);
  return c[0][0] + c[0][1] + c[1][0] - c[1][1];
}

ClassicalBound classical_bound() {
  ClassicalBound out{.max = -5, .min = 5, .maximizers = {}};
  for (int mask = 0; mask < 16; ++mask) {
    const int a1 = (mask & 1) ? -1 : 1;
    const int a2 = (mask & 2) ? -1 : 1;
    const int b1 = (mask & 4) ? -1 : 1;
    const int b2 = (mask & 8) ? -1 : 1;
    const int s = a1 * b1 + a1 * b2 + a2 * b1 - a2 * b2;
    if (s > out.max) {
      out.max = s;
      out.maximizers.clear();
    }
    if (s == out.max) out.maximizers.push_back({a1, a2, b1, b2});
    out.min = std::min(out.min, s);
  }
  return out;
}

int classical_max() { return classical_bound().max; }

CMatrix chsh_operator(const DichotomicObservable& a1, const DichotomicObservable& a2,
                      const DichotomicObservable& b1, const DichotomicObservable& b2) {
  const Index d = a1.dim();
  for (const auto* o : {&a2, &b1, &b2}) {
    if (o->dim() != d) throw DimensionMismatch("chsh_operator: observables must share a dimension");
  }
  const CMatrix id = identity(d);
  const CMatrix ea1 = kron(id, a1.matrix());
  const CMatrix ea2 = kron(id, a2.matrix());
  const CMatrix eb1 = kron(b1.matrix(), id);
  const CMatrix eb2 = kron(b2.matrix(), id);
  return ea1 * eb1 + ea1 * eb2 + ea2 * eb1 - ea2 * eb2;
}

ChshNorm chsh_operator_norm(const DichotomicObservable& a1, const DichotomicObservable& a2,
                            const DichotomicObservable& b1, const DichotomicObservable& b2) {
  const CMatrix c = chsh_operator(a1, a2, b1, b2);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (c + c.adjoint()));
  const Index top = eig.eigenvalues().size() - 1;
  return {eig.eigenvalues()(top), eig.eigenvectors().col(top)};
}

CMatrix history_state(const LgiScenario& sc) {
  const Index d = sc.dim();
  const CMatrix& u = sc.evolution;
  const CMatrix rho_ud = sc.rho * u.adjoint();
  const CMatrix u_rho = u * sc.rho;
  const CMatrix ud = u.adjoint();
  // Row (j, l) pairs the t_2 index j with the t_1 index l.
  CMatrix w(d * d, d * d);
  for (Index j = 0; j < d; ++j) {
    for (Index l = 0; l < d; ++l) {
      for (Index i = 0; i < d; ++i) {
        for (Index k = 0; k < d; ++k) {
          w(j * d + l, i * d + k) = 0.5 * (u(j, k) * rho_ud(l, i) + u_rho(j, k) * ud(l, i));
        }
      }
    }
  }
  return w;
}

TsirelsonConditions check_tsirelson_conditions(const LgiScenario& sc) {
  sc.validate();
  const Index d = sc.dim();
  const CMatrix id = identity(d);
  const CMatrix w = history_state(sc);
  const auto c = correlators(sc);
  TsirelsonConditions out;
  for (int k = 0; k < 2; ++k) {
    const CMatrix ak = kron(id, sc.alice[k].matrix());
    out.max_square_defect = std::max(out.max_square_defect, max_abs(ak * ak - identity(d * d)));
    for (int l = 0; l < 2; ++l) {
      const CMatrix bl = kron(sc.bob[l].matrix(), id);
      out.max_commutator = std::max(out.max_commutator, max_abs(ak * bl - bl * ak));
      out.max_square_defect = std::max(out.max_square_defect, max_abs(bl * bl - identity(d * d)));
      const double tr = (ak * bl * w).trace().real();
      out.max_correlator_defect = std::max(out.max_correlator_defect, std::abs(tr - c[k][l]));
    }
  }
  out.w_trace = w.trace().real();
  out.w_min_eigenvalue = hermitian_eigenvalues(w).minCoeff();
  return out;
}

LgiReport evaluate(const LgiScenario& sc) {
  LgiReport r{.c = correlators(sc), .s_lgi = 0.0, .classical_max = classical_max(), .operator_norm = 0.0,
              .settings = sc, .restarts = 0, .seed = 0};
  r.s_lgi = r.c[0][0] + r.c[0][1] + r.c[1][0] - r.c[1][1];
  r.operator_norm = chsh_operator_norm(sc.alice[0], sc.alice[1], sc.bob[0], sc.bob[1]).value;
  return r;
}

std::size_t parameter_count(Index dim) {
  const auto d = static_cast<std::size_t>(dim);
  const std::size_t per_observable = dim == 2 ? 3 : d * d;
  return 4 * per_observable + 2 * d + d * d;
}

LgiScenario scenario_from_parameters(Index dim, const std::vector<double>& x) {
  if (dim < 2) throw ValidationError("lgi: dimension must be at least 2");
  if (x.size() != parameter_count(dim)) throw ValidationError("lgi: wrong parameter count");
  const auto d = static_cast<std::size_t>(dim);
  std::span<const double> rest(x);

  auto observable = [&]() {
    if (dim == 2) {
      // Offset from sigma_z so that zero parameters are the identity settings.
      const double bx = rest[0], by = rest[1], bz = 1.0 + rest[2];
      rest = rest.subspan(3);
      if (bx * bx + by * by + bz * bz < 1e-24) return DichotomicObservable(pauli_z());
      return DichotomicObservable::bloch(bx, by, bz);
    }
    const CMatrix v = expm_hermitian(hermitian_from(rest.first(d * d), dim), 1.0);
    rest = rest.subspan(d * d);
    const CMatrix m = v * alternating_signs(dim) * v.adjoint();
    return DichotomicObservable(0.5 * (m + m.adjoint()));
  };
  DichotomicObservable a1 = observable();
  DichotomicObservable a2 = observable();
  DichotomicObservable b1 = observable();
  DichotomicObservable b2 = observable();

  CVector psi = basis_vector(dim, 0);
  for (std::size_t k = 0; k < d; ++k) psi(static_cast<Index>(k)) += cplx(rest[2 * k], rest[2 * k + 1]);
  rest = rest.subspan(2 * d);
  if (!(psi.norm() > 1e-12)) psi = basis_vector(dim, 0);
  psi /= psi.norm();
  CMatrix rho = projector(psi);
  rho = 0.5 * (rho + rho.adjoint());
  rho /= rho.trace().real();

  const CMatrix u = expm_hermitian(hermitian_from(rest.first(d * d), dim), 1.0);
  return LgiScenario{.rho = rho, .evolution = u, .alice = {a1, a2}, .bob = {b1, b2}};
}

LgiReport optimize_s_lgi(Index dim, std::size_t restarts, std::uint64_t seed, std::size_t max_evaluations) {
  if (dim < 2) throw ValidationError("optimize_s_lgi: dimension must be at least 2");
  if (restarts < 1) throw ValidationError("optimize_s_lgi: at least one restart required");
  const std::size_t n = parameter_count(dim);
  auto objective = [dim](std::span<const double> x) {
    return -s_lgi(scenario_from_parameters(dim, std::vector<double>(x.begin(), x.end())));
  };

  NelderMeadOptions nm;
  nm.max_evaluations = max_evaluations;
  nm.initial_step = 0.5;
  nm.max_restarts = 6;

  std::vector<double> best_x;
  double best_value = 0.0;
  for (std::size_t r = 0; r < restarts; ++r) {
    std::vector<double> x0(n, 0.0);
    if (r > 0) {
      Rng rng = substream(seed, r);
      std::normal_distribution<double> normal(0.0, 1.0);
      for (double& v : x0) v = normal(rng);
    }
    const NelderMeadResult res = nelder_mead(objective, x0, nm);
    if (best_x.empty() || res.value < best_value) {
      best_x = res.x;
      best_value = res.value;
    }
  }
  LgiReport report = evaluate(scenario_from_parameters(dim, best_x));
  report.restarts = restarts;
  report.seed = seed;
  return report;
}

}  // namespace ehist::lgi

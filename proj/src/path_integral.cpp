#include "ehist/path_integral.hpp"

#include <cmath>
#include <string>

#include "ehist/errors.hpp"

namespace ehist::path {

namespace {

// Neumaier-compensated complex accumulator.
class CompensatedSum {
 public:
  void add(cplx z) {
    re_.add(z.real());
    im_.add(z.imag());
  }
  cplx value() const { return {re_.value(), im_.value()}; }

 private:
  struct Real {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
      const double t = sum + x;
      carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
      sum = t;
    }
    double value() const { return sum + carry; }
  };
  Real re_;
  Real im_;
};

// Visits every tuple of n labels in [0, d) in lexicographic order.
template <class F>
void for_each_tuple(std::size_t n, Index d, F&& visit) {
  std::vector<Index> labels(n, 0);
  while (true) {
    visit(labels);
    std::size_t pos = n;
    while (pos > 0) {
      --pos;
      if (++labels[pos] < d) break;
      labels[pos] = 0;
      if (pos == 0) return;
    }
    if (n == 0) return;
  }
}

}  // namespace

PathExpansion PathExpansion::time_independent(CMatrix h, double total_time, std::size_t slices, CVector initial,
                                               CVector final) {
  PathExpansion p;
  p.hamiltonians.push_back(std::move(h));
  p.total_time = total_time;
  p.slices = slices;
  p.initial = std::move(initial);
  p.final = std::move(final);
  p.validate();
  return p;
}

Index PathExpansion::dim() const {
  if (hamiltonians.empty()) throw ValidationError("path expansion: no Hamiltonian");
  return hamiltonians.front().rows();
}

const CMatrix& PathExpansion::hamiltonian(std::size_t step) const {
  return hamiltonians.size() == 1 ? hamiltonians.front() : hamiltonians.at(step);
}

CMatrix PathExpansion::basis(std::size_t slice) const {
  if (bases.empty()) return identity(dim());
  return bases.at(slice);
}

void PathExpansion::validate() const {
  if (hamiltonians.empty()) throw ValidationError("path expansion: no Hamiltonian");
  if (hamiltonians.size() != 1 && hamiltonians.size() != slices + 1) {
    throw ValidationError("path expansion: need one Hamiltonian, or one per step (n + 1)");
  }
  const Index d = dim();
  for (const auto& h : hamiltonians) {
    if (h.rows() != d || h.cols() != d) throw DimensionMismatch("path expansion: Hamiltonian dimension mismatch");
    require_finite(h, "path expansion");
    if (hermiticity_defect(h) > 1e-12) throw ValidationError("path expansion: Hamiltonian is not Hermitian");
  }
  if (!std::isfinite(total_time)) throw ValidationError("path expansion: total time is not finite");
  if (!bases.empty() && bases.size() != slices) {
    throw ValidationError("path expansion: need one basis per intermediate slice");
  }
  for (std::size_t i = 0; i < bases.size(); ++i) {
    if (bases[i].rows() != d || bases[i].cols() != d) {
      throw DimensionMismatch("path expansion: basis " + std::to_string(i) + " does not match the Hamiltonian");
    }
    if (unitarity_defect(bases[i]) > 1e-12) {
      throw ValidationError("path expansion: basis " + std::to_string(i) + " is not orthonormal");
    }
  }
  if (initial.size() != d || final.size() != d) throw DimensionMismatch("path expansion: endpoint dimension");
  require_finite(initial, "path expansion");
  require_finite(final, "path expansion");
  if (std::abs(initial.norm() - 1.0) > 1e-10 || std::abs(final.norm() - 1.0) > 1e-10) {
    throw ValidationError("path expansion: endpoints must be unit vectors");
  }
}

std::uint64_t tuple_count(const PathExpansion& p, std::uint64_t cap) {
  const auto d = static_cast<std::uint64_t>(p.dim());
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < p.slices; ++i) {
    if (count > cap / d) {
      throw ScenarioTooLarge("path expansion: d^n = " + std::to_string(d) + "^" + std::to_string(p.slices) +
                             " tuples exceeds the enumeration cap of " + std::to_string(cap));
    }
    count *= d;
  }
  if (count > cap) throw ScenarioTooLarge("path expansion: tuple count exceeds the enumeration cap");
  return count;
}

std::vector<CMatrix> step_propagators(const PathExpansion& p) {
  std::vector<CMatrix> u;
  for (std::size_t k = 0; k <= p.slices; ++k) u.push_back(expm_hermitian(p.hamiltonian(k), p.step()));
  return u;
}

cplx amplitude_sum(const PathExpansion& p, std::uint64_t cap) {
  p.validate();
  tuple_count(p, cap);
  const auto u = step_propagators(p);
  const std::size_t n = p.slices;
  // factors[k](to, from) = <b^{k+1}_to| U_k |b^k_from>, with b^0 = x_S, b^{n+1} = x_E.
  std::vector<CMatrix> factors;
  for (std::size_t k = 0; k <= n; ++k) {
    const CMatrix from = k == 0 ? CMatrix(p.initial) : p.basis(k - 1);
    const CMatrix to = k == n ? CMatrix(p.final) : p.basis(k);
    factors.push_back(to.adjoint() * u[k] * from);
  }
  if (n == 0) return factors[0](0, 0);

  CompensatedSum acc;
  for_each_tuple(n, p.dim(), [&](const std::vector<Index>& labels) {
    cplx amp = factors[0](labels[0], 0);
    for (std::size_t k = 1; k < n; ++k) amp *= factors[k](labels[k], labels[k - 1]);
    amp *= factors[n](0, labels[n - 1]);
    acc.add(amp);
  });
  return acc.value();
}

BridgingSchedule summand_schedule(const PathExpansion& p) {
  const std::size_t slots = p.slices + 2;
  std::vector<double> labels(slots);
  for (std::size_t i = 0; i < slots; ++i) labels[i] = p.step() * static_cast<double>(i);
  if (!(p.step() > 0.0)) {
    for (std::size_t i = 0; i < slots; ++i) labels[i] = static_cast<double>(i);
  }
  TimeGrid grid(std::move(labels), std::vector<Index>(slots, p.dim()));
  return BridgingSchedule(std::move(grid), step_propagators(p));
}

HistoryVector summand_history(const PathExpansion& p, const std::vector<Index>& labels) {
  if (labels.size() != p.slices) throw ValidationError("summand_history: one label per slice required");
  const BridgingSchedule s = summand_schedule(p);
  std::vector<CMatrix> ops;
  ops.push_back(projector(p.initial));
  for (std::size_t i = 0; i < labels.size(); ++i) ops.push_back(projector(p.basis(i).col(labels[i])));
  ops.push_back(projector(p.final));
  return HistoryVector::product(s.grid(), std::move(ops));
}

CMatrix operator_sum(const PathExpansion& p, std::uint64_t cap) {
  p.validate();
  tuple_count(p, cap);
  const BridgingSchedule s = summand_schedule(p);
  const Index d = p.dim();
  std::vector<CompensatedSum> acc(static_cast<std::size_t>(d * d));
  for_each_tuple(p.slices, d, [&](const std::vector<Index>& labels) {
    const CMatrix k = chain_operator(summand_history(p, labels), s);
    for (Index r = 0; r < d; ++r) {
      for (Index c = 0; c < d; ++c) acc[static_cast<std::size_t>(r * d + c)].add(k(r, c));
    }
  });
  CMatrix out(d, d);
  for (Index r = 0; r < d; ++r) {
    for (Index c = 0; c < d; ++c) out(r, c) = acc[static_cast<std::size_t>(r * d + c)].value();
  }
  return out;
}

cplx direct_amplitude(const PathExpansion& p) {
  p.validate();
  CMatrix u = identity(p.dim());
  for (const auto& step : step_propagators(p)) u = step * u;
  return p.final.dot(u * p.initial);
}

CMatrix direct_operator(const PathExpansion& p) {
  p.validate();
  CMatrix u = identity(p.dim());
  for (const auto& step : step_propagators(p)) u = step * u;
  return projector(p.final) * u * projector(p.initial);
}

std::vector<CMatrix> sample_hamiltonian(const std::function<CMatrix(double)>& h, double total_time,
                                        std::size_t slices) {
  const double dt = total_time / static_cast<double>(slices + 1);
  std::vector<CMatrix> out;
  for (std::size_t k = 0; k <= slices; ++k) out.push_back(h((static_cast<double>(k) + 0.5) * dt));
  return out;
}

std::vector<ConvergencePoint> convergence_scan(const std::function<CMatrix(double)>& h, double total_time,
                                               const CVector& initial, const CVector& final,
                                               const std::vector<std::size_t>& slice_counts,
                                               std::size_t reference_steps, std::uint64_t cap) {
  if (reference_steps == 0) throw ValidationError("convergence_scan: reference needs at least one step");
  PathExpansion ref;
  ref.hamiltonians = sample_hamiltonian(h, total_time, reference_steps - 1);
  ref.total_time = total_time;
  ref.slices = reference_steps - 1;
  ref.initial = initial;
  ref.final = final;
  const cplx reference = direct_amplitude(ref);

  std::vector<ConvergencePoint> out;
  for (std::size_t n : slice_counts) {
    PathExpansion p;
    p.hamiltonians = sample_hamiltonian(h, total_time, n);
    p.total_time = total_time;
    p.slices = n;
    p.initial = initial;
    p.final = final;
    const cplx a = amplitude_sum(p, cap);
    out.push_back({n, a, std::abs(a - reference)});
  }
  return out;
}

}  // namespace ehist::path

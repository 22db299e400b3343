#include <cmath>

#include "doctest.h"
#include "ehist/errors.hpp"
#include "ehist/histories.hpp"
#include "ehist/mzi.hpp"
#include "ehist/random.hpp"
#include "oracles.hpp"

using namespace ehist;

namespace {

CMatrix e(int k) { return projector(basis_vector(2, k)); }

std::vector<oracle::Term> terms_of(const HistoryVector& h) {
  std::vector<oracle::Term> out;
  for (const auto& t : h.terms()) out.push_back({t.amplitude, t.history.ops()});
  return out;
}

// Random projector of random rank on C^d.
CMatrix random_projector(Index d, Rng& rng) {
  const CMatrix u = random_unitary(d, rng);
  std::uniform_int_distribution<int> rank(0, static_cast<int>(d));
  const int r = rank(rng);
  CMatrix p = CMatrix::Zero(d, d);
  for (int k = 0; k < r; ++k) p += projector(u.col(k));
  return p;
}

HistoryVector random_history(const TimeGrid& g, int terms, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  HistoryVector h(g);
  for (int t = 0; t < terms; ++t) {
    std::vector<CMatrix> ops;
    for (std::size_t s = 0; s < g.size(); ++s) ops.push_back(random_projector(g.dim(s), rng));
    h = h + cplx(n(rng), n(rng)) * HistoryVector::product(g, ops);
  }
  return h;
}

BridgingSchedule random_schedule(const TimeGrid& g, Rng& rng) {
  std::vector<CMatrix> b;
  for (std::size_t s = 0; s + 1 < g.size(); ++s) b.push_back(random_unitary(g.dim(s), rng));
  return BridgingSchedule(g, b);
}

}  // namespace

TEST_SUITE("histories") {

TEST_CASE("time grids validate labels and dimensions") {
  CHECK_THROWS_AS(TimeGrid({}, {}), ValidationError);
  CHECK_THROWS_AS(TimeGrid({0.0, 0.0}, {2, 2}), ValidationError);
  CHECK_THROWS_AS(TimeGrid({0.0, 1.0}, {2, 1}), ValidationError);
  const TimeGrid g({0.0, 0.5, 2.0}, {2, 3, 2});
  CHECK(g.subgrid({0, 2}).labels() == std::vector<double>{0.0, 2.0});
  CHECK(g.operator_shape().dims == std::vector<Index>{4, 9, 4});
}

TEST_CASE("elementary histories accept projectors and the identity only") {
  const TimeGrid g = TimeGrid::uniform(2, 2);
  CHECK_NOTHROW(ElementaryHistory(g, {e(0), identity(2)}));
  CHECK_THROWS_AS(ElementaryHistory(g, {pauli_x(), e(0)}), ValidationError);
  CHECK_THROWS_AS(ElementaryHistory(g, {e(0)}), ValidationError);
  CHECK_THROWS_AS(ElementaryHistory(g, {e(0), identity(3)}), DimensionMismatch);
  CHECK(ElementaryHistory(g, {e(0), identity(2)}).is_identity_at(1));
}

TEST_CASE("odot of two single-slot histories") {
  const HistoryVector p = HistoryVector::product(TimeGrid({1.0}, {2}), {e(1)});
  const HistoryVector q = HistoryVector::product(TimeGrid({0.0}, {2}), {e(0)});
  const HistoryVector pq = odot(p, q);
  REQUIRE(pq.terms().size() == 1);
  CHECK(pq.terms()[0].amplitude == cplx(1.0));
  CHECK(pq.grid().labels() == std::vector<double>{0.0, 1.0});
  CHECK(max_abs(pq.terms()[0].history.op(0) - e(0)) == 0.0);
  CHECK(max_abs(pq.terms()[0].history.op(1) - e(1)) == 0.0);
}

TEST_CASE("odot with an identity slot extends a history by a trivially true property") {
  const TimeGrid g({0.0, 1.0}, {2, 2});
  const HistoryVector h = HistoryVector::product(g, {e(0), e(1)});
  const HistoryVector ih = odot(HistoryVector::product(TimeGrid({2.0}, {2}), {identity(2)}), h);
  CHECK(ih.grid().size() == 3);
  CHECK(ih.terms()[0].history.is_identity_at(2));
  const BridgingSchedule s3 = BridgingSchedule::identity(ih.grid());
  CHECK(std::abs(weight(ih, s3) - weight(h, BridgingSchedule::identity(g))) < 1e-15);
}

TEST_CASE("odot distributes over sums and rejects overlapping grids") {
  const TimeGrid later({2.0}, {2}), earlier({0.0, 1.0}, {2, 2});
  const HistoryVector h1 = HistoryVector::product(later, {e(0)});
  const HistoryVector h2 = HistoryVector::product(later, {e(1)});
  const HistoryVector g = HistoryVector::product(earlier, {e(0), hadamard() * e(0) * hadamard()});
  const cplx a(0.5, 1.0), b(-2.0, 0.25);
  const HistoryVector lhs = odot(a * h1 + b * h2, g);
  const HistoryVector rhs = a * odot(h1, g) + b * odot(h2, g);
  const BridgingSchedule s = BridgingSchedule::identity(lhs.grid());
  CHECK(max_abs(chain_operator(lhs, s) - chain_operator(rhs, s)) < 1e-15);
  CHECK_THROWS_AS(odot(g, h1), GridConflict);
  CHECK_THROWS_AS(odot(g, g), GridConflict);
}

TEST_CASE("canonicalization merges duplicate chains") {
  const TimeGrid g = TimeGrid::uniform(2, 2);
  const HistoryVector h = HistoryVector::product(g, {e(0), e(1)});
  const HistoryVector c = (h + cplx(2.0) * h).canonicalized();
  REQUIRE(c.terms().size() == 1);
  CHECK(std::abs(c.terms()[0].amplitude - 3.0) < 1e-15);
}

TEST_CASE("chain operator of a single-slot history is its projector") {
  const TimeGrid g({0.0}, {2});
  const CMatrix p = hadamard() * e(1) * hadamard();
  CHECK(max_abs(chain_operator(HistoryVector::product(g, {p}), BridgingSchedule::identity(g)) - p) < 1e-15);
}

TEST_CASE("all-identity chain is the composed evolution") {
  Rng rng = substream(31, 0);
  const TimeGrid g = TimeGrid::uniform(4, 3);
  const BridgingSchedule s = random_schedule(g, rng);
  const HistoryVector h = HistoryVector::product(g, {identity(3), identity(3), identity(3), identity(3)});
  CHECK(max_abs(chain_operator(h, s) - s.bridge(2) * s.bridge(1) * s.bridge(0)) < 1e-14);
  CHECK(max_abs(chain_operator(h, s) - s.between(3, 0)) < 1e-14);
  CHECK(std::abs(weight(h, s) - 3.0) < 1e-12);
}

TEST_CASE("MZI chain operator is |0><0|") {
  const CMatrix k = chain_operator(mzi::full_history(2), mzi::schedule());
  const oracle::Mat o = oracle::chain(terms_of(mzi::full_history(2)), mzi::schedule().bridges());
  CHECK(max_abs(k - e(0)) < 1e-15);
  CHECK(max_abs(o - e(0)) < 1e-15);
}

TEST_CASE("chain operator matches the explicit product oracle") {
  Rng rng = substream(32, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const TimeGrid g = TimeGrid::uniform(3 + trial % 2, 2 + trial % 3);
    const HistoryVector h = random_history(g, 3, rng);
    const BridgingSchedule s = random_schedule(g, rng);
    CHECK(max_abs(chain_operator(h, s) - oracle::chain(terms_of(h), s.bridges())) < 1e-12);
  }
}

TEST_CASE("chain operator is linear") {
  Rng rng = substream(33, 0);
  const TimeGrid g = TimeGrid::uniform(3, 3);
  const BridgingSchedule s = random_schedule(g, rng);
  for (int trial = 0; trial < 20; ++trial) {
    const HistoryVector a = random_history(g, 2, rng), b = random_history(g, 2, rng);
    const cplx x(0.7, -0.2), y(-1.1, 0.4);
    CHECK(max_abs(chain_operator(x * a + y * b, s) - (x * chain_operator(a, s) + y * chain_operator(b, s))) < 1e-12);
  }
}

TEST_CASE("chain operator rejects mixed slot dimensions") {
  const TimeGrid g({0.0, 1.0}, {2, 3});
  const HistoryVector h = HistoryVector::product(g, {identity(2), identity(3)});
  CHECK_THROWS_AS(BridgingSchedule::identity(g), DimensionMismatch);
  CHECK_THROWS_AS(chain_operator(h, BridgingSchedule::identity(TimeGrid::uniform(2, 2))), ValidationError);
}

TEST_CASE("inner product examples") {
  const TimeGrid g = TimeGrid::uniform(2, 2);
  const BridgingSchedule id = BridgingSchedule::identity(g);
  const HistoryVector h = HistoryVector::product(g, {e(0), e(0)});
  CHECK(std::abs(inner_product(h, h, id) - 1.0) < 1e-15);

  const BridgingSchedule s = mzi::schedule();
  const auto fam = mzi::t1_branch_family();
  CHECK(std::abs(inner_product(fam.members()[0], fam.members()[1], s)) < 1e-15);
  const oracle::Mat k1 = oracle::chain(terms_of(fam.members()[0]), s.bridges());
  const oracle::Mat k2 = oracle::chain(terms_of(fam.members()[1]), s.bridges());
  CHECK(std::abs(oracle::trace(oracle::matmul(oracle::dagger(k1), k2))) < 1e-15);
}

TEST_CASE("inner product is Hermitian and positive semidefinite") {
  Rng rng = substream(34, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const TimeGrid g = TimeGrid::uniform(2 + trial % 3, 2 + trial % 2);
    const BridgingSchedule s = random_schedule(g, rng);
    const HistoryVector a = random_history(g, 1 + trial % 3, rng);
    const cplx aa = inner_product(a, a, s);
    CHECK(aa.real() >= -1e-12);
    CHECK(std::abs(aa.imag()) < 1e-12);
    if (trial % 10 == 0) {
      const HistoryVector b = random_history(g, 2, rng);
      CHECK(std::abs(inner_product(a, b, s) - std::conj(inner_product(b, a, s))) < 1e-12);
    }
  }
}

TEST_CASE("inner product rejects different grids") {
  const HistoryVector a = HistoryVector::product(TimeGrid::uniform(2, 2), {e(0), e(0)});
  const HistoryVector b = HistoryVector::product(TimeGrid({0.0, 2.0}, {2, 2}), {e(0), e(0)});
  CHECK_THROWS_AS(inner_product(a, b, BridgingSchedule::identity(a.grid())), ValidationError);
  CHECK_THROWS_AS(a + b, ValidationError);
}

TEST_CASE("MZI weights are deterministic") {
  const BridgingSchedule s = mzi::schedule();
  CHECK(std::abs(weight(mzi::full_history(2), s) - 1.0) < 1e-12);
  CHECK(std::abs(weight(mzi::full_history(1), s)) < 1e-12);
}

TEST_CASE("mixed-state weight is the eigen-ensemble average") {
  Rng rng = substream(35, 0);
  const TimeGrid g = TimeGrid::uniform(3, 3);
  const BridgingSchedule s = random_schedule(g, rng);
  const HistoryVector h = random_history(g, 2, rng);
  const CMatrix rho = random_density(3, rng);
  const oracle::Mat k = oracle::chain(terms_of(h), s.bridges());
  const double expected = oracle::trace(oracle::matmul(oracle::matmul(k, rho), oracle::dagger(k))).real();
  CHECK(std::abs(weight(h, s, rho) - expected) < 1e-12);
  CHECK_THROWS_AS(weight(h, s, 2.0 * rho), ValidationError);
  CHECK_THROWS_AS(weight(h, s, pauli_z()), DimensionMismatch);
}

TEST_CASE("normalization") {
  const BridgingSchedule s = mzi::schedule();
  const HistoryVector h = mzi::full_history(2);
  const HistoryVector n = normalize(h, s);
  CHECK(std::abs(weight(n, s) - 1.0) < 1e-12);
  CHECK(std::abs(n.terms()[0].amplitude - 1.0) < 1e-12);
  const HistoryVector n2 = normalize(cplx(2.0) * h, s);
  CHECK(std::abs(n2.terms()[0].amplitude - 1.0) < 1e-12);
  CHECK_THROWS_AS(normalize(mzi::full_history(1), s), InconsistentHistory);
}

TEST_CASE("bridges satisfy the adjoint and composition rules") {
  Rng rng = substream(36, 0);
  std::uniform_real_distribution<double> t(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = 2 + trial % 3;
    const CMatrix h = random_hermitian(d, rng);
    std::vector<double> ts = {t(rng), t(rng), t(rng)};
    std::sort(ts.begin(), ts.end());
    if (ts[1] - ts[0] < 1e-6 || ts[2] - ts[1] < 1e-6) continue;
    const BridgingSchedule s = BridgingSchedule::from_hamiltonian(TimeGrid(ts, {d, d, d}), h);
    CHECK(max_abs(s.between(0, 1) - s.between(1, 0).adjoint()) < 1e-12);
    CHECK(max_abs(s.between(2, 1) * s.between(1, 0) - s.between(2, 0)) < 1e-12);
    CHECK(max_abs(s.between(2, 0) - expm_hermitian(h, ts[2] - ts[0])) < 1e-12);
  }
}

TEST_CASE("bridges must be unitary") {
  const TimeGrid g = TimeGrid::uniform(2, 2);
  CHECK_THROWS_AS(BridgingSchedule(g, {2.0 * identity(2)}), ValidationError);
  CHECK_THROWS_AS(BridgingSchedule(g, {}), ValidationError);
}

TEST_CASE("orthogonal projector chains are consistent") {
  const TimeGrid g = TimeGrid::uniform(2, 2);
  const HistoryFamily f({HistoryVector::product(g, {e(0), e(0)}), HistoryVector::product(g, {e(1), e(1)})},
                        BridgingSchedule::identity(g));
  const ConsistencyReport r = check_consistency(f);
  CHECK(r.consistent);
  CHECK(max_abs(r.gram - identity(2)) < 1e-15);
  CHECK(r.non_normalized_members.empty());
}

TEST_CASE("MZI which-path family at t1 is consistent") {
  const ConsistencyReport r = check_consistency(mzi::t1_branch_family());
  CHECK(r.consistent);
  CHECK(r.max_off_diagonal < 1e-10);
  CHECK(std::abs(r.gram(0, 0) - 0.5) < 1e-15);
  CHECK(std::abs(r.normalized_gram(0, 0) - 1.0) < 1e-15);
  CHECK(r.non_normalized_members.size() == 2);
}

TEST_CASE("which-path family with the output port fixed is not consistent") {
  const TimeGrid g = mzi::grid();
  std::vector<HistoryVector> m;
  for (int j = 1; j <= 2; ++j) {
    m.push_back(HistoryVector::product(g, {projector(mzi::phi0()), mzi::proj(1, j),
                                           identity(2), mzi::proj(3, 2)}));
  }
  const ConsistencyReport r = check_consistency(HistoryFamily(m, mzi::schedule()));
  CHECK_FALSE(r.consistent);
  CHECK(std::abs(r.gram(0, 1) - 0.25) < 1e-15);
}

TEST_CASE("duplicate members are reported as inconsistent") {
  const HistoryVector h = mzi::full_history(2);
  const ConsistencyReport r = check_consistency(HistoryFamily({h, h}, mzi::schedule()));
  CHECK_FALSE(r.consistent);
  CHECK(std::abs(r.max_off_diagonal - 1.0) < 1e-15);
  REQUIRE(r.duplicate_pairs.size() == 1);
  CHECK(r.duplicate_pairs[0] == std::pair<std::size_t, std::size_t>{0, 1});
}

TEST_CASE("zero-weight members are reported") {
  const ConsistencyReport r =
      check_consistency(HistoryFamily({mzi::full_history(1), mzi::full_history(2)}, mzi::schedule()));
  CHECK(r.consistent);
  CHECK(r.zero_weight_members == std::vector<std::size_t>{0});
}

TEST_CASE("completeness residual") {
  const TimeGrid g = TimeGrid::uniform(2, 2);
  const HistoryFamily f({HistoryVector::product(g, {e(0), e(0)}), HistoryVector::product(g, {e(1), e(1)})},
                        BridgingSchedule::identity(g));
  ConsistencyOptions o;
  o.coefficients = std::vector<cplx>{1.0, 1.0};
  CHECK(*check_consistency(f, o).completeness_residual < 1e-15);
  o.coefficients = std::vector<cplx>{1.0, 0.0};
  CHECK(std::abs(*check_consistency(f, o).completeness_residual - 1.0) < 1e-12);
  ConsistencyOptions fit;
  fit.fit_completeness = true;
  const auto r = check_consistency(f, fit);
  CHECK(*r.completeness_residual < 1e-12);
  CHECK(std::abs(r.completeness_coefficients[0] - 1.0) < 1e-12);
}

TEST_CASE("complete tree families carry unit total weight") {
  Rng rng = substream(37, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const Index d = 2 + trial % 2;
    const TimeGrid g = TimeGrid::uniform(4, d);
    const BridgingSchedule s = random_schedule(g, rng);
    const HistoryFamily f =
        tree_family(random_ket(d, rng), s, {random_unitary(d, rng), random_unitary(d, rng), random_unitary(d, rng)});
    CHECK(f.size() == static_cast<std::size_t>(d * d * d));
    double total = 0.0;
    for (const auto& m : f.members()) total += weight(m, s);
    CHECK(std::abs(total - 1.0) < 1e-10);
  }
}

}

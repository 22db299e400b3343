#include "ehist/mzi.hpp"

#include <cmath>

#include "ehist/errors.hpp"
#include "ehist/temporal.hpp"

namespace ehist::mzi {

namespace {

void check(int slot, int port) {
  if (slot < 1 || slot > 3 || port < 1 || port > 2) throw OutOfRange("mzi: slot must be 1..3, port 1..2");
}

}  // namespace

TimeGrid grid() { return TimeGrid({0.0, 1.0, 2.0, 3.0}, {2, 2, 2, 2}); }

BridgingSchedule schedule() { return BridgingSchedule(grid(), {hadamard(), identity(2), hadamard()}); }

CVector phi0() { return basis_vector(2, 0); }

CVector phi(int slot, int port) {
  check(slot, port);
  if (slot == 3) return basis_vector(2, port == 1 ? 1 : 0);
  return basis_vector(2, port - 1);
}

CMatrix proj(int slot, int port) { return projector(phi(slot, port)); }

HistoryVector full_history(int port) {
  return HistoryVector::product(grid(), {projector(phi0()), identity(2), identity(2), proj(3, port)});
}

HistoryFamily t1_branch_family() {
  std::vector<HistoryVector> members;
  for (int j = 1; j <= 2; ++j) {
    members.push_back(HistoryVector::product(grid(), {projector(phi0()), proj(1, j), identity(2), identity(2)}));
  }
  return HistoryFamily(std::move(members), schedule());
}

HistoryVector lambda() {
  const TimeGrid g = grid();
  const HistoryVector h = HistoryVector::product(g, {projector(phi0()), proj(1, 1), identity(2), proj(3, 1)}) +
                          HistoryVector::product(g, {projector(phi0()), proj(1, 2), identity(2), proj(3, 2)});
  return temporal::tensor_normalize(h);
}

HistoryVector lambda1() {
  const TimeGrid g({1.0, 3.0}, {2, 2});
  const HistoryVector h =
      HistoryVector::product(g, {proj(1, 1), proj(3, 1)}) + HistoryVector::product(g, {proj(1, 2), proj(3, 2)});
  return temporal::tensor_normalize(h);
}

HistoryVector psi() {
  const TimeGrid g({1.0, 2.0, 3.0}, {2, 2, 2});
  const HistoryVector h = HistoryVector::product(g, {proj(1, 1), proj(2, 1), proj(3, 1)}) +
                          HistoryVector::product(g, {proj(1, 2), proj(2, 2), proj(3, 2)});
  return temporal::tensor_normalize(h);
}

BridgingSchedule psi_schedule() {
  return BridgingSchedule(TimeGrid({1.0, 2.0, 3.0}, {2, 2, 2}), {identity(2), hadamard()});
}

}  // namespace ehist::mzi

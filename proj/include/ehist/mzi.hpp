#pragma once

// Mach-Zehnder interferometer as four-time histories on qubit slots
// t_0 < t_1 < t_2 < t_3: beam splitters are Hadamards, mirrors the identity.
//
//   |phi_0> -H-> (|phi_{1,1}> + |phi_{1,2}>)/sqrt2 -I-> ... -H-> |phi_{3,2}>
//
// Arm j of slots 1 and 2 is e_{j-1}; the output ports are phi_{3,1} = e_1
// (dark) and phi_{3,2} = e_0 (bright).

#include "ehist/histories.hpp"

namespace ehist::mzi {

TimeGrid grid();
// H, I, H.
BridgingSchedule schedule();

CVector phi0();
// slot in {1, 2, 3}, port in {1, 2}.
CVector phi(int slot, int port);
CMatrix proj(int slot, int port);

// [phi_{3,port}] (.) I (.) I (.) [phi_0].
HistoryVector full_history(int port);
// The two which-path branches [phi_{1,j}] (.) [phi_0] padded with identities.
HistoryFamily t1_branch_family();

// alpha([phi_{3,1}] (.) I (.) [phi_{1,1}] + [phi_{3,2}] (.) I (.) [phi_{1,2}]) (.) [phi_0],
// tensor-normalized.
HistoryVector lambda();
// Its {t_3, t_1} part, on the grid (t_1, t_3).
HistoryVector lambda1();
// gamma([phi_{3,1}] (.) [phi_{2,1}] (.) [phi_{1,1}] + [phi_{3,2}] (.) [phi_{2,2}] (.) [phi_{1,2}])
// on the grid (t_1, t_2, t_3).
HistoryVector psi();
// Bridges of `schedule()` restricted to (t_1, t_2, t_3).
BridgingSchedule psi_schedule();

}  // namespace ehist::mzi

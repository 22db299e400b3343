#pragma once

// Random inputs for searches and property checks. All generators take the
// engine by reference so callers control seeding.

#include <cstdint>
#include <random>

#include "ehist/linalg.hpp"

namespace ehist {

using Rng = std::mt19937_64;

// Engine for substream `stream` of `seed`; independent of thread scheduling.
Rng substream(std::uint64_t seed, std::uint64_t stream);

CMatrix random_complex(Index rows, Index cols, Rng& rng);
CMatrix random_hermitian(Index d, Rng& rng);
// Haar-distributed unitary (QR of a Ginibre matrix with phase fix).
CMatrix random_unitary(Index d, Rng& rng);
CVector random_ket(Index d, Rng& rng);
CMatrix random_density(Index d, Rng& rng);
// V diag(+-1) V^dagger with a random number of -1 eigenvalues in [1, d-1]
// unless allow_trivial, in which case +-I can also appear.
CMatrix random_dichotomic(Index d, Rng& rng, bool allow_trivial = false);

}  // namespace ehist

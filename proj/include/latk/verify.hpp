#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>

namespace latk {

// Finite-difference gradient checks at `trials` random points for each of:
// the encoder, the CRF, the label-aware MMD, the parameter penalty, and the
// full training objective. Prints one summary line per component, details
// for any failing point, and returns true iff every relative error stays
// below 1e-4.
bool verify_gradcheck(std::size_t trials, std::uint64_t seed, std::ostream& out,
                      std::size_t threads = 1);

// Certifies the sequence-distribution divergence bound on `trials` random
// chain instances (n <= 6, m <= 4, entries uniform in [-1, 1]), printing one
// certificate line each plus a tally; true iff every instance passes.
bool verify_bound(std::size_t trials, std::uint64_t seed, std::ostream& out);

}  // namespace latk

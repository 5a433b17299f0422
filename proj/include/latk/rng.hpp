#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace latk {

// Deterministic generator. All randomness in a run flows from one master
// seed through named substreams (e.g. "init", "data", "batching") so that
// components reproduce independently of each other's draw counts. The raw
// engine is mt19937_64, whose output sequence is pinned by the standard;
// the uniform helpers below avoid std distributions, which are not.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // [lo, hi)
    double uniform(double lo = 0.0, double hi = 1.0);

    // [0, n); n must be > 0
    std::size_t uniform_index(std::size_t n);

    // Fisher-Yates
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // Independent stream derived from the original seed and a name.
    // Derivation ignores how much this stream has already been consumed.
    Rng substream(std::string_view name) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace latk

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace scgc {

/// Counter-based generator: draw k of stream (seed, stream) is a pure
/// function of (seed, stream, k), so sequences are identical on every
/// platform and a generator can be copied to replay a stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform();
    double uniform(double lo, double hi);
    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t uniform_index(std::uint64_t bound);
    /// Standard normal via Box-Muller (consumes two draws).
    double normal();

    /// Independent stream derived from this generator's seed.
    Rng fork(std::uint64_t stream) const { return Rng(seed_, stream); }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

    friend bool operator==(const Rng&, const Rng&) = default;

private:
    std::uint64_t seed_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

}  // namespace scgc

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace dgdmn {

// Deterministic random stream. All randomness in an experiment flows from one
// root seed through named substreams (init, shuffle, latent, subsample, ...),
// so runs are bit-reproducible regardless of call interleaving elsewhere.
//
// The generator is a self-contained xoshiro256** with splitmix64 seeding;
// distributions are hand-rolled so results do not depend on the C++ library
// implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // Derives an independent child stream from this stream's seed (not its
    // current position), so derivation order never affects the child.
    Rng substream(std::string_view name) const;
    Rng substream(std::string_view name, std::uint64_t index) const;

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();
    // Uniform in [0, 1).
    double uniform01();
    // Uniform in [lo, hi).
    double uniform(double lo, double hi);
    // Standard normal via Box-Muller (pairs cached).
    double normal();
    // Uniform integer in [0, n). n must be > 0.
    std::size_t uniform_index(std::size_t n);

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = uniform_index(i + 1);
            std::swap(v[i], v[j]);
        }
    }

    // k distinct indices drawn uniformly without replacement from [0, n),
    // returned in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::uint64_t seed_;
    std::uint64_t state_[4];
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

} // namespace dgdmn

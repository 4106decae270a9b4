#pragma once

#include <cstdint>
#include <vector>

namespace greg {

// Deterministic 64-bit generator (splitmix64 core). All sampling helpers are
// implemented here rather than via <random> distributions so that a (seed,
// config) pair reproduces identical byte streams across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_u64(std::uint64_t n);

    // Uniform real in [0, 1).
    double uniform_real();

    // Standard normal via Box-Muller (pair cached).
    double normal();

    // Derive an independent child generator; stable under reordering of calls
    // on the child.
    Rng fork(std::uint64_t stream) const;

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_u64(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices from [0, n), in selection order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace greg

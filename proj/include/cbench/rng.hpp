#pragma once

#include <cstdint>
#include <string_view>

namespace cbench {

// Deterministic random stream built on the splitmix64 permutation.
//
// Everything downstream (graphs, boolean functions, names, observations)
// draws from these streams, so results are bit-reproducible across
// platforms and compilers. The standard <random> distributions are
// deliberately avoided: their output is implementation-defined.
//
// Stream derivation rule: a child stream is keyed off the parent's
// construction seed, not its current position, so deriving children is
// insensitive to how much the parent has already been consumed:
//
//   child_seed = scramble(parent_seed + GOLDEN * (key + SALT))
//
// String keys hash through FNV-1a first. Consumers document their stream
// layout next to the code that draws from it.
class Rng {
  public:
    explicit Rng(uint64_t seed) : base_(seed), state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). Fixed-point multiply keeps the reduction portable;
    // the O(n / 2^64) bias is irrelevant at the pool sizes used here.
    uint64_t uniform(uint64_t n) {
        return static_cast<uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_double() < p; }

    Rng child(uint64_t key) const {
        uint64_t z = base_ + 0x9E3779B97F4A7C15ull * (key + 0x632BE59BD9B4E019ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return Rng(z ^ (z >> 31));
    }

    Rng child(std::string_view tag) const { return child(fnv1a(tag)); }

    uint64_t seed() const { return base_; }

    static uint64_t fnv1a(std::string_view s) {
        uint64_t h = 0xCBF29CE484222325ull;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001B3ull;
        }
        return h;
    }

  private:
    uint64_t base_;
    uint64_t state_;
};

} // namespace cbench

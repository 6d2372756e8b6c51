#pragma once

#include <cstdint>
#include <random>

namespace mtgcd {

namespace detail {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

// Single RNG type used everywhere; every stream is derived from a root seed
// so runs are reproducible bit for bit.
class Rng {
  public:
    explicit Rng(uint64_t seed) : seed_(seed), eng_(detail::splitmix64(seed)) {}

    uint64_t next_u64() { return eng_(); }

    double uniform(double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(eng_);
    }

    // Inclusive on both ends.
    int uniform_int(int lo, int hi) {
        std::uniform_int_distribution<int> d(lo, hi);
        return d(eng_);
    }

    double normal(double mean = 0.0, double stddev = 1.0) {
        std::normal_distribution<double> d(mean, stddev);
        return d(eng_);
    }

    bool bernoulli(double p) {
        std::bernoulli_distribution d(p);
        return d(eng_);
    }

    // Independent stream for a named purpose; does not consume state.
    Rng fork(uint64_t salt) const {
        return Rng(detail::splitmix64(seed_ ^ (salt * 0x9e3779b97f4a7c15ULL)));
    }

    uint64_t seed() const { return seed_; }

  private:
    uint64_t seed_;
    std::mt19937_64 eng_;
};

} // namespace mtgcd

#pragma once

#include <cstdint>
#include <random>

namespace qxs {

/// splitmix64 finalizer; used to decorrelate derived seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seeded random stream. Every parallel task derives its own stream from
/// (master seed, task index), so results do not depend on scheduling.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : engine_(mix64(seed)) {}

    static RandomStream derived(std::uint64_t master, std::uint64_t task) {
        return RandomStream(mix64(master ^ mix64(task + 0x51ed2701ULL)));
    }

    double uniform() { return dist_(engine_); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        std::uniform_int_distribution<std::uint64_t> d(0, n - 1);
        return d(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> dist_{0.0, 1.0};
};

}  // namespace qxs

#pragma once

#include <cstdint>
#include <vector>

namespace bnv {

// Deterministic, platform-independent generator (splitmix64). Standard
// <random> distributions are implementation-defined, which would make
// seeded reports and frozen test values non-portable.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). Rejection-free bias is negligible at desk scale,
    // but do it properly anyway.
    uint64_t below(uint64_t n) {
        uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    int range(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(below(static_cast<uint64_t>(hi - lo + 1)));
    }

    double real() {  // [0, 1)
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    bool chance(double p) { return real() < p; }

    // Fork an independent stream, e.g. one per benchmark worker.
    Rng split() { return Rng(next() ^ 0xd1b54a32d192ed03ULL); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    uint64_t state_;
};

}  // namespace bnv

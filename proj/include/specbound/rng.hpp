#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace specbound {

// Deterministic random stream. mt19937_64 output is pinned by the standard;
// the double mapping below is ours, so streams are bit-reproducible across
// platforms (std::uniform_real_distribution is implementation-defined and
// must not be used anywhere in this codebase).
class RandomStream {
public:
    explicit RandomStream(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // [0, 1), 53-bit resolution
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // [0, n); n must be positive. Negligible bias at toy scale, fully deterministic.
    int uniform_int(int n) {
        return static_cast<int>(uniform01() * static_cast<double>(n));
    }

    // Draw from a normalized distribution by cumulative walk in ascending
    // index order. Returns the last index with positive mass if rounding
    // pushes the cumulative sum below the draw.
    int sample(std::span<const double> dist) {
        const double u = uniform01();
        double cum = 0.0;
        int last_positive = 0;
        for (size_t i = 0; i < dist.size(); ++i) {
            if (dist[i] > 0.0) last_positive = static_cast<int>(i);
            cum += dist[i];
            if (u < cum) return static_cast<int>(i);
        }
        return last_positive;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace specbound

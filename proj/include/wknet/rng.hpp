// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace wknet {

// mt19937 with hand-rolled draw helpers. The standard distributions and
// std::shuffle are implementation-defined, which would break the
// fixed-seed-bit-identical contract across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(static_cast<std::uint32_t>(seed)) {}

    std::uint32_t next_u32() { return engine_(); }

    // Uniform in [0, 1) with 24 bits of mantissa.
    float uniform01() {
        return static_cast<float>(engine_() >> 8) * (1.0f / 16777216.0f);
    }

    float uniform(float lo, float hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n). Multiply-shift; bias < n * 2^-32.
    std::uint32_t uniform_int(std::uint32_t n) {
        return static_cast<std::uint32_t>(
            (static_cast<std::uint64_t>(engine_()) * n) >> 32);
    }

    // Box-Muller, one value per call (the pair's sibling is discarded to
    // keep the draw count predictable).
    float normal() {
        float u1 = uniform01();
        float u2 = uniform01();
        if (u1 < 1e-12f) u1 = 1e-12f;
        return std::sqrt(-2.0f * std::log(u1)) *
               std::cos(6.28318530717958647692f * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_int(static_cast<std::uint32_t>(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937 engine_;
};

}  // namespace wknet

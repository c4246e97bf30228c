// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "wknet/network.hpp"
#include "wknet/rng.hpp"

namespace wknet::testutil {

// Small architecture for fast exact tests.
inline Architecture tiny_arch(int blocks = 2, int input_dim = 5) {
    Architecture a;
    a.input_dim = input_dim;
    a.initial_filter_size = 2;
    a.num_blocks = blocks;
    a.block_filter_size = 3;
    a.dilation_cycle = {1, 2};
    a.conv_channels = 4;
    a.residual_channels = 3;
    a.skip_channels = 4;
    a.head_hidden = 4;
    return a;
}

inline Architecture paper_arch() {
    return Architecture{};  // defaults are the reference configuration
}

inline FeatureSequence random_features(int frames, int dim, std::uint64_t seed,
                                       float lo = -1.0f, float hi = 1.0f) {
    Rng rng(seed);
    FeatureSequence f;
    f.hop_ms = 10.0f;
    f.frames = Matrix(frames, dim);
    for (auto& v : f.frames.data) v = rng.uniform(lo, hi);
    return f;
}

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline bool rel_close(double a, double b, double rel, double abs_floor) {
    return std::abs(a - b) <= std::max(abs_floor, rel * std::max(std::abs(a), std::abs(b)));
}

// Unique scratch directory under the build tree.
inline std::string scratch_dir(const std::string& tag) {
    const std::string dir = "wknet_test_scratch/" + tag;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace wknet::testutil

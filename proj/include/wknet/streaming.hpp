// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0
//
// One-frame-at-a-time inference. Each conv layer keeps a ring buffer of
// its last dilation*(filter_size-1) input vectors; buffers start zeroed,
// which reproduces the batch path's left zero padding exactly. The filter
// and gate convs of a block share one ring (they read the same input).

#pragma once

#include <cstdint>
#include <vector>

#include "wknet/network.hpp"

namespace wknet {

struct FlopsReport {
    std::uint64_t multiplications_per_frame = 0;
    std::uint64_t multiplications_per_second = 0;  // at 100 frames/s
};

// Analytic multiplies per streamed frame: convolutions, projections, the
// gating elementwise product, feature normalization, and the head.
// Additions and transcendentals are not counted.
FlopsReport count_multiplications(const Architecture& arch);

class StreamState {
public:
    StreamState(const ModelParams& params, const Architecture& arch, const FeatureNorm& norm);

    // Feeds one input_dim-sized frame; returns the keyword posterior,
    // identical to the batch posterior at this frame position.
    float push_frame(const float* frame);

    void reset();

    std::uint64_t frames_seen() const { return frames_seen_; }

    // Total cached vectors across all layers (equals the receptive field
    // on architectures whose first layer has dilation 1).
    int cached_vectors() const;

private:
    struct Ring {
        int dim = 0;
        int capacity = 0;
        int head = 0;
        std::vector<float> buf;

        void init(int cap, int d);
        void reset();
        void push(const float* v);
        const float* lag(int frames_back) const;  // 1 <= frames_back <= capacity
    };

    const ModelParams* params_;
    Architecture arch_;
    FeatureNorm norm_;
    std::uint64_t frames_seen_ = 0;

    Ring initial_ring_;
    std::vector<Ring> block_rings_;

    // Per-frame scratch, reused across pushes.
    std::vector<float> x0_, x_, next_, f_, g_, z_, proj_, skip_, skip_sum_, h1_, logits_;
};

}  // namespace wknet

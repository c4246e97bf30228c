// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0
//
// Dense/convolution compute kernels. All kernels are OpenMP-parallel with
// single-owner writes (one thread computes a whole output element), so
// results are bitwise identical for any thread count. A serial
// double-precision reference implementation lives in tests/reference and
// the kernel benchmark compares the two.

#pragma once

#include <cstdint>
#include <vector>

#include "wknet/tensor.hpp"

namespace wknet::kernels {

// Global multiply counter. Kernels self-report their analytic multiply
// counts (one atomic add per kernel call, not per multiply). Used by the
// streaming latency contract test and by `bench`.
void reset_multiply_count();
std::uint64_t multiply_count();
void count_multiplies(std::uint64_t n);

// Causal convolution weights, laid out (filter_tap, in_channel, out_channel).
struct ConvWeights {
    int filter_size = 0;
    int in_channels = 0;
    int out_channels = 0;
    std::vector<float> w;
    std::vector<float> b;

    ConvWeights() = default;
    ConvWeights(int s, int ci, int co)
        : filter_size(s), in_channels(ci), out_channels(co),
          w(static_cast<std::size_t>(s) * ci * co, 0.0f), b(co, 0.0f) {}

    float& at(int k, int ci, int co) {
        return w[(static_cast<std::size_t>(k) * in_channels + ci) * out_channels + co];
    }
    float at(int k, int ci, int co) const {
        return w[(static_cast<std::size_t>(k) * in_channels + ci) * out_channels + co];
    }
    std::uint64_t multiplies_per_frame() const {
        return static_cast<std::uint64_t>(filter_size) * in_channels * out_channels;
    }
};

// 1x1 projection / dense layer, laid out (in_channel, out_channel).
struct DenseWeights {
    int in_channels = 0;
    int out_channels = 0;
    std::vector<float> w;
    std::vector<float> b;

    DenseWeights() = default;
    DenseWeights(int ci, int co)
        : in_channels(ci), out_channels(co),
          w(static_cast<std::size_t>(ci) * co, 0.0f), b(co, 0.0f) {}

    float& at(int ci, int co) { return w[static_cast<std::size_t>(ci) * co_stride() + co]; }
    float at(int ci, int co) const { return w[static_cast<std::size_t>(ci) * co_stride() + co]; }
    std::uint64_t multiplies_per_frame() const {
        return static_cast<std::uint64_t>(in_channels) * out_channels;
    }

private:
    int co_stride() const { return out_channels; }
};

// One output frame of a causal convolution. taps[k] points at the input
// frame at lag k*dilation (tap 0 is the current frame); out-of-range taps
// must point at a zero vector. Shared by the batch and streaming paths so
// their accumulation order is identical.
void conv_frame(const float* const* taps, const ConvWeights& w, float* out);

// out[t] = conv over input frames t, t-d, t-2d, ... with left zero padding.
// out must be pre-sized T x out_channels.
void causal_conv_forward(const Matrix& x, const ConvWeights& w, int dilation, Matrix& out);

void dense_frame(const float* x, const DenseWeights& w, float* out);
void dense_forward(const Matrix& x, const DenseWeights& w, Matrix& out);

// Backward passes accumulate (+=) into grad / d_x; callers zero them.
// d_x may be null when the input gradient is not needed.
void conv_backward(const Matrix& x, const Matrix& d_out, const ConvWeights& w,
                   int dilation, ConvWeights& grad, Matrix* d_x);
void dense_backward(const Matrix& x, const Matrix& d_out, const DenseWeights& w,
                    DenseWeights& grad, Matrix* d_x);

float sigmoid(float v);

}  // namespace wknet::kernels

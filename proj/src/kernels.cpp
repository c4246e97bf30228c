// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0

#include "wknet/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstring>

namespace wknet::kernels {

namespace {
std::atomic<std::uint64_t> g_multiplies{0};
}  // namespace

void reset_multiply_count() { g_multiplies.store(0, std::memory_order_relaxed); }
std::uint64_t multiply_count() { return g_multiplies.load(std::memory_order_relaxed); }
void count_multiplies(std::uint64_t n) { g_multiplies.fetch_add(n, std::memory_order_relaxed); }

float sigmoid(float v) { return 1.0f / (1.0f + std::exp(-v)); }

void conv_frame(const float* const* taps, const ConvWeights& w, float* out) {
    const int s = w.filter_size;
    const int ci_n = w.in_channels;
    const int co_n = w.out_channels;
    std::memcpy(out, w.b.data(), sizeof(float) * co_n);
    for (int k = 0; k < s; ++k) {
        const float* tap = taps[k];
        const float* wk = w.w.data() + static_cast<std::size_t>(k) * ci_n * co_n;
        for (int ci = 0; ci < ci_n; ++ci) {
            const float v = tap[ci];
            const float* wr = wk + static_cast<std::size_t>(ci) * co_n;
            for (int co = 0; co < co_n; ++co) out[co] += v * wr[co];
        }
    }
}

void causal_conv_forward(const Matrix& x, const ConvWeights& w, int dilation, Matrix& out) {
    const int t_n = x.rows;
    const int s = w.filter_size;
    const std::vector<float> zeros(w.in_channels, 0.0f);
    count_multiplies(static_cast<std::uint64_t>(t_n) * w.multiplies_per_frame());

#pragma omp parallel for schedule(static) if (t_n >= 16)
    for (int t = 0; t < t_n; ++t) {
        const float* taps[16];
        for (int k = 0; k < s; ++k) {
            const int src = t - k * dilation;
            taps[k] = src >= 0 ? x.row(src) : zeros.data();
        }
        conv_frame(taps, w, out.row(t));
    }
}

void dense_frame(const float* x, const DenseWeights& w, float* out) {
    const int ci_n = w.in_channels;
    const int co_n = w.out_channels;
    std::memcpy(out, w.b.data(), sizeof(float) * co_n);
    for (int ci = 0; ci < ci_n; ++ci) {
        const float v = x[ci];
        const float* wr = w.w.data() + static_cast<std::size_t>(ci) * co_n;
        for (int co = 0; co < co_n; ++co) out[co] += v * wr[co];
    }
}

void dense_forward(const Matrix& x, const DenseWeights& w, Matrix& out) {
    const int t_n = x.rows;
    count_multiplies(static_cast<std::uint64_t>(t_n) * w.multiplies_per_frame());
#pragma omp parallel for schedule(static) if (t_n >= 16)
    for (int t = 0; t < t_n; ++t) dense_frame(x.row(t), w, out.row(t));
}

void conv_backward(const Matrix& x, const Matrix& d_out, const ConvWeights& w,
                   int dilation, ConvWeights& grad, Matrix* d_x) {
    const int t_n = x.rows;
    const int s = w.filter_size;
    const int ci_n = w.in_channels;
    const int co_n = w.out_channels;

    // Weight gradient: each (k, ci) row summed over time by one thread.
    const int rows = s * ci_n;
#pragma omp parallel for schedule(static) if (rows >= 8)
    for (int r = 0; r < rows; ++r) {
        const int k = r / ci_n;
        const int ci = r % ci_n;
        float* gw = grad.w.data() + static_cast<std::size_t>(r) * co_n;
        for (int t = k * dilation; t < t_n; ++t) {
            const float v = x(t - k * dilation, ci);
            const float* dr = d_out.row(t);
            for (int co = 0; co < co_n; ++co) gw[co] += v * dr[co];
        }
    }

    for (int t = 0; t < t_n; ++t) {
        const float* dr = d_out.row(t);
        for (int co = 0; co < co_n; ++co) grad.b[co] += dr[co];
    }

    if (d_x != nullptr) {
#pragma omp parallel for schedule(static) if (t_n >= 16)
        for (int t = 0; t < t_n; ++t) {
            float* dx = d_x->row(t);
            for (int k = 0; k < s; ++k) {
                const int dst = t + k * dilation;
                if (dst >= t_n) break;
                const float* dr = d_out.row(dst);
                const float* wk = w.w.data() + static_cast<std::size_t>(k) * ci_n * co_n;
                for (int ci = 0; ci < ci_n; ++ci) {
                    const float* wr = wk + static_cast<std::size_t>(ci) * co_n;
                    float acc = 0.0f;
                    for (int co = 0; co < co_n; ++co) acc += wr[co] * dr[co];
                    dx[ci] += acc;
                }
            }
        }
    }
}

void dense_backward(const Matrix& x, const Matrix& d_out, const DenseWeights& w,
                    DenseWeights& grad, Matrix* d_x) {
    const int t_n = x.rows;
    const int ci_n = w.in_channels;
    const int co_n = w.out_channels;

#pragma omp parallel for schedule(static) if (ci_n >= 8)
    for (int ci = 0; ci < ci_n; ++ci) {
        float* gw = grad.w.data() + static_cast<std::size_t>(ci) * co_n;
        for (int t = 0; t < t_n; ++t) {
            const float v = x(t, ci);
            const float* dr = d_out.row(t);
            for (int co = 0; co < co_n; ++co) gw[co] += v * dr[co];
        }
    }

    for (int t = 0; t < t_n; ++t) {
        const float* dr = d_out.row(t);
        for (int co = 0; co < co_n; ++co) grad.b[co] += dr[co];
    }

    if (d_x != nullptr) {
#pragma omp parallel for schedule(static) if (t_n >= 16)
        for (int t = 0; t < t_n; ++t) {
            const float* dr = d_out.row(t);
            float* dx = d_x->row(t);
            for (int ci = 0; ci < ci_n; ++ci) {
                const float* wr = w.w.data() + static_cast<std::size_t>(ci) * co_n;
                float acc = 0.0f;
                for (int co = 0; co < co_n; ++co) acc += wr[co] * dr[co];
                dx[ci] += acc;
            }
        }
    }
}

}  // namespace wknet::kernels

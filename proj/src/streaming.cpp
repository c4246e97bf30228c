// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0

#include "wknet/streaming.hpp"

#include <cmath>
#include <cstring>

#include "wknet/errors.hpp"

namespace wknet {

FlopsReport count_multiplications(const Architecture& arch) {
    arch.validate();
    std::uint64_t per = static_cast<std::uint64_t>(arch.input_dim);  // normalization
    per += static_cast<std::uint64_t>(arch.initial_filter_size) * arch.input_dim *
           arch.residual_channels;
    const std::uint64_t block_conv = static_cast<std::uint64_t>(arch.block_filter_size) *
                                     arch.residual_channels * arch.conv_channels;
    for (int i = 0; i < arch.num_blocks; ++i) {
        per += block_conv;
        if (arch.gating_enabled) per += block_conv + arch.conv_channels;
        per += static_cast<std::uint64_t>(arch.conv_channels) * arch.residual_channels;
        per += static_cast<std::uint64_t>(arch.conv_channels) * arch.skip_channels;
    }
    per += static_cast<std::uint64_t>(arch.skip_channels) * arch.head_hidden;
    per += static_cast<std::uint64_t>(arch.head_hidden) * arch.num_classes;

    FlopsReport report;
    report.multiplications_per_frame = per;
    report.multiplications_per_second = per * 100;
    return report;
}

void StreamState::Ring::init(int cap, int d) {
    dim = d;
    capacity = cap;
    head = 0;
    buf.assign(static_cast<std::size_t>(cap) * d, 0.0f);
}

void StreamState::Ring::reset() {
    head = 0;
    std::fill(buf.begin(), buf.end(), 0.0f);
}

void StreamState::Ring::push(const float* v) {
    if (capacity == 0) return;
    std::memcpy(buf.data() + static_cast<std::size_t>(head) * dim, v, sizeof(float) * dim);
    head = (head + 1) % capacity;
}

const float* StreamState::Ring::lag(int frames_back) const {
    int idx = head - frames_back;
    if (idx < 0) idx += capacity;
    return buf.data() + static_cast<std::size_t>(idx) * dim;
}

StreamState::StreamState(const ModelParams& params, const Architecture& arch,
                         const FeatureNorm& norm)
    : params_(&params), arch_(arch), norm_(norm) {
    arch_.validate();
    initial_ring_.init(1 * (arch_.initial_filter_size - 1), arch_.input_dim);
    block_rings_.resize(arch_.num_blocks);
    for (int i = 0; i < arch_.num_blocks; ++i) {
        block_rings_[i].init(arch_.dilation_of_block(i) * (arch_.block_filter_size - 1),
                             arch_.residual_channels);
    }
    x0_.resize(arch_.input_dim);
    x_.resize(arch_.residual_channels);
    next_.resize(arch_.residual_channels);
    f_.resize(arch_.conv_channels);
    g_.resize(arch_.conv_channels);
    z_.resize(arch_.conv_channels);
    proj_.resize(arch_.residual_channels);
    skip_.resize(arch_.skip_channels);
    skip_sum_.resize(arch_.skip_channels);
    h1_.resize(arch_.head_hidden);
    logits_.resize(arch_.num_classes);
}

int StreamState::cached_vectors() const {
    int n = initial_ring_.capacity;
    for (const auto& r : block_rings_) n += r.capacity;
    return n;
}

void StreamState::reset() {
    initial_ring_.reset();
    for (auto& r : block_rings_) r.reset();
    frames_seen_ = 0;
}

float StreamState::push_frame(const float* frame) {
    const ModelParams& p = *params_;

    kernels::count_multiplies(static_cast<std::uint64_t>(arch_.input_dim));
    for (int m = 0; m < arch_.input_dim; ++m) {
        x0_[m] = (frame[m] - norm_.mean[m]) * (1.0f / norm_.stddev[m]);
    }

    const float* taps[16];
    taps[0] = x0_.data();
    for (int k = 1; k < arch_.initial_filter_size; ++k) taps[k] = initial_ring_.lag(k);
    kernels::conv_frame(taps, p.initial, x_.data());
    kernels::count_multiplies(p.initial.multiplies_per_frame());
    initial_ring_.push(x0_.data());

    std::fill(skip_sum_.begin(), skip_sum_.end(), 0.0f);
    for (int i = 0; i < arch_.num_blocks; ++i) {
        const BlockParams& b = p.blocks[i];
        const int d = arch_.dilation_of_block(i);
        taps[0] = x_.data();
        for (int k = 1; k < arch_.block_filter_size; ++k) taps[k] = block_rings_[i].lag(k * d);

        kernels::conv_frame(taps, b.filt, f_.data());
        kernels::count_multiplies(b.filt.multiplies_per_frame());
        if (arch_.gating_enabled) {
            kernels::conv_frame(taps, b.gate, g_.data());
            kernels::count_multiplies(b.gate.multiplies_per_frame() + arch_.conv_channels);
            for (int c = 0; c < arch_.conv_channels; ++c) {
                const float tf = std::tanh(f_[c]);
                const float sg = kernels::sigmoid(g_[c]);
                z_[c] = tf * sg;
            }
        } else {
            for (int c = 0; c < arch_.conv_channels; ++c) z_[c] = std::tanh(f_[c]);
        }

        kernels::dense_frame(z_.data(), b.res_proj, proj_.data());
        kernels::count_multiplies(b.res_proj.multiplies_per_frame());
        for (int c = 0; c < arch_.residual_channels; ++c) next_[c] = x_[c] + proj_[c];

        kernels::dense_frame(z_.data(), b.skip_proj, skip_.data());
        kernels::count_multiplies(b.skip_proj.multiplies_per_frame());
        for (int c = 0; c < arch_.skip_channels; ++c) skip_sum_[c] += skip_[c];

        block_rings_[i].push(x_.data());
        std::swap(x_, next_);
    }

    for (auto& v : skip_sum_) v = v > 0.0f ? v : 0.0f;
    std::vector<float>& a1 = h1_;
    kernels::dense_frame(skip_sum_.data(), p.head_hidden, a1.data());
    kernels::count_multiplies(p.head_hidden.multiplies_per_frame());
    for (auto& v : a1) v = v > 0.0f ? v : 0.0f;
    kernels::dense_frame(a1.data(), p.head_out, logits_.data());
    kernels::count_multiplies(p.head_out.multiplies_per_frame());

    float mx = logits_[0];
    for (int c = 1; c < arch_.num_classes; ++c) mx = std::max(mx, logits_[c]);
    float sum = 0.0f;
    std::vector<float>& probs = logits_;
    for (int c = 0; c < arch_.num_classes; ++c) {
        probs[c] = std::exp(logits_[c] - mx);
        sum += probs[c];
    }
    for (int c = 0; c < arch_.num_classes; ++c) probs[c] /= sum;
    if (!std::isfinite(probs[1])) throw NumericError("non-finite streaming posterior");

    ++frames_seen_;
    return probs[1];
}

}  // namespace wknet

// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0
//
// WaveNet-style stack: initial causal conv, gated dilated causal conv
// blocks with residual and skip connections, rectified skip-sum head,
// 2-class softmax.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wknet/features.hpp"
#include "wknet/kernels.hpp"
#include "wknet/rng.hpp"
#include "wknet/tensor.hpp"

namespace wknet {

struct Architecture {
    int input_dim = 20;
    int initial_filter_size = 3;
    int num_blocks = 24;
    int block_filter_size = 3;
    std::vector<int> dilation_cycle{1, 2, 4, 8};
    int conv_channels = 64;      // width of the gated filter/gate convs
    int residual_channels = 16;  // residual stream width
    int skip_channels = 32;
    int head_hidden = 32;
    int num_classes = 2;
    bool gating_enabled = true;

    int dilation_of_block(int block) const {
        return dilation_cycle[block % dilation_cycle.size()];
    }
    void validate() const;
};

// Look-back span in frames: sum over conv layers of dilation * (filter - 1).
// Output t depends on input frames [t - r, t]; anything older never
// influences it.
int receptive_field(const Architecture& arch);

// Exact number of scalar weights + biases. Gate tensors are always counted:
// disabling gating changes behavior, not shapes.
std::uint64_t param_count(const Architecture& arch);

struct BlockParams {
    kernels::ConvWeights filt;       // residual_channels -> conv_channels
    kernels::ConvWeights gate;       // residual_channels -> conv_channels
    kernels::DenseWeights res_proj;  // conv_channels -> residual_channels
    kernels::DenseWeights skip_proj; // conv_channels -> skip_channels
};

struct TensorView {
    std::string name;
    float* data;
    std::size_t size;
    std::vector<int> shape;
};

struct ModelParams {
    kernels::ConvWeights initial;
    std::vector<BlockParams> blocks;
    kernels::DenseWeights head_hidden;
    kernels::DenseWeights head_out;

    static ModelParams shaped(const Architecture& arch);

    // All tensors in declaration order (the checkpoint order).
    std::vector<TensorView> tensors();
    std::vector<TensorView> tensors() const;

    std::uint64_t scalar_count() const;
    void fill(float v);
};

using GradientSet = ModelParams;

// Per-coefficient affine input normalization, stored in the checkpoint.
struct FeatureNorm {
    std::vector<float> mean;
    std::vector<float> stddev;

    static FeatureNorm identity(int dim);
};

FeatureNorm compute_feature_norm(const std::vector<FeatureSequence>& train_features);

struct PosteriorTrace {
    Matrix probs;  // T x num_classes, each row sums to 1

    int frames() const { return probs.rows; }
    float keyword(int t) const { return probs(t, 1); }
    std::vector<float> keyword_scores() const;
};

// Training-time forward intermediates (one utterance).
struct BlockCache {
    Matrix x_in;    // block input, T x residual_channels
    Matrix tanh_f;  // tanh of filter conv, T x conv_channels
    Matrix sig_g;   // sigmoid of gate conv (empty when gating disabled)
    Matrix z;       // gated activation, T x conv_channels
};

struct ForwardCache {
    Matrix input_norm;
    std::vector<BlockCache> blocks;
    Matrix skip_sum;  // pre-rectifier
    Matrix h0;        // rectified skip sum
    Matrix a1;        // head hidden pre-activation
    Matrix h1;        // head hidden post-ReLU
    Matrix logits;
};

// One gated residual block. residual_out = x + res_proj(z), skip_out =
// skip_proj(z), z = tanh(filt(x)) .* sigmoid(gate(x)) (or tanh only when
// gating is disabled). cache may be null outside training.
void gated_block_forward(const Matrix& x, const BlockParams& block, int dilation,
                         bool gating_enabled, Matrix& residual_out, Matrix& skip_out,
                         BlockCache* cache);

// Full batch forward. Throws NumericError on non-finite activations.
PosteriorTrace network_forward(const FeatureSequence& features, const ModelParams& params,
                               const Architecture& arch, const FeatureNorm& norm,
                               ForwardCache* cache = nullptr);

// Uniform on +-sqrt(6 / (fan_in + fan_out)); biases stay zero.
void xavier_fill(std::vector<float>& w, int fan_in, int fan_out, Rng& rng);

ModelParams init_params(const Architecture& arch, std::uint64_t seed);

}  // namespace wknet

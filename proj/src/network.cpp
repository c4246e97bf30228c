// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0

#include "wknet/network.hpp"

#include <cmath>
#include <string>

#include "wknet/errors.hpp"

namespace wknet {

void Architecture::validate() const {
    if (input_dim <= 0) throw ConfigError("input_dim must be positive");
    if (num_classes != 2) throw ConfigError("num_classes must be 2");
    if (num_blocks < 0) throw ConfigError("num_blocks must be non-negative");
    if (conv_channels <= 0 || residual_channels <= 0 || skip_channels <= 0 || head_hidden <= 0)
        throw ConfigError("channel counts must be positive");
    if (initial_filter_size < 1 || initial_filter_size > 16 ||
        block_filter_size < 1 || block_filter_size > 16)
        throw ConfigError("filter sizes must be in [1, 16]");
    if (dilation_cycle.empty()) throw ConfigError("dilation_cycle must not be empty");
    for (int d : dilation_cycle)
        if (d < 1) throw ConfigError("dilations must be >= 1");
}

int receptive_field(const Architecture& arch) {
    int r = 1 * (arch.initial_filter_size - 1);
    for (int i = 0; i < arch.num_blocks; ++i) {
        r += arch.dilation_of_block(i) * (arch.block_filter_size - 1);
    }
    return r;
}

std::uint64_t param_count(const Architecture& arch) {
    const auto conv = [](int s, int ci, int co) {
        return static_cast<std::uint64_t>(s) * ci * co + co;
    };
    const auto dense = [](int ci, int co) {
        return static_cast<std::uint64_t>(ci) * co + co;
    };
    std::uint64_t n = conv(arch.initial_filter_size, arch.input_dim, arch.residual_channels);
    n += static_cast<std::uint64_t>(arch.num_blocks) *
         (2 * conv(arch.block_filter_size, arch.residual_channels, arch.conv_channels) +
          dense(arch.conv_channels, arch.residual_channels) +
          dense(arch.conv_channels, arch.skip_channels));
    n += dense(arch.skip_channels, arch.head_hidden);
    n += dense(arch.head_hidden, arch.num_classes);
    return n;
}

ModelParams ModelParams::shaped(const Architecture& arch) {
    arch.validate();
    ModelParams p;
    p.initial = kernels::ConvWeights(arch.initial_filter_size, arch.input_dim,
                                     arch.residual_channels);
    p.blocks.resize(arch.num_blocks);
    for (auto& b : p.blocks) {
        b.filt = kernels::ConvWeights(arch.block_filter_size, arch.residual_channels,
                                      arch.conv_channels);
        b.gate = kernels::ConvWeights(arch.block_filter_size, arch.residual_channels,
                                      arch.conv_channels);
        b.res_proj = kernels::DenseWeights(arch.conv_channels, arch.residual_channels);
        b.skip_proj = kernels::DenseWeights(arch.conv_channels, arch.skip_channels);
    }
    p.head_hidden = kernels::DenseWeights(arch.skip_channels, arch.head_hidden);
    p.head_out = kernels::DenseWeights(arch.head_hidden, arch.num_classes);
    return p;
}

namespace {

void push_conv(std::vector<TensorView>& v, const std::string& name,
               const kernels::ConvWeights& c) {
    auto& cw = const_cast<kernels::ConvWeights&>(c);
    v.push_back({name + ".w", cw.w.data(), cw.w.size(),
                 {c.filter_size, c.in_channels, c.out_channels}});
    v.push_back({name + ".b", cw.b.data(), cw.b.size(), {c.out_channels}});
}

void push_dense(std::vector<TensorView>& v, const std::string& name,
                const kernels::DenseWeights& d) {
    auto& dw = const_cast<kernels::DenseWeights&>(d);
    v.push_back({name + ".w", dw.w.data(), dw.w.size(), {d.in_channels, d.out_channels}});
    v.push_back({name + ".b", dw.b.data(), dw.b.size(), {d.out_channels}});
}

std::vector<TensorView> enumerate_tensors(const ModelParams& p) {
    std::vector<TensorView> v;
    push_conv(v, "initial", p.initial);
    for (std::size_t i = 0; i < p.blocks.size(); ++i) {
        const std::string prefix = "block" + std::to_string(i);
        push_conv(v, prefix + ".filter", p.blocks[i].filt);
        push_conv(v, prefix + ".gate", p.blocks[i].gate);
        push_dense(v, prefix + ".res_proj", p.blocks[i].res_proj);
        push_dense(v, prefix + ".skip_proj", p.blocks[i].skip_proj);
    }
    push_dense(v, "head_hidden", p.head_hidden);
    push_dense(v, "head_out", p.head_out);
    return v;
}

}  // namespace

std::vector<TensorView> ModelParams::tensors() { return enumerate_tensors(*this); }
std::vector<TensorView> ModelParams::tensors() const { return enumerate_tensors(*this); }

std::uint64_t ModelParams::scalar_count() const {
    std::uint64_t n = 0;
    for (const auto& t : tensors()) n += t.size;
    return n;
}

void ModelParams::fill(float v) {
    for (auto& t : tensors()) std::fill(t.data, t.data + t.size, v);
}

FeatureNorm FeatureNorm::identity(int dim) {
    FeatureNorm n;
    n.mean.assign(dim, 0.0f);
    n.stddev.assign(dim, 1.0f);
    return n;
}

FeatureNorm compute_feature_norm(const std::vector<FeatureSequence>& train_features) {
    int dim = -1;
    std::uint64_t count = 0;
    for (const auto& f : train_features) {
        if (f.num_frames() == 0) continue;
        if (dim < 0) dim = f.dim();
        count += static_cast<std::uint64_t>(f.num_frames());
    }
    if (dim < 0 || count == 0) throw DataError("no frames to compute feature normalization");

    std::vector<double> sum(dim, 0.0), sq(dim, 0.0);
    for (const auto& f : train_features) {
        for (int t = 0; t < f.num_frames(); ++t) {
            const float* row = f.frames.row(t);
            for (int m = 0; m < dim; ++m) {
                sum[m] += row[m];
                sq[m] += static_cast<double>(row[m]) * row[m];
            }
        }
    }
    FeatureNorm norm;
    norm.mean.resize(dim);
    norm.stddev.resize(dim);
    for (int m = 0; m < dim; ++m) {
        const double mean = sum[m] / static_cast<double>(count);
        const double var = std::max(0.0, sq[m] / static_cast<double>(count) - mean * mean);
        norm.mean[m] = static_cast<float>(mean);
        norm.stddev[m] = std::max(1e-5f, static_cast<float>(std::sqrt(var)));
    }
    return norm;
}

std::vector<float> PosteriorTrace::keyword_scores() const {
    std::vector<float> s(probs.rows);
    for (int t = 0; t < probs.rows; ++t) s[t] = probs(t, 1);
    return s;
}

void gated_block_forward(const Matrix& x, const BlockParams& block, int dilation,
                         bool gating_enabled, Matrix& residual_out, Matrix& skip_out,
                         BlockCache* cache) {
    const int t_n = x.rows;
    const int conv_n = block.filt.out_channels;
    const int res_n = block.res_proj.out_channels;

    Matrix f(t_n, conv_n);
    kernels::causal_conv_forward(x, block.filt, dilation, f);
    Matrix g;
    if (gating_enabled) {
        g = Matrix(t_n, conv_n);
        kernels::causal_conv_forward(x, block.gate, dilation, g);
        kernels::count_multiplies(static_cast<std::uint64_t>(t_n) * conv_n);
    }

    Matrix z(t_n, conv_n);
    Matrix tanh_f(cache ? t_n : 0, cache ? conv_n : 0);
    Matrix sig_g((cache && gating_enabled) ? t_n : 0, (cache && gating_enabled) ? conv_n : 0);
#pragma omp parallel for schedule(static) if (t_n >= 16)
    for (int t = 0; t < t_n; ++t) {
        const float* fr = f.row(t);
        float* zr = z.row(t);
        if (gating_enabled) {
            const float* gr = g.row(t);
            for (int c = 0; c < conv_n; ++c) {
                const float tf = std::tanh(fr[c]);
                const float sg = kernels::sigmoid(gr[c]);
                zr[c] = tf * sg;
                if (cache) {
                    tanh_f.row(t)[c] = tf;
                    sig_g.row(t)[c] = sg;
                }
            }
        } else {
            for (int c = 0; c < conv_n; ++c) {
                const float tf = std::tanh(fr[c]);
                zr[c] = tf;
                if (cache) tanh_f.row(t)[c] = tf;
            }
        }
    }

    Matrix proj(t_n, res_n);
    kernels::dense_forward(z, block.res_proj, proj);
#pragma omp parallel for schedule(static) if (t_n >= 64)
    for (int t = 0; t < t_n; ++t) {
        const float* xr = x.row(t);
        float* rr = residual_out.row(t);
        const float* pr = proj.row(t);
        for (int c = 0; c < res_n; ++c) rr[c] = xr[c] + pr[c];
    }
    kernels::dense_forward(z, block.skip_proj, skip_out);

    if (cache) {
        cache->x_in = x;
        cache->tanh_f = std::move(tanh_f);
        cache->sig_g = std::move(sig_g);
        cache->z = std::move(z);
    }
}

PosteriorTrace network_forward(const FeatureSequence& features, const ModelParams& params,
                               const Architecture& arch, const FeatureNorm& norm,
                               ForwardCache* cache) {
    if (features.dim() != arch.input_dim)
        throw DataError("feature dimension " + std::to_string(features.dim()) +
                        " does not match network input " + std::to_string(arch.input_dim));
    const int t_n = features.num_frames();

    Matrix x0(t_n, arch.input_dim);
    kernels::count_multiplies(static_cast<std::uint64_t>(t_n) * arch.input_dim);
    for (int t = 0; t < t_n; ++t) {
        const float* src = features.frames.row(t);
        float* dst = x0.row(t);
        for (int m = 0; m < arch.input_dim; ++m) {
            dst[m] = (src[m] - norm.mean[m]) * (1.0f / norm.stddev[m]);
        }
    }

    Matrix x(t_n, arch.residual_channels);
    kernels::causal_conv_forward(x0, params.initial, 1, x);

    if (cache) {
        cache->input_norm = x0;
        cache->blocks.resize(arch.num_blocks);
    }

    Matrix skip_sum(t_n, arch.skip_channels);
    Matrix skip(t_n, arch.skip_channels);
    Matrix next(t_n, arch.residual_channels);
    for (int i = 0; i < arch.num_blocks; ++i) {
        gated_block_forward(x, params.blocks[i], arch.dilation_of_block(i),
                            arch.gating_enabled, next, skip,
                            cache ? &cache->blocks[i] : nullptr);
        for (std::size_t j = 0; j < skip_sum.data.size(); ++j) skip_sum.data[j] += skip.data[j];
        std::swap(x, next);
    }

    // ReLU would silently clamp a NaN to zero, so check before rectifying.
    for (float v : skip_sum.data) {
        if (!std::isfinite(v)) throw NumericError("non-finite activation in conv stack");
    }

    Matrix h0 = skip_sum;
    for (auto& v : h0.data) v = v > 0.0f ? v : 0.0f;

    Matrix a1(t_n, arch.head_hidden);
    kernels::dense_forward(h0, params.head_hidden, a1);
    Matrix h1 = a1;
    for (auto& v : h1.data) v = v > 0.0f ? v : 0.0f;

    Matrix logits(t_n, arch.num_classes);
    kernels::dense_forward(h1, params.head_out, logits);

    for (float v : logits.data) {
        if (!std::isfinite(v)) throw NumericError("non-finite activation in network head");
    }

    PosteriorTrace trace;
    trace.probs = Matrix(t_n, arch.num_classes);
    for (int t = 0; t < t_n; ++t) {
        const float* lr = logits.row(t);
        float* pr = trace.probs.row(t);
        float mx = lr[0];
        for (int c = 1; c < arch.num_classes; ++c) mx = std::max(mx, lr[c]);
        float sum = 0.0f;
        for (int c = 0; c < arch.num_classes; ++c) {
            pr[c] = std::exp(lr[c] - mx);
            sum += pr[c];
        }
        for (int c = 0; c < arch.num_classes; ++c) pr[c] /= sum;
    }

    if (cache) {
        cache->skip_sum = std::move(skip_sum);
        cache->h0 = std::move(h0);
        cache->a1 = std::move(a1);
        cache->h1 = std::move(h1);
        cache->logits = std::move(logits);
    }
    return trace;
}

void xavier_fill(std::vector<float>& w, int fan_in, int fan_out, Rng& rng) {
    const float bound = std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
    for (auto& v : w) v = rng.uniform(-bound, bound);
}

ModelParams init_params(const Architecture& arch, std::uint64_t seed) {
    ModelParams p = ModelParams::shaped(arch);
    Rng rng(seed);
    const int bs = arch.block_filter_size;
    xavier_fill(p.initial.w, arch.initial_filter_size * arch.input_dim,
                arch.initial_filter_size * arch.residual_channels, rng);
    for (auto& b : p.blocks) {
        xavier_fill(b.filt.w, bs * arch.residual_channels, bs * arch.conv_channels, rng);
        xavier_fill(b.gate.w, bs * arch.residual_channels, bs * arch.conv_channels, rng);
        xavier_fill(b.res_proj.w, arch.conv_channels, arch.residual_channels, rng);
        xavier_fill(b.skip_proj.w, arch.conv_channels, arch.skip_channels, rng);
    }
    xavier_fill(p.head_hidden.w, arch.skip_channels, arch.head_hidden, rng);
    xavier_fill(p.head_out.w, arch.head_hidden, arch.num_classes, rng);
    return p;
}

}  // namespace wknet

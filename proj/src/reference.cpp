// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0

#include "reference.hpp"

#include <cmath>

#include "wknet/errors.hpp"

namespace wknet::ref {

Mat to_mat(const Matrix& m) {
    Mat out(m.rows, std::vector<double>(m.cols));
    for (int r = 0; r < m.rows; ++r) {
        for (int c = 0; c < m.cols; ++c) out[r][c] = m(r, c);
    }
    return out;
}

Mat conv_naive(const Mat& x, const kernels::ConvWeights& w, int dilation) {
    const int t_n = static_cast<int>(x.size());
    Mat out(t_n, std::vector<double>(w.out_channels, 0.0));
    for (int t = 0; t < t_n; ++t) {
        for (int co = 0; co < w.out_channels; ++co) {
            double acc = w.b[co];
            for (int k = 0; k < w.filter_size; ++k) {
                const int src = t - k * dilation;
                if (src < 0) continue;
                for (int ci = 0; ci < w.in_channels; ++ci) {
                    acc += x[src][ci] * static_cast<double>(w.at(k, ci, co));
                }
            }
            out[t][co] = acc;
        }
    }
    return out;
}

Mat dense_naive(const Mat& x, const kernels::DenseWeights& w) {
    const int t_n = static_cast<int>(x.size());
    Mat out(t_n, std::vector<double>(w.out_channels, 0.0));
    for (int t = 0; t < t_n; ++t) {
        for (int co = 0; co < w.out_channels; ++co) {
            double acc = w.b[co];
            for (int ci = 0; ci < w.in_channels; ++ci) {
                acc += x[t][ci] * static_cast<double>(w.at(ci, co));
            }
            out[t][co] = acc;
        }
    }
    return out;
}

Mat forward(const FeatureSequence& features, const ModelParams& params,
            const Architecture& arch, const FeatureNorm& norm) {
    const int t_n = features.num_frames();

    Mat x(t_n, std::vector<double>(arch.input_dim));
    for (int t = 0; t < t_n; ++t) {
        for (int m = 0; m < arch.input_dim; ++m) {
            x[t][m] = (static_cast<double>(features.frames(t, m)) - norm.mean[m]) /
                      static_cast<double>(norm.stddev[m]);
        }
    }

    Mat h = conv_naive(x, params.initial, 1);

    Mat skip_sum(t_n, std::vector<double>(arch.skip_channels, 0.0));
    for (int i = 0; i < arch.num_blocks; ++i) {
        const BlockParams& b = params.blocks[i];
        const int d = arch.dilation_of_block(i);
        const Mat f = conv_naive(h, b.filt, d);
        Mat z(t_n, std::vector<double>(arch.conv_channels));
        if (arch.gating_enabled) {
            const Mat g = conv_naive(h, b.gate, d);
            for (int t = 0; t < t_n; ++t) {
                for (int c = 0; c < arch.conv_channels; ++c) {
                    z[t][c] = std::tanh(f[t][c]) * (1.0 / (1.0 + std::exp(-g[t][c])));
                }
            }
        } else {
            for (int t = 0; t < t_n; ++t) {
                for (int c = 0; c < arch.conv_channels; ++c) z[t][c] = std::tanh(f[t][c]);
            }
        }
        const Mat res = dense_naive(z, b.res_proj);
        const Mat skip = dense_naive(z, b.skip_proj);
        for (int t = 0; t < t_n; ++t) {
            for (int c = 0; c < arch.residual_channels; ++c) h[t][c] += res[t][c];
            for (int c = 0; c < arch.skip_channels; ++c) skip_sum[t][c] += skip[t][c];
        }
    }

    for (auto& row : skip_sum) {
        for (auto& v : row) v = v > 0.0 ? v : 0.0;
    }
    Mat h1 = dense_naive(skip_sum, params.head_hidden);
    for (auto& row : h1) {
        for (auto& v : row) v = v > 0.0 ? v : 0.0;
    }
    Mat logits = dense_naive(h1, params.head_out);

    Mat probs(t_n, std::vector<double>(arch.num_classes));
    for (int t = 0; t < t_n; ++t) {
        double mx = logits[t][0];
        for (int c = 1; c < arch.num_classes; ++c) mx = std::max(mx, logits[t][c]);
        double sum = 0.0;
        for (int c = 0; c < arch.num_classes; ++c) {
            probs[t][c] = std::exp(logits[t][c] - mx);
            sum += probs[t][c];
        }
        for (int c = 0; c < arch.num_classes; ++c) probs[t][c] /= sum;
    }
    return probs;
}

double masked_loss(const FeatureSequence& features, const LabelSequence& labels,
                   const ModelParams& params, const Architecture& arch,
                   const FeatureNorm& norm, double pos_weight) {
    const Mat probs = forward(features, params, arch, norm);
    if (static_cast<int>(probs.size()) != labels.frames())
        throw DataError("reference: trace/labels length mismatch");
    double weight_sum = 0.0, loss = 0.0;
    for (std::size_t t = 0; t < probs.size(); ++t) {
        if (!labels.mask[t]) continue;
        const double w = labels.targets[t] ? pos_weight : 1.0;
        weight_sum += w;
        loss += w * -std::log(probs[t][labels.targets[t]]);
    }
    if (weight_sum == 0.0) throw DataError("reference: empty mask");
    return loss / weight_sum;
}

}  // namespace wknet::ref

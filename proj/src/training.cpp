// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0

#include "wknet/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "wknet/errors.hpp"
#include "wknet/rng.hpp"

namespace wknet {

void TrainConfig::validate() const {
    if (learning_rate <= 0.0f) throw ConfigError("learning_rate must be positive");
    if (clip_norm <= 0.0f) throw ConfigError("clip_norm must be positive");
    if (batch_size <= 0) throw ConfigError("batch_size must be positive");
    if (epochs < 0 || max_steps < 0) throw ConfigError("epochs/max_steps must be non-negative");
    if (pos_weight <= 0.0f) throw ConfigError("pos_weight must be positive");
}

AdamState AdamState::shaped(const ModelParams& params) {
    AdamState s;
    for (const auto& t : params.tensors()) {
        s.m.emplace_back(t.size, 0.0f);
        s.v.emplace_back(t.size, 0.0f);
    }
    return s;
}

namespace {

double frame_weight(const LabelSequence& labels, int t, float pos_weight) {
    if (!labels.mask[t]) return 0.0;
    return labels.targets[t] ? static_cast<double>(pos_weight) : 1.0;
}

}  // namespace

double masked_cross_entropy(const PosteriorTrace& trace, const LabelSequence& labels,
                            float pos_weight) {
    if (trace.frames() != labels.frames())
        throw DataError("trace/labels length mismatch");
    double weight_sum = 0.0, loss = 0.0;
    for (int t = 0; t < trace.frames(); ++t) {
        const double w = frame_weight(labels, t, pos_weight);
        if (w == 0.0) continue;
        weight_sum += w;
        loss += w * -std::log(static_cast<double>(trace.probs(t, labels.targets[t])));
    }
    if (weight_sum == 0.0) throw DataError("loss mask has no active frames");
    return loss / weight_sum;
}

double masked_ce_gradient(const Matrix& probs, const LabelSequence& labels,
                          float pos_weight, Matrix& dlogits) {
    const int t_n = probs.rows;
    if (labels.frames() != t_n) throw DataError("trace/labels length mismatch");
    double weight_sum = 0.0;
    for (int t = 0; t < t_n; ++t) weight_sum += frame_weight(labels, t, pos_weight);
    if (weight_sum == 0.0) throw DataError("loss mask has no active frames");

    double loss = 0.0;
    dlogits.fill(0.0f);
    for (int t = 0; t < t_n; ++t) {
        const double w = frame_weight(labels, t, pos_weight);
        if (w == 0.0) continue;
        const int y = labels.targets[t];
        loss += w * -std::log(static_cast<double>(probs(t, y)));
        const float scale = static_cast<float>(w / weight_sum);
        for (int c = 0; c < probs.cols; ++c) {
            dlogits(t, c) = scale * (probs(t, c) - (c == y ? 1.0f : 0.0f));
        }
    }
    return loss / weight_sum;
}

double backward(const FeatureSequence& features, const LabelSequence& labels,
                const ModelParams& params, const Architecture& arch,
                const FeatureNorm& norm, GradientSet& grads, float pos_weight) {
    ForwardCache cache;
    const PosteriorTrace trace = network_forward(features, params, arch, norm, &cache);
    const int t_n = trace.frames();

    Matrix dlogits(t_n, arch.num_classes);
    const double loss = masked_ce_gradient(trace.probs, labels, pos_weight, dlogits);

    // Head.
    Matrix dh1(t_n, arch.head_hidden);
    kernels::dense_backward(cache.h1, dlogits, params.head_out, grads.head_out, &dh1);
    for (std::size_t j = 0; j < dh1.data.size(); ++j) {
        if (cache.a1.data[j] <= 0.0f) dh1.data[j] = 0.0f;
    }
    Matrix dskip(t_n, arch.skip_channels);
    kernels::dense_backward(cache.h0, dh1, params.head_hidden, grads.head_hidden, &dskip);
    for (std::size_t j = 0; j < dskip.data.size(); ++j) {
        if (cache.skip_sum.data[j] <= 0.0f) dskip.data[j] = 0.0f;
    }

    // Blocks, in reverse. dcur = gradient w.r.t. the block's residual
    // output; the top block's residual output feeds nothing.
    Matrix dcur(t_n, arch.residual_channels);
    Matrix dz(t_n, arch.conv_channels);
    Matrix df(t_n, arch.conv_channels);
    Matrix dg(t_n, arch.conv_channels);
    for (int i = arch.num_blocks - 1; i >= 0; --i) {
        BlockCache& bc = cache.blocks[i];
        BlockParams& bg = grads.blocks[i];
        const BlockParams& bp = params.blocks[i];
        const int dilation = arch.dilation_of_block(i);

        dz.fill(0.0f);
        kernels::dense_backward(bc.z, dskip, bp.skip_proj, bg.skip_proj, &dz);
        kernels::dense_backward(bc.z, dcur, bp.res_proj, bg.res_proj, &dz);

        const int t_rows = t_n;
#pragma omp parallel for schedule(static) if (t_rows >= 16)
        for (int t = 0; t < t_rows; ++t) {
            const float* dzr = dz.row(t);
            const float* tf = bc.tanh_f.row(t);
            float* dfr = df.row(t);
            if (arch.gating_enabled) {
                const float* sg = bc.sig_g.row(t);
                float* dgr = dg.row(t);
                for (int c = 0; c < arch.conv_channels; ++c) {
                    dfr[c] = dzr[c] * sg[c] * (1.0f - tf[c] * tf[c]);
                    dgr[c] = dzr[c] * tf[c] * sg[c] * (1.0f - sg[c]);
                }
            } else {
                for (int c = 0; c < arch.conv_channels; ++c) {
                    dfr[c] = dzr[c] * (1.0f - tf[c] * tf[c]);
                }
            }
        }

        Matrix dprev = dcur;  // residual pass-through
        kernels::conv_backward(bc.x_in, df, bp.filt, dilation, bg.filt, &dprev);
        if (arch.gating_enabled) {
            kernels::conv_backward(bc.x_in, dg, bp.gate, dilation, bg.gate, &dprev);
        }
        dcur = std::move(dprev);
    }

    kernels::conv_backward(cache.input_norm, dcur, params.initial, 1, grads.initial, nullptr);

    for (const auto& t : grads.tensors()) {
        for (std::size_t j = 0; j < t.size; ++j) {
            if (!std::isfinite(t.data[j]))
                throw NumericError("non-finite gradient in tensor " + t.name);
        }
    }
    return loss;
}

double global_grad_norm(const GradientSet& grads) {
    double sq = 0.0;
    for (const auto& t : grads.tensors()) {
        for (std::size_t j = 0; j < t.size; ++j) {
            sq += static_cast<double>(t.data[j]) * t.data[j];
        }
    }
    return std::sqrt(sq);
}

void clip_gradients(GradientSet& grads, float clip_norm) {
    const double norm = global_grad_norm(grads);
    if (norm <= static_cast<double>(clip_norm)) return;
    const float scale = static_cast<float>(clip_norm / norm);
    for (auto& t : grads.tensors()) {
        for (std::size_t j = 0; j < t.size; ++j) t.data[j] *= scale;
    }
}

void adam_step(ModelParams& params, const GradientSet& grads, AdamState& state,
               const TrainConfig& config) {
    state.step += 1;
    const double bc1 = 1.0 - std::pow(static_cast<double>(config.adam_beta1), state.step);
    const double bc2 = 1.0 - std::pow(static_cast<double>(config.adam_beta2), state.step);
    const float inv_bc1 = static_cast<float>(1.0 / bc1);
    const float inv_bc2 = static_cast<float>(1.0 / bc2);

    auto pt = params.tensors();
    const auto gt = grads.tensors();
    for (std::size_t i = 0; i < pt.size(); ++i) {
        float* p = pt[i].data;
        const float* g = gt[i].data;
        float* m = state.m[i].data();
        float* v = state.v[i].data();
        const std::size_t n = pt[i].size;
        for (std::size_t j = 0; j < n; ++j) {
            m[j] = config.adam_beta1 * m[j] + (1.0f - config.adam_beta1) * g[j];
            v[j] = config.adam_beta2 * v[j] + (1.0f - config.adam_beta2) * g[j] * g[j];
            const float m_hat = m[j] * inv_bc1;
            const float v_hat = v[j] * inv_bc2;
            p[j] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_eps);
        }
    }
}

namespace {

bool sample_is_positive(const TrainSample& s) {
    return std::any_of(s.labels.targets.begin(), s.labels.targets.end(),
                       [](std::uint8_t t) { return t != 0; });
}

double split_loss(const std::vector<TrainSample>& split, const ModelParams& params,
                  const Architecture& arch, const FeatureNorm& norm, float pos_weight) {
    double sum = 0.0;
    for (const auto& s : split) {
        sum += masked_cross_entropy(network_forward(s.features, params, arch, norm), s.labels,
                                    pos_weight);
    }
    return sum / static_cast<double>(split.size());
}

void add_scaled(GradientSet& acc, const GradientSet& g, float scale) {
    auto at = acc.tensors();
    const auto gt = g.tensors();
    for (std::size_t i = 0; i < at.size(); ++i) {
        for (std::size_t j = 0; j < at[i].size; ++j) {
            at[i].data[j] += scale * gt[i].data[j];
        }
    }
}

}  // namespace

TrainResult train(const std::vector<TrainSample>& train_set,
                  const std::vector<TrainSample>& dev_set, const Architecture& arch,
                  const FeatureNorm& norm, const TrainConfig& config,
                  std::ostream* progress) {
    config.validate();
    arch.validate();
    if (train_set.empty()) throw DataError("empty training set");
    {
        bool any_pos = false, any_neg = false;
        for (const auto& s : train_set) (sample_is_positive(s) ? any_pos : any_neg) = true;
        if (!any_pos || !any_neg)
            throw DataError("training set must contain both positive and negative samples");
    }

    ModelParams params = init_params(arch, config.seed);
    AdamState adam = AdamState::shaped(params);
    Rng shuffle_rng(config.seed + 0x5eedu);

    TrainResult result;
    result.best = Checkpoint{arch, norm, params};
    result.best_selection_loss = std::numeric_limits<double>::infinity();
    const std::string selection_split = dev_set.empty() ? "train_eval" : "dev";
    const auto& selection_set = dev_set.empty() ? train_set : dev_set;

    std::vector<int> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    GradientSet batch_grads = ModelParams::shaped(arch);
    GradientSet utt_grads = ModelParams::shaped(arch);

    int step = 0;
    bool stop = false;
    for (int epoch = 0; epoch < config.epochs && !stop; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t begin = 0; begin < order.size() && !stop; begin += config.batch_size) {
            const std::size_t end = std::min(order.size(), begin + config.batch_size);
            std::vector<int> batch(order.begin() + begin, order.begin() + end);
            // Canonical accumulation order: a step is invariant to batch
            // ordering and to the shuffle's internal arrangement.
            std::sort(batch.begin(), batch.end());

            batch_grads.fill(0.0f);
            double batch_loss = 0.0;
            bool finite = true;
            const float inv_n = 1.0f / static_cast<float>(batch.size());
            try {
                for (int idx : batch) {
                    utt_grads.fill(0.0f);
                    batch_loss += backward(train_set[idx].features, train_set[idx].labels,
                                           params, arch, norm, utt_grads, config.pos_weight);
                    add_scaled(batch_grads, utt_grads, inv_n);
                }
            } catch (const NumericError&) {
                finite = false;
            }
            batch_loss /= static_cast<double>(batch.size());
            if (!finite || !std::isfinite(batch_loss)) {
                result.diverged = true;
                result.log.push_back({step, "train", batch_loss});
                if (progress)
                    *progress << "step " << step << ": divergence detected, aborting\n";
                stop = true;
                break;
            }

            clip_gradients(batch_grads, config.clip_norm);
            adam_step(params, batch_grads, adam, config);
            ++step;
            result.log.push_back({step, "train", batch_loss});
            if (config.max_steps > 0 && step >= config.max_steps) stop = true;
        }

        const double sel = split_loss(selection_set, params, arch, norm, config.pos_weight);
        result.log.push_back({step, selection_split, sel});
        if (progress) {
            *progress << "epoch " << epoch + 1 << " step " << step << " " << selection_split
                      << " loss " << sel << "\n";
        }
        if (sel < result.best_selection_loss) {
            result.best_selection_loss = sel;
            result.best = Checkpoint{arch, norm, params};
        }
        if (config.stop_loss > 0.0f && sel < static_cast<double>(config.stop_loss)) stop = true;
    }

    result.steps_run = step;
    return result;
}

}  // namespace wknet

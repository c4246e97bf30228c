// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "wknet/checkpoint.hpp"
#include "wknet/labeling.hpp"
#include "wknet/network.hpp"

namespace wknet {

struct TrainConfig {
    float learning_rate = 1e-3f;
    float adam_beta1 = 0.9f;
    float adam_beta2 = 0.999f;
    float adam_eps = 1e-8f;
    float clip_norm = 10.0f;
    int batch_size = 32;
    int epochs = 20;
    int max_steps = 0;       // 0 = no cap
    std::uint64_t seed = 1234;
    float pos_weight = 1.0f;
    float stop_loss = 0.0f;  // stop once the selection-split loss drops below; 0 = off

    void validate() const;
};

struct AdamState {
    std::vector<std::vector<float>> m;
    std::vector<std::vector<float>> v;
    std::int64_t step = 0;

    static AdamState shaped(const ModelParams& params);
};

// Mean over mask-active frames of -log p(target). pos_weight != 1 turns the
// mean into a weighted mean with that weight on target-1 frames.
double masked_cross_entropy(const PosteriorTrace& trace, const LabelSequence& labels,
                            float pos_weight = 1.0f);

// Loss plus its gradient w.r.t. the logits; masked-out frames get exactly
// zero rows. Throws DataError when the mask has no active frame.
double masked_ce_gradient(const Matrix& probs, const LabelSequence& labels,
                          float pos_weight, Matrix& dlogits);

// Forward + hand-derived backward of the masked cross-entropy through the
// whole stack. Gradients are accumulated (+=) into `grads` (callers zero
// them); returns the utterance loss. Throws NumericError (naming the
// tensor) if a non-finite gradient appears.
double backward(const FeatureSequence& features, const LabelSequence& labels,
                const ModelParams& params, const Architecture& arch,
                const FeatureNorm& norm, GradientSet& grads, float pos_weight = 1.0f);

double global_grad_norm(const GradientSet& grads);

// Joint L2 clipping: if the global norm exceeds clip_norm, every tensor is
// scaled by clip_norm / norm.
void clip_gradients(GradientSet& grads, float clip_norm);

void adam_step(ModelParams& params, const GradientSet& grads, AdamState& state,
               const TrainConfig& config);

struct TrainSample {
    FeatureSequence features;
    LabelSequence labels;
};

struct LossPoint {
    int step;
    std::string split;
    double loss;
};

struct TrainResult {
    Checkpoint best;
    double best_selection_loss = 0.0;
    int steps_run = 0;
    bool diverged = false;
    std::vector<LossPoint> log;
};

// Shuffled mini-batch training with gradient accumulation (one utterance
// per loss term), joint-norm clipping and Adam. Deterministic for a fixed
// seed: per-utterance gradients are summed in dataset-index order, so a
// step is also bitwise invariant to batch ordering. Model selection by
// masked cross-entropy on dev (train split when dev is empty), evaluated
// at epoch boundaries.
TrainResult train(const std::vector<TrainSample>& train_set,
                  const std::vector<TrainSample>& dev_set, const Architecture& arch,
                  const FeatureNorm& norm, const TrainConfig& config,
                  std::ostream* progress = nullptr);

}  // namespace wknet

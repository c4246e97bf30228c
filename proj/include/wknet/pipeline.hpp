// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0
//
// Glue between manifests and the model: per-utterance feature extraction,
// labeling (manifest end-of-keyword annotations override the VAD), and
// batch scoring. Utterance loops are OpenMP-parallel; outputs land at
// fixed indices so results do not depend on worker timing.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "wknet/dataio.hpp"
#include "wknet/labeling.hpp"
#include "wknet/network.hpp"
#include "wknet/training.hpp"

namespace wknet {

int end_frame_from_ms(double ms, float hop_ms, int num_frames);

struct PreparedDataset {
    std::vector<TrainSample> samples;
    std::vector<std::string> skipped;  // "<path>: <reason>" for unusable positives
};

// Builds (features, labels) pairs. Positives with no detectable speech and
// no annotation are skipped and reported, matching the per-utterance error
// contract; configuration problems still throw.
PreparedDataset prepare_training_set(const std::vector<ManifestEntry>& entries,
                                     const FeatureExtractor& extractor,
                                     const LabelingConfig& labeling, const VadConfig& vad,
                                     std::ostream* log = nullptr);

struct ScoredSplit {
    std::vector<std::vector<float>> traces;  // raw keyword posteriors
    std::vector<double> seconds;             // audio duration per utterance
    std::vector<int> end_frames;             // labeled keyword end, -1 for negatives
};

// WAV -> features -> forward, one utterance at a time (audio is not kept).
// When `noise_pool` is non-empty, each utterance is mixed with a noise clip
// (round-robin, per-utterance seed derived from augment.seed) before
// feature extraction.
ScoredSplit score_split(const std::vector<ManifestEntry>& entries,
                        const FeatureExtractor& extractor, const ModelParams& params,
                        const Architecture& arch, const FeatureNorm& norm,
                        const std::vector<AudioBuffer>& noise_pool = {},
                        const AugmentSpec& augment = {});

// Feature extraction for a manifest, parallel across utterances.
std::vector<FeatureSequence> extract_all(const std::vector<ManifestEntry>& entries,
                                         const FeatureExtractor& extractor);

}  // namespace wknet

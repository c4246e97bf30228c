// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wknet/features.hpp"

namespace wknet {

// Energy-threshold VAD used only for labeling positives (never at
// inference). Per-frame energy is the mean of the LFBE coefficients;
// the threshold is the `percentile` energy plus `margin` (log domain).
struct VadConfig {
    float margin = 3.0f;
    float percentile = 0.10f;
    int hangover_frames = 5;
};

enum class LabelingScheme { end_of_keyword, default_aligned };

struct LabelingConfig {
    LabelingScheme scheme = LabelingScheme::end_of_keyword;
    int delta_before_frames = 15;
    int delta_after_frames = 15;
    bool masking_enabled = true;
};

struct KeywordSpan {
    int end_frame = 0;
    std::optional<int> start_frame;
};

// Per-frame binary target plus loss mask (1 = frame contributes).
struct LabelSequence {
    std::vector<std::uint8_t> targets;
    std::vector<std::uint8_t> mask;

    int frames() const { return static_cast<int>(targets.size()); }
};

// Voiced regions [first, last] after hangover merging (gaps of at most
// hangover_frames sub-threshold frames are bridged).
std::vector<std::pair<int, int>> vad_voiced_regions(const FeatureSequence& features,
                                                    const VadConfig& config);

// End = last above-threshold frame of the last voiced region; start = its
// first frame. Throws DataError when no speech is detected.
KeywordSpan locate_end_of_keyword(const FeatureSequence& features, const VadConfig& config);

LabelSequence build_targets(int num_frames, const KeywordSpan& span,
                            const LabelingConfig& config);

// Negative utterances: all targets 0, full mask, independent of config.
LabelSequence negative_labels(int num_frames);

}  // namespace wknet

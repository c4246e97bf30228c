// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0

#include "wknet/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wknet/errors.hpp"

namespace wknet {

std::vector<std::pair<int, int>> vad_voiced_regions(const FeatureSequence& features,
                                                    const VadConfig& config) {
    const int t_n = features.num_frames();
    std::vector<std::pair<int, int>> regions;
    if (t_n == 0) return regions;

    std::vector<float> energy(t_n);
    for (int t = 0; t < t_n; ++t) {
        const float* row = features.frames.row(t);
        float sum = 0.0f;
        for (int m = 0; m < features.dim(); ++m) sum += row[m];
        energy[t] = sum / static_cast<float>(features.dim());
    }

    // Noise floor: low-percentile energy (nearest rank).
    std::vector<float> sorted(energy);
    std::sort(sorted.begin(), sorted.end());
    const int idx = std::clamp(
        static_cast<int>(config.percentile * static_cast<float>(t_n - 1)), 0, t_n - 1);
    const float threshold = sorted[idx] + config.margin;

    int region_start = -1, region_end = -1;
    for (int t = 0; t < t_n; ++t) {
        if (energy[t] <= threshold) continue;
        if (region_start < 0) {
            region_start = t;
        } else if (t - region_end - 1 > config.hangover_frames) {
            regions.emplace_back(region_start, region_end);
            region_start = t;
        }
        region_end = t;
    }
    if (region_start >= 0) regions.emplace_back(region_start, region_end);
    return regions;
}

KeywordSpan locate_end_of_keyword(const FeatureSequence& features, const VadConfig& config) {
    const auto regions = vad_voiced_regions(features, config);
    if (regions.empty()) throw DataError("no speech detected");
    KeywordSpan span;
    span.start_frame = regions.back().first;
    span.end_frame = regions.back().second;
    return span;
}

LabelSequence build_targets(int num_frames, const KeywordSpan& span,
                            const LabelingConfig& config) {
    if (span.end_frame < 0 || span.end_frame >= num_frames)
        throw DataError("keyword end frame " + std::to_string(span.end_frame) +
                        " outside utterance of " + std::to_string(num_frames) + " frames");
    if (config.delta_before_frames < 0 || config.delta_after_frames < 0)
        throw ConfigError("labeling deltas must be non-negative");

    int lo = 0, hi = 0;
    if (config.scheme == LabelingScheme::end_of_keyword) {
        lo = std::max(0, span.end_frame - config.delta_before_frames);
        hi = std::min(num_frames - 1, span.end_frame + config.delta_after_frames);
    } else {
        if (!span.start_frame.has_value())
            throw ConfigError("default_aligned labeling requires a keyword start frame");
        if (*span.start_frame < 0 || *span.start_frame > span.end_frame)
            throw DataError("keyword start frame after its end frame");
        lo = *span.start_frame;
        hi = span.end_frame;
    }

    LabelSequence labels;
    labels.targets.assign(num_frames, 0);
    labels.mask.assign(num_frames, config.masking_enabled ? 0 : 1);
    for (int t = lo; t <= hi; ++t) {
        labels.targets[t] = 1;
        labels.mask[t] = 1;
    }
    return labels;
}

LabelSequence negative_labels(int num_frames) {
    LabelSequence labels;
    labels.targets.assign(num_frames, 0);
    labels.mask.assign(num_frames, 1);
    return labels;
}

}  // namespace wknet

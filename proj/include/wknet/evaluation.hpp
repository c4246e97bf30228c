// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <vector>

namespace wknet {

struct SmoothingConfig {
    int w_smooth = 30;
};

struct TriggerConfig {
    float threshold = 0.5f;
    int refractory_frames = 80;
    // Optionally ignore the first frames of a stream (one receptive field)
    // before allowing triggers. Off by default.
    int suppress_warmup_frames = 0;
};

// Trailing moving average: out[t] = mean(raw[max(0, t-w+1) .. t]).
std::vector<float> smooth(const std::vector<float>& raw, const SmoothingConfig& config);

// Frames where the smoothed posterior strictly exceeds the threshold,
// debounced: after a trigger at t the next is allowed at t + refractory + 1.
std::vector<int> detect(const std::vector<float>& smoothed, const TriggerConfig& config);

struct DetPoint {
    float threshold;
    double fah;
    double frr_percent;
};

struct DetectionReport {
    float threshold = 0.0f;
    double fah = 0.0;
    double frr_percent = 0.0;
    std::vector<std::uint8_t> positive_detected;  // per positive utterance
    std::vector<int> negative_trigger_counts;     // per negative utterance
    std::vector<DetPoint> det_points;             // filled by det_curve users
};

// Raw (unsmoothed) keyword-posterior traces for one dataset split.
struct EvalSplit {
    std::vector<std::vector<float>> positive_traces;
    std::vector<std::vector<float>> negative_traces;
    std::vector<double> negative_seconds;  // per negative utterance
};

// FRR = % of positives with zero triggers anywhere in the utterance;
// FAH = debounced negative triggers per hour of negative audio.
DetectionReport evaluate_split(const EvalSplit& split, const SmoothingConfig& smoothing,
                               const TriggerConfig& trigger);

// Smallest candidate threshold (the observed per-utterance smoothed maxima)
// whose measured FAH is at most target_fah. Throws when even threshold 1.0
// exceeds the target.
float threshold_at_fah(const std::vector<std::vector<float>>& negative_traces,
                       const std::vector<double>& negative_seconds, double target_fah,
                       const SmoothingConfig& smoothing, const TriggerConfig& trigger);

// Threshold sweep over the union of observed smoothed maxima (both splits,
// plus 1.0), subsampled to at most num_points, each point computed by
// evaluate_split. Sorted by ascending threshold.
std::vector<DetPoint> det_curve(const EvalSplit& split, const SmoothingConfig& smoothing,
                                const TriggerConfig& trigger, int num_points);

}  // namespace wknet

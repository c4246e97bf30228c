// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0

#include "wknet/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "wknet/errors.hpp"

namespace wknet {

std::vector<float> smooth(const std::vector<float>& raw, const SmoothingConfig& config) {
    if (config.w_smooth < 1) throw ConfigError("w_smooth must be >= 1");
    const int t_n = static_cast<int>(raw.size());
    std::vector<float> out(t_n);
    for (int t = 0; t < t_n; ++t) {
        const int first = std::max(0, t - config.w_smooth + 1);
        double sum = 0.0;
        for (int i = first; i <= t; ++i) sum += raw[i];
        out[t] = static_cast<float>(sum / (t - first + 1));
    }
    return out;
}

std::vector<int> detect(const std::vector<float>& smoothed, const TriggerConfig& config) {
    std::vector<int> triggers;
    int next_allowed = config.suppress_warmup_frames;
    for (int t = 0; t < static_cast<int>(smoothed.size()); ++t) {
        if (t < next_allowed) continue;
        if (smoothed[t] > config.threshold) {
            triggers.push_back(t);
            next_allowed = t + config.refractory_frames + 1;
        }
    }
    return triggers;
}

DetectionReport evaluate_split(const EvalSplit& split, const SmoothingConfig& smoothing,
                               const TriggerConfig& trigger) {
    if (split.positive_traces.empty() || split.negative_traces.empty())
        throw DataError("evaluate_split requires non-empty positive and negative splits");
    if (split.negative_seconds.size() != split.negative_traces.size())
        throw DataError("one duration per negative trace required");

    double total_seconds = 0.0;
    for (double s : split.negative_seconds) total_seconds += s;
    if (total_seconds <= 0.0) throw DataError("total negative duration must be positive");

    DetectionReport report;
    report.threshold = trigger.threshold;

    int detected = 0;
    for (const auto& trace : split.positive_traces) {
        const bool hit = !detect(smooth(trace, smoothing), trigger).empty();
        report.positive_detected.push_back(hit ? 1 : 0);
        detected += hit ? 1 : 0;
    }
    report.frr_percent =
        100.0 * (1.0 - static_cast<double>(detected) /
                           static_cast<double>(split.positive_traces.size()));

    std::int64_t false_alarms = 0;
    for (const auto& trace : split.negative_traces) {
        const int count = static_cast<int>(detect(smooth(trace, smoothing), trigger).size());
        report.negative_trigger_counts.push_back(count);
        false_alarms += count;
    }
    report.fah = static_cast<double>(false_alarms) / (total_seconds / 3600.0);
    return report;
}

namespace {

double fah_at(const std::vector<std::vector<float>>& smoothed_negatives, double total_hours,
              TriggerConfig trigger, float threshold) {
    trigger.threshold = threshold;
    std::int64_t alarms = 0;
    for (const auto& s : smoothed_negatives) {
        alarms += static_cast<std::int64_t>(detect(s, trigger).size());
    }
    return static_cast<double>(alarms) / total_hours;
}

}  // namespace

float threshold_at_fah(const std::vector<std::vector<float>>& negative_traces,
                       const std::vector<double>& negative_seconds, double target_fah,
                       const SmoothingConfig& smoothing, const TriggerConfig& trigger) {
    if (!(target_fah > 0.0)) throw ConfigError("target FAH must be positive");
    if (negative_traces.empty()) throw DataError("no negative traces");
    if (negative_seconds.size() != negative_traces.size())
        throw DataError("one duration per negative trace required");

    double total_seconds = 0.0;
    for (double s : negative_seconds) total_seconds += s;
    if (total_seconds <= 0.0) throw DataError("total negative duration must be positive");
    const double total_hours = total_seconds / 3600.0;

    std::vector<std::vector<float>> smoothed;
    smoothed.reserve(negative_traces.size());
    std::vector<float> candidates;
    for (const auto& trace : negative_traces) {
        smoothed.push_back(smooth(trace, smoothing));
        if (!smoothed.back().empty()) {
            candidates.push_back(*std::max_element(smoothed.back().begin(),
                                                   smoothed.back().end()));
        }
    }
    if (candidates.empty()) throw DataError("negative traces are all empty");
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    // FAH is non-increasing in the threshold, so take the first candidate
    // that reaches the target.
    std::size_t lo = 0, hi = candidates.size();
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (fah_at(smoothed, total_hours, trigger, candidates[mid]) <= target_fah) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    if (lo < candidates.size()) return candidates[lo];
    if (fah_at(smoothed, total_hours, trigger, 1.0f) <= target_fah) return 1.0f;
    throw DataError("target FAH unattainable even at threshold 1.0");
}

std::vector<DetPoint> det_curve(const EvalSplit& split, const SmoothingConfig& smoothing,
                                const TriggerConfig& trigger, int num_points) {
    if (num_points < 2) throw ConfigError("det_curve needs at least 2 points");
    if (split.positive_traces.empty() || split.negative_traces.empty())
        throw DataError("det_curve requires non-empty positive and negative splits");

    std::vector<float> thresholds;
    const auto add_maxima = [&](const std::vector<std::vector<float>>& traces) {
        for (const auto& trace : traces) {
            const auto s = smooth(trace, smoothing);
            if (!s.empty()) thresholds.push_back(*std::max_element(s.begin(), s.end()));
        }
    };
    add_maxima(split.positive_traces);
    add_maxima(split.negative_traces);
    thresholds.push_back(1.0f);
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    std::vector<float> chosen;
    if (static_cast<int>(thresholds.size()) <= num_points) {
        chosen = thresholds;
    } else {
        for (int i = 0; i < num_points; ++i) {
            const std::size_t idx =
                static_cast<std::size_t>(static_cast<double>(i) * (thresholds.size() - 1) /
                                         (num_points - 1));
            chosen.push_back(thresholds[idx]);
        }
        chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
    }

    std::vector<DetPoint> points;
    for (float th : chosen) {
        TriggerConfig t = trigger;
        t.threshold = th;
        const DetectionReport r = evaluate_split(split, smoothing, t);
        points.push_back({th, r.fah, r.frr_percent});
    }
    return points;
}

}  // namespace wknet

// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "wknet/tensor.hpp"

namespace wknet {

// Mono PCM audio, samples normalized to [-1, 1].
struct AudioBuffer {
    std::vector<float> samples;
    int sample_rate = 16000;

    double seconds() const {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

struct FeatureConfig {
    int num_mels = 20;
    float window_ms = 25.0f;
    float hop_ms = 10.0f;
    int fft_size = 512;
    float mel_low_hz = 20.0f;
    float mel_high_hz = 8000.0f;
    float log_floor = 1e-7f;
    float preemphasis = 0.97f;

    int window_samples(int sample_rate) const;
    int hop_samples(int sample_rate) const;
    void validate(int sample_rate) const;
};

// Time-major T x num_mels log-Mel energies.
struct FeatureSequence {
    Matrix frames;
    float hop_ms = 10.0f;

    int num_frames() const { return frames.rows; }
    int dim() const { return frames.cols; }
};

// Triangular mel filterbank, num_mels x (fft_size/2 + 1). Rejects configs
// where a filter ends up with no FFT bin under it.
Matrix build_mel_filterbank(const FeatureConfig& config, int sample_rate);

// Support of each filter in Hz: (left edge, right edge) of the triangle.
std::vector<std::pair<float, float>> mel_band_edges(const FeatureConfig& config,
                                                    int sample_rate);

// Precomputes the filterbank and window once; extract() is const and
// thread-safe, so utterances can be processed from parallel workers.
class FeatureExtractor {
public:
    FeatureExtractor(const FeatureConfig& config, int sample_rate);

    FeatureSequence extract(const AudioBuffer& audio) const;

    const FeatureConfig& config() const { return config_; }
    const Matrix& filterbank() const { return filterbank_; }
    int sample_rate() const { return sample_rate_; }

private:
    FeatureConfig config_;
    int sample_rate_;
    Matrix filterbank_;
    std::vector<float> window_;
    std::vector<std::pair<int, int>> filter_bins_;  // [first, last] nonzero bin per mel
};

// One-shot helper: pre-emphasis -> Hamming window -> |FFT|^2 -> mel
// filterbank -> log(x + log_floor). Audio shorter than one window yields
// an empty sequence.
FeatureSequence compute_lfbe(const AudioBuffer& audio, const FeatureConfig& config);

// Debug dump: one row per frame, num_mels comma-separated decimals.
void write_features_csv(const FeatureSequence& features, std::ostream& out);

}  // namespace wknet

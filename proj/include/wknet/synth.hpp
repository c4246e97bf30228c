// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0
//
// Self-contained synthetic dataset: positives carry a fixed three-tone
// "keyword" motif embedded in low noise at a known position, negatives are
// noise or distractor motifs (reversed / prefix / single tone). End-of-
// keyword times are exact, so labeling and trigger-timing behavior can be
// tested without any external data.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wknet {

struct SynthConfig {
    std::string out_dir;
    int train_positives = 20;
    int train_negatives = 20;
    int dev_positives = 8;
    int dev_negatives = 8;
    int test_positives = 8;
    int test_negatives = 8;
    double utterance_seconds = 2.0;
    int num_noise_clips = 4;
    double noise_clip_seconds = 5.0;
    std::uint64_t seed = 1234;
};

struct SynthResult {
    std::string train_manifest;
    std::string dev_manifest;
    std::string test_manifest;
    std::vector<std::string> noise_paths;
    int utterances_written = 0;
};

SynthResult generate_dataset(const SynthConfig& config);

}  // namespace wknet

// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wknet/features.hpp"

namespace wknet {

// The engine is fixed to close-talk 16 kHz mono; anything else is rejected
// when the file is loaded.
inline constexpr int kSampleRate = 16000;

struct ManifestEntry {
    std::string audio_path;
    bool positive = false;
    std::string speaker_id;
    std::optional<double> end_of_keyword_ms;
    std::optional<double> duration_ms;
};

// JSON-lines manifest: one object per line with keys `audio_path`, `label`
// ("positive"/"negative"), `speaker_id`, optional `end_of_keyword_ms` and
// `duration_ms`. Malformed lines are reported with their line number.
std::vector<ManifestEntry> load_manifest(const std::string& path);

// Splits must not share audio paths.
void validate_disjoint_splits(const std::vector<std::vector<ManifestEntry>>& splits);

// Flags entries whose annotated duration is a >3x outlier vs the median.
std::vector<std::string> manifest_warnings(const std::vector<ManifestEntry>& entries);

// 16-bit little-endian PCM mono WAV (format tag 1) at 16 kHz. Samples are
// normalized by 1/32768.
AudioBuffer read_wav(const std::string& path);
void write_wav(const AudioBuffer& audio, const std::string& path);

struct AugmentSpec {
    std::vector<std::string> noise_source_paths;
    float snr_db = 5.0f;
    std::uint64_t seed = 1234;
};

struct MixStats {
    float noise_scale = 0.0f;
    std::size_t clipped_samples = 0;
    std::size_t noise_offset = 0;
};

// Adds a noise segment (seeded random offset, looped circularly) scaled so
// that 10*log10(P_clean / P_noise_scaled) == snr_db, powers measured as the
// mean squared amplitude over the whole clean utterance. Output is clipped
// to [-1, 1]; the clip count is reported through stats.
AudioBuffer mix_at_snr(const AudioBuffer& clean, const AudioBuffer& noise, float snr_db,
                       std::uint64_t seed, MixStats* stats = nullptr);

}  // namespace wknet

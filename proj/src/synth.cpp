// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0

#include "wknet/synth.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "wknet/dataio.hpp"
#include "wknet/errors.hpp"
#include "wknet/rng.hpp"

namespace wknet {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;
constexpr float kKeywordFreqs[3] = {620.0f, 920.0f, 1380.0f};
constexpr double kToneSeconds = 0.15;
constexpr double kRampSeconds = 0.01;
constexpr float kToneAmplitude = 0.12f;
constexpr float kBackgroundSigma = 0.005f;

void add_tone(std::vector<float>& samples, std::size_t start, double seconds, float freq,
              float amplitude, float phase) {
    const std::size_t n = static_cast<std::size_t>(seconds * kSampleRate);
    const std::size_t ramp = static_cast<std::size_t>(kRampSeconds * kSampleRate);
    for (std::size_t i = 0; i < n && start + i < samples.size(); ++i) {
        double env = 1.0;
        if (i < ramp) env = 0.5 - 0.5 * std::cos(kTwoPi * 0.5 * i / ramp);
        if (n - 1 - i < ramp) env = std::min(env, 0.5 - 0.5 * std::cos(kTwoPi * 0.5 * (n - 1 - i) / ramp));
        samples[start + i] += static_cast<float>(
            amplitude * env * std::sin(kTwoPi * freq * i / kSampleRate + phase));
    }
}

// Returns the sample index one past the motif end.
std::size_t add_motif(std::vector<float>& samples, std::size_t start,
                      const std::vector<float>& freqs, Rng& rng) {
    const float amp = kToneAmplitude * rng.uniform(0.8f, 1.2f);
    std::size_t pos = start;
    for (float f : freqs) {
        const float jittered = f * rng.uniform(0.96f, 1.04f);
        add_tone(samples, pos, kToneSeconds, jittered, amp, rng.uniform(0.0f, 6.28318f));
        pos += static_cast<std::size_t>(kToneSeconds * kSampleRate);
    }
    return pos;
}

AudioBuffer background(std::size_t n, Rng& rng) {
    AudioBuffer audio;
    audio.sample_rate = kSampleRate;
    audio.samples.resize(n);
    for (auto& v : audio.samples) v = kBackgroundSigma * rng.normal();
    return audio;
}

struct Utterance {
    AudioBuffer audio;
    bool positive;
    double end_of_keyword_ms = 0.0;
};

Utterance make_positive(std::size_t n, Rng& rng) {
    Utterance utt;
    utt.positive = true;
    utt.audio = background(n, rng);
    const std::size_t motif_len = static_cast<std::size_t>(3 * kToneSeconds * kSampleRate);
    const std::size_t lo = static_cast<std::size_t>(0.9 * kSampleRate);
    const std::size_t hi = n - motif_len - static_cast<std::size_t>(0.15 * kSampleRate);
    const std::size_t end = lo + rng.uniform_int(static_cast<std::uint32_t>(hi - lo + 1));
    const std::size_t start = end - motif_len;
    add_motif(utt.audio.samples, start,
              {kKeywordFreqs[0], kKeywordFreqs[1], kKeywordFreqs[2]}, rng);
    utt.end_of_keyword_ms = static_cast<double>(end) * 1000.0 / kSampleRate;
    return utt;
}

Utterance make_negative(std::size_t n, Rng& rng) {
    Utterance utt;
    utt.positive = false;
    utt.audio = background(n, rng);
    const int kind = static_cast<int>(rng.uniform_int(4));
    std::vector<float> freqs;
    switch (kind) {
        case 0: return utt;  // plain background
        case 1: freqs = {kKeywordFreqs[2], kKeywordFreqs[1], kKeywordFreqs[0]}; break;
        case 2: freqs = {kKeywordFreqs[0], kKeywordFreqs[1]}; break;  // keyword prefix
        default: freqs = {760.0f}; break;
    }
    const std::size_t motif_len =
        static_cast<std::size_t>(freqs.size() * kToneSeconds * kSampleRate);
    const std::size_t lo = static_cast<std::size_t>(0.3 * kSampleRate);
    const std::size_t hi = n - motif_len - static_cast<std::size_t>(0.15 * kSampleRate);
    const std::size_t start = lo + rng.uniform_int(static_cast<std::uint32_t>(hi - lo + 1));
    add_motif(utt.audio.samples, start, freqs, rng);
    return utt;
}

AudioBuffer make_noise_clip(std::size_t n, int kind, Rng& rng) {
    AudioBuffer audio;
    audio.sample_rate = kSampleRate;
    audio.samples.resize(n);
    switch (kind % 4) {
        case 0:  // white
            for (auto& v : audio.samples) v = 0.08f * rng.normal();
            break;
        case 1: {  // lowpassed rumble
            float state = 0.0f;
            for (auto& v : audio.samples) {
                state = 0.98f * state + 0.02f * rng.normal();
                v = 2.5f * state;
            }
            break;
        }
        case 2: {  // hum + hiss
            for (std::size_t i = 0; i < n; ++i) {
                const double t = static_cast<double>(i) / kSampleRate;
                audio.samples[i] = static_cast<float>(0.05 * std::sin(kTwoPi * 50.0 * t) +
                                                      0.02 * std::sin(kTwoPi * 150.0 * t)) +
                                   0.03f * rng.normal();
            }
            break;
        }
        default: {  // wandering tone cluster, music-ish
            double phase1 = 0.0, phase2 = 0.0;
            float f1 = 300.0f, f2 = 520.0f;
            for (std::size_t i = 0; i < n; ++i) {
                if (i % 4000 == 0) {
                    f1 = rng.uniform(200.0f, 700.0f);
                    f2 = rng.uniform(400.0f, 1200.0f);
                }
                phase1 += kTwoPi * f1 / kSampleRate;
                phase2 += kTwoPi * f2 / kSampleRate;
                audio.samples[i] = static_cast<float>(0.04 * std::sin(phase1) +
                                                      0.03 * std::sin(phase2)) +
                                   0.01f * rng.normal();
            }
            break;
        }
    }
    return audio;
}

void write_split(const std::string& dir, const std::string& split, int positives,
                 int negatives, double utterance_seconds, Rng& rng, int speaker_pool,
                 const std::string& manifest_path, int* written) {
    std::ofstream manifest(manifest_path);
    if (!manifest) throw DataError("cannot write manifest: " + manifest_path);

    const std::size_t n = static_cast<std::size_t>(utterance_seconds * kSampleRate);
    nlohmann::json line;
    char name[64];
    for (int i = 0; i < positives + negatives; ++i) {
        const bool positive = i < positives;
        const Utterance utt = positive ? make_positive(n, rng) : make_negative(n, rng);
        std::snprintf(name, sizeof(name), "%s_%s_%03d.wav", positive ? "pos" : "neg",
                      split.c_str(), positive ? i : i - positives);
        const std::string path = dir + "/" + name;
        write_wav(utt.audio, path);

        line.clear();
        line["audio_path"] = path;
        line["label"] = positive ? "positive" : "negative";
        std::snprintf(name, sizeof(name), "spk%03u", rng.uniform_int(speaker_pool));
        line["speaker_id"] = name;
        line["duration_ms"] = utterance_seconds * 1000.0;
        if (positive) line["end_of_keyword_ms"] = utt.end_of_keyword_ms;
        manifest << line.dump() << "\n";
        ++*written;
    }
}

}  // namespace

SynthResult generate_dataset(const SynthConfig& config) {
    if (config.out_dir.empty()) throw ConfigError("synth out_dir must be set");
    if (config.utterance_seconds < 1.5)
        throw ConfigError("utterance_seconds must be at least 1.5");

    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    fs::create_directories(config.out_dir + "/wav");
    fs::create_directories(config.out_dir + "/noise");

    SynthResult result;
    Rng rng(config.seed);

    result.train_manifest = config.out_dir + "/train.jsonl";
    result.dev_manifest = config.out_dir + "/dev.jsonl";
    result.test_manifest = config.out_dir + "/test.jsonl";
    write_split(config.out_dir + "/wav", "train", config.train_positives,
                config.train_negatives, config.utterance_seconds, rng, 10,
                result.train_manifest, &result.utterances_written);
    write_split(config.out_dir + "/wav", "dev", config.dev_positives, config.dev_negatives,
                config.utterance_seconds, rng, 10, result.dev_manifest,
                &result.utterances_written);
    write_split(config.out_dir + "/wav", "test", config.test_positives, config.test_negatives,
                config.utterance_seconds, rng, 10, result.test_manifest,
                &result.utterances_written);

    for (int i = 0; i < config.num_noise_clips; ++i) {
        const std::size_t n = static_cast<std::size_t>(config.noise_clip_seconds * kSampleRate);
        const AudioBuffer clip = make_noise_clip(n, i, rng);
        const std::string path = config.out_dir + "/noise/noise_" + std::to_string(i) + ".wav";
        write_wav(clip, path);
        result.noise_paths.push_back(path);
    }
    return result;
}

}  // namespace wknet

// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0

#include "wknet/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "wknet/errors.hpp"
#include "wknet/rng.hpp"

namespace wknet {

namespace {

using nlohmann::json;

std::string line_tag(const std::string& path, int line) {
    return path + ":" + std::to_string(line) + ": ";
}

}  // namespace

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open manifest: " + path);

    std::vector<ManifestEntry> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(line_tag(path, line_no) + "invalid JSON: " + e.what());
        }
        if (!obj.is_object()) throw DataError(line_tag(path, line_no) + "expected an object");

        ManifestEntry entry;
        for (const char* key : {"audio_path", "label", "speaker_id"}) {
            if (!obj.contains(key))
                throw DataError(line_tag(path, line_no) + "missing key '" + key + "'");
        }
        if (!obj["audio_path"].is_string() || !obj["speaker_id"].is_string() ||
            !obj["label"].is_string())
            throw DataError(line_tag(path, line_no) + "audio_path/label/speaker_id must be strings");
        entry.audio_path = obj["audio_path"].get<std::string>();
        entry.speaker_id = obj["speaker_id"].get<std::string>();
        const std::string label = obj["label"].get<std::string>();
        if (label == "positive") {
            entry.positive = true;
        } else if (label == "negative") {
            entry.positive = false;
        } else {
            throw DataError(line_tag(path, line_no) + "unknown label '" + label + "'");
        }
        if (obj.contains("end_of_keyword_ms")) {
            if (!obj["end_of_keyword_ms"].is_number())
                throw DataError(line_tag(path, line_no) + "end_of_keyword_ms must be a number");
            entry.end_of_keyword_ms = obj["end_of_keyword_ms"].get<double>();
        }
        if (obj.contains("duration_ms")) {
            if (!obj["duration_ms"].is_number())
                throw DataError(line_tag(path, line_no) + "duration_ms must be a number");
            entry.duration_ms = obj["duration_ms"].get<double>();
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

void validate_disjoint_splits(const std::vector<std::vector<ManifestEntry>>& splits) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < splits.size(); ++i) {
        std::set<std::string> mine;
        for (const auto& e : splits[i]) mine.insert(e.audio_path);
        for (const auto& p : mine) {
            if (!seen.insert(p).second)
                throw DataError("audio path appears in more than one split: " + p);
        }
    }
}

std::vector<std::string> manifest_warnings(const std::vector<ManifestEntry>& entries) {
    std::vector<double> durations;
    for (const auto& e : entries) {
        if (e.duration_ms.has_value()) durations.push_back(*e.duration_ms);
    }
    std::vector<std::string> warnings;
    if (durations.size() < 3) return warnings;
    std::sort(durations.begin(), durations.end());
    const double median = durations[durations.size() / 2];
    if (median <= 0.0) return warnings;
    for (const auto& e : entries) {
        if (!e.duration_ms.has_value()) continue;
        if (*e.duration_ms > 3.0 * median || *e.duration_ms < median / 3.0) {
            warnings.push_back("duration outlier (" + std::to_string(*e.duration_ms) +
                               " ms vs median " + std::to_string(median) + " ms): " +
                               e.audio_path);
        }
    }
    return warnings;
}

namespace {

struct WavHeader {
    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits = 0;
};

std::uint32_t rd_u32(const char* p) {
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    return v;
}

std::uint16_t rd_u16(const char* p) {
    std::uint16_t v;
    std::memcpy(&v, p, 2);
    return v;
}

}  // namespace

AudioBuffer read_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open WAV: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    const std::string bytes = ss.str();

    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw DataError("not a RIFF/WAVE file: " + path);

    WavHeader hdr;
    bool have_fmt = false;
    const char* pcm = nullptr;
    std::size_t pcm_bytes = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const char* id = bytes.data() + pos;
        const std::uint32_t size = rd_u32(bytes.data() + pos + 4);
        const std::size_t body = pos + 8;
        if (body + size > bytes.size()) throw DataError("truncated WAV chunk: " + path);
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (size < 16) throw DataError("malformed fmt chunk: " + path);
            hdr.format = rd_u16(bytes.data() + body);
            hdr.channels = rd_u16(bytes.data() + body + 2);
            hdr.sample_rate = rd_u32(bytes.data() + body + 4);
            hdr.bits = rd_u16(bytes.data() + body + 14);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            pcm = bytes.data() + body;
            pcm_bytes = size;
        }
        pos = body + size + (size & 1);  // chunks are word-aligned
    }

    if (!have_fmt || pcm == nullptr) throw DataError("missing fmt/data chunk: " + path);
    if (hdr.format != 1)
        throw DataError("unsupported WAV format tag " + std::to_string(hdr.format) +
                        " (PCM required): " + path);
    if (hdr.channels != 1)
        throw DataError("mono required (" + std::to_string(hdr.channels) + " channels): " + path);
    if (hdr.bits != 16)
        throw DataError("16-bit samples required (" + std::to_string(hdr.bits) + "): " + path);
    if (hdr.sample_rate != static_cast<std::uint32_t>(kSampleRate))
        throw DataError("16 kHz required (" + std::to_string(hdr.sample_rate) + " Hz): " + path);

    AudioBuffer audio;
    audio.sample_rate = kSampleRate;
    const std::size_t n = pcm_bytes / 2;
    audio.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::int16_t s;
        std::memcpy(&s, pcm + 2 * i, 2);
        audio.samples[i] = static_cast<float>(s) * (1.0f / 32768.0f);
    }
    return audio;
}

void write_wav(const AudioBuffer& audio, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open WAV for writing: " + path);

    const std::uint32_t n = static_cast<std::uint32_t>(audio.samples.size());
    const std::uint32_t data_bytes = n * 2;
    const std::uint32_t rate = static_cast<std::uint32_t>(audio.sample_rate);

    const auto w_u32 = [&](std::uint32_t v) { f.write(reinterpret_cast<char*>(&v), 4); };
    const auto w_u16 = [&](std::uint16_t v) { f.write(reinterpret_cast<char*>(&v), 2); };

    f.write("RIFF", 4);
    w_u32(36 + data_bytes);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    w_u32(16);
    w_u16(1);  // PCM
    w_u16(1);  // mono
    w_u32(rate);
    w_u32(rate * 2);  // byte rate
    w_u16(2);         // block align
    w_u16(16);        // bits
    f.write("data", 4);
    w_u32(data_bytes);

    for (float v : audio.samples) {
        const float clamped = std::clamp(v, -1.0f, 1.0f);
        const long r = std::lround(static_cast<double>(clamped) * 32768.0);
        const std::int16_t s = static_cast<std::int16_t>(std::clamp(r, -32768L, 32767L));
        f.write(reinterpret_cast<const char*>(&s), 2);
    }
    if (!f) throw DataError("WAV write failed: " + path);
}

AudioBuffer mix_at_snr(const AudioBuffer& clean, const AudioBuffer& noise, float snr_db,
                       std::uint64_t seed, MixStats* stats) {
    if (clean.sample_rate != noise.sample_rate)
        throw DataError("clean/noise sample rates differ");
    if (clean.samples.empty()) throw DataError("empty clean signal");
    if (noise.samples.empty()) throw DataError("empty noise signal");

    double p_clean = 0.0;
    for (float v : clean.samples) p_clean += static_cast<double>(v) * v;
    p_clean /= static_cast<double>(clean.samples.size());
    if (p_clean <= 0.0) throw DataError("clean signal has zero power");

    Rng rng(seed);
    const std::size_t noise_len = noise.samples.size();
    const std::size_t offset = rng.uniform_int(static_cast<std::uint32_t>(noise_len));

    double p_noise = 0.0;
    for (std::size_t i = 0; i < clean.samples.size(); ++i) {
        const float v = noise.samples[(offset + i) % noise_len];
        p_noise += static_cast<double>(v) * v;
    }
    p_noise /= static_cast<double>(clean.samples.size());
    if (p_noise <= 0.0) throw DataError("noise segment has zero power");

    const double target_ratio = std::pow(10.0, static_cast<double>(snr_db) / 10.0);
    const float scale = static_cast<float>(std::sqrt(p_clean / (p_noise * target_ratio)));

    AudioBuffer out;
    out.sample_rate = clean.sample_rate;
    out.samples.resize(clean.samples.size());
    std::size_t clipped = 0;
    for (std::size_t i = 0; i < clean.samples.size(); ++i) {
        const float v = clean.samples[i] + scale * noise.samples[(offset + i) % noise_len];
        if (v > 1.0f || v < -1.0f) ++clipped;
        out.samples[i] = std::clamp(v, -1.0f, 1.0f);
    }
    if (stats != nullptr) {
        stats->noise_scale = scale;
        stats->clipped_samples = clipped;
        stats->noise_offset = offset;
    }
    return out;
}

}  // namespace wknet

// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0

#include "wknet/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <ostream>

#include "wknet/errors.hpp"

namespace wknet {

int end_frame_from_ms(double ms, float hop_ms, int num_frames) {
    const int frame = static_cast<int>(ms / static_cast<double>(hop_ms));
    return std::clamp(frame, 0, num_frames - 1);
}

namespace {

// Rethrow-after-join wrapper for parallel utterance loops.
class ErrorCollector {
public:
    template <typename Fn>
    void run(Fn&& fn) noexcept {
        if (failed_.load(std::memory_order_relaxed)) return;
        try {
            fn();
        } catch (...) {
#pragma omp critical(wknet_pipeline_error)
            {
                if (!failed_.exchange(true)) error_ = std::current_exception();
            }
        }
    }
    void rethrow() const {
        if (failed_.load()) std::rethrow_exception(error_);
    }

private:
    std::atomic<bool> failed_{false};
    std::exception_ptr error_;
};

}  // namespace

std::vector<FeatureSequence> extract_all(const std::vector<ManifestEntry>& entries,
                                         const FeatureExtractor& extractor) {
    std::vector<FeatureSequence> features(entries.size());
    ErrorCollector errors;
    const int n = static_cast<int>(entries.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        errors.run([&, i] { features[i] = extractor.extract(read_wav(entries[i].audio_path)); });
    }
    errors.rethrow();
    return features;
}

PreparedDataset prepare_training_set(const std::vector<ManifestEntry>& entries,
                                     const FeatureExtractor& extractor,
                                     const LabelingConfig& labeling, const VadConfig& vad,
                                     std::ostream* log) {
    const std::vector<FeatureSequence> features = extract_all(entries, extractor);

    PreparedDataset dataset;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const ManifestEntry& entry = entries[i];
        const FeatureSequence& feats = features[i];
        const int t_n = feats.num_frames();
        const auto skip = [&](const std::string& reason) {
            dataset.skipped.push_back(entry.audio_path + ": " + reason);
            if (log) *log << "skipping " << entry.audio_path << ": " << reason << "\n";
        };
        if (t_n == 0) {
            skip("audio shorter than one analysis window");
            continue;
        }
        if (!entry.positive) {
            dataset.samples.push_back({feats, negative_labels(t_n)});
            continue;
        }

        KeywordSpan span;
        bool have_span = false;
        try {
            span = locate_end_of_keyword(feats, vad);
            have_span = true;
        } catch (const DataError&) {
            // fall through to the manifest annotation
        }
        if (entry.end_of_keyword_ms.has_value()) {
            const int end = end_frame_from_ms(*entry.end_of_keyword_ms, feats.hop_ms, t_n);
            if (have_span && span.start_frame.has_value() && *span.start_frame > end) {
                span.start_frame.reset();
            }
            span.end_frame = end;
            have_span = true;
        }
        if (!have_span) {
            skip("no speech detected and no end_of_keyword_ms annotation");
            continue;
        }
        dataset.samples.push_back({feats, build_targets(t_n, span, labeling)});
    }
    return dataset;
}

ScoredSplit score_split(const std::vector<ManifestEntry>& entries,
                        const FeatureExtractor& extractor, const ModelParams& params,
                        const Architecture& arch, const FeatureNorm& norm,
                        const std::vector<AudioBuffer>& noise_pool,
                        const AugmentSpec& augment) {
    ScoredSplit split;
    split.traces.resize(entries.size());
    split.seconds.resize(entries.size());
    split.end_frames.assign(entries.size(), -1);

    ErrorCollector errors;
    const int n = static_cast<int>(entries.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        errors.run([&, i] {
            AudioBuffer audio = read_wav(entries[i].audio_path);
            if (!noise_pool.empty()) {
                const AudioBuffer& noise = noise_pool[i % noise_pool.size()];
                audio = mix_at_snr(audio, noise, augment.snr_db,
                                   augment.seed + static_cast<std::uint64_t>(i));
            }
            const FeatureSequence feats = extractor.extract(audio);
            split.seconds[i] = audio.seconds();
            split.traces[i] = network_forward(feats, params, arch, norm).keyword_scores();
            if (entries[i].positive && entries[i].end_of_keyword_ms.has_value() &&
                feats.num_frames() > 0) {
                split.end_frames[i] = end_frame_from_ms(*entries[i].end_of_keyword_ms,
                                                        feats.hop_ms, feats.num_frames());
            }
        });
    }
    errors.rethrow();
    return split;
}

}  // namespace wknet

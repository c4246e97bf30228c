// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0

#include <doctest.h>

#include "test_util.hpp"
#include "wknet/errors.hpp"
#include "wknet/labeling.hpp"

using namespace wknet;

namespace {

// Features whose per-frame energy (mean coefficient) is given directly.
FeatureSequence energy_profile(const std::vector<float>& energies) {
    FeatureSequence f;
    f.hop_ms = 10.0f;
    f.frames = Matrix(static_cast<int>(energies.size()), 20);
    for (int t = 0; t < f.frames.rows; ++t) {
        for (int c = 0; c < 20; ++c) f.frames(t, c) = energies[t];
    }
    return f;
}

std::vector<float> silence_with_bursts(int frames,
                                       const std::vector<std::pair<int, int>>& bursts) {
    std::vector<float> e(frames, -16.0f);
    for (const auto& [lo, hi] : bursts) {
        for (int t = lo; t <= hi; ++t) e[t] = -6.0f;
    }
    return e;
}

}  // namespace

TEST_CASE("single burst: end of keyword is the last energetic frame") {
    const auto f = energy_profile(silence_with_bursts(120, {{40, 90}}));
    const KeywordSpan span = locate_end_of_keyword(f, VadConfig{});
    CHECK(span.end_frame == 90);
    REQUIRE(span.start_frame.has_value());
    CHECK(*span.start_frame == 40);
}

TEST_CASE("all-silence utterance raises a no-speech error") {
    const auto f = energy_profile(std::vector<float>(80, -16.0f));
    CHECK_THROWS_WITH_AS(locate_end_of_keyword(f, VadConfig{}), "no speech detected",
                         DataError);
}

TEST_CASE("two bursts: the later one wins") {
    const auto f = energy_profile(silence_with_bursts(120, {{10, 30}, {50, 80}}));
    const KeywordSpan span = locate_end_of_keyword(f, VadConfig{});
    CHECK(span.end_frame == 80);
    CHECK(*span.start_frame == 50);
}

TEST_CASE("hangover merges bursts separated by short gaps") {
    // Gap of 4 <= hangover 5: one region. Gap of 9: two regions.
    const auto merged = vad_voiced_regions(
        energy_profile(silence_with_bursts(100, {{20, 30}, {35, 45}})), VadConfig{});
    REQUIRE(merged.size() == 1);
    CHECK(merged[0] == std::pair<int, int>{20, 45});

    const auto split = vad_voiced_regions(
        energy_profile(silence_with_bursts(100, {{20, 30}, {40, 50}})), VadConfig{});
    REQUIRE(split.size() == 2);
}

TEST_CASE("end-of-keyword targets cover [end-15, end+15] with matching mask") {
    KeywordSpan span;
    span.end_frame = 50;
    const LabelSequence labels = build_targets(100, span, LabelingConfig{});
    REQUIRE(labels.frames() == 100);
    for (int t = 0; t < 100; ++t) {
        const bool in_window = t >= 35 && t <= 65;
        CHECK(labels.targets[t] == (in_window ? 1 : 0));
        CHECK(labels.mask[t] == (in_window ? 1 : 0));
    }
}

TEST_CASE("window clips at the utterance boundary") {
    KeywordSpan span;
    span.end_frame = 38;
    const LabelSequence labels = build_targets(40, span, LabelingConfig{});
    for (int t = 0; t < 40; ++t) {
        CHECK(labels.targets[t] == (t >= 23 ? 1 : 0));
    }
}

TEST_CASE("masking off keeps every frame in the loss") {
    KeywordSpan span;
    span.end_frame = 50;
    LabelingConfig cfg;
    cfg.masking_enabled = false;
    const LabelSequence labels = build_targets(100, span, cfg);
    int zeros_in_loss = 0;
    for (int t = 0; t < 100; ++t) {
        CHECK(labels.mask[t] == 1);
        if (labels.targets[t] == 0) ++zeros_in_loss;
    }
    CHECK(zeros_in_loss == 69);  // 100 frames minus the 31-frame window
}

TEST_CASE("default_aligned labels the keyword span and needs a start frame") {
    KeywordSpan span;
    span.end_frame = 60;
    span.start_frame = 20;
    LabelingConfig cfg;
    cfg.scheme = LabelingScheme::default_aligned;
    const LabelSequence labels = build_targets(100, span, cfg);
    for (int t = 0; t < 100; ++t) {
        CHECK(labels.targets[t] == (t >= 20 && t <= 60 ? 1 : 0));
        CHECK(labels.mask[t] == labels.targets[t]);
    }

    KeywordSpan endless;
    endless.end_frame = 60;
    CHECK_THROWS_AS(build_targets(100, endless, cfg), ConfigError);
}

TEST_CASE("unclipped window width is delta_before + delta_after + 1") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        LabelingConfig cfg;
        cfg.delta_before_frames = static_cast<int>(rng.uniform_int(20));
        cfg.delta_after_frames = static_cast<int>(rng.uniform_int(20));
        const int t_n = 200;
        KeywordSpan span;
        span.end_frame = 50 + static_cast<int>(rng.uniform_int(100));
        const LabelSequence labels = build_targets(t_n, span, cfg);
        int width = 0;
        for (auto v : labels.targets) width += v;
        if (span.end_frame - cfg.delta_before_frames >= 0 &&
            span.end_frame + cfg.delta_after_frames < t_n) {
            CHECK(width == cfg.delta_before_frames + cfg.delta_after_frames + 1);
        }
        // Masking never removes a positive-target frame from the loss.
        for (int t = 0; t < t_n; ++t) {
            if (labels.targets[t]) CHECK(labels.mask[t] == 1);
        }
    }
}

TEST_CASE("negative labels ignore the labeling config") {
    const LabelSequence labels = negative_labels(50);
    for (int t = 0; t < 50; ++t) {
        CHECK(labels.targets[t] == 0);
        CHECK(labels.mask[t] == 1);
    }
}

TEST_CASE("end frame outside the utterance is rejected") {
    KeywordSpan span;
    span.end_frame = 100;
    CHECK_THROWS_AS(build_targets(100, span, LabelingConfig{}), DataError);
}

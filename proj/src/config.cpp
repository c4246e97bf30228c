// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0

#include "wknet/config.hpp"

#include <fstream>
#include <set>

#include "wknet/errors.hpp"

namespace wknet {

namespace {

using nlohmann::json;

// Tracks consumed keys so leftovers can be rejected by name.
class StrictObject {
public:
    StrictObject(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(path_ + " must be a JSON object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        if (!obj_.contains(key)) return;
        consumed_.insert(key);
        try {
            out = obj_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError("config key '" + dotted(key) + "' has the wrong type");
        }
    }

    bool has(const char* key) {
        if (!obj_.contains(key)) return false;
        consumed_.insert(key);
        return true;
    }

    const json& raw(const char* key) {
        consumed_.insert(key);
        return obj_.at(key);
    }

    void finish() const {
        for (const auto& item : obj_.items()) {
            if (!consumed_.count(item.key()))
                throw ConfigError("unknown config key '" + dotted(item.key()) + "'");
        }
    }

    std::string dotted(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> consumed_;
};

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
    RunConfig c;
    StrictObject root(j, "");

    if (root.has("schema_version")) {
        const auto& v = root.raw("schema_version");
        if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
            throw ConfigError("unsupported schema_version (expected " +
                              std::to_string(kSchemaVersion) + ")");
    }

    if (root.has("features")) {
        StrictObject o(root.raw("features"), "features");
        o.get("num_mels", c.features.num_mels);
        o.get("window_ms", c.features.window_ms);
        o.get("hop_ms", c.features.hop_ms);
        o.get("fft_size", c.features.fft_size);
        o.get("mel_low_hz", c.features.mel_low_hz);
        o.get("mel_high_hz", c.features.mel_high_hz);
        o.get("log_floor", c.features.log_floor);
        o.get("preemphasis", c.features.preemphasis);
        o.finish();
    }

    if (root.has("labeling")) {
        StrictObject o(root.raw("labeling"), "labeling");
        std::string scheme = "end_of_keyword";
        o.get("scheme", scheme);
        if (scheme == "end_of_keyword") {
            c.labeling.scheme = LabelingScheme::end_of_keyword;
        } else if (scheme == "default_aligned") {
            c.labeling.scheme = LabelingScheme::default_aligned;
        } else {
            throw ConfigError("labeling.scheme must be end_of_keyword or default_aligned");
        }
        o.get("delta_before_frames", c.labeling.delta_before_frames);
        o.get("delta_after_frames", c.labeling.delta_after_frames);
        o.get("masking_enabled", c.labeling.masking_enabled);
        o.finish();
    }

    if (root.has("vad")) {
        StrictObject o(root.raw("vad"), "vad");
        o.get("margin", c.vad.margin);
        o.get("percentile", c.vad.percentile);
        o.get("hangover_frames", c.vad.hangover_frames);
        o.finish();
    }

    if (root.has("architecture")) {
        StrictObject o(root.raw("architecture"), "architecture");
        o.get("input_dim", c.architecture.input_dim);
        o.get("initial_filter_size", c.architecture.initial_filter_size);
        o.get("num_blocks", c.architecture.num_blocks);
        o.get("block_filter_size", c.architecture.block_filter_size);
        o.get("dilation_cycle", c.architecture.dilation_cycle);
        o.get("conv_channels", c.architecture.conv_channels);
        o.get("residual_channels", c.architecture.residual_channels);
        o.get("skip_channels", c.architecture.skip_channels);
        o.get("head_hidden", c.architecture.head_hidden);
        o.get("num_classes", c.architecture.num_classes);
        o.get("gating_enabled", c.architecture.gating_enabled);
        o.finish();
    }

    if (root.has("training")) {
        StrictObject o(root.raw("training"), "training");
        o.get("learning_rate", c.training.learning_rate);
        o.get("adam_beta1", c.training.adam_beta1);
        o.get("adam_beta2", c.training.adam_beta2);
        o.get("adam_eps", c.training.adam_eps);
        o.get("clip_norm", c.training.clip_norm);
        o.get("batch_size", c.training.batch_size);
        o.get("epochs", c.training.epochs);
        o.get("max_steps", c.training.max_steps);
        o.get("seed", c.training.seed);
        o.get("pos_weight", c.training.pos_weight);
        o.get("stop_loss", c.training.stop_loss);
        o.finish();
    }

    if (root.has("smoothing")) {
        StrictObject o(root.raw("smoothing"), "smoothing");
        o.get("w_smooth", c.smoothing.w_smooth);
        o.finish();
    }

    if (root.has("trigger")) {
        StrictObject o(root.raw("trigger"), "trigger");
        o.get("threshold", c.trigger.threshold);
        o.get("refractory_frames", c.trigger.refractory_frames);
        o.get("suppress_warmup_frames", c.trigger.suppress_warmup_frames);
        o.finish();
    }

    if (root.has("augment")) {
        StrictObject o(root.raw("augment"), "augment");
        o.get("snr_db", c.augment.snr_db);
        o.get("seed", c.augment.seed);
        o.get("noise_source_paths", c.augment.noise_source_paths);
        o.finish();
    }

    root.finish();
    c.validate();
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return from_json(j);
}

json RunConfig::to_json() const {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["features"] = {{"num_mels", features.num_mels},
                     {"window_ms", features.window_ms},
                     {"hop_ms", features.hop_ms},
                     {"fft_size", features.fft_size},
                     {"mel_low_hz", features.mel_low_hz},
                     {"mel_high_hz", features.mel_high_hz},
                     {"log_floor", features.log_floor},
                     {"preemphasis", features.preemphasis}};
    j["labeling"] = {{"scheme", labeling.scheme == LabelingScheme::end_of_keyword
                                    ? "end_of_keyword"
                                    : "default_aligned"},
                     {"delta_before_frames", labeling.delta_before_frames},
                     {"delta_after_frames", labeling.delta_after_frames},
                     {"masking_enabled", labeling.masking_enabled}};
    j["vad"] = {{"margin", vad.margin},
                {"percentile", vad.percentile},
                {"hangover_frames", vad.hangover_frames}};
    j["architecture"] = {{"input_dim", architecture.input_dim},
                         {"initial_filter_size", architecture.initial_filter_size},
                         {"num_blocks", architecture.num_blocks},
                         {"block_filter_size", architecture.block_filter_size},
                         {"dilation_cycle", architecture.dilation_cycle},
                         {"conv_channels", architecture.conv_channels},
                         {"residual_channels", architecture.residual_channels},
                         {"skip_channels", architecture.skip_channels},
                         {"head_hidden", architecture.head_hidden},
                         {"num_classes", architecture.num_classes},
                         {"gating_enabled", architecture.gating_enabled}};
    j["training"] = {{"learning_rate", training.learning_rate},
                     {"adam_beta1", training.adam_beta1},
                     {"adam_beta2", training.adam_beta2},
                     {"adam_eps", training.adam_eps},
                     {"clip_norm", training.clip_norm},
                     {"batch_size", training.batch_size},
                     {"epochs", training.epochs},
                     {"max_steps", training.max_steps},
                     {"seed", training.seed},
                     {"pos_weight", training.pos_weight},
                     {"stop_loss", training.stop_loss}};
    j["smoothing"] = {{"w_smooth", smoothing.w_smooth}};
    j["trigger"] = {{"threshold", trigger.threshold},
                    {"refractory_frames", trigger.refractory_frames},
                    {"suppress_warmup_frames", trigger.suppress_warmup_frames}};
    j["augment"] = {{"snr_db", augment.snr_db},
                    {"seed", augment.seed},
                    {"noise_source_paths", augment.noise_source_paths}};
    return j;
}

void RunConfig::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write config: " + path);
    f << to_json().dump(2) << "\n";
}

void RunConfig::validate() const {
    architecture.validate();
    training.validate();
    if (architecture.input_dim != features.num_mels)
        throw ConfigError("architecture.input_dim must equal features.num_mels");
    if (smoothing.w_smooth < 1) throw ConfigError("smoothing.w_smooth must be >= 1");
    if (trigger.threshold < 0.0f || trigger.threshold > 1.0f)
        throw ConfigError("trigger.threshold must be in [0, 1]");
    if (trigger.refractory_frames < 0)
        throw ConfigError("trigger.refractory_frames must be >= 0");
    if (labeling.delta_before_frames < 0 || labeling.delta_after_frames < 0)
        throw ConfigError("labeling deltas must be >= 0");
}

}  // namespace wknet

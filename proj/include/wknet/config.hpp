// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <string>

#include <json.hpp>

#include "wknet/dataio.hpp"
#include "wknet/evaluation.hpp"
#include "wknet/features.hpp"
#include "wknet/labeling.hpp"
#include "wknet/network.hpp"
#include "wknet/training.hpp"

namespace wknet {

// Whole-run configuration, one JSON file with a schema version. Unknown
// keys are rejected with their dotted path. Every field has a default, so
// `{}` is a valid config describing the reference setup.
struct RunConfig {
    static constexpr int kSchemaVersion = 1;

    FeatureConfig features;
    LabelingConfig labeling;
    VadConfig vad;
    Architecture architecture;
    TrainConfig training;
    SmoothingConfig smoothing;
    TriggerConfig trigger;
    AugmentSpec augment;

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::string& path);

    nlohmann::json to_json() const;
    void save(const std::string& path) const;

    // Cross-field checks (e.g. input_dim == num_mels).
    void validate() const;
};

}  // namespace wknet

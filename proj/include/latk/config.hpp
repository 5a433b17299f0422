#pragma once

#include <cstddef>
#include <string>

#include "latk/trainer.hpp"

namespace latk {

// One training run's settings: every hyperparameter plus the file paths the
// command-line tool reads and writes. Path fields stay empty when unset.
struct RunConfig {
    Hyperparams hp;
    std::string source_train;
    std::string target_train;
    std::string target_dev;
    std::string target_test;
    std::string embeddings;
    std::string scheme;
    std::string label_map;
    std::string model_out;
    std::string record_out;
    std::size_t threads = 1;
};

// Applies one `key = value` assignment; unknown keys are rejected.
// `mu.<TAG>` keys set per-tag MMD weights.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

// Flat `key = value` file: UTF-8, blank lines and lines starting with '#'
// ignored, one assignment per line, duplicate keys rejected.
RunConfig parse_run_config(const std::string& text);

}  // namespace latk

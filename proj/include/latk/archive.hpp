#pragma once

#include <string>
#include <utility>
#include <vector>

#include "latk/corpus.hpp"
#include "latk/trainer.hpp"

namespace latk {

// Everything needed to reload a trained model: the hyperparameters it was
// trained with (seed included), the shared label scheme, the tag-level label
// map it was trained under (empty when none), and the parameters themselves.
// Vocabularies travel inside the encoder's embedding tables.
struct ModelArchive {
    Hyperparams hp;
    LabelScheme scheme;
    std::vector<std::pair<std::string, std::string>> label_map;
    ModelParams model;
};

// Text header (version, hyperparameters, schemes, vocabularies, tensor
// manifest with byte offsets) followed by raw little-endian 64-bit floats in
// the fixed param_tensors order. save -> load -> save is byte-identical.
std::string save_archive(const ModelArchive& archive);

// Rejects unknown versions, malformed headers, and manifests whose names,
// shapes, or offsets disagree with the declared dimensions.
ModelArchive load_archive(const std::string& text);

// Per-epoch training trace in the same numeric rendering as the progress
// stream. Wall times are omitted so equal-seed runs serialize identically.
std::string save_record(const TrainRecord& record, Mode mode);

}  // namespace latk

#pragma once

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sonovis/core/tensor.hpp"

namespace sonovis::ad {

// On-disk checkpoint: meta.json + one .vtsr per parameter/buffer/optimizer
// moment, plus arbitrary extra JSON documents (e.g. manifold-info.json).
// Writes go to a temp sibling directory that is atomically swapped in, so an
// interrupted run leaves either the previous artifact or a quarantined
// .tmp/.old directory, never a corrupt checkpoint.
struct CheckpointData {
    nlohmann::json meta;
    std::vector<std::pair<std::string, Tensor>> params;
    std::vector<std::pair<std::string, Tensor>> buffers;
    std::vector<std::pair<std::string, Tensor>> opt_m, opt_v;
    std::map<std::string, nlohmann::json> extra;  // filename -> document
};

void save_checkpoint(const std::filesystem::path& dir, const CheckpointData& data);
CheckpointData load_checkpoint(const std::filesystem::path& dir);

}  // namespace sonovis::ad

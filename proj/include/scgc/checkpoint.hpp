#pragma once

#include "scgc/inference.hpp"

#include <filesystem>
#include <string>

namespace scgc {

inline constexpr int kCheckpointVersion = 1;

/// JSON container: format tag and version, layer dims, activation tag, init
/// seed, every weight/bias array, eta and centroids. Doubles are written with
/// round-trip precision, so load(save(m)) == m.
std::string checkpoint_to_json(const ClusteringModel& model);
ClusteringModel checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const ClusteringModel& model);
ClusteringModel load_checkpoint(const std::filesystem::path& path);

}  // namespace scgc

#pragma once

#include <filesystem>

#include <json.hpp>

#include "poisonbench/victims/arch.hpp"

namespace poisonbench {

nlohmann::json arch_to_json(const GnnArch& arch);
GnnArch arch_from_json(const nlohmann::json& j);

/// Writes `dir/model.json` (architecture, seed, dims, tensor table) and `dir/weights.bin`
/// (little-endian float32, tensors in manifest order, each row-major).
void save_model(const VictimModel& model, const std::filesystem::path& dir);
VictimModel load_model(const std::filesystem::path& dir);

}  // namespace poisonbench

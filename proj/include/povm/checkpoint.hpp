// Copyright 2026 The povm-ground Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <Eigen/Dense>

#include "json.hpp"
#include "povm/model.hpp"

namespace povm {

/// Binary container: magic "POVMCKPT", u32 version, u64 metadata length,
/// metadata JSON, u32 array count, then per array a u32 name length, name,
/// u64 rows, u64 cols and rows*cols little-endian f64 in column-major order.
struct Checkpoint {
  DualStreamModel model;
  /// Free-form metadata. "model" holds the dimensions and is written on save.
  nlohmann::json metadata = nlohmann::json::object();
  /// Additional named arrays such as optimizer moments.
  std::map<std::string, Eigen::MatrixXd> extra;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Throws std::runtime_error on malformed files.
Checkpoint load_checkpoint(const std::filesystem::path& path);

nlohmann::json to_json(const ModelDims& d);
ModelDims model_dims_from_json(const nlohmann::json& j);

}  // namespace povm

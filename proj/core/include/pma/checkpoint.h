// Copyright 2026 The PMA-URL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PMA_CHECKPOINT_H_
#define PMA_CHECKPOINT_H_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "pma/tensor.h"

namespace pma {

enum class DType { kF32, kF64 };

struct CheckpointEntry {
  std::string name;
  DType dtype = DType::kF32;
  Shape shape;
  std::vector<double> values;
};

// Parsed "pma-v1" checkpoint. The config is an opaque single-line JSON string
// chosen by the writer, which makes the file self-describing.
struct Checkpoint {
  std::string config_json;
  std::vector<CheckpointEntry> entries;

  const CheckpointEntry* Find(const std::string& name) const;
};

template <typename T>
using NamedTensors = std::vector<std::pair<std::string, Tensor<T>>>;

// Layout: a text header ("pma-v1", config line, one manifest line per tensor
// with name, dtype, shape, byte offset and byte count, then "end") followed by
// the raw little-endian arrays in manifest order.
template <typename T>
std::string SerializeCheckpoint(const std::string& config_json,
                                const NamedTensors<T>& tensors);
Checkpoint ParseCheckpoint(const std::string& bytes);

template <typename T>
void SaveCheckpoint(const std::filesystem::path& path,
                    const std::string& config_json,
                    const NamedTensors<T>& tensors);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace pma

#endif  // PMA_CHECKPOINT_H_

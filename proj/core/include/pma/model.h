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

#ifndef PMA_MODEL_H_
#define PMA_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pma/checkpoint.h"
#include "pma/encoder.h"
#include "pma/head.h"
#include "pma/tokenizer.h"

namespace pma {

struct ModelConfig {
  EncoderConfig encoder;
  HeadConfig head;

  void Validate() const;
  nlohmann::json ToJson() const;
  static ModelConfig FromJson(const nlohmann::json& j);
};

// Encoder plus head; the unit that is trained, checkpointed and served.
template <typename T>
class Model {
 public:
  struct Output {
    Prediction<T> prediction;
    Tensor<T> attention;  // (H, N)
  };

  // Parameters are drawn from the "init" sub-seed of `seed`.
  static Model Init(const ModelConfig& config, uint64_t seed);
  // Throws BadCheckpoint when a tensor is missing or shaped differently.
  static Model FromCheckpoint(const Checkpoint& checkpoint);
  static Model Load(const std::filesystem::path& path);

  const ModelConfig& config() const { return config_; }
  const EncoderParams<T>& encoder() const { return encoder_; }
  const HeadParams<T>& head() const { return head_; }
  EncoderParams<T>& mutable_encoder() { return encoder_; }
  HeadParams<T>& mutable_head() { return head_; }

  NamedTensors<T> Named() const;
  std::vector<Tensor<T>> Parameters() const;
  int64_t ParameterCount() const;

  Output Forward(std::span<const TokenSequence> batch, ForwardMode mode) const;

  std::string Serialize() const;
  void Save(const std::filesystem::path& path) const;

 private:
  ModelConfig config_;
  EncoderParams<T> encoder_;
  HeadParams<T> head_;
};

extern template class Model<float>;
extern template class Model<double>;

}  // namespace pma

#endif  // PMA_MODEL_H_

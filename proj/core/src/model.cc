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

#include "pma/model.h"

#include "pma/errors.h"

namespace pma {

void ModelConfig::Validate() const {
  encoder.Validate();
  head.Validate();
  if (head.layers_used > encoder.n_layers) {
    throw Error(ErrorCode::kInvalidArgument,
                "head stacks " + std::to_string(head.layers_used) + " layers but the encoder has " +
                    std::to_string(encoder.n_layers));
  }
  if (head.seq_len < encoder.max_positions) {
    throw Error(ErrorCode::kInvalidArgument, "head seq_len shorter than encoder max_positions");
  }
}

nlohmann::json ModelConfig::ToJson() const {
  return {{"encoder", encoder.ToJson()}, {"head", head.ToJson()}};
}

ModelConfig ModelConfig::FromJson(const nlohmann::json& j) {
  ModelConfig c;
  c.encoder = EncoderConfig::FromJson(j.at("encoder"));
  c.head = HeadConfig::FromJson(j.at("head"));
  c.Validate();
  return c;
}

template <typename T>
Model<T> Model<T>::Init(const ModelConfig& config, uint64_t seed) {
  config.Validate();
  Model model;
  model.config_ = config;
  Rng rng(DeriveSeed(seed, "init"));
  model.encoder_ = EncoderParams<T>::Init(config.encoder, rng);
  model.head_ = HeadParams<T>::Init(config.head, config.encoder.hidden, rng);
  return model;
}

template <typename T>
Model<T> Model<T>::FromCheckpoint(const Checkpoint& checkpoint) {
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(checkpoint.config_json);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kBadCheckpoint, std::string("config is not JSON: ") + e.what());
  }
  if (!header.contains("model")) {
    throw Error(ErrorCode::kBadCheckpoint, "config lacks a model section");
  }
  Model model = Init(ModelConfig::FromJson(header.at("model")), 0);
  for (auto& [name, tensor] : model.Named()) {
    const CheckpointEntry* entry = checkpoint.Find(name);
    if (entry == nullptr) {
      throw Error(ErrorCode::kBadCheckpoint, "checkpoint lacks tensor " + name);
    }
    if (entry->shape != tensor.shape()) {
      throw Error(ErrorCode::kBadCheckpoint,
                  "tensor " + name + " has checkpoint shape " + ShapeString(entry->shape) +
                      " but the model expects " + ShapeString(tensor.shape()));
    }
    Tensor<T> target = tensor;
    auto values = target.mutable_data();
    for (size_t i = 0; i < values.size(); ++i) values[i] = static_cast<T>(entry->values[i]);
  }
  return model;
}

template <typename T>
Model<T> Model<T>::Load(const std::filesystem::path& path) {
  return FromCheckpoint(LoadCheckpoint(path));
}

template <typename T>
NamedTensors<T> Model<T>::Named() const {
  NamedTensors<T> out = encoder_.Named();
  for (auto& entry : head_.Named()) out.push_back(std::move(entry));
  return out;
}

template <typename T>
std::vector<Tensor<T>> Model<T>::Parameters() const {
  std::vector<Tensor<T>> out;
  for (auto& [name, tensor] : Named()) out.push_back(tensor);
  return out;
}

template <typename T>
int64_t Model<T>::ParameterCount() const {
  int64_t total = 0;
  for (const auto& [name, tensor] : Named()) total += static_cast<int64_t>(tensor.size());
  return total;
}

template <typename T>
typename Model<T>::Output Model<T>::Forward(std::span<const TokenSequence> batch,
                                            ForwardMode mode) const {
  std::vector<DualChannelOutput<T>> encoded;
  encoded.reserve(batch.size());
  for (const TokenSequence& seq : batch) {
    encoded.push_back(Encode(seq, encoder_, config_.encoder, mode));
  }
  Tensor<T> stack = BuildStack<T>(encoded, head_, config_.head);
  AttentionResult<T> attention = LayerAttention(stack, head_);
  Tensor<T> pooled = Spp(attention.weighted, std::span<const int>(config_.head.spp_levels));
  return {Classify(pooled, head_, config_.head.dropout, mode), attention.map};
}

template <typename T>
std::string Model<T>::Serialize() const {
  nlohmann::json header = {{"model", config_.ToJson()}};
  return SerializeCheckpoint<T>(header.dump(), Named());
}

template <typename T>
void Model<T>::Save(const std::filesystem::path& path) const {
  nlohmann::json header = {{"model", config_.ToJson()}};
  SaveCheckpoint<T>(path, header.dump(), Named());
}

template class Model<float>;
template class Model<double>;

}  // namespace pma

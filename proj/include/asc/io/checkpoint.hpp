// Copyright 2026 The ASC Authors. All Rights Reserved.
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

// ASCK model checkpoints.
//
//   "ASCK" u16 version u16 reserved u64 json_bytes
//   json header (model kind, architecture, config snapshot, deviation flags,
//                tensor table: name, dtype, shape, byte offset)
//   raw little-endian tensor data, offsets relative to its start
//
// Tensor payloads are copied byte for byte, so load(save(m)) reproduces
// every parameter, BatchNorm statistic and forest split exactly.

#ifndef ASC_IO_CHECKPOINT_HPP_
#define ASC_IO_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "asc/decoders/decoder.hpp"
#include "asc/encoder/encoder.hpp"

namespace asc::io {

inline constexpr std::uint16_t kCheckpointVersion = 1;

enum class DType { kF32, kI32 };

struct CheckpointTensor {
  std::string name;
  DType dtype = DType::kF32;
  std::vector<std::size_t> shape;
  std::vector<float> f32;
  std::vector<std::int32_t> i32;

  std::size_t element_count() const;
};

struct Checkpoint {
  std::string model_kind;  // "encoder", "decoder/rfr", "decoder/dnn", ...
  nlohmann::json architecture = nlohmann::json::object();
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::string> deviation_flags;
  std::vector<CheckpointTensor> tensors;

  // Throws std::runtime_error when absent.
  const CheckpointTensor& tensor(const std::string& name) const;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// `config` is an arbitrary snapshot of the settings that produced the model.
Checkpoint encoder_checkpoint(encoder::Encoder<float>& model,
                              const nlohmann::json& config = {});
encoder::Encoder<float> encoder_from_checkpoint(const Checkpoint& ckpt);

Checkpoint decoder_checkpoint(decoders::Decoder& model,
                              const nlohmann::json& config = {});
std::unique_ptr<decoders::Decoder> decoder_from_checkpoint(const Checkpoint& ckpt);

void save_encoder(const std::filesystem::path& path,
                  encoder::Encoder<float>& model,
                  const nlohmann::json& config = {});
encoder::Encoder<float> load_encoder(const std::filesystem::path& path);

void save_decoder(const std::filesystem::path& path, decoders::Decoder& model,
                  const nlohmann::json& config = {});
std::unique_ptr<decoders::Decoder> load_decoder(const std::filesystem::path& path);

}  // namespace asc::io

#endif  // ASC_IO_CHECKPOINT_HPP_

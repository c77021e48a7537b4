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

#include "asc/io/checkpoint.hpp"

#include <fstream>
#include <map>
#include <stdexcept>

#include "binary.hpp"

namespace asc::io {
namespace {

using nlohmann::json;

const char* dtype_name(DType t) { return t == DType::kF32 ? "f32" : "i32"; }

DType dtype_from(const std::string& s) {
  if (s == "f32") return DType::kF32;
  if (s == "i32") return DType::kI32;
  throw std::runtime_error("checkpoint: unknown dtype '" + s + "'");
}

CheckpointTensor f32_tensor(std::string name, const nn::Tensor<float>& t) {
  CheckpointTensor out;
  out.name = std::move(name);
  out.shape = t.shape();
  out.f32 = t.storage();
  return out;
}

CheckpointTensor i32_tensor(std::string name, std::vector<std::int32_t> v) {
  CheckpointTensor out;
  out.name = std::move(name);
  out.dtype = DType::kI32;
  out.shape = {v.size()};
  out.i32 = std::move(v);
  return out;
}

void restore(const Checkpoint& ckpt, const std::string& name,
             nn::Tensor<float>& dst) {
  const CheckpointTensor& src = ckpt.tensor(name);
  if (src.dtype != DType::kF32 || src.shape != dst.shape()) {
    throw std::runtime_error("checkpoint: tensor " + name + " has shape " +
                             nn::shape_string(src.shape) + ", model expects " +
                             nn::shape_string(dst.shape()));
  }
  dst.storage() = src.f32;
}

// Parameters and buffers of a module; every stored tensor must be claimed.
template <typename Params, typename Buffers>
void restore_all(const Checkpoint& ckpt, const Params& params,
                 const Buffers& buffers) {
  std::size_t claimed = 0;
  for (auto* p : params) {
    restore(ckpt, p->name, p->value);
    ++claimed;
  }
  for (const auto& b : buffers) {
    restore(ckpt, b.name, *b.tensor);
    ++claimed;
  }
  if (claimed != ckpt.tensors.size()) {
    throw std::runtime_error("checkpoint: " + std::to_string(ckpt.tensors.size()) +
                             " tensors stored but the model has " +
                             std::to_string(claimed));
  }
}

json forest_json(const decoders::ForestConfig& f) {
  return {{"n_trees", f.n_trees}, {"max_depth", f.max_depth},
          {"min_leaf", f.min_leaf}, {"mtry", f.mtry},
          {"bootstrap", f.bootstrap}, {"seed", f.seed}};
}

std::string tree_prefix(std::size_t t) { return "tree." + std::to_string(t) + "."; }

}  // namespace

std::size_t CheckpointTensor::element_count() const {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

const CheckpointTensor& Checkpoint::tensor(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  throw std::runtime_error("checkpoint: missing tensor " + name);
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  json table = json::array();
  std::uint64_t offset = 0;
  for (const auto& t : ckpt.tensors) {
    const std::size_t n = t.element_count();
    const std::size_t have = t.dtype == DType::kF32 ? t.f32.size() : t.i32.size();
    if (n != have) {
      throw std::invalid_argument("write_checkpoint: tensor " + t.name +
                                  " data does not match its shape");
    }
    table.push_back({{"name", t.name}, {"dtype", dtype_name(t.dtype)},
                     {"shape", t.shape}, {"offset", offset}});
    offset += 4 * n;
  }
  const json header = {{"model_kind", ckpt.model_kind},
                       {"architecture", ckpt.architecture},
                       {"config", ckpt.config},
                       {"deviation_flags", ckpt.deviation_flags},
                       {"tensors", table}};
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out.write("ASCK", 4);
  detail::put<std::uint16_t>(out, kCheckpointVersion);
  detail::put<std::uint16_t>(out, 0);
  detail::put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : ckpt.tensors) {
    if (t.dtype == DType::kF32) {
      detail::put_array<float>(out, t.f32);
    } else {
      detail::put_array<std::int32_t>(out, t.i32);
    }
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  detail::expect_magic(in, "ASCK", path.string());
  const auto version = detail::get<std::uint16_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw std::runtime_error(path.string() + ": unsupported checkpoint version " +
                             std::to_string(version));
  }
  detail::get<std::uint16_t>(in, "reserved");
  const auto json_bytes = detail::get<std::uint64_t>(in, "header length");
  if (json_bytes > (std::uint64_t{1} << 30)) {
    throw std::runtime_error(path.string() + ": implausible header length");
  }
  std::string text(json_bytes, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(json_bytes))) {
    throw std::runtime_error(path.string() + ": truncated checkpoint header");
  }
  json header;
  try {
    header = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": bad checkpoint header: " + e.what());
  }

  Checkpoint ckpt;
  try {
    ckpt.model_kind = header.at("model_kind").get<std::string>();
    ckpt.architecture = header.at("architecture");
    ckpt.config = header.at("config");
    ckpt.deviation_flags =
        header.at("deviation_flags").get<std::vector<std::string>>();
    const auto data_start = in.tellg();
    for (const auto& entry : header.at("tensors")) {
      CheckpointTensor t;
      t.name = entry.at("name").get<std::string>();
      t.dtype = dtype_from(entry.at("dtype").get<std::string>());
      t.shape = entry.at("shape").get<std::vector<std::size_t>>();
      const auto offset = entry.at("offset").get<std::uint64_t>();
      in.seekg(data_start + static_cast<std::streamoff>(offset));
      const std::size_t n = t.element_count();
      if (t.dtype == DType::kF32) {
        t.f32.resize(n);
        detail::get_array<float>(in, t.f32, t.name.c_str());
      } else {
        t.i32.resize(n);
        detail::get_array<std::int32_t>(in, t.i32, t.name.c_str());
      }
      ckpt.tensors.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": bad checkpoint header: " + e.what());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  return ckpt;
}

Checkpoint encoder_checkpoint(encoder::Encoder<float>& model,
                              const json& config) {
  const auto& cfg = model.config();
  Checkpoint ckpt;
  ckpt.model_kind = "encoder";
  ckpt.architecture = {{"n_classes", cfg.n_classes},
                       {"combiner", encoder::to_string(cfg.combiner)},
                       {"profile", encoder::to_string(cfg.profile)},
                       {"seed", cfg.seed},
                       {"patch_size", cfg.patch_size},
                       {"feature_dim", encoder::kFeatureDim}};
  ckpt.config = config.is_null() ? json::object() : config;
  ckpt.deviation_flags.push_back("hidden_dense_relu");
  if (cfg.profile == encoder::WidthProfile::kCompact) {
    ckpt.deviation_flags.push_back("cnn_width_profile_compact");
  }
  for (auto* p : model.parameters()) ckpt.tensors.push_back(f32_tensor(p->name, p->value));
  for (const auto& b : model.buffers()) ckpt.tensors.push_back(f32_tensor(b.name, *b.tensor));
  return ckpt;
}

encoder::Encoder<float> encoder_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.model_kind != "encoder") {
    throw std::runtime_error("checkpoint holds '" + ckpt.model_kind +
                             "', not an encoder");
  }
  encoder::EncoderConfig cfg;
  const json& a = ckpt.architecture;
  try {
    cfg.n_classes = a.at("n_classes").get<std::size_t>();
    cfg.combiner = encoder::combiner_kind_from_string(a.at("combiner").get<std::string>());
    cfg.profile = encoder::width_profile_from_string(a.at("profile").get<std::string>());
    cfg.seed = a.at("seed").get<std::uint64_t>();
    cfg.patch_size = a.at("patch_size").get<std::size_t>();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: bad encoder architecture: ") +
                             e.what());
  }
  encoder::Encoder<float> model(cfg);
  restore_all(ckpt, model.parameters(), model.buffers());
  return model;
}

Checkpoint decoder_checkpoint(decoders::Decoder& model, const json& config) {
  const auto& o = model.options();
  Checkpoint ckpt;
  ckpt.model_kind = "decoder/" + std::string(decoders::to_string(model.kind()));
  ckpt.architecture = {{"input_dim", o.input_dim},
                       {"n_classes", o.n_classes},
                       {"n_experts", o.n_experts},
                       {"dropout", o.dropout},
                       {"seed", o.seed},
                       {"forest", forest_json(o.forest)}};
  ckpt.config = config.is_null() ? json::object() : config;
  ckpt.deviation_flags = model.deviation_flags();

  if (auto* rfr = dynamic_cast<decoders::RfrDecoder*>(&model)) {
    const auto& trees = rfr->forest().trees();
    ckpt.architecture["n_fitted_trees"] = trees.size();
    for (std::size_t t = 0; t < trees.size(); ++t) {
      const auto& tree = trees[t];
      std::vector<std::int32_t> feature, left, right, leaf;
      CheckpointTensor threshold;
      threshold.name = tree_prefix(t) + "threshold";
      threshold.shape = {tree.nodes.size()};
      for (const auto& n : tree.nodes) {
        feature.push_back(n.feature);
        left.push_back(n.left);
        right.push_back(n.right);
        leaf.push_back(n.leaf);
        threshold.f32.push_back(n.threshold);
      }
      const std::string p = tree_prefix(t);
      ckpt.tensors.push_back(i32_tensor(p + "feature", std::move(feature)));
      ckpt.tensors.push_back(std::move(threshold));
      ckpt.tensors.push_back(i32_tensor(p + "left", std::move(left)));
      ckpt.tensors.push_back(i32_tensor(p + "right", std::move(right)));
      ckpt.tensors.push_back(i32_tensor(p + "leaf", std::move(leaf)));
      CheckpointTensor values;
      values.name = p + "leaf_values";
      values.shape = {tree.leaf_count(), tree.n_outputs};
      values.f32 = tree.leaf_values;
      ckpt.tensors.push_back(std::move(values));
    }
    return ckpt;
  }
  auto& neural = dynamic_cast<decoders::NeuralDecoder&>(model);
  for (auto* p : neural.network().parameters()) {
    ckpt.tensors.push_back(f32_tensor(p->name, p->value));
  }
  for (const auto& b : neural.network().buffers()) {
    ckpt.tensors.push_back(f32_tensor(b.name, *b.tensor));
  }
  return ckpt;
}

std::unique_ptr<decoders::Decoder> decoder_from_checkpoint(const Checkpoint& ckpt) {
  const std::string prefix = "decoder/";
  if (ckpt.model_kind.rfind(prefix, 0) != 0) {
    throw std::runtime_error("checkpoint holds '" + ckpt.model_kind +
                             "', not a decoder");
  }
  const auto kind =
      decoders::decoder_kind_from_string(ckpt.model_kind.substr(prefix.size()));
  decoders::DecoderOptions o;
  std::size_t n_trees = 0;
  try {
    const json& a = ckpt.architecture;
    o.input_dim = a.at("input_dim").get<std::size_t>();
    o.n_classes = a.at("n_classes").get<std::size_t>();
    o.n_experts = a.at("n_experts").get<std::size_t>();
    o.dropout = a.at("dropout").get<double>();
    o.seed = a.at("seed").get<std::uint64_t>();
    const json& f = a.at("forest");
    o.forest.n_trees = f.at("n_trees").get<std::size_t>();
    o.forest.max_depth = f.at("max_depth").get<std::size_t>();
    o.forest.min_leaf = f.at("min_leaf").get<std::size_t>();
    o.forest.mtry = f.at("mtry").get<std::size_t>();
    o.forest.bootstrap = f.at("bootstrap").get<bool>();
    o.forest.seed = f.at("seed").get<std::uint64_t>();
    if (kind == decoders::DecoderKind::kRfr) {
      n_trees = a.at("n_fitted_trees").get<std::size_t>();
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("checkpoint: bad decoder architecture: ") +
                             e.what());
  }
  auto model = decoders::make_decoder(kind, o);

  if (auto* rfr = dynamic_cast<decoders::RfrDecoder*>(model.get())) {
    if (ckpt.tensors.size() != 6 * n_trees) {
      throw std::runtime_error("checkpoint: forest tensor count mismatch");
    }
    auto& trees = rfr->forest().trees();
    trees.resize(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) {
      const std::string p = tree_prefix(t);
      const auto& feature = ckpt.tensor(p + "feature").i32;
      const auto& threshold = ckpt.tensor(p + "threshold").f32;
      const auto& left = ckpt.tensor(p + "left").i32;
      const auto& right = ckpt.tensor(p + "right").i32;
      const auto& leaf = ckpt.tensor(p + "leaf").i32;
      const auto& values = ckpt.tensor(p + "leaf_values");
      const std::size_t n = feature.size();
      if (threshold.size() != n || left.size() != n || right.size() != n ||
          leaf.size() != n || values.shape.size() != 2 ||
          values.shape[1] != o.n_classes) {
        throw std::runtime_error("checkpoint: inconsistent arrays for tree " +
                                 std::to_string(t));
      }
      auto& tree = trees[t];
      tree.n_outputs = o.n_classes;
      tree.leaf_values = values.f32;
      tree.nodes.resize(n);
      const auto n_leaves = static_cast<std::int32_t>(values.shape[0]);
      for (std::size_t i = 0; i < n; ++i) {
        auto& node = tree.nodes[i];
        node = {feature[i], threshold[i], left[i], right[i], leaf[i]};
        const auto nn = static_cast<std::int32_t>(n);
        const bool ok =
            node.feature < 0
                ? node.leaf >= 0 && node.leaf < n_leaves
                : node.feature < static_cast<std::int32_t>(o.input_dim) &&
                      node.left > 0 && node.left < nn && node.right > 0 &&
                      node.right < nn;
        if (!ok) {
          throw std::runtime_error("checkpoint: corrupt node " + std::to_string(i) +
                                   " in tree " + std::to_string(t));
        }
      }
    }
    return model;
  }
  auto& neural = dynamic_cast<decoders::NeuralDecoder&>(*model);
  restore_all(ckpt, neural.network().parameters(), neural.network().buffers());
  return model;
}

void save_encoder(const std::filesystem::path& path,
                  encoder::Encoder<float>& model, const json& config) {
  write_checkpoint(path, encoder_checkpoint(model, config));
}

encoder::Encoder<float> load_encoder(const std::filesystem::path& path) {
  return encoder_from_checkpoint(read_checkpoint(path));
}

void save_decoder(const std::filesystem::path& path, decoders::Decoder& model,
                  const json& config) {
  write_checkpoint(path, decoder_checkpoint(model, config));
}

std::unique_ptr<decoders::Decoder> load_decoder(const std::filesystem::path& path) {
  return decoder_from_checkpoint(read_checkpoint(path));
}

}  // namespace asc::io

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

#include "asc/pipeline/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <CLI11.hpp>

#include "asc/util/seed.hpp"

extern char** environ;

namespace asc::pipeline {
namespace {

// Defaults follow the published recipe where it gives one.
const std::vector<std::pair<std::string, std::string>>& defaults() {
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"data.manifest", ""},
      {"data.channel", "0"},
      {"data.fold", ""},
      {"run.out", "asc_out"},
      {"run.seed", "0"},
      {"run.threads", "1"},
      {"spectrogram.window_ms", "43"},
      {"spectrogram.hop_ms", "6"},
      {"spectrogram.n_filters", "128"},
      {"spectrogram.log_floor", "1e-10"},
      {"spectrogram.normalize", "false"},
      {"spectrogram.gamma_min_hz", "50"},
      {"spectrogram.cqt_bins_per_octave", "16"},
      {"mixup.enabled", "true"},
      {"mixup.beta_alpha", "0.4"},
      {"mixup.gaussian_mean", "0.5"},
      {"mixup.gaussian_std", "0.15"},
      {"encoder.combiner", "lin"},
      {"encoder.profile", "full"},
      {"encoder.alpha", "1/3"},
      {"encoder.beta", "1"},
      {"encoder.epochs", "200"},
      {"encoder.batch_size", "50"},
      {"encoder.learning_rate", "1e-4"},
      {"encoder.l2", "1e-4"},
      {"decoder.kind", "moe"},
      {"decoder.source", "combined"},
      {"decoder.experts", "10"},
      {"decoder.dropout", "0.3"},
      {"decoder.epochs", "200"},
      {"decoder.batch_size", "50"},
      {"decoder.learning_rate", "1e-4"},
      {"decoder.l2", "1e-4"},
      {"decoder.n_trees", "100"},
      {"decoder.max_depth", "20"},
      {"decoder.min_leaf", "2"},
      {"decoder.mtry", "16"},
      {"eval.crop_lengths", "1,2,3,4,5,6,7,8,9,10"},
      {"eval.aggregation", "mean"},
      {"synth.n_classes", "4"},
      {"synth.n_segments", "200"},
      {"synth.duration", "10"},
      {"synth.sample_rate", "16000"},
      {"synth.test_fraction", "0.2"},
  };
  return table;
}

std::string env_name(const std::string& key) {
  std::string out = "ASC_";
  for (char c : key) {
    out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

[[noreturn]] void bad(const std::string& key, const std::string& value,
                      const std::string& what) {
  throw std::invalid_argument("setting " + key + " = '" + value + "': " + what);
}

std::size_t to_size(const Settings& s, const std::string& key, std::size_t min = 0) {
  const std::string& v = s.get(key);
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(key, v, "expected a non-negative integer");
  if (out < min) bad(key, v, "must be at least " + std::to_string(min));
  return out;
}

std::uint64_t to_u64(const Settings& s, const std::string& key) {
  const std::string& v = s.get(key);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad(key, v, "expected an unsigned integer");
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  // "a/b" is accepted so that fractions such as 1/3 stay exact in files.
  const auto slash = v.find('/');
  if (slash != std::string::npos) {
    return parse_double(key, v.substr(0, slash)) / parse_double(key, v.substr(slash + 1));
  }
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(out)) {
    bad(key, v, "expected a number");
  }
  return out;
}

double to_double(const Settings& s, const std::string& key) {
  return parse_double(key, s.get(key));
}

bool to_bool(const Settings& s, const std::string& key) {
  std::string v = s.get(key);
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad(key, s.get(key), "expected true or false");
}

template <typename Fn>
auto enum_value(const Settings& s, const std::string& key, Fn&& parse) {
  try {
    return parse(s.get(key));
  } catch (const std::invalid_argument& e) {
    bad(key, s.get(key), e.what());
  }
}

}  // namespace

Settings::Settings() {
  for (const auto& [k, v] : defaults()) {
    values_[k] = v;
    sources_[k] = "default";
  }
}

const std::vector<std::string>& Settings::known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& kv : defaults()) out.push_back(kv.first);
    return out;
  }();
  return keys;
}

void Settings::set(const std::string& key, const std::string& value,
                   const std::string& source) {
  if (!values_.count(key)) {
    throw std::invalid_argument(source + ": unknown setting '" + key + "'");
  }
  values_[key] = value;
  sources_[key] = source;
}

const std::string& Settings::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("unknown setting '" + key + "'");
  return it->second;
}

bool Settings::has(const std::string& key) const { return values_.count(key) != 0; }

std::string Settings::source_of(const std::string& key) const {
  const auto it = sources_.find(key);
  return it == sources_.end() ? std::string() : it->second;
}

void Settings::load_ini(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(in);
  } catch (const CLI::Error& e) {
    throw std::invalid_argument(source + ": " + e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    std::string key;
    for (const auto& p : item.parents) key += p + ".";
    key += item.name;
    if (key.find('.') == std::string::npos) {
      throw std::invalid_argument(source + ": setting '" + key + "' is outside any section");
    }
    std::string value;
    for (std::size_t i = 0; i < item.inputs.size(); ++i) {
      value += (i ? "," : "") + item.inputs[i];
    }
    set(key, value, source);
  }
}

void Settings::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(path.string() + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  load_ini(buf.str(), path.string());
}

void Settings::apply_environment(const std::vector<std::string>& env) {
  std::vector<std::string> vars = env;
  if (vars.empty()) {
    for (char** e = environ; e && *e; ++e) vars.emplace_back(*e);
  }
  std::map<std::string, std::string> by_env;
  for (const auto& key : known_keys()) by_env[env_name(key)] = key;
  for (const auto& var : vars) {
    const auto eq = var.find('=');
    if (eq == std::string::npos) continue;
    const auto it = by_env.find(var.substr(0, eq));
    if (it != by_env.end()) set(it->second, var.substr(eq + 1), "env " + it->first);
  }
}

std::string Settings::to_ini() const {
  std::ostringstream out;
  std::string section;
  for (const auto& key : known_keys()) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      out << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
      section = sec;
    }
    const std::string& v = values_.at(key);
    const bool quote = v.empty() || v.find_first_of(",;#\"' ") != std::string::npos;
    out << key.substr(dot + 1) << " = " << (quote ? "\"" + v + "\"" : v)
        << "  ; " << sources_.at(key) << '\n';
  }
  return out.str();
}

ExperimentConfig resolve(const Settings& s) {
  ExperimentConfig c;
  c.manifest = s.get("data.manifest");
  c.out_dir = s.get("run.out");
  if (c.out_dir.empty()) bad("run.out", "", "output directory required");
  c.channel = static_cast<int>(to_size(s, "data.channel"));
  if (!s.get("data.fold").empty()) c.fold = static_cast<int>(to_size(s, "data.fold"));
  c.seed = to_u64(s, "run.seed");
  c.threads = to_size(s, "run.threads", 1);

  auto& sp = c.spectrogram;
  sp.window_ms = to_double(s, "spectrogram.window_ms");
  sp.hop_ms = to_double(s, "spectrogram.hop_ms");
  sp.n_filters = to_size(s, "spectrogram.n_filters", 1);
  sp.log_floor = to_double(s, "spectrogram.log_floor");
  sp.gamma_min_hz = to_double(s, "spectrogram.gamma_min_hz");
  sp.cqt_bins_per_octave = to_size(s, "spectrogram.cqt_bins_per_octave", 1);
  c.normalize = to_bool(s, "spectrogram.normalize");
  try {
    sp.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("[spectrogram] ") + e.what());
  }
  if (sp.n_filters != dsp::kPatchSize) {
    bad("spectrogram.n_filters", s.get("spectrogram.n_filters"),
        "patches are " + std::to_string(dsp::kPatchSize) + " bands wide");
  }

  c.use_mixup = to_bool(s, "mixup.enabled");
  c.mixup.beta_alpha = to_double(s, "mixup.beta_alpha");
  c.mixup.gaussian_mean = to_double(s, "mixup.gaussian_mean");
  c.mixup.gaussian_std = to_double(s, "mixup.gaussian_std");
  c.mixup.rng_seed = derive_seed(c.seed, 5);
  try {
    c.mixup.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("[mixup] ") + e.what());
  }

  c.combiner = enum_value(s, "encoder.combiner", [](const std::string& v) {
    return encoder::combiner_kind_from_string(v);
  });
  c.profile = enum_value(s, "encoder.profile", [](const std::string& v) {
    return encoder::width_profile_from_string(v);
  });
  auto& et = c.encoder_train;
  et.loss.alpha = to_double(s, "encoder.alpha");
  et.loss.beta = to_double(s, "encoder.beta");
  et.epochs = to_size(s, "encoder.epochs", 1);
  et.batch_size = to_size(s, "encoder.batch_size", 1);
  et.learning_rate = to_double(s, "encoder.learning_rate");
  et.reg.l2_lambda = to_double(s, "encoder.l2");
  et.mixup = c.mixup;
  et.mixup.stage = augment::MixupStage::kPatch;
  et.use_mixup = c.use_mixup;
  et.seed = derive_seed(c.seed, 1);
  et.threads = c.threads;
  try {
    et.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("[encoder] ") + e.what());
  }

  c.decoder = enum_value(s, "decoder.kind", [](const std::string& v) {
    return decoders::decoder_kind_from_string(v);
  });
  c.decoder_source = enum_value(s, "decoder.source", [](const std::string& v) {
    return encoder::feature_source_from_string(v);
  });
  auto& o = c.decoder_options;
  o.input_dim = encoder::kFeatureDim;
  o.n_experts = to_size(s, "decoder.experts", 1);
  o.dropout = to_double(s, "decoder.dropout");
  o.seed = derive_seed(c.seed, 2);
  o.forest.n_trees = to_size(s, "decoder.n_trees", 1);
  o.forest.max_depth = to_size(s, "decoder.max_depth", 1);
  o.forest.min_leaf = to_size(s, "decoder.min_leaf", 1);
  o.forest.mtry = to_size(s, "decoder.mtry", 1);
  o.forest.seed = derive_seed(c.seed, 4);
  o.forest.threads = c.threads;
  auto& dt = c.decoder_train;
  dt.epochs = to_size(s, "decoder.epochs", 1);
  dt.batch_size = to_size(s, "decoder.batch_size", 1);
  dt.learning_rate = to_double(s, "decoder.learning_rate");
  dt.reg.l2_lambda = to_double(s, "decoder.l2");
  dt.mixup = c.mixup;
  dt.mixup.stage = augment::MixupStage::kFeature;
  dt.use_mixup = c.use_mixup;
  dt.seed = derive_seed(c.seed, 3);
  try {
    dt.validate();
    o.forest.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("[decoder] ") + e.what());
  }

  std::stringstream crops(s.get("eval.crop_lengths"));
  for (std::string item; std::getline(crops, item, ',');) {
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    if (item.empty()) continue;
    const double k = parse_double("eval.crop_lengths", item);
    if (!(k > 0.0)) bad("eval.crop_lengths", s.get("eval.crop_lengths"), "crop lengths must be positive");
    c.crop_lengths.push_back(k);
  }
  c.aggregation = enum_value(s, "eval.aggregation", [](const std::string& v) {
    return eval::aggregation_from_string(v);
  });

  c.synth.n_classes = to_size(s, "synth.n_classes");
  c.synth.n_segments = to_size(s, "synth.n_segments");
  c.synth.duration_seconds = to_double(s, "synth.duration");
  c.synth.sample_rate = static_cast<int>(to_size(s, "synth.sample_rate"));
  c.synth.test_fraction = to_double(s, "synth.test_fraction");
  c.synth.seed = c.seed;
  try {
    c.synth.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("[synth] ") + e.what());
  }
  return c;
}

}  // namespace asc::pipeline

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

#include "asc/pipeline/stages.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include "asc/io/wav.hpp"

namespace asc::pipeline {
namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers; the first
// exception is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

Dataset load_split(const io::Manifest& manifest, io::Split split, int channel,
                   std::optional<int> fold) {
  Dataset d;
  d.class_names = manifest.classes;
  const auto entries = manifest.select(split, fold);
  if (entries.empty()) {
    throw std::runtime_error("manifest has no " + std::string(io::to_string(split)) +
                             " entries" + (fold ? " in fold " + std::to_string(*fold) : ""));
  }
  std::set<std::string> ids;
  for (const auto& e : entries) {
    dsp::AudioSegment seg;
    try {
      seg = io::read_audio(manifest.resolve(e), channel);
    } catch (const std::exception& err) {
      throw std::runtime_error("manifest line " + std::to_string(e.line) + ": " + err.what());
    }
    if (!ids.insert(seg.source_id).second) {
      throw std::runtime_error("manifest line " + std::to_string(e.line) +
                               ": segment id '" + seg.source_id +
                               "' repeats within the split (file stems must be unique)");
    }
    const std::size_t label = manifest.class_index(e.label);
    seg.label = static_cast<int>(label);
    seg.device_id = e.device;
    d.truth.push_back({seg.source_id, label, e.device});
    d.segments.push_back(std::move(seg));
  }
  return d;
}

nlohmann::json FrontendStats::to_json() const {
  nlohmann::json j = {{"enabled", enabled}, {"kinds", nlohmann::json::array()}};
  for (std::size_t k = 0; k < 3; ++k) {
    j["kinds"].push_back({{"kind", dsp::to_string(dsp::kAllKinds[k])},
                          {"mean", stats[k].mean},
                          {"stddev", stats[k].stddev}});
  }
  return j;
}

FrontendStats FrontendStats::from_json(const nlohmann::json& j) {
  FrontendStats s;
  s.enabled = j.at("enabled").get<bool>();
  const auto& kinds = j.at("kinds");
  if (kinds.size() != 3) throw std::runtime_error("front-end statistics need three kinds");
  for (std::size_t k = 0; k < 3; ++k) {
    s.stats[k].mean = kinds[k].at("mean").get<double>();
    s.stats[k].stddev = kinds[k].at("stddev").get<double>();
  }
  return s;
}

SpectrogramSets compute_spectrograms(const std::vector<dsp::AudioSegment>& segments,
                                     const dsp::SpectrogramConfig& cfg,
                                     std::size_t threads) {
  SpectrogramSets out;
  for (auto& v : out) v.resize(segments.size());
  parallel_for(segments.size() * 3, threads, [&](std::size_t job) {
    const std::size_t i = job / 3, k = job % 3;
    dsp::SpectrogramConfig c = cfg;
    c.kind = dsp::kAllKinds[k];
    out[k][i] = dsp::compute_spectrogram(segments[i], c);
  });
  return out;
}

FrontendStats fit_frontend(const SpectrogramSets& specs, bool enabled) {
  FrontendStats s;
  s.enabled = enabled;
  if (enabled) {
    for (std::size_t k = 0; k < 3; ++k) s.stats[k] = dsp::fit_normalization(specs[k]);
  }
  return s;
}

encoder::PatchTriples to_triples(SpectrogramSets&& specs, const FrontendStats& stats,
                                 std::size_t n_classes) {
  std::array<dsp::PatchSet, 3> sets;
  for (std::size_t k = 0; k < 3; ++k) {
    sets[k].kind = dsp::kAllKinds[k];
    sets[k].n_classes = n_classes;
    for (auto& spec : specs[k]) {
      if (stats.enabled) dsp::apply_normalization(stats.stats[k], spec);
      sets[k].append(dsp::split_patches(spec, n_classes));
      spec = dsp::Spectrogram();  // release as we go
    }
  }
  return encoder::align_patch_sets(std::move(sets));
}

encoder::PatchTriples extract_triples(const std::vector<dsp::AudioSegment>& segments,
                                      const dsp::SpectrogramConfig& cfg,
                                      const FrontendStats& stats,
                                      std::size_t n_classes, std::size_t threads) {
  return to_triples(compute_spectrograms(segments, cfg, threads), stats, n_classes);
}

encoder::EncoderConfig encoder_config(const ExperimentConfig& cfg,
                                      encoder::CombinerKind combiner,
                                      std::size_t n_classes) {
  encoder::EncoderConfig ec;
  ec.n_classes = n_classes;
  ec.combiner = combiner;
  ec.profile = cfg.profile;
  ec.seed = cfg.seed;
  return ec;
}

EncoderRun train_encoder_stage(const ExperimentConfig& cfg,
                               encoder::CombinerKind combiner,
                               const encoder::PatchTriples& train,
                               std::function<void(const encoder::EpochLog&)> progress) {
  EncoderRun run{encoder::Encoder<float>(encoder_config(cfg, combiner, train.n_classes)), {}};
  run.model.set_threads(cfg.threads);
  auto tc = cfg.encoder_train;
  tc.on_epoch = std::move(progress);
  run.log = encoder::train_encoder(run.model, train, tc);
  return run;
}

augment::LabeledSet feature_set(const encoder::EncodedPatches& encoded,
                                encoder::FeatureSource source) {
  augment::LabeledSet set;
  set.item_size = encoder::kFeatureDim;
  set.n_classes = encoded.n_classes;
  set.x = encoded.features[static_cast<std::size_t>(source)];
  set.y.reserve(encoded.size() * encoded.n_classes);
  for (const auto& label : encoded.labels) {
    if (label.size() != encoded.n_classes) {
      throw std::invalid_argument("feature_set: unlabelled patch");
    }
    set.y.insert(set.y.end(), label.begin(), label.end());
  }
  return set;
}

DecoderRun train_decoder_stage(const ExperimentConfig& cfg,
                               decoders::DecoderKind kind,
                               const encoder::EncodedPatches& train,
                               encoder::FeatureSource source,
                               std::function<void(std::size_t, double)> progress) {
  auto opts = cfg.decoder_options;
  opts.n_classes = train.n_classes;
  DecoderRun run{decoders::make_decoder(kind, opts), {}};
  auto tc = cfg.decoder_train;
  tc.on_epoch = std::move(progress);
  run.losses = run.model->fit(feature_set(train, source), tc);
  return run;
}

eval::PatchScores encoder_scores(const encoder::EncodedPatches& encoded) {
  return {encoded.keys,
          encoded.probs[static_cast<std::size_t>(encoder::FeatureSource::kCombined)]};
}

eval::PatchScores decoder_scores(const decoders::Decoder& decoder,
                                 const encoder::EncodedPatches& encoded,
                                 encoder::FeatureSource source) {
  return {encoded.keys,
          decoder.predict(encoded.features[static_cast<std::size_t>(source)])};
}

eval::EvaluationReport score(const eval::PatchScores& scores, const Dataset& data,
                             eval::Aggregation mode) {
  const auto preds = eval::aggregate_by_segment(scores.keys, scores.probs,
                                                data.class_names.size(), mode);
  return eval::evaluate(preds, data.truth, data.class_names);
}

eval::PatchPredictor make_predictor(const encoder::Encoder<float>& model,
                                    const decoders::Decoder* decoder,
                                    encoder::FeatureSource source,
                                    const dsp::SpectrogramConfig& spec,
                                    const FrontendStats& stats,
                                    std::size_t n_classes, std::size_t threads) {
  return [&model, decoder, source, spec, stats, n_classes,
          threads](const std::vector<dsp::AudioSegment>& segments) {
    const auto triples = extract_triples(segments, spec, stats, n_classes, threads);
    const auto encoded = encoder::encode_patches(model, triples);
    return decoder ? decoder_scores(*decoder, encoded, source) : encoder_scores(encoded);
  };
}

}  // namespace asc::pipeline

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

#include "asc/pipeline/commands.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "asc/io/checkpoint.hpp"
#include "asc/io/features.hpp"
#include "asc/io/patch_store.hpp"

namespace asc::pipeline {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<io::Split, 2> kSplits = {io::Split::kTrain, io::Split::kTest};

void say(const RunContext& run, const std::string& line) {
  if (run.log) *run.log << line << std::endl;
}

std::string num(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void snapshot(const RunContext& run, const std::string& verb) {
  fs::create_directories(run.cfg.out_dir);
  std::ofstream out(run.cfg.out_dir / (verb + "_config.ini"), std::ios::trunc);
  out << "; resolved settings for `" << verb << "`\n" << run.settings.to_ini();
  if (!out) throw std::runtime_error("cannot write config snapshot in " + run.cfg.out_dir.string());
}

json section_values(const Settings& s, std::initializer_list<const char*> sections,
                    std::initializer_list<const char*> skip = {}) {
  json j = json::object();
  for (const auto& [key, value] : s.values()) {
    bool keep = false;
    for (const char* sec : sections) keep |= key.rfind(std::string(sec) + ".", 0) == 0;
    for (const char* k : skip) keep &= key != k;
    if (keep) j[key] = value;
  }
  return j;
}

io::Manifest open_manifest(const RunContext& run) {
  if (run.cfg.manifest.empty()) {
    throw std::invalid_argument("no manifest: set data.manifest (or run `synth` first)");
  }
  auto m = io::load_manifest(run.cfg.manifest);
  for (const auto& w : m.warnings) say(run, "warning: " + w);
  return m;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": missing");
  return json::parse(in);
}

void require(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path)) {
    throw std::runtime_error(path.string() + " not found; run `" + producer + "` first");
  }
}

// Checkpoints carry the fingerprint of the settings that produced them.
encoder::Encoder<float> load_matching_encoder(const RunContext& run,
                                              encoder::CombinerKind comb,
                                              io::Checkpoint* out = nullptr) {
  const Layout layout(run.cfg.out_dir);
  require(layout.encoder(comb), "train-encoder");
  auto ckpt = io::read_checkpoint(layout.encoder(comb));
  if (ckpt.config.value("fingerprint", json()) != encoder_fingerprint(run.settings)) {
    throw std::runtime_error(layout.encoder(comb).string() +
                             " was trained with different settings; run `train-encoder` again");
  }
  auto model = io::encoder_from_checkpoint(ckpt);
  model.set_threads(run.cfg.threads);
  if (out) *out = std::move(ckpt);
  return model;
}

json encoder_meta(const RunContext& run, const FrontendStats& stats,
                  const std::vector<std::string>& classes) {
  return {{"fingerprint", encoder_fingerprint(run.settings)},
          {"frontend", stats.to_json()},
          {"class_names", classes},
          {"settings", section_values(run.settings, {"data", "run", "spectrogram", "mixup", "encoder"})}};
}

void save_encoder_run(const RunContext& run, encoder::CombinerKind comb, EncoderRun& er,
                      const FrontendStats& stats, const std::vector<std::string>& classes) {
  const Layout layout(run.cfg.out_dir);
  fs::create_directories(layout.encoder(comb).parent_path());
  io::save_encoder(layout.encoder(comb), er.model, encoder_meta(run, stats, classes));
  std::ofstream log(layout.encoder_log(comb), std::ios::trunc);
  log << "epoch,loss_lm,loss_ga,loss_cq,loss_com,l2,total,items,seconds\n";
  for (const auto& e : er.log) {
    log << e.epoch;
    for (double t : e.loss.terms) log << ',' << t;
    log << ',' << e.loss.l2 << ',' << e.loss.total << ',' << e.items << ',' << e.seconds << '\n';
  }
}

std::function<void(const encoder::EpochLog&)> epoch_printer(const RunContext& run,
                                                            const std::string& tag) {
  return [&run, tag](const encoder::EpochLog& e) {
    say(run, tag + " epoch " + std::to_string(e.epoch) + ": loss " + num(e.loss.total) +
                 " (lm " + num(e.loss.terms[0]) + ", ga " + num(e.loss.terms[1]) + ", cq " +
                 num(e.loss.terms[2]) + ", com " + num(e.loss.terms[3]) + ") " +
                 num(e.seconds, 1) + " s");
  };
}

std::vector<std::string> class_names_of(const io::Checkpoint& ckpt) {
  return ckpt.config.at("class_names").get<std::vector<std::string>>();
}

// Feature rows of one source, in triple order.
encoder::EncodedPatches encoded_from_file(const io::FeatureFile& file,
                                          encoder::FeatureSource source) {
  encoder::EncodedPatches e;
  e.n_classes = file.n_classes;
  auto& rows = e.features[static_cast<std::size_t>(source)];
  for (const auto& r : file.records) {
    if (r.source != source) continue;
    e.keys.push_back(r.key);
    e.labels.push_back(r.label);
    rows.insert(rows.end(), r.values.begin(), r.values.end());
  }
  if (e.keys.empty()) throw std::runtime_error("feature file has no records of that source");
  return e;
}

void write_reports(const fs::path& dir, const std::string& stem,
                   const eval::EvaluationReport& report) {
  fs::create_directories(dir);
  eval::write_report_csv(dir / (stem + "_report.csv"), report);
  eval::write_confusion_csv(dir / (stem + "_confusion.csv"), report);
}

}  // namespace

RunContext::RunContext(Settings s) : settings(std::move(s)), cfg(resolve(settings)) {}

fs::path Layout::patches(io::Split split, dsp::SpectrogramKind kind) const {
  return root_ / "patches" /
         (std::string(io::to_string(split)) + "_" + std::string(dsp::to_string(kind)) + ".ascp");
}
fs::path Layout::frontend() const { return root_ / "patches" / "frontend.json"; }
fs::path Layout::encoder(encoder::CombinerKind comb) const {
  return root_ / "encoders" / (std::string(encoder::to_string(comb)) + ".asck");
}
fs::path Layout::encoder_log(encoder::CombinerKind comb) const {
  return root_ / "encoders" / (std::string(encoder::to_string(comb)) + "_log.csv");
}
fs::path Layout::features(encoder::CombinerKind comb, io::Split split) const {
  return root_ / "features" /
         (std::string(encoder::to_string(comb)) + "_" + std::string(io::to_string(split)) + ".ascf");
}
std::string Layout::decoder_stem(encoder::CombinerKind comb, encoder::FeatureSource source,
                                 decoders::DecoderKind kind) const {
  return std::string(encoder::to_string(comb)) + "_" + std::string(encoder::source_tag(source)) +
         "_" + std::string(decoders::to_string(kind));
}
fs::path Layout::decoder(encoder::CombinerKind comb, encoder::FeatureSource source,
                         decoders::DecoderKind kind) const {
  return root_ / "decoders" / (decoder_stem(comb, source, kind) + ".asck");
}
fs::path Layout::reports() const { return root_ / "reports"; }
fs::path Layout::grid() const { return root_ / "grid.csv"; }

json frontend_fingerprint(const Settings& settings) {
  return section_values(settings, {"data", "spectrogram"});
}

json encoder_fingerprint(const Settings& settings) {
  json j = section_values(settings, {"data", "spectrogram", "mixup", "encoder"},
                          {"encoder.combiner"});
  j["run.seed"] = settings.get("run.seed");
  return j;
}

std::vector<eval::SegmentTruth> split_truth(const io::Manifest& manifest, io::Split split,
                                            std::optional<int> fold) {
  std::vector<eval::SegmentTruth> out;
  for (const auto& e : manifest.select(split, fold)) {
    out.push_back({fs::path(e.audio_path).stem().string(), manifest.class_index(e.label),
                   e.device});
  }
  return out;
}

io::SyntheticDataset cmd_synth(const RunContext& run) {
  snapshot(run, "synth");
  say(run, "synth: " + std::to_string(run.cfg.synth.n_segments) + " segments, " +
               std::to_string(run.cfg.synth.n_classes) + " classes -> " +
               run.cfg.out_dir.string());
  auto ds = io::generate_synthetic_dataset(run.cfg.synth, run.cfg.out_dir);
  say(run, "synth: wrote " + ds.manifest_path.string());
  return ds;
}

void cmd_extract(const RunContext& run) {
  snapshot(run, "extract");
  const auto manifest = open_manifest(run);
  const Layout layout(run.cfg.out_dir);
  fs::create_directories(layout.frontend().parent_path());
  FrontendStats stats;
  for (io::Split split : kSplits) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto data = load_split(manifest, split, run.cfg.channel, run.cfg.fold);
    auto specs = compute_spectrograms(data.segments, run.cfg.spectrogram, run.cfg.threads);
    if (split == io::Split::kTrain) stats = fit_frontend(specs, run.cfg.normalize);
    const auto triples = to_triples(std::move(specs), stats, manifest.n_classes());
    for (std::size_t k = 0; k < 3; ++k) {
      io::save_patches(layout.patches(split, dsp::kAllKinds[k]), triples.sets[k]);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    say(run, "extract: " + std::string(io::to_string(split)) + " " +
                 std::to_string(data.segments.size()) + " segments -> " +
                 std::to_string(triples.size()) + " patch triples (" + num(secs, 1) + " s)");
  }
  std::ofstream out(layout.frontend(), std::ios::trunc);
  out << json{{"fingerprint", frontend_fingerprint(run.settings)},
              {"stats", stats.to_json()},
              {"class_names", manifest.classes}}
             .dump(2)
      << '\n';
}

FrontendStats load_frontend(const RunContext& run) {
  const Layout layout(run.cfg.out_dir);
  require(layout.frontend(), "extract");
  const json j = read_json(layout.frontend());
  if (j.at("fingerprint") != frontend_fingerprint(run.settings)) {
    throw std::runtime_error("patches under " + layout.frontend().parent_path().string() +
                             " were extracted with different settings; run `extract` again");
  }
  return FrontendStats::from_json(j.at("stats"));
}

encoder::PatchTriples load_triples(const RunContext& run, io::Split split) {
  load_frontend(run);
  const Layout layout(run.cfg.out_dir);
  std::array<dsp::PatchSet, 3> sets;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto path = layout.patches(split, dsp::kAllKinds[k]);
    require(path, "extract");
    sets[k] = io::load_patches(path);
  }
  return encoder::align_patch_sets(std::move(sets));
}

void cmd_train_encoder(const RunContext& run) {
  snapshot(run, "train-encoder");
  const auto stats = load_frontend(run);
  const auto classes = read_json(Layout(run.cfg.out_dir).frontend())
                           .at("class_names").get<std::vector<std::string>>();
  const auto train = load_triples(run, io::Split::kTrain);
  const std::string tag = "encoder[" + std::string(encoder::to_string(run.cfg.combiner)) + "]";
  say(run, tag + ": " + std::to_string(train.size()) + " triples, " +
               std::to_string(run.cfg.encoder_train.epochs) + " epochs");
  auto er = train_encoder_stage(run.cfg, run.cfg.combiner, train, epoch_printer(run, tag));
  save_encoder_run(run, run.cfg.combiner, er, stats, classes);
}

void cmd_features(const RunContext& run) {
  snapshot(run, "features");
  const auto model = load_matching_encoder(run, run.cfg.combiner);
  const Layout layout(run.cfg.out_dir);
  fs::create_directories(layout.features(run.cfg.combiner, io::Split::kTrain).parent_path());
  for (io::Split split : kSplits) {
    const auto triples = load_triples(run, split);
    io::FeatureFile file;
    file.n_classes = triples.n_classes;
    file.records = encoder::to_records(encoder::encode_patches(model, triples));
    io::save_features(layout.features(run.cfg.combiner, split), file);
    say(run, "features: " + std::string(io::to_string(split)) + " " +
                 std::to_string(file.records.size()) + " records");
  }
}

void cmd_train_decoder(const RunContext& run) {
  snapshot(run, "train-decoder");
  const Layout layout(run.cfg.out_dir);
  io::Checkpoint enc_ckpt;
  load_matching_encoder(run, run.cfg.combiner, &enc_ckpt);
  const auto path = layout.features(run.cfg.combiner, io::Split::kTrain);
  require(path, "features");
  const auto train = encoded_from_file(io::load_features(path), run.cfg.decoder_source);
  const std::string stem = layout.decoder_stem(run.cfg.combiner, run.cfg.decoder_source, run.cfg.decoder);
  say(run, "decoder[" + stem + "]: " + std::to_string(train.size()) + " feature vectors");
  auto dr = train_decoder_stage(run.cfg, run.cfg.decoder, train, run.cfg.decoder_source,
                                [&run, &stem](std::size_t epoch, double loss) {
                                  say(run, "decoder[" + stem + "] epoch " + std::to_string(epoch) +
                                               ": loss " + num(loss));
                                });
  fs::create_directories(layout.decoder(run.cfg.combiner, run.cfg.decoder_source, run.cfg.decoder)
                             .parent_path());
  io::save_decoder(layout.decoder(run.cfg.combiner, run.cfg.decoder_source, run.cfg.decoder),
                   *dr.model,
                   {{"encoder_fingerprint", enc_ckpt.config.at("fingerprint")},
                    {"source", encoder::to_string(run.cfg.decoder_source)},
                    {"class_names", class_names_of(enc_ckpt)},
                    {"settings", section_values(run.settings, {"decoder", "mixup", "run"})}});
  std::ofstream log(layout.root() / "decoders" / (stem + "_log.csv"), std::ios::trunc);
  log << "epoch,loss\n";
  for (std::size_t e = 0; e < dr.losses.size(); ++e) log << e + 1 << ',' << dr.losses[e] << '\n';
}

EvaluateResult cmd_evaluate(const RunContext& run) {
  snapshot(run, "evaluate");
  const Layout layout(run.cfg.out_dir);
  const auto manifest = open_manifest(run);
  Dataset truth;
  truth.class_names = manifest.classes;
  truth.truth = split_truth(manifest, io::Split::kTest, run.cfg.fold);

  io::Checkpoint enc_ckpt;
  auto model = load_matching_encoder(run, run.cfg.combiner, &enc_ckpt);
  if (class_names_of(enc_ckpt) != manifest.classes) {
    throw std::runtime_error("encoder classes differ from the manifest's");
  }
  const auto dec_path = layout.decoder(run.cfg.combiner, run.cfg.decoder_source, run.cfg.decoder);
  require(dec_path, "train-decoder");
  const auto decoder = io::load_decoder(dec_path);
  const auto feat_path = layout.features(run.cfg.combiner, io::Split::kTest);
  require(feat_path, "features");
  const auto file = io::load_features(feat_path);

  EvaluateResult res;
  const auto test = encoded_from_file(file, run.cfg.decoder_source);
  res.decoder = score(decoder_scores(*decoder, test, run.cfg.decoder_source), truth,
                      run.cfg.aggregation);
  const std::string stem = layout.decoder_stem(run.cfg.combiner, run.cfg.decoder_source, run.cfg.decoder);
  write_reports(layout.reports(), stem, res.decoder);

  // Encoder-only: DNN-02 on the stored combined features.
  const auto combined = encoded_from_file(file, encoder::FeatureSource::kCombined);
  const auto& rows = combined.features[3];
  eval::PatchScores enc_scores{combined.keys, {}};
  const std::size_t batch = 50;
  for (std::size_t i = 0; i < combined.size(); i += batch) {
    const std::size_t n = std::min(batch, combined.size() - i);
    nn::Tensor<float> x({n, encoder::kFeatureDim},
                        std::vector<float>(rows.begin() + i * encoder::kFeatureDim,
                                           rows.begin() + (i + n) * encoder::kFeatureDim));
    const auto probs = nn::softmax_rows(model.dnn2().infer(x));
    enc_scores.probs.insert(enc_scores.probs.end(), probs.values().begin(), probs.values().end());
  }
  res.encoder_only = score(enc_scores, truth, run.cfg.aggregation);
  write_reports(layout.reports(), std::string(encoder::to_string(run.cfg.combiner)) + "_encoder",
                res.encoder_only);
  say(run, "evaluate[" + stem + "]: accuracy " + num(res.decoder.overall) + ", encoder only " +
               num(res.encoder_only.overall));
  return res;
}

std::vector<eval::CropPoint> cmd_early_eval(const RunContext& run) {
  snapshot(run, "early-eval");
  const Layout layout(run.cfg.out_dir);
  const auto manifest = open_manifest(run);
  const auto stats = load_frontend(run);
  const auto model = load_matching_encoder(run, run.cfg.combiner);
  const auto dec_path = layout.decoder(run.cfg.combiner, run.cfg.decoder_source, run.cfg.decoder);
  require(dec_path, "train-decoder");
  const auto decoder = io::load_decoder(dec_path);
  const auto data = load_split(manifest, io::Split::kTest, run.cfg.channel, run.cfg.fold);
  const auto predictor = make_predictor(model, decoder.get(), run.cfg.decoder_source,
                                        run.cfg.spectrogram, stats, manifest.n_classes(),
                                        run.cfg.threads);
  const auto curve = eval::early_classification_curve(predictor, data.segments, data.truth,
                                                      data.class_names, run.cfg.crop_lengths,
                                                      run.cfg.spectrogram, run.cfg.aggregation);
  const std::string stem = layout.decoder_stem(run.cfg.combiner, run.cfg.decoder_source, run.cfg.decoder);
  fs::create_directories(layout.reports());
  eval::write_curve_csv(layout.reports() / (stem + "_early.csv"), curve);
  for (const auto& p : curve) {
    say(run, "early-eval[" + stem + "]: " + num(p.seconds, 2) + " s -> " +
                 (p.accuracy ? num(*p.accuracy) : std::string("undefined (no patches)")));
  }
  return curve;
}

std::vector<GridRow> cmd_grid(const RunContext& run) {
  snapshot(run, "grid");
  const Layout layout(run.cfg.out_dir);
  const auto manifest = open_manifest(run);
  Dataset truth;
  truth.class_names = manifest.classes;
  truth.truth = split_truth(manifest, io::Split::kTest, run.cfg.fold);

  // Stored patches when they match, otherwise an in-memory extraction.
  FrontendStats stats;
  encoder::PatchTriples train, test;
  bool stored = false;
  try {
    stats = load_frontend(run);
    stored = true;
  } catch (const std::runtime_error&) {
  }
  if (stored) {
    train = load_triples(run, io::Split::kTrain);
    test = load_triples(run, io::Split::kTest);
  } else {
    say(run, "grid: no matching patches on disk, extracting");
    auto tr = load_split(manifest, io::Split::kTrain, run.cfg.channel, run.cfg.fold);
    auto specs = compute_spectrograms(tr.segments, run.cfg.spectrogram, run.cfg.threads);
    stats = fit_frontend(specs, run.cfg.normalize);
    train = to_triples(std::move(specs), stats, manifest.n_classes());
    auto te = load_split(manifest, io::Split::kTest, run.cfg.channel, run.cfg.fold);
    test = extract_triples(te.segments, run.cfg.spectrogram, stats, manifest.n_classes(),
                           run.cfg.threads);
  }

  std::vector<GridRow> rows;
  for (auto comb : encoder::kAllCombiners) {
    const std::string tag = "grid[" + std::string(encoder::to_string(comb)) + "]";
    std::optional<encoder::Encoder<float>> model;
    if (fs::exists(layout.encoder(comb))) {
      const auto ckpt = io::read_checkpoint(layout.encoder(comb));
      if (ckpt.config.value("fingerprint", json()) == encoder_fingerprint(run.settings)) {
        model.emplace(io::encoder_from_checkpoint(ckpt));
        model->set_threads(run.cfg.threads);
        say(run, tag + ": reusing " + layout.encoder(comb).string());
      }
    }
    if (!model) {
      auto er = train_encoder_stage(run.cfg, comb, train, epoch_printer(run, tag));
      save_encoder_run(run, comb, er, stats, manifest.classes);
      model.emplace(std::move(er.model));
    }
    const auto enc_train = encoder::encode_patches(*model, train);
    const auto enc_test = encoder::encode_patches(*model, test);
    rows.push_back({comb, std::nullopt,
                    score(encoder_scores(enc_test), truth, run.cfg.aggregation).overall});
    say(run, tag + " encoder: " + num(rows.back().accuracy));
    for (auto kind : decoders::kAllDecoders) {
      auto dr = train_decoder_stage(run.cfg, kind, enc_train, run.cfg.decoder_source);
      rows.push_back({comb, kind,
                      score(decoder_scores(*dr.model, enc_test, run.cfg.decoder_source), truth,
                            run.cfg.aggregation)
                          .overall});
      say(run, tag + " " + std::string(decoders::to_string(kind)) + ": " + num(rows.back().accuracy));
    }
  }
  std::ofstream out(layout.grid(), std::ios::trunc);
  out << "combiner,model,accuracy\n";
  for (const auto& r : rows) {
    out << encoder::to_string(r.combiner) << ','
        << (r.decoder ? std::string(decoders::to_string(*r.decoder)) : std::string("encoder"))
        << ',' << num(r.accuracy, 6) << '\n';
  }
  if (!out) throw std::runtime_error(layout.grid().string() + ": write failed");
  return rows;
}

std::vector<GradCheckResult> cmd_gradcheck(const RunContext& run) {
  snapshot(run, "gradcheck");
  const auto results = run_gradient_suite(run.cfg.seed + 7);
  std::ofstream out(run.cfg.out_dir / "gradcheck.csv", std::ios::trunc);
  out << "case,max_relative_error,entries\n";
  for (const auto& r : results) {
    char err[32];
    std::snprintf(err, sizeof err, "%.3e", r.max_relative_error);
    out << r.name << ',' << err << ',' << r.entries << '\n';
    say(run, "gradcheck " + r.name + ": " + err + " over " + std::to_string(r.entries) + " entries");
  }
  return results;
}

}  // namespace asc::pipeline

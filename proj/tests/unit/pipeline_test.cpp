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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "asc/io/checkpoint.hpp"
#include "asc/pipeline/commands.hpp"
#include "asc/pipeline/config.hpp"
#include "asc/pipeline/gradcheck_suite.hpp"

namespace asc::pipeline {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Settings, DefaultsResolve) {
  const auto cfg = resolve(Settings());
  EXPECT_EQ(cfg.combiner, encoder::CombinerKind::kLin);
  EXPECT_EQ(cfg.decoder, decoders::DecoderKind::kMoe);
  EXPECT_EQ(cfg.encoder_train.epochs, 200u);
  EXPECT_EQ(cfg.crop_lengths.size(), 10u);
  EXPECT_DOUBLE_EQ(cfg.mixup.beta_alpha, 0.4);
}

TEST(Settings, LayeringAndSources) {
  Settings s;
  s.load_ini("[encoder]\nepochs = 7\ncombiner = max\n[run]\nseed = 3\n", "a.ini");
  s.apply_environment({"ASC_ENCODER_EPOCHS=9", "ASC_NOT_A_KEY=1", "PATH=/bin"});
  s.set("run.seed", "5");
  EXPECT_EQ(s.get("encoder.epochs"), "9");
  EXPECT_EQ(s.get("encoder.combiner"), "max");
  EXPECT_EQ(s.get("run.seed"), "5");
  EXPECT_EQ(s.source_of("encoder.combiner"), "a.ini");
  EXPECT_EQ(s.source_of("decoder.kind"), "default");
  const auto cfg = resolve(s);
  EXPECT_EQ(cfg.combiner, encoder::CombinerKind::kMax);
  EXPECT_EQ(cfg.seed, 5u);

  // The snapshot reloads to the same table.
  Settings back;
  back.load_ini(s.to_ini(), "snapshot");
  EXPECT_EQ(back.values(), s.values());
}

TEST(Settings, RejectsUnknownAndInvalid) {
  Settings s;
  EXPECT_THROW(s.set("encoder.epoch", "3"), std::invalid_argument);
  EXPECT_THROW(s.load_ini("[encoder]\nbogus = 1\n", "x.ini"), std::invalid_argument);
  s.set("encoder.combiner", "avg");
  EXPECT_THROW(resolve(s), std::invalid_argument);
  Settings t;
  t.set("spectrogram.n_filters", "64");
  EXPECT_THROW(resolve(t), std::invalid_argument);
  Settings u;
  u.set("encoder.alpha", "1/3");
  EXPECT_NEAR(resolve(u).encoder_train.loss.alpha, 1.0 / 3.0, 1e-15);
}

TEST(Fingerprint, IgnoresUnrelatedSettings) {
  Settings a, b;
  b.set("decoder.kind", "rfr");
  b.set("encoder.combiner", "sum");
  b.set("run.threads", "4");
  EXPECT_EQ(encoder_fingerprint(a), encoder_fingerprint(b));
  b.set("encoder.epochs", "3");
  EXPECT_NE(encoder_fingerprint(a), encoder_fingerprint(b));
  EXPECT_EQ(frontend_fingerprint(a), frontend_fingerprint(b));
}

TEST(GradientSuite, AllCasesBelowTolerance) {
  const auto results = run_gradient_suite();
  EXPECT_GE(results.size(), 14u);
  for (const auto& r : results) {
    EXPECT_LT(r.max_relative_error, 1e-3) << r.name;
    EXPECT_GT(r.entries, 0u) << r.name;
  }
}

class TinyRun : public ::testing::Test {
 protected:
  static Settings settings(const fs::path& out) {
    Settings s;
    s.set("run.out", out.string());
    s.set("data.manifest", (out / "manifest.csv").string());
    s.set("synth.n_classes", "2");
    s.set("synth.n_segments", "10");
    s.set("synth.duration", "2");
    s.set("encoder.profile", "compact");
    s.set("encoder.epochs", "1");
    s.set("encoder.learning_rate", "1e-3");
    s.set("decoder.epochs", "2");
    s.set("decoder.experts", "3");
    s.set("decoder.n_trees", "4");
    s.set("eval.crop_lengths", "1,2");
    return s;
  }
};

TEST_F(TinyRun, VerbsChainAndAgree) {
  const fs::path out = fs::temp_directory_path() / "asc_pipeline_tiny";
  fs::remove_all(out);
  std::ostringstream log;
  RunContext run(settings(out));
  run.log = &log;

  cmd_synth(run);
  cmd_extract(run);
  const Layout layout(out);
  EXPECT_TRUE(fs::exists(layout.frontend()));
  const auto train = load_triples(run, io::Split::kTrain);
  EXPECT_EQ(train.size(), 8u * 2u);  // 2 s -> 332 frames -> 2 patches

  cmd_train_encoder(run);
  cmd_features(run);
  cmd_train_decoder(run);
  const auto res = cmd_evaluate(run);
  EXPECT_EQ(res.decoder.n_segments, 2u);
  EXPECT_TRUE(fs::exists(out / "evaluate_config.ini"));

  const auto curve = cmd_early_eval(run);
  ASSERT_EQ(curve.size(), 2u);
  EXPECT_EQ(curve[0].patches_per_segment, 1u);
  EXPECT_EQ(curve[1].patches_per_segment, 2u);
  ASSERT_TRUE(curve[1].accuracy.has_value());
  EXPECT_DOUBLE_EQ(*curve[1].accuracy, res.decoder.overall);

  // Changing an encoder setting invalidates the checkpoint.
  Settings changed = settings(out);
  changed.set("encoder.beta", "0.5");
  RunContext stale(changed);
  EXPECT_THROW(cmd_features(stale), std::runtime_error);

  // Re-saving a loaded decoder reproduces its bytes.
  const auto dec_path = layout.decoder(run.cfg.combiner, run.cfg.decoder_source, run.cfg.decoder);
  const auto dec = io::load_decoder(dec_path);
  const auto ckpt = io::read_checkpoint(dec_path);
  io::save_decoder(out / "again.asck", *dec, ckpt.config);
  EXPECT_EQ(slurp(dec_path), slurp(out / "again.asck"));
  fs::remove_all(out);
}

TEST_F(TinyRun, MissingInputsAreReported) {
  const fs::path out = fs::temp_directory_path() / "asc_pipeline_missing";
  fs::remove_all(out);
  RunContext run(settings(out));
  try {
    cmd_train_encoder(run);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("extract"), std::string::npos);
  }
  Settings none;
  none.set("run.out", out.string());
  RunContext bare(none);
  EXPECT_THROW(cmd_extract(bare), std::invalid_argument);
  fs::remove_all(out);
}

}  // namespace
}  // namespace asc::pipeline

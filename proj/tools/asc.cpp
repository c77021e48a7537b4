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

// asc: command-line driver for the acoustic scene classification pipeline.
//
//   asc [--config FILE] [--seed N] [--threads N] [--out DIR] [--set k=v]... VERB
//
// Settings are layered defaults < config file < ASC_* environment < flags.

#include <malloc.h>

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "asc/pipeline/commands.hpp"

namespace {

using asc::pipeline::RunContext;
using asc::pipeline::Settings;

struct Flags {
  std::string config;
  std::string seed;
  std::string threads;
  std::string out;
  std::vector<std::string> sets;
  bool quiet = false;
};

Settings build_settings(const Flags& f) {
  Settings s;
  if (!f.config.empty()) s.load_file(f.config);
  s.apply_environment();
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::invalid_argument("--set expects section.key=value, got '" + kv + "'");
    }
    s.set(kv.substr(0, eq), kv.substr(eq + 1), "--set");
  }
  if (!f.seed.empty()) s.set("run.seed", f.seed, "--seed");
  if (!f.threads.empty()) s.set("run.threads", f.threads, "--threads");
  if (!f.out.empty()) s.set("run.out", f.out, "--out");
  return s;
}

int run_verb(const std::string& verb, const Flags& flags) {
  RunContext run(build_settings(flags));
  run.log = flags.quiet ? nullptr : &std::cerr;
  namespace p = asc::pipeline;
  if (verb == "synth") {
    const auto ds = p::cmd_synth(run);
    std::cout << ds.manifest_path.string() << '\n';
  } else if (verb == "extract") {
    p::cmd_extract(run);
  } else if (verb == "train-encoder") {
    p::cmd_train_encoder(run);
  } else if (verb == "features") {
    p::cmd_features(run);
  } else if (verb == "train-decoder") {
    p::cmd_train_decoder(run);
  } else if (verb == "evaluate") {
    const auto r = p::cmd_evaluate(run);
    std::cout << "accuracy " << r.decoder.overall << "\nencoder_accuracy " << r.encoder_only.overall
              << '\n';
  } else if (verb == "early-eval") {
    for (const auto& pt : p::cmd_early_eval(run)) {
      std::cout << pt.seconds << ' ';
      if (pt.accuracy) std::cout << *pt.accuracy; else std::cout << "nan";
      std::cout << '\n';
    }
  } else if (verb == "grid") {
    for (const auto& row : p::cmd_grid(run)) {
      std::cout << asc::encoder::to_string(row.combiner) << ' '
                << (row.decoder ? std::string(asc::decoders::to_string(*row.decoder)) : "encoder")
                << ' ' << row.accuracy << '\n';
    }
  } else if (verb == "gradcheck") {
    int failures = 0;
    for (const auto& r : p::cmd_gradcheck(run)) {
      const bool ok = r.max_relative_error < 1e-3;
      failures += !ok;
      std::cout << (ok ? "ok   " : "FAIL ") << r.name << ' ' << r.max_relative_error << '\n';
    }
    return failures == 0 ? 0 : 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  // Patch buffers are large and short-lived; keep them off mmap churn.
  mallopt(M_MMAP_THRESHOLD, 32 << 20);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);

  CLI::App app{"Acoustic scene classification pipeline"};
  app.require_subcommand(1);
  Flags flags;
  app.add_option("--config", flags.config, "INI settings file")->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "Run seed (run.seed)");
  app.add_option("--threads", flags.threads, "Worker threads (run.threads)");
  app.add_option("--out", flags.out, "Output directory (run.out)");
  app.add_option("--set", flags.sets, "Override one setting, section.key=value");
  app.add_flag("-q,--quiet", flags.quiet, "No progress output");
  app.fallthrough();

  const std::vector<std::pair<const char*, const char*>> verbs = {
      {"synth", "Generate the synthetic dataset and its manifest"},
      {"extract", "Audio to spectrogram patches"},
      {"train-encoder", "Train the three-branch encoder"},
      {"features", "Encode patches into feature files"},
      {"train-decoder", "Train a decoder on stored features"},
      {"evaluate", "Evaluate encoder and decoder on the test split"},
      {"early-eval", "Accuracy against crop length"},
      {"grid", "Every combiner with every decoder"},
      {"gradcheck", "Finite-difference gradient checks"},
  };
  for (const auto& [name, help] : verbs) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    return run_verb(app.get_subcommands().front()->get_name(), flags);
  } catch (const std::exception& e) {
    std::cerr << "asc: error: " << e.what() << '\n';
    return 1;
  }
}

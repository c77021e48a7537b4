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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "asc/dsp/spectrogram.hpp"
#include "asc/encoder/training.hpp"
#include "asc/io/checkpoint.hpp"
#include "asc/io/features.hpp"
#include "asc/io/manifest.hpp"
#include "asc/io/patch_store.hpp"
#include "asc/io/synthetic.hpp"
#include "asc/io/wav.hpp"

namespace fs = std::filesystem;
using namespace asc;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("asc_io_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  static inline int counter_ = 0;
  fs::path path_;
};

void put_le(std::string& s, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) s += static_cast<char>((v >> (8 * i)) & 0xff);
}

// Hand-assembled RIFF file, independent of the writer under test.
std::string wav_bytes(int format, int channels, int rate, int bits,
                      const std::string& data, bool extensible = false) {
  std::string fmt;
  put_le(fmt, extensible ? 0xfffe : format, 2);
  put_le(fmt, channels, 2);
  put_le(fmt, rate, 4);
  put_le(fmt, rate * channels * bits / 8, 4);
  put_le(fmt, channels * bits / 8, 2);
  put_le(fmt, bits, 2);
  if (extensible) {
    put_le(fmt, 22, 2);
    put_le(fmt, bits, 2);
    put_le(fmt, 0, 4);
    put_le(fmt, format, 2);
    fmt += std::string("\x00\x00\x00\x00\x10\x00\x80\x00\x00\xaa\x00\x38\x9b\x71", 14);
  }
  std::string body = "WAVE";
  body += "fmt ";
  put_le(body, fmt.size(), 4);
  body += fmt;
  body += "data";
  put_le(body, data.size(), 4);
  body += data;
  std::string out = "RIFF";
  put_le(out, body.size(), 4);
  return out + body;
}

void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary) << bytes;
}

std::string pcm16(std::initializer_list<int> samples) {
  std::string s;
  for (int v : samples) put_le(s, static_cast<std::uint16_t>(v), 2);
  return s;
}

}  // namespace

TEST(Wav, Pcm16Scaling) {
  TempDir dir;
  write_file(dir / "a.wav", wav_bytes(1, 1, 16000, 16, pcm16({16384, -32768, 0, 32767})));
  const auto seg = io::read_audio(dir / "a.wav");
  ASSERT_EQ(seg.samples.size(), 4u);
  EXPECT_EQ(seg.samples[0], 0.5f);
  EXPECT_EQ(seg.samples[1], -1.0f);
  EXPECT_EQ(seg.samples[2], 0.0f);
  EXPECT_FLOAT_EQ(seg.samples[3], 32767.0f / 32768.0f);
  EXPECT_EQ(seg.sample_rate, 16000);
  EXPECT_EQ(seg.source_id, "a");
}

TEST(Wav, StereoChannelSelection) {
  TempDir dir;
  write_file(dir / "s.wav", wav_bytes(1, 2, 8000, 16, pcm16({100, 16384, 200, -16384})));
  const auto right = io::read_audio(dir / "s.wav", 1);
  ASSERT_EQ(right.samples.size(), 2u);
  EXPECT_EQ(right.samples[0], 0.5f);
  EXPECT_EQ(right.samples[1], -0.5f);
  EXPECT_THROW(io::read_audio(dir / "s.wav", 2), std::exception);
}

TEST(Wav, Pcm24FloatAndExtensible) {
  TempDir dir;
  std::string d24;
  put_le(d24, 0x400000, 3);  // 2^22 -> 0.5
  put_le(d24, 0x800000, 3);  // -2^23 -> -1
  write_file(dir / "p24.wav", wav_bytes(1, 1, 16000, 24, d24));
  auto seg = io::read_audio(dir / "p24.wav");
  EXPECT_EQ(seg.samples[0], 0.5f);
  EXPECT_EQ(seg.samples[1], -1.0f);

  std::string df;
  const float vals[] = {0.25f, -0.75f};
  df.append(reinterpret_cast<const char*>(vals), sizeof vals);
  write_file(dir / "f.wav", wav_bytes(3, 1, 16000, 32, df));
  seg = io::read_audio(dir / "f.wav");
  EXPECT_EQ(seg.samples[0], 0.25f);
  EXPECT_EQ(seg.samples[1], -0.75f);

  write_file(dir / "x.wav", wav_bytes(1, 1, 16000, 16, pcm16({16384}), true));
  EXPECT_EQ(io::read_audio(dir / "x.wav").samples.at(0), 0.5f);
}

TEST(Wav, RejectsUnsupportedAndTruncated) {
  TempDir dir;
  write_file(dir / "alaw.wav", wav_bytes(6, 1, 8000, 8, "abcd"));
  EXPECT_THROW(io::read_audio(dir / "alaw.wav"), std::runtime_error);
  auto bytes = wav_bytes(1, 1, 16000, 16, pcm16({1, 2, 3, 4}));
  write_file(dir / "cut.wav", bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(io::read_audio(dir / "cut.wav"), std::runtime_error);
  write_file(dir / "junk.wav", "not a wav file at all");
  EXPECT_THROW(io::read_audio(dir / "junk.wav"), std::runtime_error);
  EXPECT_THROW(io::read_audio(dir / "missing.wav"), std::runtime_error);
}

TEST(Wav, WriteReadRoundTrip) {
  TempDir dir;
  const std::vector<float> x = {0.0f, 0.5f, -1.0f, 0.25f, 2.0f, -3.0f};
  io::write_wav(dir / "w.wav", x, 2, 22050);
  const auto data = io::read_wav_data(dir / "w.wav");
  EXPECT_EQ(data.info.channels, 2);
  EXPECT_EQ(data.info.sample_rate, 22050);
  EXPECT_EQ(data.info.frames, 3u);
  const std::vector<float> expect = {0.0f, 0.5f, -1.0f, 0.25f,
                                     32767.0f / 32768.0f, -1.0f};
  EXPECT_EQ(data.samples, expect);
  io::write_wav(dir / "f.wav", x, 1, 8000, io::WavEncoding::kFloat32);
  EXPECT_EQ(io::read_wav_data(dir / "f.wav").samples, x);
}

TEST(Manifest, TwoClassesInferred) {
  std::istringstream in(
      "path,label,device,fold,split\n"
      "a.wav,bus,A,1,train\n"
      "b.wav,park,B,1,test\n");
  const auto m = io::parse_manifest(in, "m.csv", "/data");
  EXPECT_EQ(m.n_classes(), 2u);
  EXPECT_EQ(m.classes, (std::vector<std::string>{"bus", "park"}));
  EXPECT_EQ(m.entries[1].split, io::Split::kTest);
  EXPECT_EQ(m.entries[1].device, "B");
  EXPECT_EQ(m.entries[0].fold, 1);
  EXPECT_EQ(m.resolve(m.entries[0]), fs::path("/data/a.wav"));
  EXPECT_EQ(m.class_index("park"), 1u);
}

TEST(Manifest, MissingDeviceColumnIsFine) {
  std::istringstream in("path,label,split\nx.wav,beach,train\n");
  const auto m = io::parse_manifest(in, "m.csv", ".");
  ASSERT_EQ(m.entries.size(), 1u);
  EXPECT_FALSE(m.entries[0].device.has_value());
  EXPECT_FALSE(m.entries[0].fold.has_value());
}

TEST(Manifest, DuplicateRowWarnsAndDedups) {
  std::istringstream in(
      "path,label,device,fold,split\n"
      "a.wav,bus,A,,train\n"
      "a.wav,bus,A,,train\n"
      "b.wav,park,,,train\n");
  const auto m = io::parse_manifest(in, "m.csv", ".");
  EXPECT_EQ(m.entries.size(), 2u);
  ASSERT_EQ(m.warnings.size(), 1u);
  EXPECT_NE(m.warnings[0].find("m.csv:3"), std::string::npos);
}

TEST(Manifest, ErrorsCarryLineNumbers) {
  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      io::parse_manifest(in, "m.csv", ".");
    } catch (const std::runtime_error& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("path,label,split\na.wav,bus,train\nb.wav,park,dev\n")
                .find("m.csv:3"),
            std::string::npos);
  EXPECT_NE(message("").find("empty manifest"), std::string::npos);
  EXPECT_NE(message("path,label\n").find("empty manifest"), std::string::npos);
  EXPECT_NE(message("path,label,split\na.wav,bus,train\na.wav,bus,test\n")
                .find("both"),
            std::string::npos);
  EXPECT_THROW(io::load_manifest("/nonexistent/manifest.csv"), std::runtime_error);
}

TEST(Manifest, QuotedFieldsAndRoundTrip) {
  EXPECT_EQ(io::split_csv_line("\"a,b\",\"say \"\"hi\"\"\",c"),
            (std::vector<std::string>{"a,b", "say \"hi\"", "c"}));
  TempDir dir;
  std::vector<io::ManifestEntry> entries(2);
  entries[0] = {"dir/x, y.wav", "street", std::string("A"), 3, io::Split::kEval, 0};
  entries[1] = {"z.wav", "metro", std::nullopt, std::nullopt, io::Split::kTrain, 0};
  io::write_manifest(dir / "m.csv", entries);
  const auto m = io::load_manifest(dir / "m.csv");
  ASSERT_EQ(m.entries.size(), 2u);
  EXPECT_EQ(m.entries[0].audio_path, "dir/x, y.wav");
  EXPECT_EQ(m.entries[0].fold, 3);
  EXPECT_EQ(m.entries[0].split, io::Split::kEval);
  EXPECT_FALSE(m.entries[1].device.has_value());
  EXPECT_EQ(m.base_dir, dir.path());
}

namespace {

std::vector<encoder::HighLevelFeature> random_records(std::size_t n,
                                                      std::size_t classes) {
  std::mt19937 rng(5);
  std::normal_distribution<float> g;
  std::vector<encoder::HighLevelFeature> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = out[i];
    r.key = {"seg_" + std::to_string(i / 12), i % 12};
    r.source = encoder::kAllSources[i % 4];
    r.values.resize(256);
    for (float& v : r.values) v = g(rng);
    r.values[0] = std::numeric_limits<float>::denorm_min();
    r.values[1] = -0.0f;
    if (i % 7 != 0) {
      r.label.assign(classes, 0.0f);
      r.label[i % classes] = 0.3f;
      r.label[(i + 1) % classes] += 0.7f;
    }
  }
  return out;
}

bool same_bits(const std::vector<float>& a, const std::vector<float>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

}  // namespace

TEST(Features, ThousandRecordRoundTripIsBitExact) {
  TempDir dir;
  io::FeatureFile file;
  file.n_classes = 5;
  file.records = random_records(1000, 5);
  io::save_features(dir / "f.ascf", file);
  EXPECT_EQ(fs::file_size(dir / "f.ascf"),
            24u + 1000u * (64 + 8 + 4 * (256 + 5)));
  const auto back = io::load_features(dir / "f.ascf");
  ASSERT_EQ(back.records.size(), 1000u);
  EXPECT_EQ(back.dim, 256u);
  EXPECT_EQ(back.n_classes, 5u);
  for (std::size_t i = 0; i < 1000; ++i) {
    const auto& a = file.records[i];
    const auto& b = back.records[i];
    ASSERT_EQ(a.key, b.key);
    ASSERT_EQ(a.source, b.source);
    ASSERT_TRUE(same_bits(a.values, b.values));
    ASSERT_TRUE(same_bits(a.label, b.label));
  }
}

TEST(Features, EmptyFileAndBadMagic) {
  TempDir dir;
  io::FeatureFile empty;
  empty.n_classes = 3;
  io::save_features(dir / "e.ascf", empty);
  const auto back = io::load_features(dir / "e.ascf");
  EXPECT_TRUE(back.records.empty());
  EXPECT_EQ(back.n_classes, 3u);

  write_file(dir / "bad.ascf", "ASCX\x01\x00");
  EXPECT_THROW(io::load_features(dir / "bad.ascf"), std::runtime_error);
  std::string wrong_version = "ASCF";
  put_le(wrong_version, 9, 2);
  write_file(dir / "v.ascf", wrong_version + std::string(20, '\0'));
  EXPECT_THROW(io::load_features(dir / "v.ascf"), std::runtime_error);

  io::FeatureFile one;
  one.n_classes = 2;
  one.records = random_records(3, 2);
  io::save_features(dir / "t.ascf", one);
  fs::resize_file(dir / "t.ascf", fs::file_size(dir / "t.ascf") - 10);
  EXPECT_THROW(io::load_features(dir / "t.ascf"), std::runtime_error);
}

TEST(Features, RejectsWrongDimension) {
  TempDir dir;
  io::FeatureFile file;
  file.n_classes = 2;
  file.records = random_records(2, 2);
  file.records[1].values.pop_back();
  EXPECT_THROW(io::save_features(dir / "f.ascf", file), std::invalid_argument);
}

TEST(PatchStore, RoundTrip) {
  TempDir dir;
  dsp::PatchSet set;
  set.kind = dsp::SpectrogramKind::kCqt;
  set.n_classes = 3;
  set.short_input = true;
  std::mt19937 rng(2);
  std::uniform_real_distribution<float> u(-3, 3);
  for (std::size_t i = 0; i < 5; ++i) {
    dsp::Patch p;
    p.key = {"s" + std::to_string(i), i};
    p.kind = set.kind;
    p.values.resize(16 * 16);
    for (float& v : p.values) v = u(rng);
    if (i != 2) p.label = {0.0f, 1.0f, 0.0f};
    set.patches.push_back(p);
  }
  io::save_patches(dir / "p.ascp", set, 16);
  const auto back = io::load_patches(dir / "p.ascp", 16);
  EXPECT_EQ(back.kind, set.kind);
  EXPECT_TRUE(back.short_input);
  ASSERT_EQ(back.patches.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(back.patches[i].key, set.patches[i].key);
    EXPECT_TRUE(same_bits(back.patches[i].values, set.patches[i].values));
    EXPECT_EQ(back.patches[i].label, set.patches[i].label);
  }
  EXPECT_THROW(io::load_patches(dir / "p.ascp", 128), std::runtime_error);
}

namespace {

template <typename Params>
void perturb(const Params& params, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<float> g;
  for (auto* p : params) {
    for (float& v : p->value.values()) v += g(rng);
  }
}

}  // namespace

TEST(Checkpoint, EncoderRoundTripIsBitExact) {
  TempDir dir;
  encoder::EncoderConfig cfg;
  cfg.n_classes = 4;
  cfg.profile = encoder::WidthProfile::kCompact;
  cfg.patch_size = 32;
  cfg.seed = 3;
  encoder::Encoder<float> model(cfg);
  perturb(model.parameters(), 1);
  // Non-default BatchNorm statistics must survive.
  for (auto& b : model.buffers()) {
    for (float& v : b.tensor->values()) v = std::abs(v) + 0.123f;
  }
  io::save_encoder(dir / "e.asck", model, {{"epochs", 7}});
  auto loaded = io::load_encoder(dir / "e.asck");
  EXPECT_EQ(loaded.config().combiner, cfg.combiner);
  EXPECT_EQ(loaded.config().profile, cfg.profile);
  auto pa = model.parameters();
  auto pb = loaded.parameters();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i]->name, pb[i]->name);
    EXPECT_TRUE(same_bits(pa[i]->value.storage(), pb[i]->value.storage())) << pa[i]->name;
  }
  auto ba = model.buffers();
  auto bb = loaded.buffers();
  ASSERT_EQ(ba.size(), bb.size());
  ASSERT_FALSE(ba.empty());
  for (std::size_t i = 0; i < ba.size(); ++i) {
    EXPECT_TRUE(same_bits(ba[i].tensor->storage(), bb[i].tensor->storage())) << ba[i].name;
  }
  const auto ckpt = io::read_checkpoint(dir / "e.asck");
  EXPECT_EQ(ckpt.config.at("epochs"), 7);
  EXPECT_EQ(ckpt.model_kind, "encoder");
  EXPECT_FALSE(ckpt.deviation_flags.empty());
  EXPECT_THROW(io::load_decoder(dir / "e.asck"), std::runtime_error);
}

TEST(Checkpoint, DecodersRoundTripIsBitExact) {
  TempDir dir;
  const std::size_t n = 60, dim = 8, classes = 3;
  augment::LabeledSet data;
  data.item_size = dim;
  data.n_classes = classes;
  std::mt19937 rng(4);
  std::normal_distribution<float> g;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dim; ++d) data.x.push_back(g(rng) + (d % classes == i % classes ? 2.f : 0.f));
    for (std::size_t c = 0; c < classes; ++c) data.y.push_back(c == i % classes ? 1.f : 0.f);
  }
  decoders::DecoderOptions opts;
  opts.input_dim = dim;
  opts.n_classes = classes;
  opts.n_experts = 3;
  opts.forest.n_trees = 7;
  decoders::DecoderTrainConfig tc;
  tc.epochs = 2;
  tc.learning_rate = 1e-3;
  for (auto kind : decoders::kAllDecoders) {
    auto model = decoders::make_decoder(kind, opts);
    model->fit(data, tc);
    const fs::path path = dir / (std::string(decoders::to_string(kind)) + ".asck");
    io::save_decoder(path, *model);
    auto loaded = io::load_decoder(path);
    EXPECT_EQ(loaded->kind(), kind);
    EXPECT_EQ(loaded->deviation_flags(), model->deviation_flags());
    const auto pa = model->predict(data.x);
    const auto pb = loaded->predict(data.x);
    EXPECT_TRUE(same_bits(pa, pb)) << decoders::to_string(kind);
    if (kind == decoders::DecoderKind::kRfr) {
      const auto& ta = dynamic_cast<decoders::RfrDecoder&>(*model).forest().trees();
      const auto& tb = dynamic_cast<decoders::RfrDecoder&>(*loaded).forest().trees();
      ASSERT_EQ(ta.size(), 7u);
      for (std::size_t t = 0; t < ta.size(); ++t) EXPECT_TRUE(ta[t] == tb[t]);
    }
  }
}

TEST(Checkpoint, CorruptFilesRejected) {
  TempDir dir;
  write_file(dir / "bad.asck", "ASCQ");
  EXPECT_THROW(io::read_checkpoint(dir / "bad.asck"), std::runtime_error);
  encoder::EncoderConfig cfg;
  cfg.n_classes = 2;
  cfg.profile = encoder::WidthProfile::kCompact;
  cfg.patch_size = 16;
  encoder::Encoder<float> model(cfg);
  io::save_encoder(dir / "e.asck", model);
  fs::resize_file(dir / "e.asck", fs::file_size(dir / "e.asck") - 4);
  EXPECT_THROW(io::load_encoder(dir / "e.asck"), std::runtime_error);
}

TEST(Synthetic, CountsAndBalance) {
  TempDir dir;
  io::SyntheticConfig cfg;
  cfg.n_classes = 4;
  cfg.n_segments = 200;
  cfg.duration_seconds = 0.25;  // the check is about construction
  const auto ds = io::generate_synthetic_dataset(cfg, dir.path());
  EXPECT_EQ(ds.manifest.entries.size(), 200u);
  EXPECT_EQ(ds.manifest.n_classes(), 4u);
  std::size_t wavs = 0;
  for (const auto& e : fs::directory_iterator(dir / "audio")) wavs += e.path().extension() == ".wav";
  EXPECT_EQ(wavs, 200u);
  std::map<std::string, int> count, test_count;
  for (const auto& e : ds.manifest.entries) {
    ++count[e.label];
    test_count[e.label] += e.split == io::Split::kTest;
    EXPECT_TRUE(fs::exists(ds.manifest.resolve(e)));
  }
  for (const auto& [label, c] : count) {
    EXPECT_NEAR(c, 50, 1) << label;
    EXPECT_EQ(test_count[label], 10) << label;
  }
}

TEST(Synthetic, SameSeedSameBytes) {
  TempDir a, b, c;
  io::SyntheticConfig cfg;
  cfg.n_classes = 5;
  cfg.n_segments = 10;
  cfg.duration_seconds = 0.5;
  cfg.seed = 11;
  io::generate_synthetic_dataset(cfg, a.path());
  io::generate_synthetic_dataset(cfg, b.path());
  cfg.seed = 12;
  io::generate_synthetic_dataset(cfg, c.path());
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  std::size_t differing = 0;
  for (const auto& e : fs::directory_iterator(a / "audio")) {
    const auto name = e.path().filename();
    EXPECT_EQ(slurp(e.path()), slurp(b / "audio" / name));
    differing += slurp(e.path()) != slurp(c / "audio" / name);
  }
  EXPECT_EQ(slurp(a / "manifest.csv"), slurp(b / "manifest.csv"));
  EXPECT_EQ(differing, 10u);
}

namespace {

// Strongest frequency in [lo, hi] Hz by a direct single-bin DFT scan.
double dominant_hz(const std::vector<float>& x, int rate, double lo, double hi) {
  double best_f = lo, best_p = -1.0;
  for (double f = lo; f <= hi; f += 0.5) {
    double re = 0.0, im = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
      const double w = 2.0 * std::numbers::pi * f * n / rate;
      re += x[n] * std::cos(w);
      im -= x[n] * std::sin(w);
    }
    const double p = re * re + im * im;
    if (p > best_p) best_p = p, best_f = f;
  }
  return best_f;
}

}  // namespace

TEST(Synthetic, ToneClassLogMelPeakIsStable) {
  io::SyntheticConfig cfg;
  cfg.n_classes = 4;
  cfg.duration_seconds = 3.0;
  for (std::size_t seg_index : {0u, 4u, 8u}) {  // class 0 is the tone chord
    cfg.seed = 100 + seg_index;
    const auto seg = io::synthesize_segment(cfg, seg_index);
    ASSERT_EQ(io::archetype_of(seg_index % 4), io::Archetype::kToneChord);
    const std::vector<float> head(seg.samples.begin(), seg.samples.begin() + 8000);
    const double f0 = dominant_hz(head, seg.sample_rate, 250.0, 900.0);

    // Oracle band: the HTK-mel filter whose centre lies nearest f0.
    const double top = 2595.0 * std::log10(1.0 + 8000.0 / 700.0);
    std::size_t oracle = 0;
    double best = 1e9;
    for (std::size_t m = 0; m < 128; ++m) {
      const double mel = top * (m + 1) / 129.0;
      const double hz = 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
      if (std::abs(hz - f0) < best) best = std::abs(hz - f0), oracle = m;
    }

    dsp::SpectrogramConfig sc;
    const auto spec = dsp::compute_spectrogram(seg, sc);
    std::map<std::size_t, std::size_t> votes;
    for (std::size_t t = 0; t < spec.frames(); ++t) {
      const float* row = spec.values.row(t);
      ++votes[std::max_element(row, row + spec.bins()) - row];
    }
    const auto mode = std::max_element(votes.begin(), votes.end(),
                                       [](auto& a, auto& b) { return a.second < b.second; });
    EXPECT_GE(mode->second, spec.frames() * 95 / 100) << "segment " << seg_index;
    EXPECT_LE(std::abs(static_cast<long>(mode->first) - static_cast<long>(oracle)), 2)
        << "f0 " << f0 << " oracle band " << oracle << " got " << mode->first;
  }
}

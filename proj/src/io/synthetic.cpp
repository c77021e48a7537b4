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

#include "asc/io/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <stdexcept>

#include "asc/io/wav.hpp"
#include "asc/util/seed.hpp"

namespace asc::io {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Distribution code lives here rather than in <random> so the audio bytes
// do not depend on the standard library build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double gaussian() {
    const double u1 = std::max(uniform(), 1e-300);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

// RBJ band-pass, 0 dB peak gain.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
  double z1 = 0, z2 = 0;

  static Biquad bandpass(double center_hz, double q, int rate) {
    const double w = kTwoPi * center_hz / rate;
    const double alpha = std::sin(w) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    Biquad f;
    f.b0 = alpha / a0;
    f.b1 = 0.0;
    f.b2 = -alpha / a0;
    f.a1 = -2.0 * std::cos(w) / a0;
    f.a2 = (1.0 - alpha) / a0;
    return f;
  }

  double operator()(double x) {
    const double y = b0 * x + z1;
    z1 = b1 * x - a1 * y + z2;
    z2 = b2 * x - a2 * y;
    return y;
  }
};

void tone_chord(std::vector<double>& out, Rng& rng, double shift, int rate) {
  const double f0 = rng.uniform(300.0, 420.0) * shift;
  const double ratios[] = {1.0, 1.25, 1.5};
  const double gains[] = {0.5, 0.22, 0.12};
  for (int k = 0; k < 3; ++k) {
    const double f = f0 * ratios[k];
    const double phase = rng.uniform(0.0, kTwoPi);
    const double vib = rng.uniform(0.0, 0.002);  // slight pitch wobble
    for (std::size_t n = 0; n < out.size(); ++n) {
      const double t = static_cast<double>(n) / rate;
      out[n] += gains[k] * std::sin(kTwoPi * f * t * (1.0 + vib * std::sin(kTwoPi * 0.3 * t)) + phase);
    }
  }
}

void rising_chirps(std::vector<double>& out, Rng& rng, double shift, int rate) {
  const double f_lo = rng.uniform(400.0, 600.0) * shift;
  const double f_hi = std::min(f_lo * rng.uniform(5.0, 7.0), 0.45 * rate);
  std::size_t start = static_cast<std::size_t>(rng.uniform(0.0, 0.3) * rate);
  while (start < out.size()) {
    const double len = rng.uniform(0.4, 0.8);
    const auto n_len = static_cast<std::size_t>(len * rate);
    const double k = std::log(f_hi / f_lo) / len;
    for (std::size_t n = 0; n < n_len && start + n < out.size(); ++n) {
      const double t = static_cast<double>(n) / rate;
      const double phase = kTwoPi * f_lo * (std::exp(k * t) - 1.0) / k;
      const double env = std::sin(std::numbers::pi * t / len);
      out[start + n] += 0.5 * env * std::sin(phase);
    }
    start += n_len + static_cast<std::size_t>(rng.uniform(0.1, 0.4) * rate);
  }
}

void band_noise(std::vector<double>& out, Rng& rng, double shift, int rate) {
  const double center = std::min(rng.uniform(1500.0, 2200.0) * shift, 0.4 * rate);
  Biquad a = Biquad::bandpass(center, 3.0, rate);
  Biquad b = Biquad::bandpass(center, 3.0, rate);
  for (double& s : out) s += 1.2 * b(a(rng.gaussian()));
}

void am_noise(std::vector<double>& out, Rng& rng, double shift, int rate) {
  const double mod_hz = rng.uniform(3.0, 6.0) * shift;
  const double phase = rng.uniform(0.0, kTwoPi);
  double lp = 0.0;
  for (std::size_t n = 0; n < out.size(); ++n) {
    lp = 0.7 * lp + 0.3 * rng.gaussian();  // gentle low-pass tilt
    const double t = static_cast<double>(n) / rate;
    const double env = 0.5 * (1.0 + 0.9 * std::sin(kTwoPi * mod_hz * t + phase));
    out[n] += 0.35 * env * lp;
  }
}

void click_train(std::vector<double>& out, Rng& rng, double shift, int rate) {
  const double click_hz = rng.uniform(6.0, 10.0) * shift;
  const double ring_hz = std::min(rng.uniform(2500.0, 3500.0) * shift, 0.45 * rate);
  const auto decay = static_cast<std::size_t>(0.004 * rate);
  double t = rng.uniform(0.0, 1.0 / click_hz);
  while (true) {
    const auto start = static_cast<std::size_t>(t * rate);
    if (start >= out.size()) break;
    const double amp = rng.uniform(0.6, 0.9);
    for (std::size_t n = 0; n < 4 * decay && start + n < out.size(); ++n) {
      const double x = static_cast<double>(n);
      out[start + n] += amp * std::exp(-x / decay) * std::sin(kTwoPi * ring_hz * x / rate);
    }
    t += (1.0 / click_hz) * rng.uniform(0.85, 1.15);
  }
}

// Mild per-device coloring: B is darker, C is brighter and quieter.
void color_device(std::vector<double>& x, char device) {
  if (device == 'B') {
    double prev = 0.0;
    for (double& s : x) {
      prev = 0.6 * s + 0.4 * prev;
      s = prev;
    }
  } else if (device == 'C') {
    double prev = 0.0;
    for (double& s : x) {
      const double cur = s;
      s = 0.8 * (cur - 0.3 * prev);
      prev = cur;
    }
  }
}

char device_for(const SyntheticConfig& cfg, std::size_t i) {
  Rng rng(derive_seed(cfg.seed, 0xd0d0 + i));
  const double u = rng.uniform();
  if (u >= cfg.other_device_fraction) return 'A';
  return u < cfg.other_device_fraction / 2 ? 'B' : 'C';
}

}  // namespace

void SyntheticConfig::validate() const {
  if (n_classes < 2) throw std::invalid_argument("synthetic: need at least 2 classes");
  if (n_segments < n_classes) {
    throw std::invalid_argument("synthetic: fewer segments than classes");
  }
  if (sample_rate < 8000) throw std::invalid_argument("synthetic: sample rate below 8 kHz");
  if (!(duration_seconds > 0.0)) throw std::invalid_argument("synthetic: bad duration");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("synthetic: test_fraction must be in [0, 1)");
  }
  if (!(other_device_fraction >= 0.0 && other_device_fraction <= 1.0)) {
    throw std::invalid_argument("synthetic: other_device_fraction must be in [0, 1]");
  }
}

Archetype archetype_of(std::size_t class_index) {
  return static_cast<Archetype>(class_index % 5);
}

std::string class_name(std::size_t class_index) {
  static const char* names[] = {"tone", "chirp", "bandnoise", "amnoise", "clicks"};
  std::string name = names[class_index % 5];
  if (class_index >= 5) name += "_" + std::to_string(class_index / 5 + 1);
  return name;
}

dsp::AudioSegment synthesize_segment(const SyntheticConfig& cfg,
                                     std::size_t segment_index) {
  cfg.validate();
  const std::size_t cls = segment_index % cfg.n_classes;
  const double shift = std::pow(1.35, static_cast<double>(cls / 5));
  Rng rng(derive_seed(cfg.seed, segment_index));
  const auto n = static_cast<std::size_t>(
      std::llround(cfg.duration_seconds * cfg.sample_rate));
  std::vector<double> x(n, 0.0);
  switch (archetype_of(cls)) {
    case Archetype::kToneChord: tone_chord(x, rng, shift, cfg.sample_rate); break;
    case Archetype::kRisingChirps: rising_chirps(x, rng, shift, cfg.sample_rate); break;
    case Archetype::kBandNoise: band_noise(x, rng, shift, cfg.sample_rate); break;
    case Archetype::kAmNoise: am_noise(x, rng, shift, cfg.sample_rate); break;
    case Archetype::kClickTrain: click_train(x, rng, shift, cfg.sample_rate); break;
  }
  const double floor_gain = 0.003 * rng.uniform(0.5, 1.5);
  for (double& s : x) s += floor_gain * rng.gaussian();
  const char device = device_for(cfg, segment_index);
  color_device(x, device);

  double peak = 0.0;
  for (double s : x) peak = std::max(peak, std::abs(s));
  const double gain = peak > 0.0 ? rng.uniform(0.3, 0.7) / peak : 0.0;

  dsp::AudioSegment seg;
  seg.sample_rate = cfg.sample_rate;
  seg.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) seg.samples[i] = static_cast<float>(x[i] * gain);
  char id[64];
  std::snprintf(id, sizeof id, "%s_%04zu", class_name(cls).c_str(), segment_index);
  seg.source_id = id;
  seg.device_id = std::string(1, device);
  seg.label = static_cast<int>(cls);
  return seg;
}

SyntheticDataset generate_synthetic_dataset(const SyntheticConfig& cfg,
                                            const std::filesystem::path& out_dir) {
  cfg.validate();
  const auto audio_dir = out_dir / "audio";
  std::filesystem::create_directories(audio_dir);

  // Stratified split: the last share of each class's segments is test.
  std::vector<std::size_t> per_class(cfg.n_classes, 0);
  for (std::size_t i = 0; i < cfg.n_segments; ++i) ++per_class[i % cfg.n_classes];
  std::vector<std::size_t> seen(cfg.n_classes, 0);

  std::vector<ManifestEntry> entries;
  for (std::size_t i = 0; i < cfg.n_segments; ++i) {
    const auto seg = synthesize_segment(cfg, i);
    const std::string file = seg.source_id + ".wav";
    write_wav(audio_dir / file, seg.samples, 1, seg.sample_rate, WavEncoding::kPcm16);
    const std::size_t cls = i % cfg.n_classes;
    const auto n_test = static_cast<std::size_t>(
        std::llround(cfg.test_fraction * static_cast<double>(per_class[cls])));
    ManifestEntry e;
    e.audio_path = "audio/" + file;
    e.label = class_name(cls);
    e.device = seg.device_id;
    e.split = seen[cls]++ >= per_class[cls] - n_test ? Split::kTest : Split::kTrain;
    entries.push_back(std::move(e));
  }
  SyntheticDataset out;
  out.manifest_path = out_dir / "manifest.csv";
  write_manifest(out.manifest_path, entries);
  out.manifest = load_manifest(out.manifest_path);
  return out;
}

}  // namespace asc::io

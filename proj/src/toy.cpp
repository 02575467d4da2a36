#include "tce/toy.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "json.hpp"
#include "tce/dataset.hpp"
#include "tce/error.hpp"

namespace tce {

Waveform toy_utterance(double f0, double len_s, Rng& rng) {
  const Eigen::Index n = to_samples(len_s);
  Waveform w = Waveform::zeros(n);
  const double syllable_hz = rng.uniform(3.0, 5.0), phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double vibrato = rng.uniform(0.01, 0.04);
  const double ramp = std::min(0.02 * kSampleRate, 0.5 * static_cast<double>(n));
  double theta = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kSampleRate;
    theta += 2.0 * std::numbers::pi * f0 * (1.0 + vibrato * std::sin(2.0 * std::numbers::pi * 0.7 * t)) / kSampleRate;
    double v = 0.0;
    for (int h = 1; h <= 6; ++h) v += std::sin(h * theta) / h;
    const double env = 0.55 + 0.45 * std::sin(2.0 * std::numbers::pi * syllable_hz * t + phase);
    const double edge = std::min({1.0, (i + 1) / ramp, (n - i) / ramp});
    w.samples[i] = static_cast<float>(0.1 * env * edge * v + 0.002 * rng.normal());
  }
  return w;
}

UtterancePool toy_pool(const std::string& language, const std::string& prefix, int speakers, int per_speaker,
                       std::uint64_t seed) {
  if (speakers <= 0 || per_speaker <= 0) throw Error(ErrorKind::BadLength, "toy pool needs speakers and utterances");
  UtterancePool pool;
  pool.language = language;
  for (int s = 0; s < speakers; ++s) {
    char id[64];
    std::snprintf(id, sizeof id, "%s%02d", prefix.c_str(), s);
    Rng rng(derive_seed(seed, {hash_string(id)}));
    const double f0 = rng.uniform(90.0, 260.0);
    for (int k = 0; k < per_speaker; ++k) {
      auto audio = std::make_shared<const Waveform>(toy_utterance(f0, rng.uniform(2.0, 6.0), rng));
      pool.entries[id].push_back({"", 0.0, audio->duration_s(), audio});
    }
  }
  return pool;
}

void save_pool(const UtterancePool& pool, const std::filesystem::path& dir) {
  nlohmann::json speakers = nlohmann::json::object();
  for (const auto& [spk, entries] : pool.entries) {
    std::filesystem::create_directories(dir / spk);
    nlohmann::json list = nlohmann::json::array();
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const auto rel = std::filesystem::path(spk) / (std::to_string(k) + ".wav");
      write_wav(pool.load(entries[k]), dir / rel);
      list.push_back({{"path", rel.generic_string()}, {"duration_s", entries[k].duration_s}});
    }
    speakers[spk] = list;
  }
  write_json({{"language", pool.language}, {"speakers", speakers}}, dir / "pool.json");
}

Waveform toy_noise(double len_s, std::uint64_t seed) {
  Rng rng(seed);
  Waveform w = Waveform::zeros(to_samples(len_s));
  double state = 0.0;
  for (auto& v : w.samples) {
    state = 0.9 * state + 0.1 * rng.normal();
    v = static_cast<float>(state);
  }
  const double rms = std::sqrt(w.samples.cast<double>().squaredNorm() / std::max<Eigen::Index>(1, w.size()));
  if (rms > 0) w.samples /= static_cast<float>(rms);
  return w;
}

}  // namespace tce

#include "tce/corpus.hpp"

#include <cstring>
#include <fstream>

#include "json.hpp"
#include "tce/error.hpp"

namespace tce {

namespace {
constexpr Eigen::Index kCrossfade = kSampleRate / 100;  // 10 ms
}

std::vector<std::string> UtterancePool::speakers() const {
  std::vector<std::string> ids;
  for (const auto& [id, list] : entries) ids.push_back(id);
  return ids;
}

Waveform UtterancePool::load(const PoolEntry& e) const {
  if (e.audio) return *e.audio;
  const Waveform full = read_wav(e.path);
  const auto begin = std::min<Eigen::Index>(to_samples(e.offset_s), full.size());
  const auto len = std::min<Eigen::Index>(to_samples(e.duration_s), full.size() - begin);
  if (len <= 0) throw Error(ErrorKind::BadLength, "pool entry " + e.path + " is empty");
  return Waveform(full.samples.segment(begin, len), full.sample_rate);
}

UtterancePool UtterancePool::from_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + manifest.string());
  UtterancePool pool;
  try {
    const auto j = nlohmann::json::parse(in);
    pool.language = j.value("language", "");
    const auto base = manifest.parent_path();
    for (const auto& [id, list] : j.at("speakers").items()) {
      auto& out = pool.entries[id];
      for (const auto& e : list) {
        std::filesystem::path p = e.at("path").get<std::string>();
        if (p.is_relative()) p = base / p;
        out.push_back({p.string(), e.value("offset_s", 0.0), e.at("duration_s").get<double>(), {}});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, manifest.string() + ": " + e.what());
  }
  validate(pool);
  return pool;
}

void validate(const UtterancePool& pool) {
  for (const auto& [id, list] : pool.entries) {
    if (list.empty()) throw Error(ErrorKind::InvariantViolation, "speaker " + id + " has no audio");
    for (const auto& e : list)
      if (!(e.duration_s > 0.0))
        throw Error(ErrorKind::InvariantViolation, "speaker " + id + " has a non-positive duration");
  }
}

Waveform fit_length(const Waveform& src, Eigen::Index n, Rng& rng) {
  const Eigen::Index len = src.size();
  if (len == 0) throw Error(ErrorKind::BadLength, "source utterance is empty");
  if (len >= n) {
    const auto offset = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(len - n + 1)));
    return Waveform(src.samples.segment(offset, n), src.sample_rate);
  }
  const Eigen::Index xf = std::min(kCrossfade, len / 2);
  Eigen::VectorXf out(n + len);
  out.head(len) = src.samples;
  Eigen::Index filled = len;
  while (filled < n) {
    for (Eigen::Index i = 0; i < xf; ++i) {
      const float r = static_cast<float>(i + 1) / static_cast<float>(xf + 1);
      auto& s = out[filled - xf + i];
      s = s * (1.0f - r) + src.samples[i] * r;
    }
    const Eigen::Index add = len - xf;
    out.segment(filled, add) = src.samples.tail(add);
    filled += add;
  }
  return Waveform(out.head(n), src.sample_rate);
}

Waveform draw_from_speaker(const UtterancePool& pool, const std::string& speaker,
                           Eigen::Index n_samples, std::uint64_t seed) {
  if (n_samples <= 0) throw Error(ErrorKind::BadLength, "requested length must be positive");
  auto it = pool.entries.find(speaker);
  if (it == pool.entries.end() || it->second.empty())
    throw Error(ErrorKind::PoolExhausted, "speaker " + speaker + " not in pool");
  Rng rng(seed);
  const auto& entry = it->second[rng.below(it->second.size())];
  return fit_length(pool.load(entry), n_samples, rng);
}

DrawnUtterance draw_utterance(const UtterancePool& pool, double target_len_s,
                              const std::set<std::string>& exclude_speakers, std::uint64_t seed) {
  const auto n = to_samples(target_len_s);
  if (!(target_len_s > 0.0) || n <= 0)
    throw Error(ErrorKind::BadLength, "target length must be positive");
  std::vector<std::string> eligible;
  for (const auto& id : pool.speakers())
    if (!exclude_speakers.contains(id)) eligible.push_back(id);
  if (eligible.empty()) throw Error(ErrorKind::PoolExhausted, "no speaker outside the exclude set");
  Rng rng(seed);
  const std::string& speaker = eligible[rng.below(eligible.size())];
  return {speaker, draw_from_speaker(pool, speaker, n, rng.next())};
}

SpeakerEmbedding load_embedding(const std::filesystem::path& path, std::string speaker_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != kEmbeddingDim * sizeof(float))
    throw Error(ErrorKind::WrongDimension, path.string() + " holds " +
                                               std::to_string(bytes.size() / sizeof(float)) +
                                               " floats, expected 256");
  Eigen::VectorXf v(kEmbeddingDim);
  std::memcpy(v.data(), bytes.data(), bytes.size());
  if (!v.allFinite()) throw Error(ErrorKind::InvariantViolation, "embedding is not finite");
  const double norm = v.cast<double>().norm();
  if (norm == 0.0) throw Error(ErrorKind::ZeroVector, path.string() + " is all zeros");
  v = (v.cast<double>() / norm).cast<float>();
  return {std::move(speaker_id), std::move(v)};
}

void save_embedding(const SpeakerEmbedding& e, const std::filesystem::path& path) {
  if (e.vector.size() != kEmbeddingDim)
    throw Error(ErrorKind::WrongDimension, "embedding must have 256 entries");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(e.vector.data()), kEmbeddingDim * sizeof(float));
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

SpeakerEmbedding pseudo_embedding(const std::string& speaker_id, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {hash_string(speaker_id)}));
  Eigen::VectorXd v(kEmbeddingDim);
  for (auto& x : v) x = rng.normal();
  return {speaker_id, (v / v.norm()).cast<float>()};
}

}  // namespace tce

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tce/audio_io.hpp"
#include "tce/random.hpp"

namespace tce {

inline constexpr int kEmbeddingDim = 256;

struct PoolEntry {
  std::string path;  // resolved; unused when audio is set
  double offset_s = 0.0;
  double duration_s = 0.0;
  std::shared_ptr<const Waveform> audio;
};

// Clean non-conversational utterances keyed by speaker. Immutable once built.
struct UtterancePool {
  std::string language;
  std::map<std::string, std::vector<PoolEntry>> entries;

  std::vector<std::string> speakers() const;
  Waveform load(const PoolEntry& e) const;

  // {"language", "speakers": {id: [{"path","duration_s"[, "offset_s"]}]}};
  // relative paths resolve against the manifest's directory.
  static UtterancePool from_manifest(const std::filesystem::path& manifest);
};

// Throws InvariantViolation on non-positive durations or empty speakers.
void validate(const UtterancePool& pool);

struct DrawnUtterance {
  std::string speaker_id;
  Waveform audio;
};

// Loops src with a 10 ms linear crossfade until it covers n samples, or
// crops it at a random offset when longer. Output has exactly n samples.
Waveform fit_length(const Waveform& src, Eigen::Index n, Rng& rng);

DrawnUtterance draw_utterance(const UtterancePool& pool, double target_len_s,
                              const std::set<std::string>& exclude_speakers, std::uint64_t seed);

// Same as draw_utterance but for a fixed speaker and an exact sample count.
Waveform draw_from_speaker(const UtterancePool& pool, const std::string& speaker,
                           Eigen::Index n_samples, std::uint64_t seed);

struct SpeakerEmbedding {
  std::string speaker_id;
  Eigen::VectorXf vector;
};

// Raw 256 x float32 little-endian; renormalised to unit norm.
SpeakerEmbedding load_embedding(const std::filesystem::path& path, std::string speaker_id = {});
void save_embedding(const SpeakerEmbedding& e, const std::filesystem::path& path);

// Deterministic unit vector keyed on (speaker_id, seed); stand-in for a d-vector.
SpeakerEmbedding pseudo_embedding(const std::string& speaker_id, std::uint64_t seed);

}  // namespace tce

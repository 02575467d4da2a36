#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "tce/audio_io.hpp"
#include "tce/transcript.hpp"

namespace tce {

// Per-speaker clean tracks spanning the whole conversation, keyed by speaker id.
using Tracks = std::map<std::string, Waveform>;

struct SampleSpan {
  std::int64_t begin = 0;
  std::int64_t end = 0;
  std::int64_t length() const { return end - begin; }
};

// Sample range an utterance occupies on the 16 kHz grid.
inline SampleSpan span_of(const UtteranceSegment& u) {
  return {to_samples(u.start_s), to_samples(u.end_s)};
}

// Assembles tracks from the utterances' audio references (relative paths
// resolve against base_dir). Throws MissingTrack for utterances without audio.
Tracks load_tracks(const ConversationTranscript& t, const std::filesystem::path& base_dir);

// Sum of all tracks; all must share one length.
Waveform sum_tracks(const Tracks& tracks);

}  // namespace tce

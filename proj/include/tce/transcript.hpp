#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

namespace tce {

struct AudioRef {
  std::string path;
  double offset_s = 0.0;

  friend bool operator==(const AudioRef&, const AudioRef&) = default;
};

struct UtteranceSegment {
  std::string speaker;
  double start_s = 0.0;
  double end_s = 0.0;
  std::optional<AudioRef> audio;

  double duration_s() const { return end_s - start_s; }
  friend bool operator==(const UtteranceSegment&, const UtteranceSegment&) = default;
};

// Speaker-labelled utterance timeline. Construct through make_transcript (or
// the loaders) so the invariants hold: utterances sorted by start, inside
// [0, duration], no same-speaker self-overlap.
struct ConversationTranscript {
  std::string conversation_id;
  double duration_s = 0.0;
  std::vector<UtteranceSegment> utterances;
  std::set<std::string> speakers;

  std::vector<const UtteranceSegment*> utterances_of(const std::string& speaker) const;
  friend bool operator==(const ConversationTranscript&, const ConversationTranscript&) = default;
};

ConversationTranscript make_transcript(std::string conversation_id, double duration_s,
                                       std::vector<UtteranceSegment> utterances);

// Throws InvariantViolation.
void validate(const ConversationTranscript& t);

enum class TranscriptFormat { Json, Rttm };

ConversationTranscript load_transcript(const std::filesystem::path& path, TranscriptFormat format);
ConversationTranscript parse_rttm(const std::string& text, std::optional<double> duration_s = {});
ConversationTranscript transcript_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ConversationTranscript& t);
void save_transcript(const ConversationTranscript& t, const std::filesystem::path& path);

// Overlapped (>= 2 speakers) duration divided by union speech duration.
double overlap_ratio(const ConversationTranscript& t);

struct TimeWindow {
  double start_s = 0.0;
  double end_s = 0.0;
  double length() const { return end_s - start_s; }
};

struct SpeechActivity {
  double total_speech_fraction = 0.0;
  std::set<std::string> active_speakers;
  std::map<std::string, double> per_speaker_duration;
};

SpeechActivity speech_activity(const ConversationTranscript& t, TimeWindow window);

struct SegmentRules {
  double seg_len_s = 60.0;
  double min_speech_frac = 0.6;
  std::size_t min_active = 2;
};

bool window_qualifies(const ConversationTranscript& t, TimeWindow window, const SegmentRules& rules);

// Qualifying window starts on a 1 s grid, in seeded random order (sampling
// without replacement). Empty when nothing qualifies.
std::vector<double> select_segments(const ConversationTranscript& t, const SegmentRules& rules,
                                    std::uint64_t seed);

// Portion of the transcript inside the window, re-based to start at 0.
ConversationTranscript crop(const ConversationTranscript& t, TimeWindow window);

}  // namespace tce

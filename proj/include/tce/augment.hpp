#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "tce/corpus.hpp"
#include "tce/random.hpp"
#include "tce/tracks.hpp"
#include "tce/transcript.hpp"

namespace tce {

// Discrete distribution over bin centres; sampling returns a centre exactly,
// so a single-bin histogram is a zero-variance distribution.
struct TurnHistogram {
  double bin_width = 0.05;
  std::vector<double> values;
  std::vector<double> mass;

  double sample(Rng& rng) const;
  double mean() const;
};

struct TurnTakingStats {
  TurnHistogram gap;             // signed seconds; negative means overlap
  TurnHistogram turn_len;        // seconds
  double backchannel_rate = 0;   // events per minute
  TurnHistogram backchannel_len; // seconds

  // Documented stand-in (not measured data): gap mode +0.2 s with about 20%
  // of transitions overlapping, log-normal turns with a 2 s median,
  // two backchannels per minute.
  static TurnTakingStats default_stand_in();
  static TurnTakingStats from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Normalises masses in place; throws InvariantViolation on bad supports.
void validate(TurnTakingStats& stats);

struct AugmentPlan {
  double p = 0.5;
  const UtterancePool* replacement_pool = nullptr;
  std::uint64_t seed = 0;
};

struct AugmentResult {
  ConversationTranscript transcript;
  Tracks tracks;
  std::map<std::string, std::string> replaced;  // original speaker -> pool speaker
};

AugmentResult augment_conversation(const ConversationTranscript& t, const Tracks& tracks,
                                   const AugmentPlan& plan);

// augment_conversation with p = 1 against a foreign-language pool.
AugmentResult cross_lingual_replace(const ConversationTranscript& t, const Tracks& tracks,
                                    const UtterancePool& pool, std::uint64_t seed);

// Alternating-turn timeline with injected backchannels.
ConversationTranscript synth_timeline(const TurnTakingStats& stats,
                                      const std::vector<std::string>& speakers, double duration_s,
                                      std::uint64_t seed, std::string conversation_id = "synth");

struct SynthResult {
  ConversationTranscript transcript;
  Tracks tracks;
};

SynthResult synth_conversation(const TurnTakingStats& stats, std::size_t n_speakers,
                               double duration_s, const UtterancePool& pool, std::uint64_t seed,
                               std::string conversation_id = "synth");

}  // namespace tce

#pragma once

#include <cstdint>
#include <set>
#include <string>

#include "tce/tracks.hpp"
#include "tce/transcript.hpp"

namespace tce {

struct PerturbResult {
  ConversationTranscript transcript;
  Tracks tracks;
};

// Shifts every utterance of the listed speakers by an independent
// U[-tau, tau] offset, clamped to [0, duration]. A shift that collides with
// the same speaker's already placed utterances is redrawn up to 20 times and
// then moved to the nearest free position. Audio of listed speakers that
// have a track moves with the utterance.
PerturbResult random_shift(const ConversationTranscript& t, const Tracks& tracks, double tau_s,
                           const std::set<std::string>& speakers, std::uint64_t seed);

// Removes every gap between consecutive utterances of each listed speaker,
// packing that speaker's speech from t = 0 in its original order.
PerturbResult shift_all_left(const ConversationTranscript& t, const Tracks& tracks,
                             const std::set<std::string>& speakers);

}  // namespace tce

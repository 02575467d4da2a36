#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tce/corpus.hpp"
#include "tce/tracks.hpp"
#include "tce/transcript.hpp"

namespace tce {

std::string choose_reference(const ConversationTranscript& t, TimeWindow window, std::uint64_t seed);

struct Enrollment {
  Waveform audio;
  std::vector<SampleSpan> sources;  // positions in the reference track the audio came from
};

// Clean speech of `reference` taken from outside `exclude`, cropped to min_len_s.
Enrollment select_enrollment(const ConversationTranscript& t, const Waveform& reference_track,
                             const std::string& reference, TimeWindow exclude, double min_len_s,
                             std::uint64_t seed);

struct InterferenceChoice {
  std::size_t conversation = 0;  // index into the catalog
  double window_start_s = 0.0;
};

InterferenceChoice sample_interference(const std::vector<ConversationTranscript>& catalog,
                                       const ConversationTranscript& target,
                                       const SegmentRules& rules, std::uint64_t seed);

struct MixInput {
  Waveform reference;                 // s0
  std::vector<Waveform> others;       // s_conv
  std::vector<Waveform> interference; // s_inter
  std::optional<Waveform> noise;      // n; absent means silence
};

struct MixGains {
  double interference = 1.0;
  double noise = 0.0;
  double clip = 1.0;  // shared by every component
};

struct MixMetadata {
  std::string reference_speaker_id;
  std::string conversation_id;
  std::string interference_id;
  MixGains gains;
  double sir_db = 0.0;
  std::optional<double> snr_db;
};

// x = s0 + sum(s_conv) + sum(s_inter) + n, stored after all scaling.
struct MixtureSample {
  Waveform mixture;
  Waveform reference;
  std::vector<Waveform> others;
  std::vector<Waveform> interference;
  Waveform noise;
  Waveform target;  // s0 + sum(s_conv)
  SpeakerEmbedding embedding;
  MixMetadata meta;

  Waveform wrong_conversation() const;  // s0 + sum(s_inter)
};

// Scales the interference group to the requested target/interference ratio
// and the noise to the requested speech/noise ratio. Powers are mean squares
// over the samples where the target is non-zero.
MixtureSample mix(const MixInput& input, double target_interference_snr_db,
                  std::optional<double> target_noise_snr_db = std::nullopt);

// Realised target/interference ratio of a stored sample, same power rule as mix.
double measured_sir_db(const MixtureSample& s);

// Throws InvariantViolation when the stored decomposition is inconsistent.
void check_invariants(const MixtureSample& s, double tol = 1e-6);

}  // namespace tce

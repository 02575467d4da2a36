#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tce/corpus.hpp"
#include "tce/mixer.hpp"
#include "tce/tracks.hpp"
#include "tce/transcript.hpp"

namespace tce {

// A conversation on disk: transcript plus one WAV per speaker.
struct CatalogEntry {
  std::filesystem::path transcript;
  std::map<std::string, std::filesystem::path> tracks;  // empty: use utterance audio refs
  std::string split = "train";
};

struct Catalog {
  std::vector<CatalogEntry> entries;

  // {"conversations": [{"transcript", "split", "tracks": {spk: wav}}]};
  // relative paths resolve against the catalog's directory.
  static Catalog load(const std::filesystem::path& path);
  // Paths are written relative to the catalog's directory.
  void save(const std::filesystem::path& path) const;
};

ConversationTranscript load_entry_transcript(const CatalogEntry& e);
Tracks load_entry_tracks(const CatalogEntry& e, const ConversationTranscript& t);

// Writes <dir>/transcript.json and <dir>/tracks/<speaker>.wav.
CatalogEntry write_conversation(const ConversationTranscript& t, const Tracks& tracks,
                                const std::filesystem::path& dir, const std::string& split);

// Window of every track, zero-padded past the end of the recording.
Tracks crop_tracks(const Tracks& tracks, TimeWindow window);

struct DatasetSpec {
  std::uint64_t seed = 0;
  SegmentRules rules;
  std::vector<CatalogEntry> catalog;
  std::map<std::string, std::size_t> counts;  // per split

  struct Augment {
    double p = 0.5;
    std::filesystem::path pool;
    std::vector<std::string> splits{"train"};
  };
  std::optional<Augment> augment;

  struct Noise {
    std::vector<std::filesystem::path> files;
    double snr_lo_db = 0.0;
    double snr_hi_db = 10.0;
  };
  std::optional<Noise> noise;

  double sir_lo_db = -3.0;
  double sir_hi_db = 3.0;
  double enrollment_s = 5.0;
  std::optional<std::filesystem::path> embedding_dir;  // <dir>/<speaker>.bin; pseudo when absent

  // See README for the schema; relative paths resolve against base_dir.
  static DatasetSpec from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
};

// Throws SpeakerLeak when a test speaker also appears in train or val.
void check_speaker_disjointness(const std::vector<CatalogEntry>& catalog);

// Builds every sample, writes WAVs under out_dir/<split>/<id>/ and returns the
// manifest (also written to out_dir/manifest.json). Samples are ordered by
// split name then index regardless of `jobs`.
nlohmann::json build_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir, int jobs = 1);

// Stored sample as described by one manifest entry.
struct LoadedSample {
  MixtureSample sample;
  ConversationTranscript transcript;                  // target conversation, window-relative
  std::vector<std::string> conversation_speakers;     // order of reference + others
  std::vector<std::string> interference_speakers;
};

LoadedSample load_sample(const nlohmann::json& entry, const std::filesystem::path& manifest_dir);

// Writes the sample's WAVs under sample_dir and returns the manifest paths
// object (relative to manifest_dir).
nlohmann::json write_sample_audio(const MixtureSample& s, const std::filesystem::path& sample_dir,
                                  const std::filesystem::path& manifest_dir);

// Rewrites every path of a manifest entry ("paths" and "output") from
// from_dir-relative to to_dir-relative.
nlohmann::json rebase_entry(nlohmann::json entry, const std::filesystem::path& from_dir,
                            const std::filesystem::path& to_dir);

// Generic path of p relative to base, both made absolute first.
std::string relative_path(const std::filesystem::path& p, const std::filesystem::path& base);

nlohmann::json read_json(const std::filesystem::path& path);
// Pretty-printed with a trailing newline.
void write_json(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace tce

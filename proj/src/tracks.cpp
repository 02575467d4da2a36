#include "tce/tracks.hpp"

#include "tce/error.hpp"

namespace tce {

Tracks load_tracks(const ConversationTranscript& t, const std::filesystem::path& base_dir) {
  const auto n = to_samples(t.duration_s);
  Tracks tracks;
  for (const auto& s : t.speakers) tracks.emplace(s, Waveform::zeros(n));
  std::map<std::string, Waveform> cache;
  for (const auto& u : t.utterances) {
    if (!u.audio)
      throw Error(ErrorKind::MissingTrack, "utterance of " + u.speaker + " has no audio reference");
    std::filesystem::path p = u.audio->path;
    if (p.is_relative()) p = base_dir / p;
    auto it = cache.find(p.string());
    if (it == cache.end()) it = cache.emplace(p.string(), read_wav(p)).first;
    const Waveform& src = it->second;
    const SampleSpan span = span_of(u);
    const auto offset = to_samples(u.audio->offset_s);
    const auto len = std::min({span.length(), src.size() - offset, n - span.begin});
    if (len <= 0) continue;
    tracks.at(u.speaker).samples.segment(span.begin, len) = src.samples.segment(offset, len);
  }
  return tracks;
}

Waveform sum_tracks(const Tracks& tracks) {
  if (tracks.empty()) throw Error(ErrorKind::EmptyInput, "no tracks to sum");
  Waveform out = Waveform::zeros(tracks.begin()->second.size(), tracks.begin()->second.sample_rate);
  for (const auto& [id, w] : tracks) {
    if (w.size() != out.size()) throw Error(ErrorKind::LengthMismatch, "track " + id + " length differs");
    out.samples += w.samples;
  }
  return out;
}

}  // namespace tce

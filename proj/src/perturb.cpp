#include "tce/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "tce/random.hpp"

namespace tce {

namespace {

constexpr int kMaxRedraws = 20;

struct Interval {
  double start;
  double end;
};

bool collides(const std::vector<Interval>& placed, double start, double end) {
  return std::any_of(placed.begin(), placed.end(),
                     [&](const Interval& p) { return start < p.end && p.start < end; });
}

// Closest start in [0, limit] whose interval of length len avoids `placed`.
std::optional<double> nearest_free(const std::vector<Interval>& placed, double desired, double len,
                                   double limit) {
  std::vector<double> candidates{desired, 0.0, limit};
  for (const auto& p : placed) {
    candidates.push_back(p.end);
    candidates.push_back(p.start - len);
  }
  std::optional<double> best;
  for (double c : candidates) {
    if (c < 0.0 || c > limit || collides(placed, c, c + len)) continue;
    if (!best || std::abs(c - desired) < std::abs(*best - desired)) best = c;
  }
  return best;
}

// New start times for one speaker's utterances under random shifts.
std::vector<double> shifted_starts(const std::vector<const UtteranceSegment*>& utts, double duration,
                                   double tau, Rng& rng) {
  std::vector<double> starts;
  std::vector<Interval> placed;
  bool fragmented = false;
  for (const auto* u : utts) {
    const double len = u->duration_s();
    const double limit = std::max(0.0, duration - len);
    double start = 0.0;
    bool ok = false;
    for (int attempt = 0; attempt < kMaxRedraws && !ok; ++attempt) {
      start = std::clamp(u->start_s + rng.uniform(-tau, tau), 0.0, limit);
      ok = !collides(placed, start, start + len);
    }
    if (!ok) {
      auto free = nearest_free(placed, start, len, limit);
      if (!free) {
        fragmented = true;
        break;
      }
      start = *free;
    }
    starts.push_back(start);
    placed.push_back({start, start + len});
  }
  if (!fragmented) return starts;

  // Free space too fragmented for a remaining utterance: fall back to
  // order-preserving placement, which always fits because the original
  // layout does.
  starts.clear();
  double suffix = 0.0;
  for (const auto* u : utts) suffix += u->duration_s();
  double prev_end = 0.0;
  for (const auto* u : utts) {
    const double len = u->duration_s();
    const double hi = std::max(prev_end, duration - suffix);
    const double start = std::clamp(u->start_s + rng.uniform(-tau, tau), prev_end, hi);
    starts.push_back(start);
    prev_end = start + len;
    suffix -= len;
  }
  return starts;
}

PerturbResult relocate(const ConversationTranscript& t, const Tracks& tracks,
                       const std::set<std::string>& speakers,
                       const std::map<std::string, std::vector<double>>& new_starts) {
  PerturbResult out{{}, tracks};
  std::vector<UtteranceSegment> utts;
  std::map<std::string, std::size_t> cursor;
  for (const auto& s : speakers)
    if (auto it = tracks.find(s); it != tracks.end())
      out.tracks[s] = Waveform::zeros(it->second.size(), it->second.sample_rate);

  for (const auto& u : t.utterances) {
    if (!speakers.contains(u.speaker)) {
      utts.push_back(u);
      continue;
    }
    const double start = new_starts.at(u.speaker)[cursor[u.speaker]++];
    UtteranceSegment moved = u;
    moved.start_s = start;
    moved.end_s = start + u.duration_s();
    if (auto it = tracks.find(u.speaker); it != tracks.end()) {
      const Waveform& src = it->second;
      Waveform& dst = out.tracks[u.speaker];
      const SampleSpan from = span_of(u);
      const auto to = to_samples(start);
      const auto len = std::min({from.length(), src.size() - from.begin, dst.size() - to});
      if (len > 0) dst.samples.segment(to, len) = src.samples.segment(from.begin, len);
    }
    utts.push_back(std::move(moved));
  }
  out.transcript = make_transcript(t.conversation_id, t.duration_s, std::move(utts));
  return out;
}

}  // namespace

PerturbResult random_shift(const ConversationTranscript& t, const Tracks& tracks, double tau_s,
                           const std::set<std::string>& speakers, std::uint64_t seed) {
  if (tau_s <= 0.0) return {t, tracks};
  std::map<std::string, std::vector<double>> starts;
  std::uint64_t k = 0;
  for (const auto& s : speakers) {
    Rng rng(derive_seed(seed, {k++, hash_string(s)}));
    starts[s] = shifted_starts(t.utterances_of(s), t.duration_s, tau_s, rng);
  }
  return relocate(t, tracks, speakers, starts);
}

PerturbResult shift_all_left(const ConversationTranscript& t, const Tracks& tracks,
                             const std::set<std::string>& speakers) {
  std::map<std::string, std::vector<double>> starts;
  for (const auto& s : speakers) {
    double cursor = 0.0;
    auto& list = starts[s];
    for (const auto* u : t.utterances_of(s)) {
      list.push_back(cursor);
      cursor += u->duration_s();
    }
  }
  return relocate(t, tracks, speakers, starts);
}

}  // namespace tce

#include "tce/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include "tce/error.hpp"

namespace tce {

double TurnHistogram::sample(Rng& rng) const {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    acc += mass[i];
    if (u < acc) return values[i];
  }
  for (std::size_t i = mass.size(); i-- > 0;)
    if (mass[i] > 0.0) return values[i];
  return values.back();
}

double TurnHistogram::mean() const {
  return std::inner_product(values.begin(), values.end(), mass.begin(), 0.0);
}

namespace {

TurnHistogram grid_histogram(double lo, double hi, double width, auto density) {
  TurnHistogram h;
  h.bin_width = width;
  const auto k0 = static_cast<long>(std::lround(lo / width));
  const auto k1 = static_cast<long>(std::lround(hi / width));
  for (long k = k0; k <= k1; ++k) {
    const double v = static_cast<double>(k) * width;
    h.values.push_back(v);
    h.mass.push_back(density(v));
  }
  const double total = std::accumulate(h.mass.begin(), h.mass.end(), 0.0);
  for (auto& m : h.mass) m /= total;
  return h;
}

double gauss(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / sigma;
}

double lognormal(double x, double median, double sigma) {
  return x > 0.0 ? gauss(std::log(x), std::log(median), sigma) / x : 0.0;
}

TurnHistogram histogram_from_json(const nlohmann::json& j) {
  TurnHistogram h;
  h.bin_width = j.value("bin_width", 0.05);
  h.values = j.at("values").get<std::vector<double>>();
  h.mass = j.at("mass").get<std::vector<double>>();
  return h;
}

nlohmann::json histogram_to_json(const TurnHistogram& h) {
  return {{"bin_width", h.bin_width}, {"values", h.values}, {"mass", h.mass}};
}

void check_histogram(TurnHistogram& h, double lo, double hi, const char* name) {
  if (h.values.empty() || h.values.size() != h.mass.size())
    throw Error(ErrorKind::InvariantViolation, std::string(name) + ": values/mass size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < h.values.size(); ++i) {
    if (!(h.mass[i] >= 0.0)) throw Error(ErrorKind::InvariantViolation, std::string(name) + ": negative mass");
    if (h.mass[i] > 0.0 && (h.values[i] < lo - 1e-9 || h.values[i] > hi + 1e-9))
      throw Error(ErrorKind::InvariantViolation, std::string(name) + ": support outside bounds");
    total += h.mass[i];
  }
  if (!(total > 0.0)) throw Error(ErrorKind::InvariantViolation, std::string(name) + ": zero mass");
  for (auto& m : h.mass) m /= total;
}

}  // namespace

TurnTakingStats TurnTakingStats::default_stand_in() {
  TurnTakingStats s;
  s.gap = grid_histogram(-3.0, 3.0, 0.05, [](double v) {
    return 0.9 * gauss(v, 0.2, 0.24) + 0.1 * gauss(v, 0.5, 0.8);
  });
  s.turn_len = grid_histogram(0.2, 20.0, 0.05, [](double v) { return lognormal(v, 2.0, 0.6); });
  s.backchannel_rate = 2.0;
  s.backchannel_len = grid_histogram(0.1, 1.5, 0.05, [](double v) { return lognormal(v, 0.4, 0.35); });
  return s;
}

void validate(TurnTakingStats& stats) {
  check_histogram(stats.gap, -3.0, 3.0, "gap");
  check_histogram(stats.turn_len, 0.2, 20.0, "turn_len");
  if (!(stats.backchannel_rate >= 0.0))
    throw Error(ErrorKind::InvariantViolation, "backchannel_rate must be >= 0");
  if (stats.backchannel_rate > 0.0) check_histogram(stats.backchannel_len, 0.01, 20.0, "backchannel_len");
}

TurnTakingStats TurnTakingStats::from_json(const nlohmann::json& j) {
  TurnTakingStats s;
  try {
    s.gap = histogram_from_json(j.at("gap"));
    s.turn_len = histogram_from_json(j.at("turn_len"));
    s.backchannel_rate = j.value("backchannel_rate_per_min", 0.0);
    if (j.contains("backchannel_len")) s.backchannel_len = histogram_from_json(j["backchannel_len"]);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  validate(s);
  return s;
}

nlohmann::json TurnTakingStats::to_json() const {
  return {{"gap", histogram_to_json(gap)},
          {"turn_len", histogram_to_json(turn_len)},
          {"backchannel_rate_per_min", backchannel_rate},
          {"backchannel_len", histogram_to_json(backchannel_len)}};
}

AugmentResult augment_conversation(const ConversationTranscript& t, const Tracks& tracks,
                                   const AugmentPlan& plan) {
  if (!(plan.p >= 0.0 && plan.p <= 1.0))
    throw Error(ErrorKind::InvariantViolation, "replacement probability must lie in [0, 1]");
  for (const auto& s : t.speakers)
    if (!tracks.contains(s)) throw Error(ErrorKind::MissingTrack, "no track for speaker " + s);

  AugmentResult out{t, tracks, {}};
  const std::vector<std::string> speakers(t.speakers.begin(), t.speakers.end());
  std::vector<std::size_t> chosen;
  for (std::size_t k = 0; k < speakers.size(); ++k) {
    Rng coin(derive_seed(plan.seed, {0, k}));
    if (coin.bernoulli(plan.p)) chosen.push_back(k);
  }
  if (chosen.empty()) return out;
  if (plan.replacement_pool == nullptr)
    throw Error(ErrorKind::PoolExhausted, "replacement requested without a pool");
  const UtterancePool& pool = *plan.replacement_pool;

  std::set<std::string> exclude(t.speakers.begin(), t.speakers.end());
  for (std::size_t k : chosen) {
    const std::string& original = speakers[k];
    std::vector<std::string> eligible;
    for (const auto& id : pool.speakers())
      if (!exclude.contains(id)) eligible.push_back(id);
    if (eligible.empty())
      throw Error(ErrorKind::PoolExhausted, "not enough distinct replacement speakers");
    Rng pick(derive_seed(plan.seed, {1, k}));
    const std::string replacement = eligible[pick.below(eligible.size())];
    exclude.insert(replacement);
    out.replaced[original] = replacement;

    const Waveform& src = tracks.at(original);
    Waveform fresh = Waveform::zeros(src.size(), src.sample_rate);
    const auto utts = t.utterances_of(original);
    for (std::size_t j = 0; j < utts.size(); ++j) {
      const SampleSpan span = span_of(*utts[j]);
      const auto len = std::min<std::int64_t>(span.length(), fresh.size() - span.begin);
      if (len <= 0) continue;
      const Waveform seg = draw_from_speaker(pool, replacement, span.length(),
                                             derive_seed(plan.seed, {2, k, j}));
      fresh.samples.segment(span.begin, len) = seg.samples.head(len);
    }
    out.tracks[original] = std::move(fresh);
  }
  return out;
}

AugmentResult cross_lingual_replace(const ConversationTranscript& t, const Tracks& tracks,
                                    const UtterancePool& pool, std::uint64_t seed) {
  return augment_conversation(t, tracks, AugmentPlan{1.0, &pool, seed});
}

ConversationTranscript synth_timeline(const TurnTakingStats& stats,
                                      const std::vector<std::string>& speakers, double duration_s,
                                      std::uint64_t seed, std::string conversation_id) {
  const std::size_t n = speakers.size();
  if (n == 0) throw Error(ErrorKind::InvariantViolation, "need at least one speaker");
  constexpr double kMinTurn = 1e-3;
  Rng rng(derive_seed(seed, {0}));

  std::vector<UtteranceSegment> utts;
  std::vector<double> last_end(n, 0.0);
  std::size_t holder = 0;
  double start = 0.0;
  while (start < duration_s) {
    const double end = std::min(start + stats.turn_len.sample(rng), duration_s);
    if (end - start < kMinTurn) break;
    utts.push_back({speakers[holder], start, end, std::nullopt});
    last_end[holder] = end;
    const double gap = stats.gap.sample(rng);
    std::size_t next = (holder + 1) % n;
    if (n > 2) next = (holder + 1 + rng.below(n - 1)) % n;
    // A long overlap cannot push the next turn before the current one starts
    // or into the next speaker's previous turn.
    start = std::max({end + gap, last_end[next], start});
    holder = next;
  }

  const std::size_t main_turns = utts.size();
  if (stats.backchannel_rate > 0.0 && n > 1) {
    Rng bc(derive_seed(seed, {1}));
    const double rate_per_s = stats.backchannel_rate / 60.0;
    for (double tau = bc.exponential(rate_per_s); tau < duration_s; tau += bc.exponential(rate_per_s)) {
      const double len = stats.backchannel_len.sample(bc);
      const std::size_t pick = bc.below(n - 1);
      const UtteranceSegment* holding = nullptr;
      for (std::size_t i = 0; i < main_turns; ++i)
        if (utts[i].start_s <= tau && tau < utts[i].end_s) holding = &utts[i];
      if (holding == nullptr) continue;
      const auto h = static_cast<std::size_t>(
          std::find(speakers.begin(), speakers.end(), holding->speaker) - speakers.begin());
      const std::string& listener = speakers[(h + 1 + pick) % n];
      const double end = std::min(tau + len, duration_s);
      if (end - tau < kMinTurn) continue;
      const bool collides = std::any_of(utts.begin(), utts.end(), [&](const auto& u) {
        return u.speaker == listener && u.start_s < end && tau < u.end_s;
      });
      if (!collides) utts.push_back({listener, tau, end, std::nullopt});
    }
  }
  return make_transcript(std::move(conversation_id), duration_s, std::move(utts));
}

SynthResult synth_conversation(const TurnTakingStats& stats, std::size_t n_speakers,
                               double duration_s, const UtterancePool& pool, std::uint64_t seed,
                               std::string conversation_id) {
  std::vector<std::string> ids = pool.speakers();
  if (ids.size() < n_speakers)
    throw Error(ErrorKind::PoolExhausted, "pool has fewer speakers than requested");
  Rng pick(derive_seed(seed, {2}));
  for (std::size_t i = 0; i < n_speakers; ++i)
    std::swap(ids[i], ids[i + pick.below(ids.size() - i)]);
  ids.resize(n_speakers);

  SynthResult out{synth_timeline(stats, ids, duration_s, seed, std::move(conversation_id)), {}};
  const auto n = to_samples(duration_s);
  for (const auto& id : ids) out.tracks.emplace(id, Waveform::zeros(n));
  for (std::size_t j = 0; j < out.transcript.utterances.size(); ++j) {
    const auto& u = out.transcript.utterances[j];
    const SampleSpan span = span_of(u);
    const auto len = std::min<std::int64_t>(span.length(), n - span.begin);
    if (len <= 0) continue;
    const Waveform seg = draw_from_speaker(pool, u.speaker, span.length(), derive_seed(seed, {3, j}));
    out.tracks.at(u.speaker).samples.segment(span.begin, len) = seg.samples.head(len);
  }
  return out;
}

}  // namespace tce

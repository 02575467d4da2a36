#include "tce/mixer.hpp"

#include <algorithm>
#include <cmath>

#include "tce/error.hpp"
#include "tce/random.hpp"

namespace tce {

std::string choose_reference(const ConversationTranscript& t, TimeWindow window, std::uint64_t seed) {
  const SpeechActivity act = speech_activity(t, window);
  if (act.active_speakers.empty())
    throw Error(ErrorKind::NoActiveSpeaker, "no speaker active in window");
  const std::vector<std::string> ids(act.active_speakers.begin(), act.active_speakers.end());
  Rng rng(seed);
  return ids[rng.below(ids.size())];
}

Enrollment select_enrollment(const ConversationTranscript& t, const Waveform& reference_track,
                             const std::string& reference, TimeWindow exclude, double min_len_s,
                             std::uint64_t seed) {
  const SampleSpan hole{to_samples(exclude.start_s), to_samples(exclude.end_s)};
  std::vector<SampleSpan> pieces;
  std::int64_t available = 0;
  auto add = [&](std::int64_t a, std::int64_t b) {
    b = std::min<std::int64_t>(b, reference_track.size());
    if (b > a) {
      pieces.push_back({a, b});
      available += b - a;
    }
  };
  for (const auto* u : t.utterances_of(reference)) {
    const SampleSpan s = span_of(*u);
    add(s.begin, std::min(s.end, hole.begin));
    add(std::max(s.begin, hole.end), s.end);
  }
  const auto need = to_samples(min_len_s);
  if (need <= 0) throw Error(ErrorKind::BadLength, "enrollment length must be positive");
  if (available < need)
    throw Error(ErrorKind::InsufficientEnrollment,
                reference + " has " + std::to_string(available / double(kSampleRate)) +
                    " s of speech outside the window");

  Rng rng(seed);
  const std::size_t first = rng.below(pieces.size());
  Enrollment e{Waveform::zeros(need, reference_track.sample_rate), {}};
  std::int64_t filled = 0;
  for (std::size_t i = 0; filled < need; ++i) {
    const SampleSpan& p = pieces[(first + i) % pieces.size()];
    const auto take = std::min(p.length(), need - filled);
    e.audio.samples.segment(filled, take) = reference_track.samples.segment(p.begin, take);
    e.sources.push_back({p.begin, p.begin + take});
    filled += take;
  }
  return e;
}

InterferenceChoice sample_interference(const std::vector<ConversationTranscript>& catalog,
                                       const ConversationTranscript& target,
                                       const SegmentRules& rules, std::uint64_t seed) {
  std::vector<std::pair<std::size_t, std::vector<double>>> eligible;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const auto& c = catalog[i];
    const bool disjoint = std::none_of(c.speakers.begin(), c.speakers.end(),
                                       [&](const auto& s) { return target.speakers.contains(s); });
    if (!disjoint) continue;
    auto windows = select_segments(c, rules, derive_seed(seed, {1, i}));
    if (!windows.empty()) eligible.emplace_back(i, std::move(windows));
  }
  if (eligible.empty())
    throw Error(ErrorKind::NoDisjointConversation,
                "no catalog conversation is speaker-disjoint from " + target.conversation_id);
  Rng rng(seed);
  const auto& [index, windows] = eligible[rng.below(eligible.size())];
  return {index, windows.front()};
}

namespace {

struct Power {
  double sum = 0.0;
  std::int64_t count = 0;
  double mean() const { return count > 0 ? sum / static_cast<double>(count) : 0.0; }
};

template <typename Mask, typename Signal>
Power masked_power(const Mask& mask, const Signal& x) {
  Power p;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (mask[i]) {
      p.sum += static_cast<double>(x[i]) * static_cast<double>(x[i]);
      ++p.count;
    }
  return p;
}

Eigen::VectorXd group_sum(const std::vector<Waveform>& group, Eigen::Index n) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
  for (const auto& w : group) s += w.samples.cast<double>();
  return s;
}

void check_length(const Waveform& w, Eigen::Index n, const char* what) {
  if (w.size() != n) throw Error(ErrorKind::LengthMismatch, std::string(what) + " length differs");
}

Waveform assemble(const Waveform& s0, const std::vector<Waveform>& conv,
                  const std::vector<Waveform>& inter, const Waveform* noise) {
  Waveform x = s0;
  for (const auto& w : conv) x.samples += w.samples;
  for (const auto& w : inter) x.samples += w.samples;
  if (noise) x.samples += noise->samples;
  return x;
}

}  // namespace

Waveform MixtureSample::wrong_conversation() const {
  return assemble(reference, {}, interference, nullptr);
}

MixtureSample mix(const MixInput& input, double sir_db, std::optional<double> snr_db) {
  const Eigen::Index n = input.reference.size();
  if (n == 0) throw Error(ErrorKind::EmptyInput, "reference track is empty");
  for (const auto& w : input.others) check_length(w, n, "conversation track");
  for (const auto& w : input.interference) check_length(w, n, "interference track");

  MixtureSample s;
  s.reference = input.reference;
  s.others = input.others;
  s.interference = input.interference;
  s.target = assemble(s.reference, s.others, {}, nullptr);

  const Eigen::VectorXd target = s.target.samples.cast<double>();
  const Eigen::Array<bool, Eigen::Dynamic, 1> mask = target.array() != 0.0;
  const Power p_target = masked_power(mask, target);
  if (p_target.sum == 0.0) throw Error(ErrorKind::SilentGroup, "target conversation is silent");

  double g_inter = 0.0;
  if (!s.interference.empty()) {
    const Power p_inter = masked_power(mask, group_sum(s.interference, n));
    if (p_inter.sum == 0.0)
      throw Error(ErrorKind::SilentGroup, "interference is silent over the target support");
    g_inter = std::sqrt(p_target.mean() / (p_inter.mean() * std::pow(10.0, sir_db / 10.0)));
    for (auto& w : s.interference) w.samples = (w.samples.cast<double>() * g_inter).cast<float>();
  }

  double g_noise = 0.0;
  if (input.noise) {
    if (!snr_db) throw Error(ErrorKind::InvariantViolation, "noise given without a noise SNR");
    if (input.noise->size() == 0) throw Error(ErrorKind::SilentGroup, "noise is empty");
    check_length(*input.noise, n, "noise");
    const Eigen::VectorXd speech = target + group_sum(s.interference, n);
    const Power p_speech = masked_power(mask, speech);
    const Power p_noise = masked_power(mask, input.noise->samples);
    if (p_noise.sum == 0.0) throw Error(ErrorKind::SilentGroup, "noise is silent over the target support");
    g_noise = std::sqrt(p_speech.mean() / (p_noise.mean() * std::pow(10.0, *snr_db / 10.0)));
    s.noise = Waveform((input.noise->samples.cast<double>() * g_noise).cast<float>(), input.noise->sample_rate);
  } else {
    if (snr_db) throw Error(ErrorKind::SilentGroup, "noise SNR requested without noise");
    s.noise = Waveform::zeros(n, input.reference.sample_rate);
  }

  s.mixture = assemble(s.reference, s.others, s.interference, &s.noise);
  double clip = 1.0;
  const float peak = s.mixture.samples.cwiseAbs().maxCoeff();
  if (peak > 1.0f) {
    clip = 0.99 / static_cast<double>(peak);
    const auto c = static_cast<float>(clip);
    s.reference.samples *= c;
    for (auto& w : s.others) w.samples *= c;
    for (auto& w : s.interference) w.samples *= c;
    s.noise.samples *= c;
    s.target = assemble(s.reference, s.others, {}, nullptr);
    s.mixture = assemble(s.reference, s.others, s.interference, &s.noise);
  }
  s.meta.gains = {g_inter, g_noise, clip};
  s.meta.sir_db = sir_db;
  s.meta.snr_db = input.noise ? snr_db : std::nullopt;
  return s;
}

double measured_sir_db(const MixtureSample& s) {
  const Eigen::VectorXd target = s.target.samples.cast<double>();
  const Eigen::Array<bool, Eigen::Dynamic, 1> mask = target.array() != 0.0;
  const Power pt = masked_power(mask, target);
  const Power pi = masked_power(mask, group_sum(s.interference, target.size()));
  return 10.0 * std::log10(pt.mean() / pi.mean());
}

void check_invariants(const MixtureSample& s, double tol) {
  const Eigen::Index n = s.mixture.size();
  auto same = [n](const Waveform& w) { return w.size() == n; };
  bool ok = same(s.reference) && same(s.noise) && same(s.target) &&
            std::all_of(s.others.begin(), s.others.end(), same) &&
            std::all_of(s.interference.begin(), s.interference.end(), same);
  if (!ok) throw Error(ErrorKind::InvariantViolation, "component lengths differ");
  Eigen::VectorXd sum = s.reference.samples.cast<double>() + group_sum(s.others, n) +
                        group_sum(s.interference, n) + s.noise.samples.cast<double>();
  if ((s.mixture.samples.cast<double>() - sum).cwiseAbs().maxCoeff() >= tol)
    throw Error(ErrorKind::InvariantViolation, "mixture is not the sum of its components");
  Eigen::VectorXd y = s.reference.samples.cast<double>() + group_sum(s.others, n);
  if ((s.target.samples.cast<double>() - y).cwiseAbs().maxCoeff() >= tol)
    throw Error(ErrorKind::InvariantViolation, "target is not s0 + sum(s_conv)");
  if (s.reference.samples.cwiseAbs().maxCoeff() == 0.0f)
    throw Error(ErrorKind::InvariantViolation, "reference speaker is silent");
}

}  // namespace tce

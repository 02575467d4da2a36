#include "tce/transcript.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "tce/error.hpp"
#include "tce/random.hpp"

namespace tce {

using nlohmann::json;

std::vector<const UtteranceSegment*> ConversationTranscript::utterances_of(
    const std::string& speaker) const {
  std::vector<const UtteranceSegment*> out;
  for (const auto& u : utterances)
    if (u.speaker == speaker) out.push_back(&u);
  return out;
}

void validate(const ConversationTranscript& t) {
  if (!(t.duration_s >= 0.0)) throw Error(ErrorKind::InvariantViolation, "negative duration");
  std::set<std::string> seen;
  std::map<std::string, double> last_end;
  double prev_start = 0.0;
  for (const auto& u : t.utterances) {
    if (!(u.end_s > u.start_s))
      throw Error(ErrorKind::InvariantViolation,
                  "utterance of " + u.speaker + " has end <= start");
    if (u.start_s < 0.0 || u.end_s > t.duration_s + 1e-9)
      throw Error(ErrorKind::InvariantViolation,
                  "utterance of " + u.speaker + " outside [0, duration]");
    if (u.start_s < prev_start)
      throw Error(ErrorKind::InvariantViolation, "utterances not sorted by start");
    prev_start = u.start_s;
    auto it = last_end.find(u.speaker);
    if (it != last_end.end() && u.start_s < it->second)
      throw Error(ErrorKind::InvariantViolation, "speaker " + u.speaker + " overlaps itself");
    last_end[u.speaker] = u.end_s;
    seen.insert(u.speaker);
  }
  if (seen != t.speakers) throw Error(ErrorKind::InvariantViolation, "speaker set mismatch");
}

ConversationTranscript make_transcript(std::string conversation_id, double duration_s,
                                       std::vector<UtteranceSegment> utterances) {
  std::stable_sort(utterances.begin(), utterances.end(),
                   [](const auto& a, const auto& b) {
                     return a.start_s != b.start_s ? a.start_s < b.start_s : a.speaker < b.speaker;
                   });
  ConversationTranscript t{std::move(conversation_id), duration_s, std::move(utterances), {}};
  for (const auto& u : t.utterances) t.speakers.insert(u.speaker);
  validate(t);
  return t;
}

ConversationTranscript parse_rttm(const std::string& text, std::optional<double> duration_s) {
  std::istringstream in(text);
  std::string line, conv_id;
  std::vector<UtteranceSegment> utts;
  double max_end = 0.0;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::vector<std::string> f;
    for (std::string tok; ls >> tok;) f.push_back(tok);
    if (f.empty() || f[0].starts_with("#")) continue;
    if (f[0] != "SPEAKER") continue;
    if (f.size() < 8)
      throw Error(ErrorKind::ParseError, "RTTM line " + std::to_string(lineno) + " too short");
    double onset, dur;
    try {
      onset = std::stod(f[3]);
      dur = std::stod(f[4]);
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, "RTTM line " + std::to_string(lineno) + " bad number");
    }
    if (conv_id.empty()) conv_id = f[1];
    utts.push_back({f[7], onset, onset + dur, std::nullopt});
    max_end = std::max(max_end, onset + dur);
  }
  return make_transcript(conv_id, duration_s.value_or(max_end), std::move(utts));
}

ConversationTranscript transcript_from_json(const json& j) {
  try {
    std::vector<UtteranceSegment> utts;
    for (const auto& u : j.at("utterances")) {
      UtteranceSegment s{u.at("speaker").get<std::string>(), u.at("start_s").get<double>(),
                         u.at("end_s").get<double>(), std::nullopt};
      if (u.contains("audio") && !u["audio"].is_null())
        s.audio = AudioRef{u["audio"].at("path").get<std::string>(),
                           u["audio"].value("offset_s", 0.0)};
      utts.push_back(std::move(s));
    }
    return make_transcript(j.at("conversation_id").get<std::string>(),
                           j.at("duration_s").get<double>(), std::move(utts));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

json to_json(const ConversationTranscript& t) {
  json utts = json::array();
  for (const auto& u : t.utterances) {
    json ju = {{"speaker", u.speaker}, {"start_s", u.start_s}, {"end_s", u.end_s}};
    if (u.audio) ju["audio"] = {{"path", u.audio->path}, {"offset_s", u.audio->offset_s}};
    utts.push_back(std::move(ju));
  }
  return {{"conversation_id", t.conversation_id}, {"duration_s", t.duration_s},
          {"utterances", std::move(utts)}};
}

ConversationTranscript load_transcript(const std::filesystem::path& path, TranscriptFormat format) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  if (format == TranscriptFormat::Rttm) return parse_rttm(ss.str());
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  return transcript_from_json(j);
}

void save_transcript(const ConversationTranscript& t, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot create " + path.string());
  out << to_json(t).dump(2) << '\n';
}

namespace {

// Boundary sweep: (time, +1/-1) events; returns measure covered by
// >= 1 and >= 2 simultaneously active utterances inside [lo, hi].
struct Coverage {
  double any = 0.0;
  double multi = 0.0;
};

Coverage sweep(const std::vector<UtteranceSegment>& utts, double lo, double hi) {
  std::vector<std::pair<double, int>> ev;
  ev.reserve(utts.size() * 2);
  for (const auto& u : utts) {
    const double a = std::max(u.start_s, lo), b = std::min(u.end_s, hi);
    if (b <= a) continue;
    ev.emplace_back(a, +1);
    ev.emplace_back(b, -1);
  }
  std::sort(ev.begin(), ev.end());
  Coverage c;
  int active = 0;
  double prev = lo;
  for (const auto& [time, delta] : ev) {
    const double span = time - prev;
    if (active >= 1) c.any += span;
    if (active >= 2) c.multi += span;
    active += delta;
    prev = time;
  }
  return c;
}

}  // namespace

double overlap_ratio(const ConversationTranscript& t) {
  const Coverage c = sweep(t.utterances, -std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity());
  return c.any > 0.0 ? c.multi / c.any : 0.0;
}

SpeechActivity speech_activity(const ConversationTranscript& t, TimeWindow window) {
  if (!(window.start_s >= 0.0 && window.end_s > window.start_s &&
        window.end_s <= t.duration_s + 1e-9))
    throw Error(ErrorKind::BadWindow, "window must satisfy 0 <= a < b <= duration");
  SpeechActivity act;
  for (const auto& u : t.utterances) {
    const double d = std::min(u.end_s, window.end_s) - std::max(u.start_s, window.start_s);
    if (d > 0.0) {
      act.per_speaker_duration[u.speaker] += d;
      act.active_speakers.insert(u.speaker);
    }
  }
  act.total_speech_fraction = sweep(t.utterances, window.start_s, window.end_s).any /
                              window.length();
  return act;
}

bool window_qualifies(const ConversationTranscript& t, TimeWindow window, const SegmentRules& rules) {
  const SpeechActivity act = speech_activity(t, window);
  return act.total_speech_fraction >= rules.min_speech_frac &&
         act.active_speakers.size() >= rules.min_active;
}

std::vector<double> select_segments(const ConversationTranscript& t, const SegmentRules& rules,
                                    std::uint64_t seed) {
  std::vector<double> starts;
  if (t.duration_s < rules.seg_len_s || rules.seg_len_s <= 0.0) return starts;
  const auto last = static_cast<long>(std::floor(t.duration_s - rules.seg_len_s + 1e-9));
  for (long k = 0; k <= last; ++k) {
    const double a = static_cast<double>(k);
    if (window_qualifies(t, {a, a + rules.seg_len_s}, rules)) starts.push_back(a);
  }
  Rng rng(seed);
  for (std::size_t i = starts.size(); i > 1; --i) std::swap(starts[i - 1], starts[rng.below(i)]);
  return starts;
}

ConversationTranscript crop(const ConversationTranscript& t, TimeWindow window) {
  std::vector<UtteranceSegment> utts;
  for (const auto& u : t.utterances) {
    const double a = std::max(u.start_s, window.start_s), b = std::min(u.end_s, window.end_s);
    if (b <= a) continue;
    UtteranceSegment s{u.speaker, a - window.start_s, b - window.start_s, std::nullopt};
    if (u.audio) s.audio = AudioRef{u.audio->path, u.audio->offset_s + (a - u.start_s)};
    utts.push_back(std::move(s));
  }
  return make_transcript(t.conversation_id, window.length(), std::move(utts));
}

}  // namespace tce

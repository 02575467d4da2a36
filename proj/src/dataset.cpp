#include "tce/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "tce/augment.hpp"
#include "tce/error.hpp"
#include "tce/parallel.hpp"
#include "tce/random.hpp"

namespace tce {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::string relative_to(const fs::path& p, const fs::path& base) {
  return fs::absolute(p).lexically_normal().lexically_relative(fs::absolute(base).lexically_normal()).generic_string();
}

std::vector<double> range_of(const json& j, const char* key, std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != 2 || v[0] > v[1])
    throw Error(ErrorKind::ParseError, std::string(key) + " must be [lo, hi] with lo <= hi");
  return v;
}

json rebase_value(const json& v, const fs::path& from, const fs::path& to) {
  if (v.is_string()) return relative_to(resolve(from, v.get<std::string>()), to);
  if (v.is_array()) {
    json out = json::array();
    for (const auto& x : v) out.push_back(rebase_value(x, from, to));
    return out;
  }
  return v;
}

double draw_in(Rng& rng, double lo, double hi) { return lo == hi ? lo : rng.uniform(lo, hi); }

}  // namespace

json rebase_entry(json entry, const fs::path& from, const fs::path& to) {
  if (entry.contains("paths"))
    for (auto& [key, v] : entry["paths"].items()) v = rebase_value(v, from, to);
  if (entry.contains("output")) entry["output"] = rebase_value(entry["output"], from, to);
  return entry;
}

std::string relative_path(const fs::path& p, const fs::path& base) { return relative_to(p, base); }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
}

void write_json(const json& j, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot create " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

Catalog Catalog::load(const fs::path& path) {
  const json j = read_json(path);
  const fs::path base = path.parent_path();
  Catalog c;
  try {
    for (const auto& e : j.at("conversations")) {
      CatalogEntry entry;
      entry.transcript = resolve(base, e.at("transcript").get<std::string>());
      entry.split = e.value("split", std::string("train"));
      if (e.contains("tracks"))
        for (const auto& [spk, p] : e.at("tracks").items()) entry.tracks[spk] = resolve(base, p.get<std::string>());
      c.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  return c;
}

void Catalog::save(const fs::path& path) const {
  const fs::path base = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  json list = json::array();
  for (const auto& e : entries) {
    json tracks = json::object();
    for (const auto& [spk, p] : e.tracks) tracks[spk] = relative_to(p, base);
    list.push_back({{"transcript", relative_to(e.transcript, base)}, {"split", e.split}, {"tracks", tracks}});
  }
  write_json({{"conversations", list}}, path);
}

ConversationTranscript load_entry_transcript(const CatalogEntry& e) {
  const auto format = e.transcript.extension() == ".rttm" ? TranscriptFormat::Rttm : TranscriptFormat::Json;
  return load_transcript(e.transcript, format);
}

Tracks load_entry_tracks(const CatalogEntry& e, const ConversationTranscript& t) {
  if (e.tracks.empty()) return load_tracks(t, e.transcript.parent_path());
  const Eigen::Index n = to_samples(t.duration_s);
  Tracks tracks;
  for (const auto& spk : t.speakers) {
    auto it = e.tracks.find(spk);
    if (it == e.tracks.end())
      throw Error(ErrorKind::MissingTrack, "no track for speaker " + spk + " in " + t.conversation_id);
    Waveform w = read_wav(it->second);
    if (w.size() != n) {
      Waveform fitted = Waveform::zeros(n);
      const Eigen::Index m = std::min(n, w.size());
      fitted.samples.head(m) = w.samples.head(m);
      w = std::move(fitted);
    }
    tracks[spk] = std::move(w);
  }
  return tracks;
}

CatalogEntry write_conversation(const ConversationTranscript& t, const Tracks& tracks, const fs::path& dir,
                                const std::string& split) {
  fs::create_directories(dir / "tracks");
  CatalogEntry e;
  e.transcript = dir / "transcript.json";
  e.split = split;
  save_transcript(t, e.transcript);
  for (const auto& [spk, w] : tracks) {
    e.tracks[spk] = dir / "tracks" / (spk + ".wav");
    write_wav(w, e.tracks[spk]);
  }
  return e;
}

Tracks crop_tracks(const Tracks& tracks, TimeWindow window) {
  const std::int64_t a = to_samples(window.start_s), n = to_samples(window.length());
  Tracks out;
  for (const auto& [spk, w] : tracks) {
    Waveform c = Waveform::zeros(n, w.sample_rate);
    const std::int64_t m = std::clamp<std::int64_t>(w.size() - a, 0, n);
    if (m > 0) c.samples.head(m) = w.samples.segment(a, m);
    out[spk] = std::move(c);
  }
  return out;
}

DatasetSpec DatasetSpec::from_json(const json& j, const fs::path& base) {
  DatasetSpec s;
  try {
    s.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("rules")) {
      const auto& r = j.at("rules");
      s.rules.seg_len_s = r.value("segment_s", s.rules.seg_len_s);
      s.rules.min_speech_frac = r.value("min_speech_frac", s.rules.min_speech_frac);
      s.rules.min_active = r.value("min_active", s.rules.min_active);
    }
    s.rules.seg_len_s = j.value("segment_s", s.rules.seg_len_s);
    if (j.contains("catalog")) {
      const auto& c = j.at("catalog");
      if (c.is_string()) {
        s.catalog = Catalog::load(resolve(base, c.get<std::string>())).entries;
      } else {
        for (const auto& item : c) {
          const auto part = Catalog::load(resolve(base, item.get<std::string>())).entries;
          s.catalog.insert(s.catalog.end(), part.begin(), part.end());
        }
      }
    }
    const json counts = j.value("counts", json::object());
    for (const auto& [split, n] : counts.items()) s.counts[split] = n.get<std::size_t>();
    if (j.contains("augment")) {
      const auto& a = j.at("augment");
      Augment aug;
      aug.p = a.value("p", aug.p);
      aug.pool = resolve(base, a.at("pool").get<std::string>());
      aug.splits = a.value("splits", aug.splits);
      s.augment = aug;
    }
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      Noise noise;
      for (const auto& f : n.at("files")) noise.files.push_back(resolve(base, f.get<std::string>()));
      const auto r = range_of(n, "snr_db", {noise.snr_lo_db, noise.snr_hi_db});
      noise.snr_lo_db = r[0];
      noise.snr_hi_db = r[1];
      if (noise.files.empty()) throw Error(ErrorKind::ParseError, "noise.files is empty");
      s.noise = noise;
    }
    const auto sir = range_of(j, "sir_db", {s.sir_lo_db, s.sir_hi_db});
    s.sir_lo_db = sir[0];
    s.sir_hi_db = sir[1];
    s.enrollment_s = j.value("enrollment_s", s.enrollment_s);
    if (j.contains("embeddings") && j.at("embeddings").contains("dir"))
      s.embedding_dir = resolve(base, j.at("embeddings").at("dir").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("dataset spec: ") + e.what());
  }
  if (!(s.enrollment_s > 0.0)) throw Error(ErrorKind::ParseError, "enrollment_s must be positive");
  return s;
}

void check_speaker_disjointness(const std::vector<CatalogEntry>& catalog) {
  std::set<std::string> test, other;
  for (const auto& e : catalog) {
    const auto t = load_entry_transcript(e);
    auto& dst = e.split == "test" ? test : other;
    dst.insert(t.speakers.begin(), t.speakers.end());
  }
  for (const auto& s : test)
    if (other.contains(s)) throw Error(ErrorKind::SpeakerLeak, "speaker " + s + " appears in test and train/val");
}

json write_sample_audio(const MixtureSample& s, const fs::path& dir, const fs::path& manifest_dir) {
  fs::create_directories(dir);
  auto put = [&](const Waveform& w, const std::string& name) {
    write_wav(w, dir / name);
    return relative_to(dir / name, manifest_dir);
  };
  json paths;
  paths["mixture"] = put(s.mixture, "mixture.wav");
  paths["target"] = put(s.target, "target.wav");
  paths["wrong"] = put(s.wrong_conversation(), "wrong.wav");
  paths["reference"] = put(s.reference, "reference.wav");
  paths["others"] = json::array();
  for (std::size_t k = 0; k < s.others.size(); ++k)
    paths["others"].push_back(put(s.others[k], "conv_" + std::to_string(k) + ".wav"));
  paths["interference"] = json::array();
  for (std::size_t k = 0; k < s.interference.size(); ++k)
    paths["interference"].push_back(put(s.interference[k], "inter_" + std::to_string(k) + ".wav"));
  if (s.meta.snr_db) paths["noise"] = put(s.noise, "noise.wav");
  if (s.embedding.vector.size() > 0) {
    save_embedding(s.embedding, dir / "embedding.bin");
    paths["embedding"] = relative_to(dir / "embedding.bin", manifest_dir);
  }
  return paths;
}

LoadedSample load_sample(const json& entry, const fs::path& manifest_dir) {
  LoadedSample out;
  try {
    const auto& p = entry.at("paths");
    auto wav = [&](const json& v) { return read_wav(resolve(manifest_dir, v.get<std::string>())); };
    MixtureSample& s = out.sample;
    s.mixture = wav(p.at("mixture"));
    s.target = wav(p.at("target"));
    s.reference = wav(p.at("reference"));
    for (const auto& v : p.at("others")) s.others.push_back(wav(v));
    for (const auto& v : p.at("interference")) s.interference.push_back(wav(v));
    s.noise = p.contains("noise") ? wav(p.at("noise")) : Waveform::zeros(s.mixture.size());
    if (p.contains("embedding"))
      s.embedding = load_embedding(resolve(manifest_dir, p.at("embedding").get<std::string>()),
                                   entry.value("reference_identity", std::string{}));
    s.meta.reference_speaker_id = entry.value("reference_identity", std::string{});
    s.meta.conversation_id = entry.value("conversation_id", std::string{});
    s.meta.interference_id = entry.at("interference").value("conversation_id", std::string{});
    s.meta.sir_db = entry.value("sir_db", 0.0);
    if (entry.contains("snr_db") && !entry.at("snr_db").is_null()) s.meta.snr_db = entry.at("snr_db").get<double>();
    const auto& g = entry.at("gains");
    s.meta.gains = {g.at("interference").get<double>(), g.at("noise").get<double>(), g.at("clip").get<double>()};
    out.transcript = transcript_from_json(entry.at("transcript"));
    out.conversation_speakers = entry.at("conversation_speakers").get<std::vector<std::string>>();
    out.interference_speakers = entry.at("interference").at("speakers").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("manifest entry: ") + e.what());
  }
  if (out.conversation_speakers.size() != out.sample.others.size() + 1)
    throw Error(ErrorKind::ParseError, "manifest entry: speaker list does not match the stored tracks");
  return out;
}

namespace {

struct Context {
  const DatasetSpec& spec;
  std::vector<ConversationTranscript> transcripts;     // parallel to spec.catalog
  std::map<std::string, std::vector<std::size_t>> by_split;
  std::optional<UtterancePool> pool;
  fs::path out_dir;
};

SpeakerEmbedding embedding_for(const Context& ctx, const std::string& speaker) {
  if (ctx.spec.embedding_dir) return load_embedding(*ctx.spec.embedding_dir / (speaker + ".bin"), speaker);
  return pseudo_embedding(speaker, ctx.spec.seed);
}

struct Target {
  std::size_t conversation = 0;
  TimeWindow window;
  std::string reference;
  Enrollment enrollment;
  Tracks tracks;  // cropped
  ConversationTranscript transcript;  // cropped
  std::map<std::string, std::string> replaced;
};

// Picks a conversation, window and reference with usable enrollment audio.
Target pick_target(const Context& ctx, const std::string& split, std::uint64_t seed, bool augment) {
  const auto& ids = ctx.by_split.at(split);
  const SegmentRules& rules = ctx.spec.rules;
  Rng rng(derive_seed(seed, {0}));
  const std::size_t first = rng.below(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const std::size_t c = ids[(first + k) % ids.size()];
    const ConversationTranscript& t = ctx.transcripts[c];
    const auto windows = select_segments(t, rules, derive_seed(seed, {1, c}));
    if (windows.empty()) continue;
    Tracks full = load_entry_tracks(ctx.spec.catalog[c], t);
    for (double start : windows) {
      Target out;
      out.conversation = c;
      out.window = {start, start + rules.seg_len_s};
      out.transcript = crop(t, out.window);
      for (auto& u : out.transcript.utterances) u.audio.reset();
      out.tracks = crop_tracks(full, out.window);
      for (auto it = out.tracks.begin(); it != out.tracks.end();)
        it = out.transcript.speakers.contains(it->first) ? std::next(it) : out.tracks.erase(it);
      if (augment) {
        AugmentResult a = augment_conversation(out.transcript, out.tracks,
                                               {ctx.spec.augment->p, &*ctx.pool, derive_seed(seed, {2, c})});
        out.tracks = std::move(a.tracks);
        out.replaced = std::move(a.replaced);
      }
      out.reference = choose_reference(out.transcript, {0.0, rules.seg_len_s}, derive_seed(seed, {3, c}));
      auto rep = out.replaced.find(out.reference);
      if (rep != out.replaced.end()) {
        out.enrollment.audio = draw_from_speaker(*ctx.pool, rep->second, to_samples(ctx.spec.enrollment_s),
                                                 derive_seed(seed, {4, c}));
        return out;
      }
      try {
        out.enrollment = select_enrollment(t, full.at(out.reference), out.reference, out.window,
                                           ctx.spec.enrollment_s, derive_seed(seed, {4, c}));
        return out;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::InsufficientEnrollment) throw;
      }
    }
  }
  throw Error(ErrorKind::InsufficientEnrollment,
              "no " + split + " conversation has a qualifying window with enough enrollment speech");
}

json build_sample(const Context& ctx, const std::string& split, std::size_t index) {
  const DatasetSpec& spec = ctx.spec;
  const std::uint64_t seed = derive_seed(spec.seed, {hash_string(split), index});
  const bool augment = spec.augment && std::find(spec.augment->splits.begin(), spec.augment->splits.end(),
                                                 split) != spec.augment->splits.end();
  Target tgt = pick_target(ctx, split, seed, augment);
  const ConversationTranscript& full = ctx.transcripts[tgt.conversation];

  std::vector<ConversationTranscript> split_catalog;
  for (std::size_t c : ctx.by_split.at(split)) split_catalog.push_back(ctx.transcripts[c]);
  const InterferenceChoice ic = sample_interference(split_catalog, full, spec.rules, derive_seed(seed, {5}));
  const std::size_t inter_c = ctx.by_split.at(split)[ic.conversation];
  const ConversationTranscript& inter_t = ctx.transcripts[inter_c];
  const TimeWindow inter_w{ic.window_start_s, ic.window_start_s + spec.rules.seg_len_s};
  const ConversationTranscript inter_crop = crop(inter_t, inter_w);
  const Tracks inter_tracks = crop_tracks(load_entry_tracks(spec.catalog[inter_c], inter_t), inter_w);

  auto identity = [&](const std::string& s) {
    auto it = tgt.replaced.find(s);
    return it == tgt.replaced.end() ? s : it->second;
  };
  std::vector<std::string> conv_speakers{tgt.reference};
  for (const auto& s : tgt.transcript.speakers)
    if (s != tgt.reference) conv_speakers.push_back(s);
  std::vector<std::string> inter_speakers(inter_crop.speakers.begin(), inter_crop.speakers.end());
  for (const auto& s : inter_speakers)
    for (const auto& c : conv_speakers)
      if (identity(c) == s) throw Error(ErrorKind::InvariantViolation, "interference shares speaker " + s);

  MixInput in;
  in.reference = tgt.tracks.at(tgt.reference);
  for (std::size_t k = 1; k < conv_speakers.size(); ++k) in.others.push_back(tgt.tracks.at(conv_speakers[k]));
  for (const auto& s : inter_speakers) in.interference.push_back(inter_tracks.at(s));

  Rng rng(derive_seed(seed, {6}));
  const double sir = draw_in(rng, spec.sir_lo_db, spec.sir_hi_db);
  std::optional<double> snr;
  std::string noise_file;
  if (spec.noise) {
    const auto& files = spec.noise->files;
    const fs::path& f = files[rng.below(files.size())];
    noise_file = f.filename().string();
    in.noise = fit_length(read_wav(f), in.reference.size(), rng);
    snr = draw_in(rng, spec.noise->snr_lo_db, spec.noise->snr_hi_db);
  }

  MixtureSample s = mix(in, sir, snr);
  const std::string ref_id = identity(tgt.reference);
  s.embedding = embedding_for(ctx, ref_id);
  s.meta.reference_speaker_id = ref_id;
  s.meta.conversation_id = full.conversation_id;
  s.meta.interference_id = inter_t.conversation_id;
  check_invariants(s);

  char name[32];
  std::snprintf(name, sizeof name, "%s_%05zu", split.c_str(), index);
  const fs::path dir = ctx.out_dir / split / name;
  json paths = write_sample_audio(s, dir, ctx.out_dir);
  write_wav(tgt.enrollment.audio, dir / "enrollment.wav");
  paths["enrollment"] = relative_to(dir / "enrollment.wav", ctx.out_dir);

  json replaced = json::object();
  for (const auto& [a, b] : tgt.replaced) replaced[a] = b;
  json entry;
  entry["id"] = name;
  entry["split"] = split;
  entry["seed"] = seed;
  entry["conversation_id"] = full.conversation_id;
  entry["window"] = {{"start_s", tgt.window.start_s}, {"end_s", tgt.window.end_s}};
  entry["reference_speaker"] = tgt.reference;
  entry["reference_identity"] = ref_id;
  entry["conversation_speakers"] = conv_speakers;
  entry["replaced"] = replaced;
  entry["interference"] = {{"conversation_id", inter_t.conversation_id},
                           {"window_start_s", ic.window_start_s},
                           {"speakers", inter_speakers}};
  entry["sir_db"] = sir;
  entry["snr_db"] = snr ? json(*snr) : json(nullptr);
  entry["noise_file"] = noise_file.empty() ? json(nullptr) : json(noise_file);
  entry["measured_sir_db"] = measured_sir_db(s);
  entry["gains"] = {{"interference", s.meta.gains.interference},
                    {"noise", s.meta.gains.noise},
                    {"clip", s.meta.gains.clip}};
  entry["overlap_ratio"] = overlap_ratio(tgt.transcript);
  entry["transcript"] = to_json(tgt.transcript);
  entry["paths"] = paths;
  entry["output"] = nullptr;
  return entry;
}

}  // namespace

json build_dataset(const DatasetSpec& spec, const fs::path& out_dir, int jobs) {
  Context ctx{spec, {}, {}, std::nullopt, out_dir};
  for (std::size_t i = 0; i < spec.catalog.size(); ++i) {
    ctx.transcripts.push_back(load_entry_transcript(spec.catalog[i]));
    ctx.by_split[spec.catalog[i].split].push_back(i);
  }
  check_speaker_disjointness(spec.catalog);
  if (spec.augment) {
    ctx.pool = UtterancePool::from_manifest(spec.augment->pool);
    validate(*ctx.pool);
  }

  std::vector<std::pair<std::string, std::size_t>> jobs_list;
  for (const auto& [split, n] : spec.counts) {
    if (n > 0 && !ctx.by_split.contains(split))
      throw Error(ErrorKind::InvariantViolation, "no catalog conversations for split " + split);
    for (std::size_t i = 0; i < n; ++i) jobs_list.emplace_back(split, i);
  }
  fs::create_directories(out_dir);
  std::vector<json> entries(jobs_list.size());
  parallel_for(jobs_list.size(), jobs, [&](std::size_t i) {
    entries[i] = build_sample(ctx, jobs_list[i].first, jobs_list[i].second);
  });

  json manifest;
  manifest["version"] = 1;
  manifest["seed"] = spec.seed;
  manifest["segment_s"] = spec.rules.seg_len_s;
  manifest["samples"] = entries;
  write_json(manifest, out_dir / "manifest.json");
  return manifest;
}

}  // namespace tce

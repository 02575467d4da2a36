// tce: command line front end for the target conversation extraction pipeline.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <boost/version.hpp>

#include "CLI11.hpp"
#include "json.hpp"
#include "tce/augment.hpp"
#include "tce/dataset.hpp"
#include "tce/error.hpp"
#include "tce/metrics.hpp"
#include "tce/netref/bench.hpp"
#include "tce/netref/model.hpp"
#include "tce/parallel.hpp"
#include "tce/perturb.hpp"
#include "tce/toy.hpp"

#ifndef TCE_VERSION
#define TCE_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tce;

namespace {

enum class Level { Error = 0, Warn, Info, Debug };
Level g_level = Level::Info;

Level parse_level(const std::string& s) {
  if (s == "error") return Level::Error;
  if (s == "warn") return Level::Warn;
  if (s == "info") return Level::Info;
  if (s == "debug") return Level::Debug;
  throw CLI::ValidationError("--log-level", "expected error, warn, info or debug, got '" + s + "'");
}

template <typename... Args>
void log(Level level, const char* fmt, Args... args) {
  if (level > g_level) return;
  static const char* tags[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[%s] ", tags[static_cast<int>(level)]);
  if constexpr (sizeof...(Args) == 0)
    std::fputs(fmt, stderr);
  else
    std::fprintf(stderr, fmt, args...);
  std::fputc('\n', stderr);
}

struct Globals {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string log_level;
  std::vector<std::string> argv;
};

// Written beside every output; contains nothing run-dependent besides the arguments.
void write_run_record(const Globals& g, const std::string& subcommand, const fs::path& dir) {
  json rec;
  rec["tool"] = "tce";
  rec["version"] = TCE_VERSION;
  rec["subcommand"] = subcommand;
  rec["args"] = g.argv;
  rec["seed"] = g.seed;
  rec["versions"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                   "." + std::to_string(EIGEN_MINOR_VERSION)},
                     {"boost", BOOST_LIB_VERSION},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  write_json(rec, (dir.empty() ? fs::path(".") : dir) / "run_record.json");
}

fs::path dir_of(const fs::path& file) { return file.has_parent_path() ? file.parent_path() : fs::path("."); }

std::string sample_name(const std::string& prefix, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%04zu", prefix.c_str(), i);
  return buf;
}

// --- toy-pool -------------------------------------------------------------

struct ToyPoolOpts {
  fs::path out;
  int speakers = 6;
  int per_speaker = 4;
  std::string prefix = "spk";
  std::string language = "en";
  int noise_files = 0;
  double noise_len_s = 90.0;
};

void run_toy_pool(const Globals& g, const ToyPoolOpts& o) {
  const UtterancePool pool = toy_pool(o.language, o.prefix, o.speakers, o.per_speaker, g.seed);
  save_pool(pool, o.out);
  if (o.noise_files > 0) fs::create_directories(o.out / "noise");
  for (int k = 0; k < o.noise_files; ++k)
    write_wav(toy_noise(o.noise_len_s, derive_seed(g.seed, {hash_string("noise"), std::uint64_t(k)})),
              o.out / "noise" / (std::to_string(k) + ".wav"));
  log(Level::Info, "wrote %d speakers to %s", o.speakers, o.out.string().c_str());
  write_run_record(g, "toy-pool", o.out);
}

// --- synth ----------------------------------------------------------------

struct SynthOpts {
  fs::path pool, stats, out;
  std::size_t count = 1;
  std::size_t speakers = 2;
  double duration_s = 90.0;
  std::string split = "train";
  std::string prefix = "conv";
};

void run_synth(const Globals& g, const SynthOpts& o) {
  const UtterancePool pool = UtterancePool::from_manifest(o.pool);
  validate(pool);
  TurnTakingStats stats = TurnTakingStats::default_stand_in();
  if (!o.stats.empty()) stats = TurnTakingStats::from_json(read_json(o.stats));
  validate(stats);
  Catalog catalog;
  catalog.entries.resize(o.count);
  parallel_for(o.count, g.jobs, [&](std::size_t i) {
    const std::string id = sample_name(o.prefix, i);
    SynthResult r = synth_conversation(stats, o.speakers, o.duration_s, pool, derive_seed(g.seed, {i}), id);
    catalog.entries[i] = write_conversation(r.transcript, r.tracks, o.out / id, o.split);
  });
  catalog.save(o.out / "catalog.json");
  log(Level::Info, "synthesised %zu conversations", o.count);
  write_run_record(g, "synth", o.out);
}

// --- augment --------------------------------------------------------------

struct AugmentOpts {
  fs::path catalog, pool, out;
  double p = 0.5;
  bool cross_lingual = false;
};

void run_augment(const Globals& g, const AugmentOpts& o) {
  const Catalog in = Catalog::load(o.catalog);
  const UtterancePool pool = UtterancePool::from_manifest(o.pool);
  validate(pool);
  const double p = o.cross_lingual ? 1.0 : o.p;
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidConfig, "--p must lie in [0, 1]");
  Catalog out;
  out.entries.resize(in.entries.size());
  std::vector<json> replaced(in.entries.size());
  parallel_for(in.entries.size(), g.jobs, [&](std::size_t i) {
    const auto& e = in.entries[i];
    const ConversationTranscript t = load_entry_transcript(e);
    const Tracks tracks = load_entry_tracks(e, t);
    AugmentResult r = augment_conversation(t, tracks, {p, &pool, derive_seed(g.seed, {i})});
    // Persist under the replacement identities.
    std::vector<UtteranceSegment> utts = r.transcript.utterances;
    Tracks renamed;
    for (auto& u : utts) {
      u.audio.reset();
      if (auto it = r.replaced.find(u.speaker); it != r.replaced.end()) u.speaker = it->second;
    }
    for (auto& [spk, w] : r.tracks) {
      auto it = r.replaced.find(spk);
      renamed[it == r.replaced.end() ? spk : it->second] = std::move(w);
    }
    const auto renamed_t = make_transcript(t.conversation_id, t.duration_s, std::move(utts));
    out.entries[i] = write_conversation(renamed_t, renamed, o.out / t.conversation_id, e.split);
    json m = json::object();
    for (const auto& [a, b] : r.replaced) m[a] = b;
    replaced[i] = {{"conversation_id", t.conversation_id}, {"replaced", m}};
  });
  out.save(o.out / "catalog.json");
  write_json({{"p", p}, {"seed", g.seed}, {"conversations", replaced}}, o.out / "augment.json");
  write_run_record(g, "augment", o.out);
}

// --- mix ------------------------------------------------------------------

void run_mix(const Globals& g, const fs::path& spec_path, const fs::path& out, std::optional<std::uint64_t> seed_flag) {
  json j = read_json(spec_path);
  if (seed_flag) j["seed"] = *seed_flag;
  const DatasetSpec spec = DatasetSpec::from_json(j, dir_of(spec_path));
  const json manifest = build_dataset(spec, out, g.jobs);
  log(Level::Info, "wrote %zu samples to %s", manifest["samples"].size(), (out / "manifest.json").string().c_str());
  write_run_record(g, "mix", out);
}

// --- separate ---------------------------------------------------------------

struct SeparateOpts {
  fs::path in, emb, weights, out, manifest, config, save_weights;
  std::string variant;
  bool random_init = false;
};

void run_separate(const Globals& g, const SeparateOpts& o) {
  netref::ModelConfig cfg;
  if (!o.config.empty()) cfg = netref::ModelConfig::from_json(read_json(o.config));
  if (!o.variant.empty()) cfg.global_variant = netref::parse_variant(o.variant);
  cfg.validate();
  if (o.random_init == !o.weights.empty())
    throw CLI::ValidationError("separate", "give exactly one of --weights or --random-init");
  const netref::WeightStore w =
      o.random_init ? netref::random_weights(cfg, g.seed) : netref::WeightStore::load(o.weights);
  netref::check_weights(w, cfg);
  if (!o.save_weights.empty()) {
    if (o.save_weights.has_parent_path()) fs::create_directories(o.save_weights.parent_path());
    w.save(o.save_weights);
  }

  if (!o.manifest.empty()) {
    const json m = read_json(o.manifest);
    const fs::path from = dir_of(o.manifest);
    json samples = m.at("samples");
    fs::create_directories(o.out / "outputs");
    parallel_for(samples.size(), g.jobs, [&](std::size_t i) {
      json& entry = samples[i];
      const auto& p = entry.at("paths");
      const Waveform x = read_wav(from / p.at("mixture").get<std::string>());
      const SpeakerEmbedding e = load_embedding(from / p.at("embedding").get<std::string>());
      const fs::path y_path = o.out / "outputs" / (entry.at("id").get<std::string>() + ".wav");
      write_wav(netref::forward(x, e, w, cfg), y_path);
      entry = rebase_entry(entry, from, o.out);
      entry["output"] = relative_path(y_path, o.out);
    });
    json out = m;
    out["samples"] = samples;
    out["model"] = {{"config", cfg.to_json()}, {"param_count", w.param_count()}};
    write_json(out, o.out / "manifest.json");
    write_run_record(g, "separate", o.out);
    return;
  }
  if (o.in.empty() || o.emb.empty())
    throw CLI::ValidationError("separate", "give --manifest, or --in together with --emb");
  const Waveform x = read_wav(o.in);
  const SpeakerEmbedding e = load_embedding(o.emb);
  if (o.out.has_parent_path()) fs::create_directories(o.out.parent_path());
  write_wav(netref::forward(x, e, w, cfg), o.out);
  write_run_record(g, "separate", dir_of(o.out));
}

// --- eval -------------------------------------------------------------------

struct EvalRow {
  std::string id;
  double snr = 0, si_sdr = 0, in_snr = 0, in_si_sdr = 0, snri = 0, si_sdri = 0;
  bool incorrect = false;
};

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

json summary_json(const std::vector<double>& v) {
  const Summary s = summarize(v);
  return {{"mean", s.count ? json(s.mean) : json(nullptr)},
          {"std", s.count > 1 ? json(s.std) : json(nullptr)},
          {"count", s.count},
          {"non_finite", s.non_finite}};
}

// Paired test on the rows where both sides are finite; null when it cannot run.
json t_test_json(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::isfinite(a[i]) && std::isfinite(b[i])) {
      x.push_back(a[i]);
      y.push_back(b[i]);
    }
  try {
    const TTestResult t = paired_t_test(x, y);
    return {{"t_stat", t.t_stat}, {"p_value", t.p_value}, {"df", t.df}, {"n", x.size()}};
  } catch (const Error& e) {
    return {{"error", e.what()}, {"n", x.size()}};
  }
}

std::map<std::string, std::pair<double, double>> read_baseline(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + csv.string());
  std::string line;
  std::getline(in, line);
  std::map<std::string, std::pair<double, double>> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() < 7) throw Error(ErrorKind::ParseError, "bad baseline row: " + line);
    rows[f[0]] = {std::stod(f[5]), std::stod(f[6])};
  }
  return rows;
}

void run_eval(const Globals& g, const fs::path& manifest_path, const fs::path& out, const fs::path& baseline) {
  const json m = read_json(manifest_path);
  const fs::path base = dir_of(manifest_path);
  const json& samples = m.at("samples");
  if (samples.empty()) throw Error(ErrorKind::EmptyList, "manifest has no samples");
  std::vector<EvalRow> rows(samples.size());
  std::vector<TargetCheck> checks(samples.size());
  parallel_for(samples.size(), g.jobs, [&](std::size_t i) {
    const json& e = samples[i];
    if (e.value("output", json()).is_null())
      throw Error(ErrorKind::ParseError, "sample " + e.at("id").get<std::string>() + " has no output; run separate first");
    const auto& p = e.at("paths");
    const Waveform y = read_wav(base / e.at("output").get<std::string>());
    const Waveform x = read_wav(base / p.at("mixture").get<std::string>());
    const Waveform target = read_wav(base / p.at("target").get<std::string>());
    const Waveform wrong = read_wav(base / p.at("wrong").get<std::string>());
    const EvalResult r = evaluate(e.at("id").get<std::string>(), x, y, target);
    EvalRow& row = rows[i];
    row.id = r.id;
    row.snr = r.snr_db;
    row.si_sdr = r.si_sdr_db;
    row.snri = r.snri_db;
    row.si_sdri = r.si_sdri_db;
    row.in_snr = snr(x, target);
    row.in_si_sdr = si_sdr(x, target);
    checks[i] = {y.samples, target.samples, wrong.samples, x.samples};
    row.incorrect = is_incorrect_target(checks[i]);
  });

  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  std::ofstream csv(out, std::ios::trunc);
  if (!csv) throw Error(ErrorKind::IoError, "cannot create " + out.string());
  csv << "id,snr_db,si_sdr_db,input_snr_db,input_si_sdr_db,snri_db,si_sdri_db,incorrect_target\n";
  std::vector<double> snr_v, sisdr_v, in_snr_v, in_sisdr_v, snri_v, sisdri_v;
  for (const auto& r : rows) {
    csv << r.id << ',' << fmt(r.snr) << ',' << fmt(r.si_sdr) << ',' << fmt(r.in_snr) << ',' << fmt(r.in_si_sdr)
        << ',' << fmt(r.snri) << ',' << fmt(r.si_sdri) << ',' << (r.incorrect ? 1 : 0) << '\n';
    snr_v.push_back(r.snr);
    sisdr_v.push_back(r.si_sdr);
    in_snr_v.push_back(r.in_snr);
    in_sisdr_v.push_back(r.in_si_sdr);
    snri_v.push_back(r.snri);
    sisdri_v.push_back(r.si_sdri);
  }
  json summary;
  summary["count"] = rows.size();
  summary["snr_db"] = summary_json(snr_v);
  summary["si_sdr_db"] = summary_json(sisdr_v);
  summary["snri_db"] = summary_json(snri_v);
  summary["si_sdri_db"] = summary_json(sisdri_v);
  summary["incorrect_target_ratio"] = incorrect_target_ratio<float>(checks);
  summary["t_test_vs_mixture"] = {{"snr_db", t_test_json(snr_v, in_snr_v)},
                                  {"si_sdr_db", t_test_json(sisdr_v, in_sisdr_v)}};
  if (!baseline.empty()) {
    const auto base_rows = read_baseline(baseline);
    std::vector<double> a_snri, b_snri, a_sisdri, b_sisdri;
    for (const auto& r : rows) {
      auto it = base_rows.find(r.id);
      if (it == base_rows.end()) throw Error(ErrorKind::ParseError, "baseline has no row for " + r.id);
      a_snri.push_back(r.snri);
      b_snri.push_back(it->second.first);
      a_sisdri.push_back(r.si_sdri);
      b_sisdri.push_back(it->second.second);
    }
    summary["t_test_vs_baseline"] = {{"snri_db", t_test_json(a_snri, b_snri)},
                                     {"si_sdri_db", t_test_json(a_sisdri, b_sisdri)}};
  }
  fs::path summary_path = out;
  summary_path.replace_extension(".summary.json");
  write_json(summary, summary_path);
  log(Level::Info, "evaluated %zu samples", rows.size());
  write_run_record(g, "eval", dir_of(out));
}

// --- perturb ----------------------------------------------------------------

struct PerturbOpts {
  std::string mode;
  double tau_s = 3.0;
  std::string speakers = "all";
  fs::path manifest, out;
};

void run_perturb(const Globals& g, const PerturbOpts& o) {
  const json m = read_json(o.manifest);
  const fs::path from = dir_of(o.manifest);
  json samples = m.at("samples");
  parallel_for(samples.size(), g.jobs, [&](std::size_t i) {
    json& entry = samples[i];
    const std::string id = entry.at("id").get<std::string>();
    const LoadedSample ls = load_sample(entry, from);
    Tracks tracks;
    tracks[ls.conversation_speakers[0]] = ls.sample.reference;
    for (std::size_t k = 1; k < ls.conversation_speakers.size(); ++k)
      tracks[ls.conversation_speakers[k]] = ls.sample.others[k - 1];
    std::set<std::string> who;
    if (o.speakers == "reference")
      who = {ls.conversation_speakers[0]};
    else
      who = ls.transcript.speakers;
    const std::uint64_t seed = derive_seed(g.seed, {hash_string(id)});
    const PerturbResult r = o.mode == "left" ? shift_all_left(ls.transcript, tracks, who)
                                             : random_shift(ls.transcript, tracks, o.tau_s, who, seed);
    MixtureSample s = ls.sample;
    s.reference = r.tracks.at(ls.conversation_speakers[0]);
    for (std::size_t k = 1; k < ls.conversation_speakers.size(); ++k)
      s.others[k - 1] = r.tracks.at(ls.conversation_speakers[k]);
    s.target = s.reference;
    for (const auto& w : s.others) s.target.samples += w.samples;
    s.mixture = s.target;
    for (const auto& w : s.interference) s.mixture.samples += w.samples;
    s.mixture.samples += s.noise.samples;
    check_invariants(s);

    const fs::path dir = o.out / entry.at("split").get<std::string>() / id;
    json paths = write_sample_audio(s, dir, o.out);
    const json old = rebase_entry(entry, from, o.out);
    if (old.at("paths").contains("enrollment")) paths["enrollment"] = old.at("paths").at("enrollment");
    entry["paths"] = paths;
    entry["output"] = nullptr;
    entry["transcript"] = to_json(r.transcript);
    entry["overlap_ratio"] = overlap_ratio(r.transcript);
    entry["perturbation"] = {{"mode", o.mode},
                             {"tau_s", o.mode == "left" ? json(nullptr) : json(o.tau_s)},
                             {"speakers", o.speakers},
                             {"seed", seed}};
  });
  json out = m;
  out["samples"] = samples;
  write_json(out, o.out / "manifest.json");
  write_run_record(g, "perturb", o.out);
}

// --- bench ------------------------------------------------------------------

struct BenchOpts {
  std::string variants = "pooling_attention,full_attention";
  double len_s = 60.0;
  int reps = 3;
  fs::path config, out;
};

void run_bench(const Globals& g, const BenchOpts& o) {
  netref::ModelConfig cfg;
  if (!o.config.empty()) cfg = netref::ModelConfig::from_json(read_json(o.config));
  const auto variants = netref::parse_variants(o.variants);
  const auto rows = netref::rtf_bench(cfg, variants, o.len_s, o.reps, g.seed);
  json table = json::array();
  std::printf("%-18s %8s %10s %10s %12s %7s\n", "variant", "len_s", "median_s", "rtf", "params", "threads");
  for (const auto& r : rows) {
    std::printf("%-18s %8.1f %10.3f %10.4f %12lld %7d\n", std::string(netref::to_string(r.variant)).c_str(),
                r.input_len_s, r.median_s, r.rtf, static_cast<long long>(r.param_count), r.threads);
    table.push_back(netref::to_json(r));
  }
  if (!o.out.empty()) {
    write_json({{"config", cfg.to_json()}, {"reps", o.reps}, {"rows", table}}, o.out);
    write_run_record(g, "bench", dir_of(o.out));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Target conversation extraction toolkit"};
  app.require_subcommand(1);
  Globals g;
  for (int i = 1; i < argc; ++i) g.argv.emplace_back(argv[i]);
  std::optional<std::uint64_t> seed_flag;
  app.add_option("--seed", seed_flag, "Master seed (default 0)");
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--log-level", g.log_level, "error, warn, info or debug (env TCE_LOG)");
  app.set_version_flag("--version", TCE_VERSION);

  ToyPoolOpts toy;
  auto* c_toy = app.add_subcommand("toy-pool", "Write a synthetic utterance pool");
  c_toy->add_option("--out", toy.out, "Output pool directory")->required();
  c_toy->add_option("--speakers", toy.speakers, "Number of speakers")->check(CLI::PositiveNumber);
  c_toy->add_option("--per-speaker", toy.per_speaker, "Utterances per speaker")->check(CLI::PositiveNumber);
  c_toy->add_option("--prefix", toy.prefix, "Speaker id prefix");
  c_toy->add_option("--language", toy.language, "Language tag stored in pool.json");
  c_toy->add_option("--noise-files", toy.noise_files, "Noise WAVs written under <out>/noise")->check(CLI::NonNegativeNumber);
  c_toy->add_option("--noise-len", toy.noise_len_s, "Length of each noise file, seconds")->check(CLI::PositiveNumber);

  SynthOpts syn;
  auto* c_syn = app.add_subcommand("synth", "Generate conversations from turn-taking statistics");
  c_syn->add_option("--pool", syn.pool, "Pool manifest (pool.json)")->required()->check(CLI::ExistingFile);
  c_syn->add_option("--stats", syn.stats, "Turn-taking statistics JSON; built-in stand-in if absent")->check(CLI::ExistingFile);
  c_syn->add_option("--count", syn.count, "Conversations to generate");
  c_syn->add_option("--speakers", syn.speakers, "Speakers per conversation")->check(CLI::PositiveNumber);
  c_syn->add_option("--duration", syn.duration_s, "Conversation length, seconds")->check(CLI::PositiveNumber);
  c_syn->add_option("--split", syn.split, "Split recorded in the catalog");
  c_syn->add_option("--prefix", syn.prefix, "Conversation id prefix");
  c_syn->add_option("--out", syn.out, "Output directory (catalog.json plus conversations)")->required();

  AugmentOpts aug;
  auto* c_aug = app.add_subcommand("augment", "Replace speakers while keeping the timing");
  c_aug->add_option("--catalog", aug.catalog, "Input catalog")->required()->check(CLI::ExistingFile);
  c_aug->add_option("--pool", aug.pool, "Replacement pool manifest")->required()->check(CLI::ExistingFile);
  c_aug->add_option("--p", aug.p, "Per-speaker replacement probability")->check(CLI::Range(0.0, 1.0));
  c_aug->add_flag("--cross-lingual", aug.cross_lingual, "Replace every speaker (p = 1)");
  c_aug->add_option("--out", aug.out, "Output directory")->required();

  fs::path mix_spec, mix_out;
  auto* c_mix = app.add_subcommand("mix", "Build a mixture dataset from a spec");
  c_mix->add_option("--spec", mix_spec, "Dataset spec JSON")->required()->check(CLI::ExistingFile);
  c_mix->add_option("--out", mix_out, "Output dataset directory")->required();

  SeparateOpts sep;
  auto* c_sep = app.add_subcommand("separate", "Run the extraction network");
  c_sep->add_option("--in", sep.in, "Mixture WAV")->check(CLI::ExistingFile);
  c_sep->add_option("--emb", sep.emb, "Reference speaker embedding (256 float32)")->check(CLI::ExistingFile);
  c_sep->add_option("--manifest", sep.manifest, "Separate every sample of a dataset manifest")->check(CLI::ExistingFile)->excludes("--in");
  c_sep->add_option("--weights", sep.weights, "TCEW weight file")->check(CLI::ExistingFile);
  c_sep->add_flag("--random-init", sep.random_init, "Seeded random weights");
  c_sep->add_option("--save-weights", sep.save_weights, "Write the weights used to this path");
  c_sep->add_option("--config", sep.config, "Model config JSON")->check(CLI::ExistingFile);
  c_sep->add_option("--variant", sep.variant, "Global module variant");
  c_sep->add_option("--out", sep.out, "Output WAV, or directory with --manifest")->required();

  fs::path eval_manifest, eval_out, eval_baseline;
  auto* c_eval = app.add_subcommand("eval", "Score separated outputs");
  c_eval->add_option("--manifest", eval_manifest, "Manifest with outputs filled in")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--out", eval_out, "Per-sample CSV")->required();
  c_eval->add_option("--baseline", eval_baseline, "CSV from an earlier eval run")->check(CLI::ExistingFile);

  PerturbOpts per;
  auto* c_per = app.add_subcommand("perturb", "Shift utterance timing of a dataset");
  c_per->add_option("--mode", per.mode, "random: U[-tau, tau] shifts; left: remove gaps")->required()->check(CLI::IsMember({"random", "left"}));
  c_per->add_option("--tau", per.tau_s, "Maximum shift, seconds")->check(CLI::NonNegativeNumber);
  c_per->add_option("--speakers", per.speakers, "Which speakers move")->check(CLI::IsMember({"all", "reference"}));
  c_per->add_option("--manifest", per.manifest, "Input dataset manifest")->required()->check(CLI::ExistingFile);
  c_per->add_option("--out", per.out, "Output dataset directory")->required();

  BenchOpts ben;
  auto* c_ben = app.add_subcommand("bench", "Real-time factor of network variants");
  c_ben->add_option("--variants", ben.variants, "Comma-separated variants");
  c_ben->add_option("--len", ben.len_s, "Input length, seconds")->check(CLI::PositiveNumber);
  c_ben->add_option("--reps", ben.reps, "Timed runs per variant")->check(CLI::Range(3, 1000));
  c_ben->add_option("--config", ben.config, "Model config JSON")->check(CLI::ExistingFile);
  c_ben->add_option("--out", ben.out, "JSON rows output");

  try {
    app.parse(argc, argv);
    if (g.log_level.empty())
      if (const char* env = std::getenv("TCE_LOG")) g.log_level = env;
    g_level = g.log_level.empty() ? Level::Info : parse_level(g.log_level);
    g.seed = seed_flag.value_or(0);

    if (c_toy->parsed()) run_toy_pool(g, toy);
    else if (c_syn->parsed()) run_synth(g, syn);
    else if (c_aug->parsed()) run_augment(g, aug);
    else if (c_mix->parsed()) run_mix(g, mix_spec, mix_out, seed_flag);
    else if (c_sep->parsed()) run_separate(g, sep);
    else if (c_eval->parsed()) run_eval(g, eval_manifest, eval_out, eval_baseline);
    else if (c_per->parsed()) run_perturb(g, per);
    else if (c_ben->parsed()) run_bench(g, ben);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    app.exit(e);
    return 2;
  } catch (const Error& e) {
    log(Level::Error, "%s", e.what());
    return 1;
  } catch (const std::exception& e) {
    log(Level::Error, "%s", e.what());
    return 1;
  }
  return 0;
}

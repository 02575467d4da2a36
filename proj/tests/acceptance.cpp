// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.
// Usage: tce_acceptance <path-to-tce-cli> [work-dir] [criteria, e.g. 2,3,10]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "tce/audio_io.hpp"
#include "tce/dataset.hpp"
#include "tce/metrics.hpp"
#include "tce/mixer.hpp"
#include "tce/netref/bench.hpp"
#include "tce/netref/layers.hpp"
#include "tce/netref/model.hpp"
#include "tce/perturb.hpp"

using namespace tce;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("failed: " + what);
    }
  }
  void note(const std::string& s) { notes.push_back(s); }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

Waveform noise_wave(double seconds, std::uint64_t seed, double amp = 0.1) {
  Rng rng(seed);
  Waveform w = Waveform::zeros(to_samples(seconds));
  for (auto& v : w.samples) v = static_cast<float>(amp * rng.normal());
  return w;
}

// ---- 2: metric oracles -----------------------------------------------------

void metrics_oracle(Outcome& o) {
  Rng rng(2);
  double worst = 0.0, worst_scale = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto n = static_cast<Eigen::Index>(16 + rng.below(4000));
    Eigen::VectorXd ref(n), est(n);
    for (Eigen::Index k = 0; k < n; ++k) ref[k] = rng.normal();
    const double mix = rng.uniform(0.0, 2.0);
    for (Eigen::Index k = 0; k < n; ++k) est[k] = mix * ref[k] + rng.normal();
    worst = std::max(worst, std::abs(snr(est, ref) - static_cast<double>(test::snr_oracle(est, ref))));
    worst = std::max(worst, std::abs(si_sdr(est, ref) - static_cast<double>(test::si_sdr_oracle(est, ref))));
    const double alpha = 10.0 * (1.0 - rng.uniform(0.0, 1.0));  // (0, 10]
    const Eigen::VectorXd scaled = alpha * est;
    worst_scale = std::max(worst_scale, std::abs(si_sdr(scaled, ref) - si_sdr(est, ref)));
  }
  o.require(worst < 1e-9, "oracle deviation " + fmt(worst));
  o.require(worst_scale < 1e-9, "scale deviation " + fmt(worst_scale));
  o.note("max |lib - oracle| = " + fmt(worst) + " dB, scale drift = " + fmt(worst_scale) + " dB");
}

// ---- 3: STFT round trip ----------------------------------------------------

void stft_round_trip(Outcome& o) {
  const auto x = noise_wave(60.0, 3, 0.3);
  const auto t0 = Clock::now();
  const auto y = istft(stft(x), x.size());
  const double dt = seconds_since(t0);
  const double err = (y.samples - x.samples).cwiseAbs().maxCoeff();
  o.require(err < 1e-4, "max error " + fmt(err));
  o.require(dt < 1.0, "runtime " + fmt(dt) + " s");
  o.note("max abs error = " + fmt(err) + ", " + fmt(dt) + " s");
}

// ---- 4: mixture sum identity -----------------------------------------------

void mixture_identity(Outcome& o) {
  const auto pool = toy_pool("en", "m", 12, 4, 4);
  const auto stats = TurnTakingStats::default_stand_in();
  Rng rng(4);
  double worst = 0.0, worst_sir = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto a = synth_conversation(stats, 2 + rng.below(2), 10.0, pool, derive_seed(4, {1, std::uint64_t(i)}));
    const auto b = synth_conversation(stats, 2, 10.0, pool, derive_seed(4, {2, std::uint64_t(i)}));
    MixInput in;
    bool first = true;
    for (const auto& [spk, w] : a.tracks) {
      if (first) in.reference = w;
      else in.others.push_back(w);
      first = false;
    }
    for (const auto& [spk, w] : b.tracks) in.interference.push_back(w);
    std::optional<double> snr_db;
    if (i % 2 == 0) {
      in.noise = toy_noise(10.0, derive_seed(4, {3, std::uint64_t(i)}));
      snr_db = rng.uniform(0.0, 15.0);
    }
    const double sir = rng.uniform(-3.0, 3.0);
    const auto s = mix(in, sir, snr_db);
    Eigen::VectorXf sum = s.reference.samples + s.noise.samples;
    for (const auto& w : s.others) sum += w.samples;
    for (const auto& w : s.interference) sum += w.samples;
    worst = std::max(worst, static_cast<double>((s.mixture.samples - sum).cwiseAbs().maxCoeff()));
    worst_sir = std::max(worst_sir, std::abs(measured_sir_db(s) - sir));
  }
  o.require(worst < 1e-6, "sum residual " + fmt(worst));
  o.require(worst_sir <= 0.01, "SIR error " + fmt(worst_sir) + " dB");
  o.note("max residual = " + fmt(worst) + ", max SIR error = " + fmt(worst_sir) + " dB");
}

// ---- 5: augmentation timing ------------------------------------------------

std::multiset<std::pair<double, double>> timing(const ConversationTranscript& t) {
  std::multiset<std::pair<double, double>> m;
  for (const auto& u : t.utterances) m.emplace(u.start_s, u.end_s);
  return m;
}

void augmentation(Outcome& o) {
  const auto src_pool = toy_pool("en", "a", 10, 4, 5);
  const auto rep_pool = toy_pool("zh", "r", 10, 4, 6);
  const auto stats = TurnTakingStats::default_stand_in();
  int timing_bad = 0, identity_bad = 0, full_bad = 0;
  for (int i = 0; i < 100; ++i) {
    const auto c = synth_conversation(stats, 2 + i % 3, 20.0, src_pool, derive_seed(5, {std::uint64_t(i)}));
    for (double p : {0.0, 0.5, 1.0}) {
      const auto r = augment_conversation(c.transcript, c.tracks, {p, &rep_pool, derive_seed(5, {9, std::uint64_t(i)})});
      if (timing(r.transcript) != timing(c.transcript) || overlap_ratio(r.transcript) != overlap_ratio(c.transcript))
        ++timing_bad;
      if (p == 0.0 && !(r.transcript == c.transcript && r.tracks == c.tracks && r.replaced.empty())) ++identity_bad;
      if (p == 1.0) {
        bool all = r.replaced.size() == c.transcript.speakers.size();
        for (const auto& s : c.transcript.speakers) all = all && r.tracks.at(s) != c.tracks.at(s);
        if (!all) ++full_bad;
      }
    }
  }
  // replacement frequency: small two-speaker conversations, 10^4 trials
  const auto tiny = make_transcript("tiny", 2.0, {{"a00", 0.0, 0.5, {}}, {"a01", 0.6, 1.2, {}}});
  const auto tiny_tracks = test::tracks_for(tiny, 1);
  std::size_t replaced = 0, total = 0;
  for (std::uint64_t k = 0; k < 10000; ++k) {
    const auto r = augment_conversation(tiny, tiny_tracks, {0.5, &rep_pool, derive_seed(55, {k})});
    replaced += r.replaced.size();
    total += tiny.speakers.size();
  }
  const double freq = static_cast<double>(replaced) / static_cast<double>(total);
  o.require(timing_bad == 0, std::to_string(timing_bad) + " timing changes");
  o.require(identity_bad == 0, "p = 0 not identity in " + std::to_string(identity_bad) + " cases");
  o.require(full_bad == 0, "p = 1 missed speakers in " + std::to_string(full_bad) + " cases");
  o.require(std::abs(freq - 0.5) <= 0.02, "replacement frequency " + fmt(freq, 4));
  o.note("replacement frequency at p = 0.5: " + fmt(freq, 4));
}

// ---- 6: perturbation -------------------------------------------------------

void perturbation(Outcome& o) {
  Rng rng(6);
  int identity_bad = 0, left_bad = 0;
  for (int i = 0; i < 100; ++i) {
    const auto t = test::random_transcript(rng, 2 + i % 3, 30.0);
    const auto tr = test::tracks_for(t, i);
    const auto r = random_shift(t, tr, 0.0, t.speakers, i);
    if (!(r.transcript == t && r.tracks == tr)) ++identity_bad;
  }
  for (int i = 0; i < 1000; ++i) {
    const auto t = test::random_transcript(rng, 2, 40.0);
    const auto r = shift_all_left(t, test::tracks_for(t, i), t.speakers);
    if (overlap_ratio(r.transcript) < overlap_ratio(t)) ++left_bad;
  }

  // Remix after shifting the conversation: mixture and ground truth move together.
  const auto pool = toy_pool("en", "p", 10, 4, 7);
  const auto stats = TurnTakingStats::default_stand_in();
  double worst = 0.0, worst_energy = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto a = synth_conversation(stats, 2, 15.0, pool, derive_seed(6, {1, std::uint64_t(i)}));
    const auto b = synth_conversation(stats, 2, 15.0, pool, derive_seed(6, {2, std::uint64_t(i)}));
    MixInput in;
    std::vector<std::string> order(a.transcript.speakers.begin(), a.transcript.speakers.end());
    in.reference = a.tracks.at(order[0]);
    for (std::size_t k = 1; k < order.size(); ++k) in.others.push_back(a.tracks.at(order[k]));
    for (const auto& [spk, w] : b.tracks) in.interference.push_back(w);
    const auto s = mix(in, rng.uniform(-3.0, 3.0));

    Tracks scaled;
    scaled[order[0]] = s.reference;
    for (std::size_t k = 1; k < order.size(); ++k) scaled[order[k]] = s.others[k - 1];
    const auto r = i % 2 ? random_shift(a.transcript, scaled, 2.0, a.transcript.speakers, i)
                         : shift_all_left(a.transcript, scaled, a.transcript.speakers);
    MixtureSample p = s;
    p.reference = r.tracks.at(order[0]);
    for (std::size_t k = 1; k < order.size(); ++k) p.others[k - 1] = r.tracks.at(order[k]);
    p.target = p.reference;
    for (const auto& w : p.others) p.target.samples += w.samples;
    p.mixture = p.target;
    for (const auto& w : p.interference) p.mixture.samples += w.samples;
    p.mixture.samples += p.noise.samples;

    Eigen::VectorXf sum = p.reference.samples + p.noise.samples;
    for (const auto& w : p.others) sum += w.samples;
    for (const auto& w : p.interference) sum += w.samples;
    worst = std::max(worst, static_cast<double>((p.mixture.samples - sum).cwiseAbs().maxCoeff()));
    for (const auto& spk : order) {
      const double e0 = scaled.at(spk).samples.cast<double>().squaredNorm();
      const double e1 = r.tracks.at(spk).samples.cast<double>().squaredNorm();
      worst_energy = std::max(worst_energy, std::abs(e1 - e0) / e0);
    }
  }
  o.require(identity_bad == 0, "tau = 0 changed " + std::to_string(identity_bad) + " transcripts");
  o.require(left_bad == 0, "shift_all_left lowered overlap " + std::to_string(left_bad) + " times");
  o.require(worst < 1e-6, "post-shift residual " + fmt(worst));
  o.require(worst_energy < 1e-6, "speech energy changed by " + fmt(worst_energy));
  o.note("post-shift residual = " + fmt(worst) + ", relative energy change = " + fmt(worst_energy));
}

// ---- 7: incorrect-target ratio ---------------------------------------------

void incorrect_target(Outcome& o) {
  Rng rng(7);
  std::vector<TargetCheck> set;
  std::size_t constructed_wrong = 0, oracle_wrong = 0;
  const Eigen::Index n = 4000;
  for (int i = 0; i < 200; ++i) {
    auto vec = [&](double amp) {
      Eigen::VectorXf v(n);
      for (auto& x : v) x = static_cast<float>(amp * rng.normal());
      return v;
    };
    const Eigen::VectorXf s0 = vec(1.0), conv = vec(0.8), inter = vec(0.8), noise = vec(0.05);
    TargetCheck c;
    c.target_conv = s0 + conv;
    c.wrong_conv = s0 + inter;
    c.mixture = c.target_conv + inter + noise;
    const bool wrong = rng.bernoulli(0.3);
    constructed_wrong += wrong ? 1 : 0;
    c.output = (wrong ? c.wrong_conv : c.target_conv) + vec(0.1);
    auto snri = [&](const Eigen::VectorXf& ref) {
      return test::snr_oracle(c.output, ref) - test::snr_oracle(c.mixture, ref);
    };
    oracle_wrong += snri(c.wrong_conv) > snri(c.target_conv) ? 1 : 0;
    set.push_back(std::move(c));
  }
  const double ratio = incorrect_target_ratio(std::span<const TargetCheck>(set));
  std::size_t lib_wrong = 0;
  for (const auto& c : set) lib_wrong += is_incorrect_target(c) ? 1 : 0;
  o.require(lib_wrong == oracle_wrong, "library " + std::to_string(lib_wrong) + " vs oracle " + std::to_string(oracle_wrong));
  o.require(oracle_wrong == constructed_wrong, "oracle disagrees with construction");
  o.require(ratio == static_cast<double>(oracle_wrong) / 200.0, "ratio " + fmt(ratio));
  o.note(std::to_string(lib_wrong) + "/200 incorrect, ratio " + fmt(ratio));
}

// ---- 8: network properties -------------------------------------------------

netref::HiddenTF random_hidden(Eigen::Index d, Eigen::Index t, Eigen::Index f, std::uint64_t seed) {
  Rng rng(seed);
  auto y = netref::HiddenTF::zeros(d, t, f);
  for (Eigen::Index i = 0; i < y.data.size(); ++i) y.data.data()[i] = static_cast<float>(rng.normal());
  return y;
}

void network(Outcome& o) {
  using namespace netref;
  const auto t0 = Clock::now();
  const ModelConfig cfg;
  const auto w = random_weights(cfg, 8);
  const auto emb = pseudo_embedding("ref", 8);
  for (double len : {1.0, 7.3, 60.0}) {
    const auto x = noise_wave(len, 80);
    const auto y = forward(x, emb, w, cfg);
    o.require(y.size() == x.size() && y.samples.allFinite(), "forward length at " + fmt(len) + " s");
  }

  // Probes on three windows of frames: perturb the middle window.
  const Eigen::Index frames = 3 * cfg.window, lo = cfg.window, hi = 2 * cfg.window;
  int local_ok = 0, global_ok = 0;
  for (int draw = 0; draw < 40; ++draw) {
    const auto wd = random_weights(cfg, derive_seed(81, {std::uint64_t(draw)}));
    const auto y = random_hidden(cfg.embed_channels, frames, cfg.freqs(), derive_seed(82, {std::uint64_t(draw)}));
    auto probe = y;
    Rng rng(derive_seed(83, {std::uint64_t(draw)}));
    for (Eigen::Index t = lo; t < hi; ++t)
      for (Eigen::Index i = 0; i < probe.frame(t).size(); ++i) probe.frame(t).data()[i] += static_cast<float>(rng.normal());

    const auto a = local_module(y, wd, cfg, "blocks.0."), b = local_module(probe, wd, cfg, "blocks.0.");
    bool local = true;
    for (Eigen::Index t = 0; t < frames; ++t) local = local && ((a.frame(t) == b.frame(t)) == (t < lo || t >= hi));
    local_ok += local ? 1 : 0;

    const auto ga = global_module(y, wd, cfg, "blocks.0."), gb = global_module(probe, wd, cfg, "blocks.0.");
    bool global = true;
    for (Eigen::Index t = 0; t < frames; ++t) global = global && ga.frame(t) != gb.frame(t);
    global_ok += global ? 1 : 0;
  }
  o.require(local_ok >= 38, "locality probe " + std::to_string(local_ok) + "/40");
  o.require(global_ok >= 38, "receptive-field probe " + std::to_string(global_ok) + "/40");

  // Single head at C = 3 against the double-loop oracle.
  double att_err = 0.0;
  {
    Rng rng(84);
    const int df = 32, e = 8;
    WeightStore aw;
    auto rnd = [&](Shape s) {
      Tensor t{s, {}};
      t.values.resize(static_cast<std::size_t>(t.numel()));
      for (auto& v : t.values) v = static_cast<float>(0.3 * rng.normal());
      return t;
    };
    aw.set("a.query.weight", rnd({e, df}));
    aw.set("a.query.bias", rnd({e}));
    aw.set("a.key.weight", rnd({e, df}));
    aw.set("a.key.bias", rnd({e}));
    aw.set("a.value.weight", rnd({df, df}));
    aw.set("a.value.bias", rnd({df}));
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::MatrixXf tokens(3, df);
      for (Eigen::Index i = 0; i < tokens.size(); ++i) tokens.data()[i] = static_cast<float>(rng.normal());
      const Eigen::MatrixXf got = multi_head_attention(tokens, aw, "a.", 1, e);
      auto m = [&](const char* n, int r, int c) { return aw.matrix(n, r, c).cast<double>().eval(); };
      auto v = [&](const char* n, int r) { return aw.vector(n, r).cast<double>().eval(); };
      const Eigen::MatrixXd want = test::attention_oracle(
          tokens.cast<double>(), m("a.query.weight", e, df), v("a.query.bias", e), m("a.key.weight", e, df),
          v("a.key.bias", e), m("a.value.weight", df, df), v("a.value.bias", df));
      att_err = std::max(att_err, (got.cast<double>() - want).cwiseAbs().maxCoeff());
    }
  }
  o.require(att_err < 1e-5, "attention error " + fmt(att_err));

  // FiLM with gamma = 1, beta = 0 built into the weights.
  auto fw = w;
  auto set_all = [&](const std::string& name, float v) {
    Tensor t = fw.at(name);
    std::fill(t.values.begin(), t.values.end(), v);
    fw.set(name, t);
  };
  set_all("blocks.1.film.gamma.weight", 0.0f);
  set_all("blocks.1.film.gamma.bias", 1.0f);
  set_all("blocks.1.film.beta.weight", 0.0f);
  set_all("blocks.1.film.beta.bias", 0.0f);
  const auto fy = random_hidden(cfg.embed_channels, 50, cfg.freqs(), 85);
  const bool film_exact = film(fy, emb.vector, fw, "blocks.1.").data == fy.data;
  o.require(film_exact, "FiLM identity not exact");

  const double dt = seconds_since(t0);
  o.require(dt < 120.0, "runtime " + fmt(dt) + " s");
  o.note("locality " + std::to_string(local_ok) + "/40, receptive field " + std::to_string(global_ok) +
         "/40, attention error " + fmt(att_err) + ", " + fmt(dt) + " s");
}

// ---- 9: RTF ordering -------------------------------------------------------

void rtf(Outcome& o) {
  using namespace netref;
  const auto t0 = Clock::now();
  const ModelConfig cfg;
  const std::vector<GlobalVariant> v{GlobalVariant::PoolingAttention, GlobalVariant::FullAttention};
  const auto r30 = rtf_bench(cfg, v, 30.0, 3, 9);
  const auto r60 = rtf_bench(cfg, v, 60.0, 3, 9);
  const double pool_growth = r60[0].median_s / r30[0].median_s;
  const double full_growth = r60[1].median_s / r30[1].median_s;
  o.require(r60[0].rtf < r60[1].rtf, "pooling RTF not below full attention");
  o.require(full_growth > pool_growth, "full attention does not grow faster");
  const double dt = seconds_since(t0);
  o.require(dt < 600.0, "runtime " + fmt(dt) + " s");
  o.note("RTF@60s pooling " + fmt(r60[0].rtf) + " vs full " + fmt(r60[1].rtf) + "; 30->60 s growth pooling " +
         fmt(pool_growth) + "x, full " + fmt(full_growth) + "x; " + fmt(dt) + " s");
}

// ---- 10: CLI determinism ---------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Relative file list of dir with contents.
std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> m;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) m[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
  return m;
}

// Drops timing fields from bench output; keeps run counts.
nlohmann::json bench_stable(nlohmann::json out) {
  for (auto& r : out.at("rows")) {
    r["runs"] = r.at("runs_s").size();
    for (const char* k : {"median_s", "rtf", "runs_s"}) r.erase(k);
  }
  return out;
}

void cli_determinism(Outcome& o, const std::string& cli, const fs::path& work) {
  fs::remove_all(work);
  fs::create_directories(work);
  netref::ModelConfig small;
  small.embed_channels = 4;
  small.hidden = 8;
  small.heads = 2;
  small.key_dim = 8;
  small.blocks = 2;
  write_json(small.to_json(), work / "small.json");
  write_json({{"seed", 7},
              {"segment_s", 10},
              {"catalog", {"train_aug/catalog.json", "test/catalog.json"}},
              {"counts", {{"train", 3}, {"test", 2}}},
              {"noise", {{"files", {"pool_a/noise/0.wav", "pool_a/noise/1.wav"}}, {"snr_db", {5, 15}}}},
              {"enrollment_s", 2}},
             work / "spec.json");

  struct Step {
    std::string out, args;
  };
  const std::vector<Step> steps{
      {"pool_a", "toy-pool --out pool_a --speakers 12 --per-speaker 4 --prefix a --noise-files 2"},
      {"pool_b", "toy-pool --out pool_b --speakers 12 --per-speaker 4 --prefix b"},
      {"pool_x", "toy-pool --out pool_x --speakers 12 --per-speaker 4 --prefix x --language zh"},
      {"train", "synth --pool pool_a/pool.json --count 3 --duration 30 --split train --prefix tr --out train"},
      {"test", "synth --pool pool_b/pool.json --count 3 --duration 30 --split test --prefix te --out test"},
      {"train_aug", "augment --catalog train/catalog.json --pool pool_x/pool.json --p 0.5 --out train_aug"},
      {"ds", "--jobs 2 mix --spec spec.json --out ds"},
      {"sep", "separate --manifest ds/manifest.json --random-init --config small.json --out sep"},
      {"eval", "eval --manifest sep/manifest.json --out eval/scores.csv"},
      {"pert", "perturb --mode random --tau 1 --manifest ds/manifest.json --out pert"},
      {"left", "perturb --mode left --manifest ds/manifest.json --out left"},
      {"bench", "bench --variants mean_pool --len 1 --reps 3 --config small.json --out bench/rows.json"},
  };
  for (const auto& s : steps) {
    std::map<std::string, std::string> first;
    bool ran = true;
    for (int round = 0; round < 2 && ran; ++round) {
      fs::remove_all(work / s.out);
      const std::string cmd = "cd '" + work.string() + "' && '" + cli + "' --seed 3 --log-level error " + s.args;
      ran = std::system(cmd.c_str()) == 0;
      if (round == 0 && ran) first = tree(work / s.out);
    }
    if (!ran) {
      o.require(false, "command failed: " + s.args);
      return;
    }
    auto second = tree(work / s.out);
    if (s.out == "bench") {
      const auto a = bench_stable(nlohmann::json::parse(first.at("rows.json")));
      const auto b = bench_stable(nlohmann::json::parse(second.at("rows.json")));
      first.erase("rows.json");
      second.erase("rows.json");
      o.require(a == b, "bench rows differ");
    }
    o.require(first == second, s.out + " differs between runs");
    if (first.empty()) o.require(false, s.out + " produced no files");
  }
  o.note(std::to_string(steps.size()) + " commands, outputs compared byte for byte");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: tce_acceptance <tce-cli> [work-dir]\n";
    return 2;
  }
  const std::string cli = fs::absolute(argv[1]).string();
  const fs::path work = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "tce_acceptance";
  std::set<int> only;
  if (argc > 3) {
    std::stringstream ss(argv[3]);
    for (std::string item; std::getline(ss, item, ',');) only.insert(std::stoi(item));
  }

  const std::vector<std::pair<int, std::function<void(Outcome&)>>> criteria{
      {2, metrics_oracle},
      {3, stft_round_trip},
      {4, mixture_identity},
      {5, augmentation},
      {6, perturbation},
      {7, incorrect_target},
      {8, network},
      {9, rtf},
      {10, [&](Outcome& o) { cli_determinism(o, cli, fs::absolute(work)); }},
  };
  const std::vector<std::pair<int, double>> limits{{2, 5.0}};
  bool all = true;
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && !only.contains(id)) continue;
    Outcome o;
    const auto t0 = Clock::now();
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double dt = seconds_since(t0);
    for (const auto& [lid, limit] : limits)
      if (lid == id && dt >= limit) o.require(false, "runtime " + fmt(dt) + " s");
    all = all && o.pass;
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << " (" << fmt(dt) << " s)";
    for (const auto& n : o.notes) std::cout << "; " << n;
    std::cout << std::endl;
  }
  return all ? 0 : 1;
}

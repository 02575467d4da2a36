#include "tce/netref/bench.hpp"

#include <algorithm>
#include <chrono>

#include <Eigen/Core>

#include "tce/corpus.hpp"
#include "tce/error.hpp"
#include "tce/netref/model.hpp"
#include "tce/random.hpp"

namespace tce::netref {

std::vector<BenchRow> rtf_bench(const ModelConfig& base, const std::vector<GlobalVariant>& variants,
                                double input_len_s, int reps, std::uint64_t seed) {
  if (reps < 3) throw Error(ErrorKind::InvalidConfig, "rtf_bench needs at least 3 repetitions");
  if (!(input_len_s > 0.0)) throw Error(ErrorKind::InvalidConfig, "benchmark input length must be positive");
  Eigen::setNbThreads(1);

  Rng rng(derive_seed(seed, {hash_string("bench.input")}));
  Waveform x = Waveform::zeros(to_samples(input_len_s, base.stft.sample_rate), base.stft.sample_rate);
  for (auto& v : x.samples) v = static_cast<float>(0.1 * rng.normal());
  const SpeakerEmbedding emb = pseudo_embedding("bench", seed);

  std::vector<BenchRow> rows;
  for (GlobalVariant variant : variants) {
    ModelConfig cfg = base;
    cfg.global_variant = variant;
    const WeightStore w = random_weights(cfg, seed);
    BenchRow row;
    row.variant = variant;
    row.input_len_s = input_len_s;
    row.param_count = w.param_count();
    row.threads = Eigen::nbThreads();
    for (int r = 0; r < reps; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      const Waveform y = forward(x, emb, w, cfg);
      const auto t1 = std::chrono::steady_clock::now();
      if (y.size() != x.size()) throw Error(ErrorKind::InvariantViolation, "forward changed the length");
      row.runs_s.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    std::vector<double> sorted = row.runs_s;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    row.median_s = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    row.rtf = row.median_s / input_len_s;
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json to_json(const BenchRow& row) {
  return {{"variant", std::string(to_string(row.variant))},
          {"input_len_s", row.input_len_s},
          {"median_s", row.median_s},
          {"rtf", row.rtf},
          {"param_count", row.param_count},
          {"threads", row.threads},
          {"runs_s", row.runs_s}};
}

}  // namespace tce::netref

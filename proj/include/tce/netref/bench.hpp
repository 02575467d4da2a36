#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "tce/netref/config.hpp"

namespace tce::netref {

struct BenchRow {
  GlobalVariant variant = GlobalVariant::PoolingAttention;
  double input_len_s = 0.0;
  double median_s = 0.0;
  double rtf = 0.0;
  std::int64_t param_count = 0;
  int threads = 1;
  std::vector<double> runs_s;
};

// Median wall-clock of `reps` forward passes on seeded noise, per variant.
// Throws InvalidConfig when reps < 3.
std::vector<BenchRow> rtf_bench(const ModelConfig& cfg, const std::vector<GlobalVariant>& variants,
                                double input_len_s = 60.0, int reps = 3, std::uint64_t seed = 0);

nlohmann::json to_json(const BenchRow& row);

}  // namespace tce::netref

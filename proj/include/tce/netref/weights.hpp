#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tce/netref/config.hpp"

namespace tce::netref {

using Shape = std::vector<std::int64_t>;
using RowMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Row-major float32 tensor.
struct Tensor {
  Shape shape;
  std::vector<float> values;

  std::int64_t numel() const;
};

// Named parameters of the network. Iteration (and the file layout) follow
// name order, so saving is deterministic.
class WeightStore {
 public:
  void set(const std::string& name, Tensor t);
  bool contains(const std::string& name) const { return tensors_.contains(name); }
  const Tensor& at(const std::string& name) const;
  const std::map<std::string, Tensor>& tensors() const { return tensors_; }
  std::int64_t param_count() const;

  // Views that check the stored shape; throw WeightMismatch.
  Eigen::Map<const RowMatrixXf> matrix(const std::string& name, Eigen::Index rows, Eigen::Index cols) const;
  Eigen::Map<const Eigen::VectorXf> vector(const std::string& name, Eigen::Index n) const;
  float scalar(const std::string& name) const;

  // "TCEW", u32 version, u32 count, then per tensor: u32 name length, name,
  // u32 rank, u64 dims, float32 little-endian data.
  void save(const std::filesystem::path& path) const;
  static WeightStore load(const std::filesystem::path& path);

  friend bool operator==(const WeightStore& a, const WeightStore& b);

 private:
  std::map<std::string, Tensor> tensors_;
};

inline constexpr std::uint32_t kWeightFormatVersion = 1;

// Every tensor the forward pass reads for this config, with its shape.
std::map<std::string, Shape> expected_shapes(const ModelConfig& cfg);

std::int64_t param_count(const ModelConfig& cfg);

// Strict check: exact name set and shapes. Throws WeightMismatch.
void check_weights(const WeightStore& w, const ModelConfig& cfg);

// Uniform(+-1/sqrt(fan_in)) initialisation; PReLU slopes start at 0.25.
WeightStore random_weights(const ModelConfig& cfg, std::uint64_t seed);

}  // namespace tce::netref

#include "tce/netref/weights.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>

#include "tce/error.hpp"
#include "tce/random.hpp"

namespace tce::netref {

std::int64_t Tensor::numel() const {
  return std::accumulate(shape.begin(), shape.end(), std::int64_t{1}, std::multiplies<>());
}

void WeightStore::set(const std::string& name, Tensor t) {
  if (static_cast<std::int64_t>(t.values.size()) != t.numel())
    throw Error(ErrorKind::WeightMismatch, name + ": value count does not match shape");
  tensors_[name] = std::move(t);
}

const Tensor& WeightStore::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw Error(ErrorKind::WeightMismatch, "missing tensor " + name);
  return it->second;
}

std::int64_t WeightStore::param_count() const {
  std::int64_t n = 0;
  for (const auto& [name, t] : tensors_) n += t.numel();
  return n;
}

namespace {

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "]";
}

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error(ErrorKind::ParseError, "truncated weight file");
  return v;
}

}  // namespace

Eigen::Map<const RowMatrixXf> WeightStore::matrix(const std::string& name, Eigen::Index rows,
                                                  Eigen::Index cols) const {
  const Tensor& t = at(name);
  if (t.numel() != rows * cols || t.shape.empty() || t.shape.front() != rows)
    throw Error(ErrorKind::WeightMismatch, name + " has shape " + shape_str(t.shape) + ", expected " +
                                               std::to_string(rows) + "x" + std::to_string(cols));
  return {t.values.data(), rows, cols};
}

Eigen::Map<const Eigen::VectorXf> WeightStore::vector(const std::string& name, Eigen::Index n) const {
  const Tensor& t = at(name);
  if (t.numel() != n)
    throw Error(ErrorKind::WeightMismatch, name + " has shape " + shape_str(t.shape));
  return {t.values.data(), n};
}

float WeightStore::scalar(const std::string& name) const { return vector(name, 1)[0]; }

bool operator==(const WeightStore& a, const WeightStore& b) {
  if (a.tensors_.size() != b.tensors_.size()) return false;
  for (const auto& [name, t] : a.tensors_) {
    auto it = b.tensors_.find(name);
    if (it == b.tensors_.end() || it->second.shape != t.shape || it->second.values != t.values)
      return false;
  }
  return true;
}

void WeightStore::save(const std::filesystem::path& path) const {
  static_assert(std::endian::native == std::endian::little);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot create " + path.string());
  out.write("TCEW", 4);
  put<std::uint32_t>(out, kWeightFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors_.size()));
  for (const auto& [name, t] : tensors_) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) put<std::uint64_t>(out, static_cast<std::uint64_t>(d));
    out.write(reinterpret_cast<const char*>(t.values.data()),
              static_cast<std::streamsize>(t.values.size() * sizeof(float)));
  }
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

WeightStore WeightStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "TCEW", 4) != 0)
    throw Error(ErrorKind::ParseError, path.string() + " is not a TCEW weight file");
  const auto version = get<std::uint32_t>(in);
  if (version != kWeightFormatVersion)
    throw Error(ErrorKind::ParseError, "unsupported weight format version " + std::to_string(version));
  const auto count = get<std::uint32_t>(in);
  WeightStore w;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name(get<std::uint32_t>(in), '\0');
    in.read(name.data(), static_cast<std::streamsize>(name.size()));
    Tensor t;
    const auto rank = get<std::uint32_t>(in);
    for (std::uint32_t r = 0; r < rank; ++r) t.shape.push_back(static_cast<std::int64_t>(get<std::uint64_t>(in)));
    t.values.resize(static_cast<std::size_t>(t.numel()));
    in.read(reinterpret_cast<char*>(t.values.data()),
            static_cast<std::streamsize>(t.values.size() * sizeof(float)));
    if (!in) throw Error(ErrorKind::ParseError, "truncated tensor " + name);
    w.set(name, std::move(t));
  }
  return w;
}

namespace {

void add_lstm(std::map<std::string, Shape>& m, const std::string& prefix, int in, int hidden, int out) {
  for (const char* dir : {"fwd", "bwd"}) {
    const std::string p = prefix + "." + dir;
    m[p + ".w_ih"] = {4 * hidden, in};
    m[p + ".w_hh"] = {4 * hidden, hidden};
    m[p + ".bias"] = {4 * hidden};
  }
  m[prefix + ".proj.weight"] = {out, 2 * hidden};
  m[prefix + ".proj.bias"] = {out};
}

}  // namespace

std::map<std::string, Shape> expected_shapes(const ModelConfig& cfg) {
  cfg.validate();
  const int d = cfg.embed_channels, h = cfg.hidden, df = cfg.flat_dim();
  std::map<std::string, Shape> m;
  m["encoder.weight"] = {d, 2, 3, 3};
  m["encoder.bias"] = {d};
  m["decoder.weight"] = {d, 2, 3, 3};
  m["decoder.bias"] = {2};
  for (int b = 0; b < cfg.blocks; ++b) {
    const std::string p = "blocks." + std::to_string(b) + ".";
    if (b > 0) {
      m[p + "film.gamma.weight"] = {d, cfg.speaker_dim};
      m[p + "film.gamma.bias"] = {d};
      m[p + "film.beta.weight"] = {d, cfg.speaker_dim};
      m[p + "film.beta.bias"] = {d};
    }
    add_lstm(m, p + "local.freq", d, h, d);
    add_lstm(m, p + "local.time", d, h, d);
    switch (cfg.global_variant) {
      case GlobalVariant::PoolingAttention:
      case GlobalVariant::FullAttention:
      case GlobalVariant::LocalAttention:
        m[p + "global.query.weight"] = {cfg.heads * cfg.key_dim, df};
        m[p + "global.query.bias"] = {cfg.heads * cfg.key_dim};
        m[p + "global.key.weight"] = {cfg.heads * cfg.key_dim, df};
        m[p + "global.key.bias"] = {cfg.heads * cfg.key_dim};
        m[p + "global.value.weight"] = {df, df};
        m[p + "global.value.bias"] = {df};
        [[fallthrough]];
      case GlobalVariant::MeanPool:
      case GlobalVariant::MaxPool:
        m[p + "global.ff.weight"] = {d, d};
        m[p + "global.ff.bias"] = {d};
        m[p + "global.ff.prelu"] = {1};
        break;
      case GlobalVariant::FullLstm:
        add_lstm(m, p + "global.lstm", d, h, d);
        break;
    }
  }
  return m;
}

std::int64_t param_count(const ModelConfig& cfg) {
  std::int64_t n = 0;
  for (const auto& [name, shape] : expected_shapes(cfg))
    n += std::accumulate(shape.begin(), shape.end(), std::int64_t{1}, std::multiplies<>());
  return n;
}

void check_weights(const WeightStore& w, const ModelConfig& cfg) {
  const auto expected = expected_shapes(cfg);
  for (const auto& [name, shape] : expected) {
    if (!w.contains(name)) throw Error(ErrorKind::WeightMismatch, "missing tensor " + name);
    if (w.at(name).shape != shape)
      throw Error(ErrorKind::WeightMismatch, name + " has shape " + shape_str(w.at(name).shape) +
                                                 ", expected " + shape_str(shape));
  }
  for (const auto& [name, t] : w.tensors())
    if (!expected.contains(name)) throw Error(ErrorKind::WeightMismatch, "unused tensor " + name);
}

WeightStore random_weights(const ModelConfig& cfg, std::uint64_t seed) {
  WeightStore w;
  const auto shapes = expected_shapes(cfg);
  auto fan_in_of = [&](const std::string& name, const Shape& shape) -> double {
    auto sibling = [&](const std::string& suffix) {
      const auto base = name.substr(0, name.rfind('.'));
      return shapes.at(base + suffix);
    };
    if (name.find(".fwd.") != std::string::npos || name.find(".bwd.") != std::string::npos)
      return static_cast<double>(cfg.hidden);
    if (name == "encoder.weight" || name == "encoder.bias") return 2.0 * 9.0;
    if (name == "decoder.weight" || name == "decoder.bias") return cfg.embed_channels * 9.0;
    if (name.ends_with(".bias")) {
      const Shape ws = sibling(".weight");
      return static_cast<double>(ws.back());
    }
    return static_cast<double>(shape.back());
  };
  for (const auto& [name, shape] : shapes) {
    Tensor t{shape, {}};
    t.values.resize(static_cast<std::size_t>(t.numel()));
    if (name.ends_with(".prelu")) {
      std::fill(t.values.begin(), t.values.end(), 0.25f);
    } else {
      const double bound = 1.0 / std::sqrt(fan_in_of(name, shape));
      Rng rng(derive_seed(seed, {hash_string(name)}));
      for (auto& v : t.values) v = static_cast<float>(rng.uniform(-bound, bound));
    }
    w.set(name, std::move(t));
  }
  return w;
}

}  // namespace tce::netref

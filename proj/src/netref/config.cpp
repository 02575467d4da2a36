#include "tce/netref/config.hpp"

#include <array>
#include <utility>

#include "tce/error.hpp"

namespace tce::netref {

namespace {
constexpr std::array<std::pair<GlobalVariant, std::string_view>, 6> kVariantNames{{
    {GlobalVariant::PoolingAttention, "pooling_attention"},
    {GlobalVariant::MeanPool, "mean_pool"},
    {GlobalVariant::MaxPool, "max_pool"},
    {GlobalVariant::FullLstm, "full_lstm"},
    {GlobalVariant::LocalAttention, "local_attention"},
    {GlobalVariant::FullAttention, "full_attention"},
}};
}

std::string_view to_string(GlobalVariant v) {
  for (const auto& [variant, name] : kVariantNames)
    if (variant == v) return name;
  return "unknown";
}

GlobalVariant parse_variant(std::string_view name) {
  for (const auto& [variant, n] : kVariantNames)
    if (n == name) return variant;
  throw Error(ErrorKind::UnknownVariant, std::string(name));
}

std::vector<GlobalVariant> parse_variants(std::string_view list) {
  std::vector<GlobalVariant> out;
  while (!list.empty()) {
    const auto comma = list.find(',');
    out.push_back(parse_variant(list.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  return out;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidConfig, msg); };
  if (embed_channels <= 0 || blocks <= 0 || window <= 0 || stride <= 0 || hidden <= 0 ||
      heads <= 0 || key_dim <= 0 || speaker_dim <= 0)
    fail("all dimensions must be positive");
  if (stride > window) fail("stride must not exceed the window");
  if (flat_dim() % heads != 0) fail("D * F must be divisible by the head count");
  if (deconv_kernel != 1) fail("only kernel-1 projections are implemented");
  if (stft.window_len() > stft.nfft) fail("STFT window exceeds nfft");
}

nlohmann::json ModelConfig::to_json() const {
  return {{"D", embed_channels}, {"B", blocks},     {"W", window},
          {"S", stride},         {"H", hidden},     {"L", heads},
          {"E", key_dim},        {"K", speaker_dim}, {"deconv_kernel", deconv_kernel},
          {"nfft", stft.nfft},   {"window_len_s", stft.window_len_s},
          {"hop_s", stft.hop_s}, {"global_variant", std::string(to_string(global_variant))}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.embed_channels = j.value("D", c.embed_channels);
  c.blocks = j.value("B", c.blocks);
  c.window = j.value("W", c.window);
  c.stride = j.value("S", c.stride);
  c.hidden = j.value("H", c.hidden);
  c.heads = j.value("L", c.heads);
  c.key_dim = j.value("E", c.key_dim);
  c.speaker_dim = j.value("K", c.speaker_dim);
  c.deconv_kernel = j.value("deconv_kernel", c.deconv_kernel);
  c.stft.nfft = j.value("nfft", c.stft.nfft);
  c.stft.window_len_s = j.value("window_len_s", c.stft.window_len_s);
  c.stft.hop_s = j.value("hop_s", c.stft.hop_s);
  if (j.contains("global_variant")) c.global_variant = parse_variant(j["global_variant"].get<std::string>());
  c.validate();
  return c;
}

}  // namespace tce::netref

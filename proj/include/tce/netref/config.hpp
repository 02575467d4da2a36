#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tce/audio_io.hpp"

namespace tce::netref {

enum class GlobalVariant {
  PoolingAttention,  // mean-pool W frames per chunk, attention across chunks
  MeanPool,          // pooled features through the feedforward only
  MaxPool,
  FullLstm,          // time-axis BLSTM over all frames
  LocalAttention,    // frame-level attention inside each window
  FullAttention,     // pooling attention with W = S = 1
};

std::string_view to_string(GlobalVariant v);
GlobalVariant parse_variant(std::string_view name);  // throws UnknownVariant
std::vector<GlobalVariant> parse_variants(std::string_view comma_separated);

struct ModelConfig {
  int embed_channels = 16;   // D
  int blocks = 3;            // B
  int window = 100;          // W, TF frames
  int stride = 100;          // S, TF frames
  int hidden = 64;           // H
  int heads = 4;             // L
  int key_dim = 64;          // E, per head
  int speaker_dim = 256;     // K
  int deconv_kernel = 1;     // kernel of the projection after each BLSTM
  StftConfig stft;
  GlobalVariant global_variant = GlobalVariant::PoolingAttention;

  int freqs() const { return stft.bins(); }
  int flat_dim() const { return embed_channels * freqs(); }  // D * F
  int value_dim() const { return flat_dim() / heads; }        // D * F / L

  // Throws InvalidConfig.
  void validate() const;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

// Number of chunks the pooled sequence has for T frames, ceil(T / S).
inline long chunk_count(long frames, int stride) { return (frames + stride - 1) / stride; }

}  // namespace tce::netref

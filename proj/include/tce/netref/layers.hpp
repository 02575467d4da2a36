#pragma once

#include <string>

#include <Eigen/Core>

#include "tce/audio_io.hpp"
#include "tce/corpus.hpp"
#include "tce/netref/config.hpp"
#include "tce/netref/weights.hpp"

namespace tce::netref {

// D x T x F grid. Column t * F + f of `data` holds the D channels of bin (t, f),
// so per-bin channel maps are plain matrix products and a frame is a
// contiguous D x F block.
struct HiddenTF {
  Eigen::Index channels = 0;
  Eigen::Index frames = 0;
  Eigen::Index freqs = 0;
  Eigen::MatrixXf data;

  static HiddenTF zeros(Eigen::Index d, Eigen::Index t, Eigen::Index f) {
    return {d, t, f, Eigen::MatrixXf::Zero(d, t * f)};
  }
  float& at(Eigen::Index d, Eigen::Index t, Eigen::Index f) { return data(d, t * freqs + f); }
  float at(Eigen::Index d, Eigen::Index t, Eigen::Index f) const { return data(d, t * freqs + f); }
  auto frame(Eigen::Index t) { return data.middleCols(t * freqs, freqs); }
  auto frame(Eigen::Index t) const { return data.middleCols(t * freqs, freqs); }
};

// Name prefix of block b's tensors, "blocks.<b>.".
std::string block_prefix(int b);

// STFT -> (re, im) -> 3x3 conv, 2 -> D channels, zero padding 1.
HiddenTF encode(const Waveform& x, const WeightStore& w, const ModelConfig& cfg);
HiddenTF encode(const SpectrogramTF& spec, const WeightStore& w, const ModelConfig& cfg);

// 3x3 transposed conv, D -> 2 channels, reassembled as a complex spectrogram.
SpectrogramTF decode(const HiddenTF& y, const WeightStore& w, const ModelConfig& cfg);

// y' = gamma(e) * y + beta(e) per channel.
HiddenTF film(const HiddenTF& y, const Eigen::VectorXf& embedding, const WeightStore& w,
              const std::string& prefix);

// Chunked dual-path BLSTM: frequency then time recurrence inside each W-frame
// window, each followed by a projection back to D channels and a residual add.
HiddenTF local_module(const HiddenTF& y, const WeightStore& w, const ModelConfig& cfg,
                      const std::string& prefix);

// Variant selected by cfg.global_variant.
HiddenTF global_module(const HiddenTF& y, const WeightStore& w, const ModelConfig& cfg,
                       const std::string& prefix);

// BLSTM over `steps` with `batch` independent sequences, then a 2H -> D
// projection added to the input. Column s * batch + b of x is step s of sequence b.
Eigen::MatrixXf blstm_residual(const Eigen::MatrixXf& x, Eigen::Index steps, Eigen::Index batch,
                               const WeightStore& w, const std::string& prefix, int hidden);

// Sinusoidal encoding, rows = positions.
Eigen::MatrixXf positional_encoding(Eigen::Index positions, Eigen::Index dim);

// Multi-head scaled dot-product self-attention over the rows of `tokens`
// (C x DF); projections read from <prefix>{query,key,value}.{weight,bias}.
// Returns the concatenated heads, C x DF.
Eigen::MatrixXf multi_head_attention(const Eigen::MatrixXf& tokens, const WeightStore& w,
                                     const std::string& prefix, int heads, int key_dim);

}  // namespace tce::netref

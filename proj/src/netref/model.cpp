#include "tce/netref/model.hpp"

#include "tce/error.hpp"
#include "tce/netref/layers.hpp"

namespace tce::netref {

Waveform forward(const Waveform& x, const SpeakerEmbedding& embedding, const WeightStore& w,
                 const ModelConfig& cfg) {
  cfg.validate();
  validate(x, cfg.stft.sample_rate);
  if (embedding.vector.size() != cfg.speaker_dim)
    throw Error(ErrorKind::ShapeMismatch, "embedding has " + std::to_string(embedding.vector.size()) +
                                              " components, expected " + std::to_string(cfg.speaker_dim));
  check_weights(w, cfg);

  HiddenTF y = encode(x, w, cfg);
  for (int b = 0; b < cfg.blocks; ++b) {
    const std::string p = block_prefix(b);
    if (b > 0) y = film(y, embedding.vector, w, p);
    y = local_module(y, w, cfg, p);
    y = global_module(y, w, cfg, p);
  }
  return istft(decode(y, w, cfg), x.size(), cfg.stft);
}

}  // namespace tce::netref

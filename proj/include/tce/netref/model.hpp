#pragma once

#include "tce/audio_io.hpp"
#include "tce/corpus.hpp"
#include "tce/netref/config.hpp"
#include "tce/netref/weights.hpp"

namespace tce::netref {

// y = G(x | e; weights). Output has exactly x.size() samples.
// Throws WeightMismatch, ShapeMismatch and the audio validation errors.
Waveform forward(const Waveform& x, const SpeakerEmbedding& embedding, const WeightStore& w,
                 const ModelConfig& cfg);

}  // namespace tce::netref

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "tce/corpus.hpp"

namespace tce {

// Synthetic stand-ins for real speech corpora: each speaker is a harmonic
// source at its own pitch under a syllable-rate envelope. Good enough to
// exercise the pipeline; not speech.
Waveform toy_utterance(double f0_hz, double len_s, Rng& rng);

// In-memory pool; speaker ids are <prefix><index>, e.g. "en03".
UtterancePool toy_pool(const std::string& language, const std::string& prefix, int speakers,
                       int per_speaker, std::uint64_t seed);

// Writes <dir>/<speaker>/<k>.wav and <dir>/pool.json.
void save_pool(const UtterancePool& pool, const std::filesystem::path& dir);

// One-pole low-passed Gaussian noise, unit RMS.
Waveform toy_noise(double len_s, std::uint64_t seed);

}  // namespace tce

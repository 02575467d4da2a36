#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>

#include <Eigen/Core>

namespace tce {

inline constexpr int kSampleRate = 16000;

template <typename Scalar>
struct BasicWaveform {
  using Samples = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Samples samples;
  int sample_rate = kSampleRate;

  BasicWaveform() = default;
  BasicWaveform(Samples s, int rate = kSampleRate) : samples(std::move(s)), sample_rate(rate) {}

  static BasicWaveform zeros(Eigen::Index n, int rate = kSampleRate) {
    return BasicWaveform(Samples::Zero(n), rate);
  }

  Eigen::Index size() const { return samples.size(); }
  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate; }

  friend bool operator==(const BasicWaveform& a, const BasicWaveform& b) {
    return a.sample_rate == b.sample_rate && a.samples.size() == b.samples.size() &&
           a.samples == b.samples;
  }
};

using Waveform = BasicWaveform<float>;

// Throws EmptyInput / InvariantViolation / WrongSampleRate.
void validate(const Waveform& w, std::optional<int> required_rate = kSampleRate);

// Sample index of a time stamp on the 16 kHz grid.
inline std::int64_t to_samples(double seconds, int rate = kSampleRate) {
  return static_cast<std::int64_t>(std::llround(seconds * rate));
}

// Reads PCM16 or float32 WAV and returns the first channel. Pass
// std::nullopt to accept any sample rate.
Waveform read_wav(const std::filesystem::path& path,
                  std::optional<int> required_rate = kSampleRate);

// Writes a 32-bit float mono WAV with a 44-byte header.
void write_wav(const Waveform& w, const std::filesystem::path& path);

struct StftConfig {
  double window_len_s = 0.0125;
  double hop_s = 0.004;
  int nfft = 256;
  int sample_rate = kSampleRate;

  int window_len() const { return static_cast<int>(std::lround(window_len_s * sample_rate)); }
  int hop() const { return static_cast<int>(std::lround(hop_s * sample_rate)); }
  int bins() const { return nfft / 2 + 1; }
  int pad() const { return window_len() / 2; }
  // Frames produced for an input of n samples (center padding).
  Eigen::Index frames(Eigen::Index n) const { return (n + 2 * pad() - window_len()) / hop() + 1; }
};

struct SpectrogramTF {
  // rows = frames T, cols = frequency bins F
  Eigen::Matrix<std::complex<float>, Eigen::Dynamic, Eigen::Dynamic> bins;
  double frame_hop_s = 0.004;
  double window_len_s = 0.0125;
  int nfft = 256;

  Eigen::Index frames() const { return bins.rows(); }
  Eigen::Index freqs() const { return bins.cols(); }
};

// Periodic sqrt-Hann of the configured window length.
Eigen::VectorXd analysis_window(const StftConfig& cfg);

SpectrogramTF stft(const Waveform& w, const StftConfig& cfg = {});

// Weighted overlap-add; output has exactly out_len samples.
Waveform istft(const SpectrogramTF& s, Eigen::Index out_len, const StftConfig& cfg = {});

// Per-sample sum of squared analysis windows over all frames covering it.
Eigen::VectorXd window_energy(Eigen::Index n, const StftConfig& cfg = {});

}  // namespace tce

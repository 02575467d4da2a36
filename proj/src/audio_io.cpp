#include "tce/audio_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "tce/error.hpp"

namespace tce {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

void validate(const Waveform& w, std::optional<int> required_rate) {
  if (w.samples.size() == 0) throw Error(ErrorKind::EmptyInput, "waveform has no samples");
  if (w.sample_rate <= 0) throw Error(ErrorKind::InvariantViolation, "sample rate must be positive");
  if (required_rate && w.sample_rate != *required_rate)
    throw Error(ErrorKind::WrongSampleRate, "expected " + std::to_string(*required_rate) +
                                                " Hz, got " + std::to_string(w.sample_rate));
  if (!w.samples.allFinite()) throw Error(ErrorKind::InvariantViolation, "non-finite sample");
}

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T load(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
void store(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

Waveform read_wav(const std::filesystem::path& path, std::optional<int> required_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw Error(ErrorKind::NotWav, path.string() + " has no RIFF/WAVE header");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const char* data = nullptr;
  std::size_t data_len = 0;
  bool have_fmt = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = bytes.data() + pos;
    std::size_t len = load<std::uint32_t>(id + 4);
    const char* body = id + 8;
    std::size_t avail = bytes.size() - pos - 8;
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (len < 16 || len > avail) throw Error(ErrorKind::NotWav, "truncated fmt chunk");
      format = load<std::uint16_t>(body);
      channels = load<std::uint16_t>(body + 2);
      rate = load<std::uint32_t>(body + 4);
      bits = load<std::uint16_t>(body + 14);
      if (format == kFormatExtensible) {
        if (len < 26) throw Error(ErrorKind::NotWav, "truncated extensible fmt chunk");
        format = load<std::uint16_t>(body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = body;
      data_len = std::min(len, avail);
    }
    pos += 8 + len + (len & 1);
  }
  if (!have_fmt || data == nullptr) throw Error(ErrorKind::NotWav, "missing fmt or data chunk");
  if (channels == 0) throw Error(ErrorKind::NotWav, "zero channels");

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !f32)
    throw Error(ErrorKind::UnsupportedEncoding,
                "format " + std::to_string(format) + " with " + std::to_string(bits) + " bits");

  const std::size_t frame_bytes = static_cast<std::size_t>(channels) * (bits / 8);
  const auto n = static_cast<Eigen::Index>(data_len / frame_bytes);
  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  w.samples.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const char* p = data + static_cast<std::size_t>(i) * frame_bytes;
    w.samples[i] = pcm16 ? static_cast<float>(load<std::int16_t>(p)) / 32768.0f : load<float>(p);
  }
  if (required_rate && w.sample_rate != *required_rate)
    throw Error(ErrorKind::WrongSampleRate, path.string() + " is " + std::to_string(rate) + " Hz");
  return w;
}

void write_wav(const Waveform& w, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot create " + path.string());
  const auto data_len = static_cast<std::uint32_t>(w.samples.size() * 4);
  out.write("RIFF", 4);
  store<std::uint32_t>(out, 36 + data_len);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  store<std::uint32_t>(out, 16);
  store<std::uint16_t>(out, kFormatFloat);
  store<std::uint16_t>(out, 1);
  store<std::uint32_t>(out, static_cast<std::uint32_t>(w.sample_rate));
  store<std::uint32_t>(out, static_cast<std::uint32_t>(w.sample_rate) * 4);
  store<std::uint16_t>(out, 4);
  store<std::uint16_t>(out, 32);
  out.write("data", 4);
  store<std::uint32_t>(out, data_len);
  out.write(reinterpret_cast<const char*>(w.samples.data()), data_len);
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

Eigen::VectorXd analysis_window(const StftConfig& cfg) {
  const int n = cfg.window_len();
  Eigen::VectorXd win(n);
  for (int i = 0; i < n; ++i)
    win[i] = std::sqrt(0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n));
  return win;
}

namespace {

void check_config(const StftConfig& cfg) {
  if (cfg.window_len() <= 0 || cfg.hop() <= 0 || cfg.window_len() > cfg.nfft)
    throw Error(ErrorKind::IncompatibleConfig, "window must be positive and fit in nfft");
}

}  // namespace

SpectrogramTF stft(const Waveform& w, const StftConfig& cfg) {
  if (w.samples.size() == 0) throw Error(ErrorKind::EmptyInput, "stft of empty waveform");
  check_config(cfg);
  const int win_len = cfg.window_len(), hop = cfg.hop(), pad = cfg.pad();
  const Eigen::Index n = w.samples.size();
  const Eigen::Index frames = cfg.frames(n);
  const Eigen::VectorXd win = analysis_window(cfg);

  SpectrogramTF out;
  out.frame_hop_s = cfg.hop_s;
  out.window_len_s = cfg.window_len_s;
  out.nfft = cfg.nfft;
  out.bins.resize(frames, cfg.bins());

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> frame(cfg.nfft, 0.0);
  std::vector<std::complex<double>> spec;
  for (Eigen::Index t = 0; t < frames; ++t) {
    const Eigen::Index start = t * hop - pad;
    for (int i = 0; i < win_len; ++i) {
      const Eigen::Index k = start + i;
      frame[i] = (k >= 0 && k < n) ? win[i] * static_cast<double>(w.samples[k]) : 0.0;
    }
    fft.fwd(spec, frame);
    for (int f = 0; f < cfg.bins(); ++f) out.bins(t, f) = std::complex<float>(spec[f]);
  }
  return out;
}

Eigen::VectorXd window_energy(Eigen::Index n, const StftConfig& cfg) {
  const int win_len = cfg.window_len(), hop = cfg.hop(), pad = cfg.pad();
  const Eigen::VectorXd win = analysis_window(cfg);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
  const Eigen::Index frames = cfg.frames(n);
  for (Eigen::Index t = 0; t < frames; ++t) {
    const Eigen::Index start = t * hop - pad;
    for (int i = 0; i < win_len; ++i) {
      const Eigen::Index k = start + i;
      if (k >= 0 && k < n) acc[k] += win[i] * win[i];
    }
  }
  return acc;
}

Waveform istft(const SpectrogramTF& s, Eigen::Index out_len, const StftConfig& cfg) {
  check_config(cfg);
  if (s.nfft != cfg.nfft || s.freqs() != cfg.bins() ||
      std::lround(s.frame_hop_s * cfg.sample_rate) != cfg.hop() ||
      std::lround(s.window_len_s * cfg.sample_rate) != cfg.window_len())
    throw Error(ErrorKind::IncompatibleConfig, "spectrogram does not match the STFT config");

  const int win_len = cfg.window_len(), hop = cfg.hop(), pad = cfg.pad();
  const Eigen::VectorXd win = analysis_window(cfg);
  const Eigen::Index frames = s.frames();
  // Reconstructable span of the padded signal, minus the leading pad.
  const Eigen::Index span = std::max<Eigen::Index>(out_len, (frames - 1) * hop + win_len);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(span);
  Eigen::VectorXd norm = Eigen::VectorXd::Zero(span);

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<std::complex<double>> spec(cfg.bins());
  std::vector<double> frame;
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int f = 0; f < cfg.bins(); ++f) spec[f] = std::complex<double>(s.bins(t, f));
    fft.inv(frame, spec, cfg.nfft);
    const Eigen::Index start = t * hop - pad;
    for (int i = 0; i < win_len; ++i) {
      const Eigen::Index k = start + i;
      if (k < 0 || k >= span) continue;
      acc[k] += win[i] * frame[i];
      norm[k] += win[i] * win[i];
    }
  }

  Waveform out = Waveform::zeros(out_len, cfg.sample_rate);
  for (Eigen::Index k = 0; k < out_len; ++k)
    if (norm[k] > 1e-10) out.samples[k] = static_cast<float>(acc[k] / norm[k]);
  return out;
}

}  // namespace tce

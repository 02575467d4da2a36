#pragma once

// Shared fixtures and independent reference implementations for the tests.
// Oracles here deliberately avoid the library code paths they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tce/augment.hpp"
#include "tce/error.hpp"
#include "tce/random.hpp"
#include "tce/toy.hpp"
#include "tce/tracks.hpp"
#include "tce/transcript.hpp"

namespace tce::test {

// Runs `expr` and reports whether it threw tce::Error of `kind`.
template <typename Fn>
bool throws_kind(Fn&& fn, ErrorKind kind) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind() == kind;
  }
  return false;
}

// ---- metric oracles (long double, straight from the definitions) ----

template <typename V>
long double dot_ld(const V& a, const V& b) {
  long double s = 0.0L;
  for (Eigen::Index i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * static_cast<long double>(b[i]);
  return s;
}

template <typename V>
long double snr_oracle(const V& est, const V& ref) {
  long double num = 0.0L, den = 0.0L;
  for (Eigen::Index i = 0; i < ref.size(); ++i) {
    const long double r = ref[i], d = static_cast<long double>(est[i]) - r;
    num += r * r;
    den += d * d;
  }
  return 10.0L * std::log10(num / den);
}

template <typename V>
long double si_sdr_oracle(const V& est, const V& ref) {
  const long double alpha = dot_ld(est, ref) / dot_ld(ref, ref);
  long double num = 0.0L, den = 0.0L;
  for (Eigen::Index i = 0; i < ref.size(); ++i) {
    const long double t = alpha * static_cast<long double>(ref[i]);
    const long double e = static_cast<long double>(est[i]) - t;
    num += t * t;
    den += e * e;
  }
  return 10.0L * std::log10(num / den);
}

// ---- interval oracle: exact counting on a 1 ms lattice ----
// Tests that use it keep every boundary on that lattice.

struct LatticeCounts {
  std::int64_t union_ms = 0;
  std::int64_t overlap_ms = 0;
};

inline LatticeCounts lattice_counts(const ConversationTranscript& t) {
  const auto n = static_cast<std::int64_t>(std::llround(t.duration_s * 1000.0)) + 1;
  std::vector<std::map<std::string, bool>> active(static_cast<std::size_t>(n));
  for (const auto& u : t.utterances) {
    const auto a = std::llround(u.start_s * 1000.0), b = std::llround(u.end_s * 1000.0);
    for (auto i = a; i < b; ++i) active[static_cast<std::size_t>(i)][u.speaker] = true;
  }
  LatticeCounts c;
  for (const auto& m : active) {
    if (m.size() >= 1) ++c.union_ms;
    if (m.size() >= 2) ++c.overlap_ms;
  }
  return c;
}

inline double overlap_oracle(const ConversationTranscript& t) {
  const auto c = lattice_counts(t);
  return c.union_ms == 0 ? 0.0 : static_cast<double>(c.overlap_ms) / static_cast<double>(c.union_ms);
}

// Random transcript whose boundaries are multiples of 10 ms.
inline ConversationTranscript random_transcript(Rng& rng, int speakers, double duration_s, int max_utts = 8) {
  std::vector<UtteranceSegment> utts;
  for (int s = 0; s < speakers; ++s) {
    const std::string id = "s" + std::to_string(s);
    double cursor = 0.0;
    const int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_utts)));
    for (int k = 0; k < n; ++k) {
      const double start = cursor + 0.01 * static_cast<double>(rng.below(300));
      const double end = start + 0.01 * static_cast<double>(1 + rng.below(400));
      if (end > duration_s) break;
      utts.push_back({id, std::round(start * 100.0) / 100.0, std::round(end * 100.0) / 100.0, std::nullopt});
      cursor = utts.back().end_s;
    }
  }
  return make_transcript("rand", duration_s, std::move(utts));
}

// Tracks with deterministic non-zero content inside each utterance span.
inline Tracks tracks_for(const ConversationTranscript& t, std::uint64_t seed) {
  Tracks tracks;
  const Eigen::Index n = to_samples(t.duration_s);
  for (const auto& s : t.speakers) tracks[s] = Waveform::zeros(n);
  Rng rng(seed);
  for (const auto& u : t.utterances) {
    const SampleSpan sp = span_of(u);
    auto& w = tracks[u.speaker];
    for (auto i = sp.begin; i < sp.end; ++i) {
      float v = static_cast<float>(0.1 * rng.normal());
      w.samples[i] = v == 0.0f ? 1e-3f : v;
    }
  }
  return tracks;
}

// ---- attention oracle (double loops, one head) ----

inline Eigen::MatrixXd attention_oracle(const Eigen::MatrixXd& tokens, const Eigen::MatrixXd& wq,
                                        const Eigen::VectorXd& bq, const Eigen::MatrixXd& wk,
                                        const Eigen::VectorXd& bk, const Eigen::MatrixXd& wv,
                                        const Eigen::VectorXd& bv) {
  const auto c = tokens.rows(), e = wq.rows(), dv = wv.rows(), df = tokens.cols();
  auto lin = [&](const Eigen::MatrixXd& w, const Eigen::VectorXd& b, Eigen::Index i, Eigen::Index o) {
    double s = b[o];
    for (Eigen::Index k = 0; k < df; ++k) s += w(o, k) * tokens(i, k);
    return s;
  };
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(c, dv);
  for (Eigen::Index i = 0; i < c; ++i) {
    std::vector<double> score(static_cast<std::size_t>(c));
    for (Eigen::Index j = 0; j < c; ++j) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < e; ++k) s += lin(wq, bq, i, k) * lin(wk, bk, j, k);
      score[static_cast<std::size_t>(j)] = s / std::sqrt(static_cast<double>(e));
    }
    const double m = *std::max_element(score.begin(), score.end());
    double z = 0.0;
    for (auto& s : score) z += (s = std::exp(s - m));
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index o = 0; o < dv; ++o) out(i, o) += score[static_cast<std::size_t>(j)] / z * lin(wv, bv, j, o);
  }
  return out;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tce_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace tce::test

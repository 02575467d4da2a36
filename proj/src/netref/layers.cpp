#include "tce/netref/layers.hpp"

#include <algorithm>
#include <cmath>

#include "tce/error.hpp"

namespace tce::netref {

using Eigen::Index;

std::string block_prefix(int b) { return "blocks." + std::to_string(b) + "."; }

namespace {

// Column budget for the batched recurrences; bounds the gate buffers.
constexpr Index kColumnBudget = 1 << 15;

void check_shape(const HiddenTF& y) {
  if (y.data.rows() != y.channels || y.data.cols() != y.frames * y.freqs)
    throw Error(ErrorKind::ShapeMismatch, "hidden tensor storage does not match its shape");
}

template <typename Block>
void sigmoid_inplace(Block&& b) {
  b = (0.5f * (0.5f * b.array()).tanh() + 0.5f).matrix();
}

}  // namespace

HiddenTF encode(const Waveform& x, const WeightStore& w, const ModelConfig& cfg) {
  return encode(stft(x, cfg.stft), w, cfg);
}

HiddenTF encode(const SpectrogramTF& spec, const WeightStore& w, const ModelConfig& cfg) {
  const Index t_len = spec.frames(), f_len = spec.freqs(), d = cfg.embed_channels;
  if (f_len != cfg.freqs()) throw Error(ErrorKind::ShapeMismatch, "spectrogram bins do not match config");
  const auto kernel = w.matrix("encoder.weight", d, 18);
  const auto bias = w.vector("encoder.bias", d);
  const Eigen::MatrixXf planes[2] = {spec.bins.real(), spec.bins.imag()};

  HiddenTF y = HiddenTF::zeros(d, t_len, f_len);
  Eigen::MatrixXf patches(18, f_len);
  for (Index t = 0; t < t_len; ++t) {
    patches.setZero();
    for (int c = 0; c < 2; ++c)
      for (int kt = 0; kt < 3; ++kt) {
        const Index tt = t + kt - 1;
        if (tt < 0 || tt >= t_len) continue;
        for (int kf = 0; kf < 3; ++kf) {
          const Index row = c * 9 + kt * 3 + kf;
          for (Index f = 0; f < f_len; ++f) {
            const Index ff = f + kf - 1;
            if (ff >= 0 && ff < f_len) patches(row, f) = planes[c](tt, ff);
          }
        }
      }
    y.frame(t).noalias() = kernel * patches;
    y.frame(t).colwise() += bias;
  }
  return y;
}

SpectrogramTF decode(const HiddenTF& y, const WeightStore& w, const ModelConfig& cfg) {
  check_shape(y);
  const Index d = y.channels, t_len = y.frames, f_len = y.freqs;
  const auto& raw = w.at("decoder.weight");
  if (raw.shape != Shape{d, 2, 3, 3})
    throw Error(ErrorKind::WeightMismatch, "decoder.weight has the wrong shape");
  const auto bias = w.vector("decoder.bias", 2);
  // Transposed conv: out[c,t,f] = sum W[d,c,kt,kf] * in[d, t+1-kt, f+1-kf].
  Eigen::MatrixXf kernel(2, 9 * d);
  for (Index ch = 0; ch < d; ++ch)
    for (int c = 0; c < 2; ++c)
      for (int k = 0; k < 9; ++k) kernel(c, ch * 9 + k) = raw.values[static_cast<std::size_t>((ch * 2 + c) * 9 + k)];

  SpectrogramTF spec;
  spec.frame_hop_s = cfg.stft.hop_s;
  spec.window_len_s = cfg.stft.window_len_s;
  spec.nfft = cfg.stft.nfft;
  spec.bins.resize(t_len, f_len);
  Eigen::MatrixXf patches(9 * d, f_len), out(2, f_len);
  for (Index t = 0; t < t_len; ++t) {
    patches.setZero();
    for (int kt = 0; kt < 3; ++kt) {
      const Index tt = t + 1 - kt;
      if (tt < 0 || tt >= t_len) continue;
      for (int kf = 0; kf < 3; ++kf)
        for (Index f = 0; f < f_len; ++f) {
          const Index ff = f + 1 - kf;
          if (ff < 0 || ff >= f_len) continue;
          for (Index ch = 0; ch < d; ++ch) patches(ch * 9 + kt * 3 + kf, f) = y.data(ch, tt * f_len + ff);
        }
    }
    out.noalias() = kernel * patches;
    out.colwise() += bias;
    for (Index f = 0; f < f_len; ++f) spec.bins(t, f) = {out(0, f), out(1, f)};
  }
  return spec;
}

HiddenTF film(const HiddenTF& y, const Eigen::VectorXf& embedding, const WeightStore& w,
              const std::string& prefix) {
  check_shape(y);
  const Index d = y.channels, k = embedding.size();
  const Eigen::VectorXf gamma = w.matrix(prefix + "film.gamma.weight", d, k) * embedding +
                                w.vector(prefix + "film.gamma.bias", d);
  const Eigen::VectorXf beta = w.matrix(prefix + "film.beta.weight", d, k) * embedding +
                               w.vector(prefix + "film.beta.bias", d);
  HiddenTF out = y;
  out.data = gamma.asDiagonal() * y.data;
  out.data.colwise() += beta;
  return out;
}

Eigen::MatrixXf blstm_residual(const Eigen::MatrixXf& x, Index steps, Index batch,
                               const WeightStore& w, const std::string& prefix, int hidden) {
  const Index in = x.rows(), h = hidden;
  if (x.cols() != steps * batch) throw Error(ErrorKind::ShapeMismatch, prefix + ": bad sequence layout");
  // Reused across calls; the chunked callers hit the same sizes repeatedly.
  // z stacks [x_s; h_{s-1}] so each step is a single GEMM with [W_ih W_hh].
  thread_local Eigen::MatrixXf states, stacked, z, gates, cell;
  states.resize(2 * h, steps * batch);
  stacked.resize(4 * h, in + h);
  z.resize(in + h, batch);
  gates.resize(4 * h, batch);
  cell.resize(h, batch);

  for (int dir = 0; dir < 2; ++dir) {
    const std::string p = prefix + (dir == 0 ? ".fwd" : ".bwd");
    stacked.leftCols(in) = w.matrix(p + ".w_ih", 4 * h, in);
    stacked.rightCols(h) = w.matrix(p + ".w_hh", 4 * h, h);
    const auto bias = w.vector(p + ".bias", 4 * h);
    z.bottomRows(h).setZero();
    cell.setZero();
    for (Index k = 0; k < steps; ++k) {
      const Index s = dir == 0 ? k : steps - 1 - k;
      z.topRows(in) = x.middleCols(s * batch, batch);
      gates.noalias() = stacked * z;
      gates.colwise() += bias;
      sigmoid_inplace(gates.topRows(2 * h));  // input, forget
      gates.middleRows(2 * h, h) = gates.middleRows(2 * h, h).array().tanh().matrix();
      sigmoid_inplace(gates.bottomRows(h));  // output
      cell = gates.middleRows(h, h).cwiseProduct(cell) +
             gates.topRows(h).cwiseProduct(gates.middleRows(2 * h, h));
      z.bottomRows(h) = gates.bottomRows(h).cwiseProduct(cell.array().tanh().matrix());
      states.block(dir * h, s * batch, h, batch) = z.bottomRows(h);
    }
  }
  const Index out_dim = in;
  Eigen::MatrixXf out = x;
  out.noalias() += w.matrix(prefix + ".proj.weight", out_dim, 2 * h) * states;
  out.colwise() += w.vector(prefix + ".proj.bias", out_dim);
  return out;
}

HiddenTF local_module(const HiddenTF& y, const WeightStore& w, const ModelConfig& cfg,
                      const std::string& prefix) {
  check_shape(y);
  const Index d = y.channels, t_len = y.frames, f_len = y.freqs;
  const Index win = cfg.window, stride = cfg.stride;
  const Index chunks = std::max<Index>(1, chunk_count(t_len, static_cast<int>(stride)));
  const Index group = std::max<Index>(1, kColumnBudget / (win * f_len));

  Eigen::MatrixXf acc = Eigen::MatrixXf::Zero(d, t_len * f_len);
  Eigen::VectorXi hits = Eigen::VectorXi::Zero(t_len);
  for (Index c0 = 0; c0 < chunks; c0 += group) {
    const Index g = std::min(group, chunks - c0), frames = g * win;
    auto frame_of = [&](Index gi, Index wi) { return (c0 + gi) * stride + wi; };

    // Frequency path: F steps, one sequence per (window, frame).
    Eigen::MatrixXf xf = Eigen::MatrixXf::Zero(d, f_len * frames);
    for (Index gi = 0; gi < g; ++gi)
      for (Index wi = 0; wi < win; ++wi) {
        const Index t = frame_of(gi, wi);
        if (t >= t_len) continue;
        for (Index f = 0; f < f_len; ++f) xf.col(f * frames + gi * win + wi) = y.data.col(t * f_len + f);
      }
    xf = blstm_residual(xf, f_len, frames, w, prefix + "local.freq", cfg.hidden);

    // Time path: W steps, one sequence per (window, frequency).
    const Index batch = g * f_len;
    Eigen::MatrixXf xt(d, win * batch);
    for (Index gi = 0; gi < g; ++gi)
      for (Index wi = 0; wi < win; ++wi)
        for (Index f = 0; f < f_len; ++f) xt.col(wi * batch + gi * f_len + f) = xf.col(f * frames + gi * win + wi);
    xt = blstm_residual(xt, win, batch, w, prefix + "local.time", cfg.hidden);

    for (Index gi = 0; gi < g; ++gi)
      for (Index wi = 0; wi < win; ++wi) {
        const Index t = frame_of(gi, wi);
        if (t >= t_len) continue;
        ++hits[t];
        for (Index f = 0; f < f_len; ++f) acc.col(t * f_len + f) += xt.col(wi * batch + gi * f_len + f);
      }
  }
  HiddenTF out{d, t_len, f_len, std::move(acc)};
  for (Index t = 0; t < t_len; ++t)
    if (hits[t] > 1) out.frame(t) /= static_cast<float>(hits[t]);
  return out;
}

Eigen::MatrixXf positional_encoding(Index positions, Index dim) {
  Eigen::MatrixXf pe(positions, dim);
  for (Index i = 0; i < dim; ++i) {
    const double freq = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(dim));
    for (Index p = 0; p < positions; ++p) {
      const double a = static_cast<double>(p) * freq;
      pe(p, i) = static_cast<float>(i % 2 == 0 ? std::sin(a) : std::cos(a));
    }
  }
  return pe;
}

Eigen::MatrixXf multi_head_attention(const Eigen::MatrixXf& tokens, const WeightStore& w,
                                     const std::string& prefix, int heads, int key_dim) {
  const Index c = tokens.rows(), df = tokens.cols(), e = key_dim;
  if (df % heads != 0) throw Error(ErrorKind::ShapeMismatch, "token width not divisible by heads");
  const Index dv = df / heads;
  Eigen::MatrixXf q = tokens * w.matrix(prefix + "query.weight", heads * e, df).transpose();
  q.rowwise() += w.vector(prefix + "query.bias", heads * e).transpose();
  Eigen::MatrixXf k = tokens * w.matrix(prefix + "key.weight", heads * e, df).transpose();
  k.rowwise() += w.vector(prefix + "key.bias", heads * e).transpose();
  Eigen::MatrixXf v = tokens * w.matrix(prefix + "value.weight", df, df).transpose();
  v.rowwise() += w.vector(prefix + "value.bias", df).transpose();

  const float scale = 1.0f / std::sqrt(static_cast<float>(e));
  constexpr Index kRowBlock = 256;
  Eigen::MatrixXf out(c, df), scores;
  for (int l = 0; l < heads; ++l) {
    const auto ql = q.middleCols(l * e, e);
    const auto kl = k.middleCols(l * e, e);
    const auto vl = v.middleCols(l * dv, dv);
    for (Index r0 = 0; r0 < c; r0 += kRowBlock) {
      const Index rows = std::min(kRowBlock, c - r0);
      scores.noalias() = (ql.middleRows(r0, rows) * kl.transpose()) * scale;
      const Eigen::VectorXf peak = scores.rowwise().maxCoeff();
      scores = (scores.colwise() - peak).array().exp().matrix();
      const Eigen::VectorXf total = scores.rowwise().sum();
      scores = total.cwiseInverse().asDiagonal() * scores;
      out.block(r0, l * dv, rows, dv).noalias() = scores * vl;
    }
  }
  return out;
}

namespace {

// D x (n * F) hidden block -> n x (D * F) tokens, flat index d * F + f.
Eigen::MatrixXf to_tokens(const Eigen::Ref<const Eigen::MatrixXf>& m, Index n, Index f_len) {
  const Index d = m.rows();
  Eigen::MatrixXf tokens(n, d * f_len);
  for (Index i = 0; i < n; ++i)
    for (Index ch = 0; ch < d; ++ch)
      for (Index f = 0; f < f_len; ++f) tokens(i, ch * f_len + f) = m(ch, i * f_len + f);
  return tokens;
}

Eigen::MatrixXf from_tokens(const Eigen::MatrixXf& tokens, Index d, Index f_len) {
  const Index n = tokens.rows();
  Eigen::MatrixXf m(d, n * f_len);
  for (Index i = 0; i < n; ++i)
    for (Index ch = 0; ch < d; ++ch)
      for (Index f = 0; f < f_len; ++f) m(ch, i * f_len + f) = tokens(i, ch * f_len + f);
  return m;
}

// D -> D linear with PReLU, applied per column.
Eigen::MatrixXf feedforward(const Eigen::MatrixXf& m, const WeightStore& w, const std::string& prefix) {
  const Index d = m.rows();
  Eigen::MatrixXf out = w.matrix(prefix + "ff.weight", d, d) * m;
  out.colwise() += w.vector(prefix + "ff.bias", d);
  const float slope = w.scalar(prefix + "ff.prelu");
  out = out.unaryExpr([slope](float v) { return v > 0.0f ? v : slope * v; });
  return out;
}

enum class Pool { Mean, Max };

// D x (C * F): pooled frames of each window.
Eigen::MatrixXf pool_chunks(const HiddenTF& y, Index win, Index stride, Index chunks, Pool kind) {
  const Index f_len = y.freqs;
  Eigen::MatrixXf pooled(y.channels, chunks * f_len);
  for (Index c = 0; c < chunks; ++c) {
    const Index t0 = c * stride, t1 = std::min(t0 + win, y.frames);
    auto dst = pooled.middleCols(c * f_len, f_len);
    dst = y.frame(t0);
    for (Index t = t0 + 1; t < t1; ++t) {
      if (kind == Pool::Mean)
        dst += y.frame(t);
      else
        dst = dst.cwiseMax(y.frame(t));
    }
    if (kind == Pool::Mean) dst /= static_cast<float>(t1 - t0);
  }
  return pooled;
}

HiddenTF broadcast_residual(const HiddenTF& y, const Eigen::MatrixXf& per_chunk, Index stride, Index chunks) {
  HiddenTF out = y;
  for (Index t = 0; t < y.frames; ++t) {
    const Index c = std::min(t / stride, chunks - 1);
    out.frame(t) += per_chunk.middleCols(c * y.freqs, y.freqs);
  }
  return out;
}

HiddenTF pooled_global(const HiddenTF& y, const WeightStore& w, const ModelConfig& cfg,
                       const std::string& prefix, Index win, Index stride, bool attend, Pool kind) {
  const Index chunks = std::max<Index>(1, chunk_count(y.frames, static_cast<int>(stride)));
  Eigen::MatrixXf pooled = pool_chunks(y, win, stride, chunks, kind);
  if (attend) {
    Eigen::MatrixXf tokens = to_tokens(pooled, chunks, y.freqs);
    tokens += positional_encoding(chunks, tokens.cols());
    pooled = from_tokens(multi_head_attention(tokens, w, prefix, cfg.heads, cfg.key_dim),
                         y.channels, y.freqs);
  }
  return broadcast_residual(y, feedforward(pooled, w, prefix), stride, chunks);
}

HiddenTF windowed_attention(const HiddenTF& y, const WeightStore& w, const ModelConfig& cfg,
                            const std::string& prefix) {
  const Index f_len = y.freqs, win = cfg.window, stride = cfg.stride;
  const Index chunks = std::max<Index>(1, chunk_count(y.frames, cfg.stride));
  Eigen::MatrixXf acc = Eigen::MatrixXf::Zero(y.channels, y.frames * f_len);
  Eigen::VectorXi hits = Eigen::VectorXi::Zero(y.frames);
  for (Index c = 0; c < chunks; ++c) {
    const Index t0 = c * stride, n = std::min(t0 + win, y.frames) - t0;
    Eigen::MatrixXf tokens = to_tokens(y.data.middleCols(t0 * f_len, n * f_len), n, f_len);
    tokens += positional_encoding(n, tokens.cols());
    const Eigen::MatrixXf attended = from_tokens(
        multi_head_attention(tokens, w, prefix, cfg.heads, cfg.key_dim), y.channels, f_len);
    acc.middleCols(t0 * f_len, n * f_len) += feedforward(attended, w, prefix);
    hits.segment(t0, n).array() += 1;
  }
  HiddenTF out = y;
  for (Index t = 0; t < y.frames; ++t) out.frame(t) += acc.middleCols(t * f_len, f_len) / static_cast<float>(hits[t]);
  return out;
}

HiddenTF full_lstm(const HiddenTF& y, const WeightStore& w, const ModelConfig& cfg, const std::string& prefix) {
  const Index d = y.channels, t_len = y.frames, f_len = y.freqs;
  const Index group = std::clamp<Index>(kColumnBudget * 4 / t_len, 1, f_len);
  HiddenTF out = y;
  for (Index f0 = 0; f0 < f_len; f0 += group) {
    const Index g = std::min(group, f_len - f0);
    Eigen::MatrixXf x(d, t_len * g);
    for (Index t = 0; t < t_len; ++t)
      for (Index j = 0; j < g; ++j) x.col(t * g + j) = y.data.col(t * f_len + f0 + j);
    x = blstm_residual(x, t_len, g, w, prefix + "global.lstm", cfg.hidden);
    for (Index t = 0; t < t_len; ++t)
      for (Index j = 0; j < g; ++j) out.data.col(t * f_len + f0 + j) = x.col(t * g + j);
  }
  return out;
}

}  // namespace

HiddenTF global_module(const HiddenTF& y, const WeightStore& w, const ModelConfig& cfg,
                       const std::string& prefix) {
  check_shape(y);
  const std::string p = prefix + "global.";
  switch (cfg.global_variant) {
    case GlobalVariant::PoolingAttention:
      return pooled_global(y, w, cfg, p, cfg.window, cfg.stride, true, Pool::Mean);
    case GlobalVariant::FullAttention:
      return pooled_global(y, w, cfg, p, 1, 1, true, Pool::Mean);
    case GlobalVariant::MeanPool:
      return pooled_global(y, w, cfg, p, cfg.window, cfg.stride, false, Pool::Mean);
    case GlobalVariant::MaxPool:
      return pooled_global(y, w, cfg, p, cfg.window, cfg.stride, false, Pool::Max);
    case GlobalVariant::LocalAttention:
      return windowed_attention(y, w, cfg, p);
    case GlobalVariant::FullLstm:
      return full_lstm(y, w, cfg, prefix);
  }
  throw Error(ErrorKind::UnknownVariant, "unhandled global variant");
}

}  // namespace tce::netref

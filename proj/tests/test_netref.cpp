#include "doctest.h"
#include "support.hpp"
#include "tce/netref/bench.hpp"
#include "tce/netref/layers.hpp"
#include "tce/netref/model.hpp"

using namespace tce;
using namespace tce::netref;

namespace {

ModelConfig small_config() {
  ModelConfig c;
  c.embed_channels = 4;
  c.hidden = 8;
  c.window = 10;
  c.stride = 10;
  c.heads = 2;
  c.key_dim = 8;
  c.blocks = 2;
  return c;
}

HiddenTF random_hidden(Eigen::Index d, Eigen::Index t, Eigen::Index f, std::uint64_t seed) {
  Rng rng(seed);
  HiddenTF y = HiddenTF::zeros(d, t, f);
  for (Eigen::Index i = 0; i < y.data.size(); ++i) y.data.data()[i] = static_cast<float>(rng.normal());
  return y;
}

Waveform noise(double seconds, std::uint64_t seed) {
  Rng rng(seed);
  Waveform w = Waveform::zeros(to_samples(seconds));
  for (auto& v : w.samples) v = static_cast<float>(0.1 * rng.normal());
  return w;
}

void fill(WeightStore& w, const std::string& name, float v) {
  Tensor t = w.at(name);
  std::fill(t.values.begin(), t.values.end(), v);
  w.set(name, t);
}

}  // namespace

TEST_SUITE("netref") {
  TEST_CASE("config validation and json") {
    ModelConfig c;
    c.validate();
    CHECK(c.freqs() == 129);
    CHECK(c.flat_dim() == 2064);
    CHECK(c.value_dim() == 516);
    CHECK(ModelConfig::from_json(c.to_json()).to_json() == c.to_json());
    ModelConfig bad = c;
    bad.stride = 200;
    CHECK(test::throws_kind([&] { bad.validate(); }, ErrorKind::InvalidConfig));
    bad = c;
    bad.heads = 5;
    CHECK(test::throws_kind([&] { bad.validate(); }, ErrorKind::InvalidConfig));
    CHECK(test::throws_kind([] { parse_variant("transformer"); }, ErrorKind::UnknownVariant));
    CHECK(parse_variants("mean_pool,full_attention").size() == 2);
    CHECK(chunk_count(15001, 100) == 151);
  }

  TEST_CASE("parameter count pin") {
    // Regression pin for the default configuration.
    CHECK(param_count(ModelConfig{}) == 16237397);
    CHECK(random_weights(ModelConfig{}, 1).param_count() == param_count(ModelConfig{}));
  }

  TEST_CASE("weight file round trip and strict checking") {
    const auto dir = test::scratch_dir("weights");
    const auto cfg = small_config();
    const auto w = random_weights(cfg, 3);
    w.save(dir / "w.tcew");
    const auto back = WeightStore::load(dir / "w.tcew");
    CHECK(back == w);
    check_weights(back, cfg);
    WeightStore extra = w;
    extra.set("stray", {{1}, {0.0f}});
    CHECK(test::throws_kind([&] { check_weights(extra, cfg); }, ErrorKind::WeightMismatch));
    ModelConfig other = cfg;
    other.hidden = 16;
    CHECK(test::throws_kind([&] { check_weights(w, other); }, ErrorKind::WeightMismatch));
    std::ofstream(dir / "bad.tcew") << "nope";
    CHECK(test::throws_kind([&] { WeightStore::load(dir / "bad.tcew"); }, ErrorKind::ParseError));
  }

  TEST_CASE("encoder shapes and constant response to silence") {
    ModelConfig cfg;
    const auto w = random_weights(cfg, 1);
    const auto y = encode(Waveform::zeros(960000), w, cfg);
    CHECK(y.channels == 16);
    CHECK(y.frames == 15001);
    CHECK(y.freqs == 129);
    const auto bias = w.vector("encoder.bias", 16);
    for (Eigen::Index d = 0; d < 16; ++d) CHECK((y.data.row(d).array() == bias[d]).all());
  }

  TEST_CASE("identity encoder kernel copies the input planes") {
    auto cfg = small_config();
    cfg.embed_channels = 2;
    auto w = random_weights(cfg, 1);
    Tensor k = w.at("encoder.weight");
    std::fill(k.values.begin(), k.values.end(), 0.0f);
    k.values[0 * 18 + 0 * 9 + 4] = 1.0f;  // out 0 <- real, centre tap
    k.values[1 * 18 + 1 * 9 + 4] = 1.0f;  // out 1 <- imag, centre tap
    w.set("encoder.weight", k);
    fill(w, "encoder.bias", 0.0f);
    const auto spec = stft(noise(0.5, 2), cfg.stft);
    const auto y = encode(spec, w, cfg);
    for (Eigen::Index t = 0; t < spec.frames(); ++t)
      for (Eigen::Index f = 0; f < spec.freqs(); ++f) {
        CHECK(y.at(0, t, f) == spec.bins(t, f).real());
        CHECK(y.at(1, t, f) == spec.bins(t, f).imag());
      }
  }

  TEST_CASE("film identity, zero gamma and sensitivity") {
    const auto cfg = small_config();
    auto w = random_weights(cfg, 2);
    const auto y = random_hidden(4, 20, 129, 3);
    const auto e = pseudo_embedding("a", 1), e2 = pseudo_embedding("b", 1);
    CHECK(film(y, e.vector, w, "blocks.1.").data != film(y, e2.vector, w, "blocks.1.").data);
    fill(w, "blocks.1.film.gamma.weight", 0.0f);
    fill(w, "blocks.1.film.gamma.bias", 1.0f);
    fill(w, "blocks.1.film.beta.weight", 0.0f);
    fill(w, "blocks.1.film.beta.bias", 0.0f);
    CHECK(film(y, e.vector, w, "blocks.1.").data == y.data);
    fill(w, "blocks.1.film.gamma.bias", 0.0f);
    fill(w, "blocks.1.film.beta.bias", 0.25f);
    CHECK((film(y, e.vector, w, "blocks.1.").data.array() == 0.25f).all());
  }

  TEST_CASE("local module: residual path, single chunk, locality") {
    const auto cfg = small_config();
    auto w = random_weights(cfg, 4);
    const auto y = random_hidden(4, 35, 129, 5);
    const auto out = local_module(y, w, cfg, "blocks.0.");
    CHECK(out.frames == 35);
    CHECK(out.data.allFinite());

    WeightStore zeroed = w;
    for (const char* path : {"local.freq", "local.time"})
      for (const char* part : {".proj.weight", ".proj.bias"}) fill(zeroed, std::string("blocks.0.") + path + part, 0.0f);
    CHECK(local_module(y, zeroed, cfg, "blocks.0.").data == y.data);

    const auto single = local_module(random_hidden(4, 10, 129, 6), w, cfg, "blocks.0.");
    CHECK(single.frames == 10);

    HiddenTF probe = y;
    for (Eigen::Index t = 10; t < 20; ++t) probe.frame(t).setZero();
    const auto moved = local_module(probe, w, cfg, "blocks.0.");
    for (Eigen::Index t = 0; t < 35; ++t) {
      const bool inside = t >= 10 && t < 20;
      const bool same = moved.frame(t) == out.frame(t);
      CHECK(same != inside);
    }
  }

  TEST_CASE("overlapping windows average their write-backs") {
    auto cfg = small_config();
    cfg.stride = 5;
    const auto w = random_weights(cfg, 7);
    const auto y = random_hidden(4, 23, 129, 8);
    const auto out = local_module(y, w, cfg, "blocks.0.");
    CHECK(out.frames == 23);
    CHECK(out.data.allFinite());
  }

  TEST_CASE("pooling attention reaches every chunk") {
    const auto cfg = small_config();
    const auto w = random_weights(cfg, 9);
    const auto y = random_hidden(4, 40, 129, 10);
    const auto out = global_module(y, w, cfg, "blocks.0.");
    HiddenTF probe = y;
    for (Eigen::Index t = 10; t < 20; ++t) probe.frame(t).array() += 1.0f;
    const auto moved = global_module(probe, w, cfg, "blocks.0.");
    for (Eigen::Index t = 0; t < 40; ++t)
      if (t < 10 || t >= 20) CHECK(moved.frame(t) != out.frame(t));
  }

  TEST_CASE("pooling without attention stays inside the chunk") {
    for (auto v : {GlobalVariant::MeanPool, GlobalVariant::MaxPool, GlobalVariant::LocalAttention}) {
      auto cfg = small_config();
      cfg.global_variant = v;
      const auto w = random_weights(cfg, 11);
      const auto y = random_hidden(4, 30, 129, 12);
      const auto out = global_module(y, w, cfg, "blocks.0.");
      HiddenTF probe = y;
      for (Eigen::Index t = 10; t < 20; ++t) probe.frame(t).array() += 1.0f;
      const auto moved = global_module(probe, w, cfg, "blocks.0.");
      for (Eigen::Index t = 0; t < 30; ++t)
        if (t < 10 || t >= 20) CHECK(moved.frame(t) == out.frame(t));
    }
  }

  TEST_CASE("single-head attention equals the brute-force oracle") {
    Rng rng(13);
    const int df = 6, e = 3;
    WeightStore w;
    auto rand_tensor = [&](Shape s) {
      Tensor t{s, {}};
      t.values.resize(static_cast<std::size_t>(t.numel()));
      for (auto& v : t.values) v = static_cast<float>(rng.normal());
      return t;
    };
    w.set("q.query.weight", rand_tensor({e, df}));
    w.set("q.query.bias", rand_tensor({e}));
    w.set("q.key.weight", rand_tensor({e, df}));
    w.set("q.key.bias", rand_tensor({e}));
    w.set("q.value.weight", rand_tensor({df, df}));
    w.set("q.value.bias", rand_tensor({df}));
    for (int c : {3, 4}) {
      Eigen::MatrixXf tokens(c, df);
      for (Eigen::Index i = 0; i < tokens.size(); ++i) tokens.data()[i] = static_cast<float>(rng.normal());
      const Eigen::MatrixXf got = multi_head_attention(tokens, w, "q.", 1, e);
      auto m = [&](const char* n, int r, int cols) { return w.matrix(n, r, cols).cast<double>().eval(); };
      auto v = [&](const char* n, int r) { return w.vector(n, r).cast<double>().eval(); };
      const Eigen::MatrixXd want =
          test::attention_oracle(tokens.cast<double>(), m("q.query.weight", e, df), v("q.query.bias", e),
                                 m("q.key.weight", e, df), v("q.key.bias", e), m("q.value.weight", df, df),
                                 v("q.value.bias", df));
      CHECK((got.cast<double>() - want).cwiseAbs().maxCoeff() < 1e-5);
    }
    // zero query/key weights: uniform weights 1/C, i.e. the mean of the values
    fill(w, "q.query.weight", 0.0f);
    fill(w, "q.query.bias", 0.0f);
    fill(w, "q.key.weight", 0.0f);
    fill(w, "q.key.bias", 0.0f);
    Eigen::MatrixXf tokens = Eigen::MatrixXf::Random(5, df);
    const Eigen::MatrixXf got = multi_head_attention(tokens, w, "q.", 1, e);
    Eigen::MatrixXf values = tokens * w.matrix("q.value.weight", df, df).transpose();
    values.rowwise() += w.vector("q.value.bias", df).transpose();
    const Eigen::RowVectorXf mean = values.colwise().mean();
    for (int i = 0; i < 5; ++i) CHECK((got.row(i) - mean).cwiseAbs().maxCoeff() < 1e-5f);
  }

  TEST_CASE("positional encoding") {
    const auto pe = positional_encoding(4, 6);
    CHECK(pe(0, 0) == 0.0f);
    CHECK(pe(0, 1) == 1.0f);
    CHECK(pe(1, 0) == doctest::Approx(std::sin(1.0)));
    CHECK(pe(2, 3) == doctest::Approx(std::cos(2.0 * std::pow(10000.0, -2.0 / 6.0))));
  }

  TEST_CASE("forward: lengths, determinism, sensitivity and errors") {
    const auto cfg = small_config();
    const auto w = random_weights(cfg, 14);
    const auto e = pseudo_embedding("a", 1), e2 = pseudo_embedding("b", 1);
    for (double len : {1.0, 7.3}) {
      const auto x = noise(len, 15);
      const auto y = forward(x, e, w, cfg);
      CHECK(y.size() == x.size());
      CHECK(y.samples.allFinite());
      CHECK(forward(x, e, w, cfg) == y);
      CHECK(forward(x, e2, w, cfg).samples != y.samples);
    }
    SpeakerEmbedding short_e{"s", Eigen::VectorXf::Ones(128)};
    CHECK(test::throws_kind([&] { forward(noise(1.0, 1), short_e, w, cfg); }, ErrorKind::ShapeMismatch));
    auto other = cfg;
    other.global_variant = GlobalVariant::FullLstm;
    CHECK(test::throws_kind([&] { forward(noise(1.0, 1), e, w, other); }, ErrorKind::WeightMismatch));
  }

  TEST_CASE("every variant runs") {
    for (auto v : {GlobalVariant::PoolingAttention, GlobalVariant::MeanPool, GlobalVariant::MaxPool,
                   GlobalVariant::FullLstm, GlobalVariant::LocalAttention, GlobalVariant::FullAttention}) {
      auto cfg = small_config();
      cfg.global_variant = v;
      const auto x = noise(1.0, 16);
      const auto y = forward(x, pseudo_embedding("a", 1), random_weights(cfg, 17), cfg);
      CHECK(y.size() == x.size());
      CHECK(y.samples.allFinite());
    }
  }

  TEST_CASE("bench rows") {
    const auto cfg = small_config();
    CHECK(test::throws_kind([&] { rtf_bench(cfg, {GlobalVariant::MeanPool}, 0.5, 2, 1); }, ErrorKind::InvalidConfig));
    const auto rows = rtf_bench(cfg, {GlobalVariant::MeanPool, GlobalVariant::PoolingAttention}, 0.5, 3, 1);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
      CHECK(r.runs_s.size() == 3);
      CHECK(r.threads == 1);
      CHECK(r.rtf == doctest::Approx(r.median_s / 0.5));
      auto sorted = r.runs_s;
      std::sort(sorted.begin(), sorted.end());
      CHECK(r.median_s == sorted[1]);
    }
    CHECK(rows[1].param_count == param_count([&] { auto c = cfg; c.global_variant = GlobalVariant::PoolingAttention; return c; }()));
  }
}

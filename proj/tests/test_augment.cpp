#include "doctest.h"
#include "support.hpp"
#include "tce/augment.hpp"

using namespace tce;

namespace {

TurnHistogram point(double v) { return {0.05, {v}, {1.0}}; }

TurnTakingStats degenerate(double gap, double turn) {
  TurnTakingStats s;
  s.gap = point(gap);
  s.turn_len = point(turn);
  s.backchannel_rate = 0.0;
  s.backchannel_len = point(0.3);
  return s;
}

std::multiset<std::tuple<std::string, double, double>> timing(const ConversationTranscript& t) {
  std::multiset<std::tuple<std::string, double, double>> m;
  for (const auto& u : t.utterances) m.insert({u.speaker, u.start_s, u.end_s});
  return m;
}

}  // namespace

TEST_SUITE("augment") {
  TEST_CASE("default stand-in statistics are normalised and bounded") {
    auto s = TurnTakingStats::default_stand_in();
    validate(s);
    double mass = 0.0, below = 0.0;
    for (std::size_t i = 0; i < s.gap.values.size(); ++i) {
      mass += s.gap.mass[i];
      if (s.gap.values[i] < 0) below += s.gap.mass[i];
      CHECK(s.gap.values[i] >= -3.0);
      CHECK(s.gap.values[i] <= 3.0);
    }
    CHECK(mass == doctest::Approx(1.0));
    CHECK(below == doctest::Approx(0.2).epsilon(0.25));
    CHECK(s.backchannel_rate == 2.0);
    const auto back = TurnTakingStats::from_json(s.to_json());
    CHECK(back.gap.values == s.gap.values);
  }

  TEST_CASE("zero-variance timeline is closed form") {
    const auto t = synth_timeline(degenerate(0.2, 2.0), {"A", "B"}, 20.0, 1);
    REQUIRE(t.utterances.size() >= 4);
    for (std::size_t k = 0; k < t.utterances.size(); ++k) {
      const auto& u = t.utterances[k];
      CHECK(u.speaker == (k % 2 == 0 ? "A" : "B"));
      CHECK(u.start_s == doctest::Approx(2.2 * k));
      CHECK(u.end_s == doctest::Approx(std::min(2.2 * k + 2.0, 20.0)));
    }
  }

  TEST_CASE("negative gaps overlap every transition") {
    const auto t = synth_timeline(degenerate(-0.5, 2.0), {"A", "B"}, 30.0, 2);
    for (std::size_t k = 1; k < t.utterances.size(); ++k)
      CHECK(t.utterances[k].start_s == doctest::Approx(t.utterances[k - 1].end_s - 0.5));
    CHECK(overlap_ratio(t) > 0.0);
    CHECK(overlap_ratio(t) == doctest::Approx(test::overlap_oracle(t)).epsilon(1e-6));
  }

  TEST_CASE("synth is reproducible and fills audio inside utterances only") {
    const auto pool = toy_pool("en", "a", 4, 3, 1);
    const auto stats = TurnTakingStats::default_stand_in();
    const auto r1 = synth_conversation(stats, 2, 40.0, pool, 9);
    const auto r2 = synth_conversation(stats, 2, 40.0, pool, 9);
    CHECK(r1.transcript == r2.transcript);
    CHECK(r1.tracks == r2.tracks);
    CHECK(r1.transcript.speakers.size() == 2);
    for (const auto& [spk, w] : r1.tracks) {
      CHECK(w.size() == 640000);
      Eigen::VectorXf outside = w.samples;
      for (const auto* u : r1.transcript.utterances_of(spk)) {
        const auto sp = span_of(*u);
        outside.segment(sp.begin, sp.length()).setZero();
      }
      CHECK(outside.cwiseAbs().maxCoeff() == 0.0f);
    }
  }

  TEST_CASE("p = 0 is the identity and p = 1 replaces everyone") {
    const auto pool = toy_pool("en", "a", 4, 3, 1);
    const auto foreign = toy_pool("zh", "x", 6, 2, 2);
    const auto conv = synth_conversation(TurnTakingStats::default_stand_in(), 2, 30.0, pool, 4);
    const auto none = augment_conversation(conv.transcript, conv.tracks, {0.0, &foreign, 1});
    CHECK(none.replaced.empty());
    CHECK(none.transcript == conv.transcript);
    CHECK(none.tracks == conv.tracks);

    const auto all = augment_conversation(conv.transcript, conv.tracks, {1.0, &foreign, 1});
    CHECK(all.replaced.size() == 2);
    CHECK(all.transcript == conv.transcript);
    std::set<std::string> used;
    for (const auto& [orig, repl] : all.replaced) {
      CHECK(repl.starts_with("x"));
      used.insert(repl);
      // replacement audio lives exactly on the original spans
      for (const auto* u : conv.transcript.utterances_of(orig)) {
        const auto sp = span_of(*u);
        CHECK(all.tracks.at(orig).samples.segment(sp.begin, sp.length()).cwiseAbs().maxCoeff() > 0.0f);
      }
    }
    CHECK(used.size() == 2);
    const auto cross = cross_lingual_replace(conv.transcript, conv.tracks, foreign, 1);
    CHECK(cross.replaced == all.replaced);
    CHECK(cross.tracks == all.tracks);
  }

  TEST_CASE("errors") {
    const auto pool = toy_pool("en", "a", 2, 1, 1);
    const auto t = make_transcript("c", 5, {{"A", 0, 1, {}}, {"B", 1, 2, {}}});
    const auto tracks = test::tracks_for(t, 1);
    Tracks missing = tracks;
    missing.erase("B");
    CHECK(test::throws_kind([&] { augment_conversation(t, missing, {0.5, &pool, 1}); }, ErrorKind::MissingTrack));
    const auto tiny = toy_pool("en", "z", 1, 1, 1);
    CHECK(test::throws_kind([&] { augment_conversation(t, tracks, {1.0, &tiny, 1}); }, ErrorKind::PoolExhausted));
  }

  TEST_CASE("timing is preserved for any p") {
    const auto foreign = toy_pool("zh", "x", 8, 2, 2);
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
      const auto t = test::random_transcript(rng, 3, 20.0);
      const auto tracks = test::tracks_for(t, trial);
      for (double p : {0.0, 0.3, 0.5, 1.0}) {
        const auto r = augment_conversation(t, tracks, {p, &foreign, static_cast<std::uint64_t>(trial)});
        CHECK(timing(r.transcript) == timing(t));
        CHECK(overlap_ratio(r.transcript) == overlap_ratio(t));
        for (const auto& [spk, w] : r.tracks) CHECK(w.size() == tracks.at(spk).size());
      }
    }
  }
}

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "agdl/collision.hpp"
#include "agdl/fsm.hpp"
#include "agdl/pipeline.hpp"
#include "agdl/scenarios.hpp"
#include "agdl/segment_kernels.hpp"
#include "support.hpp"

using namespace agdl;

namespace {

constexpr int kSeeds = 6;

std::vector<MotionSegment> player_segments(const Trace& t) {
  const auto tracks = track(t);
  const int id = identify_player(tracks, t);
  return segment_track(tracks[static_cast<std::size_t>(id)]);
}

}  // namespace

TEST_CASE("a larger penalty never yields more segments") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int trial = 0; trial < kSeeds; ++trial) {
    std::vector<double> xs, ys;
    double x = 0, v = 0;
    for (int i = 0; i < 150; ++i) {
      if (i % 25 == 0) v = 2 * n01(rng);
      x += v;
      xs.push_back(x + 0.3 * n01(rng));
      ys.push_back(0.3 * n01(rng));
    }
    std::size_t prev = SIZE_MAX;
    for (double beta : {0.01, 0.1, 1.0, 10.0, 100.0, 1000.0}) {
      const auto s = segment_series_serial(xs, ys, beta, 5);
      CHECK(s.segments() <= prev);
      prev = s.segments();
    }
  }
}

TEST_CASE("a larger clustering radius never yields more states") {
  for (int seed = 1; seed <= kSeeds; ++seed) {
    const auto segs = player_segments(testing::random_trace(default_design(), seed, 800));
    std::size_t prev = SIZE_MAX;
    for (double eps : {0.0, 0.05, 0.1, 0.3, 1.0, 5.0}) {
      const auto states = cluster_states(segs, eps);
      CHECK(states.size() <= prev);
      prev = states.size();
      std::size_t members = 0;
      for (const auto& s : states) members += s.members.size();
      CHECK(members == segs.size());
    }
  }
}

TEST_CASE("segments are ordered, disjoint, long enough and single-signature") {
  for (int seed = 1; seed <= kSeeds; ++seed) {
    const Trace t = testing::random_trace(default_design(), seed, 600);
    const auto tracks = track(t);
    for (const auto& tr : tracks) {
      const auto segs = segment_track(tr);
      for (std::size_t i = 0; i < segs.size(); ++i) {
        CHECK(segs[i].length() >= 5);
        if (i) CHECK(segs[i - 1].t1 <= segs[i].t0);
        for (std::int64_t f = segs[i].t0; f < segs[i].t1; ++f) {
          REQUIRE(tr.samples.contains(f));
          CHECK(tr.samples.at(f).signature == segs[i].signature);
        }
      }
    }
  }
}

TEST_CASE("every observation lands in exactly one track") {
  for (int seed = 1; seed <= kSeeds; ++seed) {
    const Trace t = testing::random_trace(default_design(), seed, 500);
    std::size_t observations = 0, samples = 0;
    for (const auto& f : t.frames) observations += f.entities.size();
    for (const auto& tr : track(t)) samples += tr.samples.size();
    CHECK(samples == observations);
  }
}

TEST_CASE("mined rules are sound with respect to their observations") {
  for (int seed = 1; seed <= kSeeds; ++seed) {
    const Trace t = testing::random_trace(default_design(), seed, 800);
    const auto tracks = track(t);
    std::vector<const EntityTrack*> ptrs;
    for (const auto& tr : tracks) ptrs.push_back(&tr);
    const auto classes = character_classes(ptrs);
    const MiningConfig cfg;
    const auto obs = observe(detect_events(t, tracks), t, tracks, classes, nullptr, cfg);
    for (const auto& r : mine_rules(obs, cfg)) {
      int occ = 0, sup = 0;
      for (const auto& o : obs) {
        if (o.subject != r.subject || o.other != r.other) continue;
        if (r.direction && o.direction != *r.direction) continue;
        ++occ;
        sup += o.effects.contains(r.effect);
      }
      CHECK(r.occurrences == occ);
      CHECK(r.support == sup);
      CHECK(r.precision == doctest::Approx(static_cast<double>(sup) / occ));
      CHECK(r.precision >= cfg.min_precision);
      CHECK(r.support >= cfg.min_support);
    }
  }
}

TEST_CASE("duplicating every trace doubles support and keeps the rules") {
  const Trace t = testing::random_trace(default_design(), 3, 800);
  const DesignModel one = learn({t});
  const DesignModel two = learn({t, t});
  REQUIRE(one.rules.size() == two.rules.size());
  for (std::size_t i = 0; i < one.rules.size(); ++i) {
    CHECK(two.rules[i].support == 2 * one.rules[i].support);
    CHECK(two.rules[i].occurrences == 2 * one.rules[i].occurrences);
    CHECK(two.rules[i].effect == one.rules[i].effect);
  }
  CHECK(two.characters.size() == one.characters.size());
}

TEST_CASE("traces round trip for random play") {
  for (int seed = 1; seed <= kSeeds; ++seed) {
    const Trace t = testing::random_trace(seed % 2 ? default_design() : arena_design(), seed, 300);
    std::istringstream in(serialize_trace(t));
    CHECK(parse_trace(in) == t);
  }
}

TEST_CASE("every learned machine matches itself perfectly") {
  for (int seed = 1; seed <= 3; ++seed) {
    const DesignModel m = learn({testing::random_trace(default_design(), seed, 800)});
    for (const auto& c : m.characters) {
      if (c.fsm.states.size() > 8) continue;
      CHECK(match_fsm(c.fsm, c.fsm).f1 == 1.0);
    }
  }
}

TEST_CASE("transition precision is support over occurrences and above threshold") {
  const DesignModel m = learn({testing::coverage_trace(), testing::random_trace(default_design(), 2, 800)});
  for (const auto& c : m.characters) {
    for (const auto& t : c.fsm.transitions) {
      CHECK(t.precision >= 0.0);
      CHECK(t.precision <= 1.0);
      if (!t.low_confidence) {
        CHECK(t.precision >= 0.9);
        CHECK(t.support >= 2);
      }
    }
  }
}

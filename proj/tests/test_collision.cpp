#include <doctest.h>

#include <algorithm>

#include "agdl/collision.hpp"
#include "agdl/pipeline.hpp"
#include "agdl/scenarios.hpp"
#include "support.hpp"

using namespace agdl;
using testing::synthetic_trace;

namespace {

std::vector<std::pair<double, double>> approach_wall(double x0, double stop_x, double speed, int frames) {
  std::vector<std::pair<double, double>> p;
  double x = x0;
  for (int i = 0; i < frames; ++i) {
    p.emplace_back(x, 0.0);
    x = std::min(x + speed, stop_x);
  }
  return p;
}

CharacterClasses classes_of(const std::vector<EntityTrack>& tracks) {
  std::vector<const EntityTrack*> ptrs;
  for (const auto& t : tracks) ptrs.push_back(&t);
  return character_classes(ptrs);
}

bool has_rule(const std::vector<CollisionRule>& rules, const std::string& other, const std::string& effect,
              std::optional<Direction> dir, double min_precision) {
  return std::any_of(rules.begin(), rules.end(), [&](const CollisionRule& r) {
    return r.other == other && to_string(r.effect) == effect && (!r.direction || r.direction == dir) &&
           r.precision >= min_precision;
  });
}

}  // namespace

TEST_CASE("boxes ten pixels apart never collide") {
  const Trace t = synthetic_trace({{"a", std::vector<std::pair<double, double>>(30, {0.0, 0.0})},
                                   {"b", std::vector<std::pair<double, double>>(30, {18.0, 0.0})}},
                                  {});
  CHECK(detect_events(t, track(t)).empty());
}

TEST_CASE("walking into a wall raises one event at the flush frame") {
  // Wall cell at column 10 spans x in [80, 88); an 8 px box is flush at x = 72.
  const auto path = approach_wall(50, 72, 2, 30);
  const Trace t = synthetic_trace({{"e", path}}, {{10, 0, 1}});
  const auto events = detect_events(t, track(t));
  REQUIRE(events.size() == 1);
  const auto flush = std::find_if(path.begin(), path.end(), [](auto p) { return p.first == 72.0; }) - path.begin();
  CHECK(events[0].frame == flush);
  CHECK(events[0].dir == Direction::Right);
  CHECK(events[0].tile_id == 1);
  CHECK(events[0].depth == 0.0);
  CHECK(events[0].cells == std::vector<std::pair<int, int>>{{10, 0}});
}

TEST_CASE("overlapping entities produce an event for each side") {
  std::vector<std::pair<double, double>> a, b;
  for (int i = 0; i < 20; ++i) {
    a.emplace_back(i, 0.0);
    b.emplace_back(30.0 - i, 0.0);
  }
  const Trace t = synthetic_trace({{"a", a}, {"b", b}}, {});
  const auto events = detect_events(t, track(t));
  REQUIRE(events.size() == 2);
  CHECK(events[0].frame == events[1].frame);
  CHECK(events[0].other_track == events[1].track);
  CHECK(events[1].other_track == events[0].track);
  CHECK(events[0].dir == opposite(events[1].dir));
}

TEST_CASE("the player's landing is detected at the landing frame") {
  const auto d = default_design();
  std::vector<InputState> in(10);
  in.push_back(InputState{Button::A});
  in.resize(60);
  Simulator sim(d, 0);
  Trace t;
  t.header = sim.header();
  std::int64_t landed = -1;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const int before = sim.state().player.state;
    t.frames.push_back(sim.step(in[i]));
    if (d.states[static_cast<std::size_t>(before)].name == "fall" &&
        d.states[static_cast<std::size_t>(sim.state().player.state)].name == "idle")
      landed = static_cast<std::int64_t>(i);
  }
  REQUIRE(landed > 0);
  const auto events = detect_events(t, track(t));
  const bool found = std::any_of(events.begin(), events.end(), [&](const CollisionEvent& e) {
    return e.tile_id == 1 && e.dir == Direction::Down && std::llabs(e.frame - landed) <= 1;
  });
  CHECK(found);
}

TEST_CASE("a rare effect does not become a rule") {
  std::vector<CauseObservation> obs(10, {"hero", "tile:7", Direction::Left, {}});
  obs[3].effects.insert({EffectKind::StopX});
  CHECK(mine_rules(obs).empty());
  for (auto& o : obs) o.effects.insert({EffectKind::StopX});
  const auto rules = mine_rules(obs);
  REQUIRE_FALSE(rules.empty());
  CHECK(rules[0].precision == 1.0);
  CHECK(rules[0].support == 10);
}

TEST_CASE("a rule true from every side generalizes to any direction") {
  std::vector<CauseObservation> obs;
  for (Direction d : {Direction::Left, Direction::Right, Direction::Up, Direction::Down})
    for (int k = 0; k < 3; ++k) obs.push_back({"hero", "tile:3", d, {{EffectKind::DespawnOther}}});
  const auto rules = mine_rules(obs);
  REQUIRE(rules.size() == 1);
  CHECK_FALSE(rules[0].direction.has_value());
  CHECK(rules[0].support == 12);
}

TEST_CASE("effect strings round trip") {
  for (const Effect& e : {Effect{EffectKind::StopX}, Effect{EffectKind::StopY}, Effect{EffectKind::DespawnOther},
                          Effect{EffectKind::DespawnSelf}, Effect{EffectKind::Teleport},
                          Effect{EffectKind::StateTransition, "hero.fall", "hero.idle"}})
    CHECK(parse_effect(to_string(e)) == e);
}

TEST_CASE("random play recovers solidity and pickups of the default design") {
  const auto d = default_design();
  const DesignModel m = learn({testing::random_trace(d, 1, 1000)});
  for (int id : {1, 2}) {
    const std::string label = tile_class_label(id);
    const bool stops = has_rule(m.rules, label, "stop-x", Direction::Right, 0.95) ||
                       has_rule(m.rules, label, "stop-y", Direction::Down, 0.95);
    CHECK_MESSAGE(stops, "no stop rule for " << label);
  }
  CHECK(has_rule(m.rules, "tile:3", "despawn(other)", std::nullopt, 0.9));
  CHECK(std::find(m.solid_tiles.begin(), m.solid_tiles.end(), 3) == m.solid_tiles.end());
}

TEST_CASE("touch counts aggregate observations") {
  std::vector<CauseObservation> obs = {{"hero", "tile:1", Direction::Down, {}},
                                       {"hero", "tile:1", Direction::Left, {}},
                                       {"hero", "tile:2", Direction::Down, {}}};
  const auto counts = touch_counts(obs);
  CHECK(counts.at({"hero", "tile:1"}) == 2);
  CHECK(counts.at({"hero", "tile:2"}) == 1);
}

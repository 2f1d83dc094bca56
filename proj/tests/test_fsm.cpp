#include <doctest.h>

#include <algorithm>

#include "agdl/error.hpp"
#include "agdl/fsm.hpp"
#include "agdl/pipeline.hpp"
#include "support.hpp"

using namespace agdl;

namespace {

MotionSegment seg(std::int64_t t0, std::int64_t t1, double ax, double ay, std::string sig, bool sat_x = false) {
  MotionSegment s;
  s.t0 = t0;
  s.t1 = t1;
  s.x.a = ax;
  s.y.a = ay;
  s.sat_x = sat_x;
  s.signature = std::move(sig);
  return s;
}

bool has_guard(const FsmModel& m, const std::string& from, const std::string& to, const std::string& guard) {
  for (const auto& t : m.transitions)
    if (t.from == from && t.to == to && to_string(t.guards) == guard) return true;
  return false;
}

FsmModel chain_model(int n_states, const std::vector<std::pair<int, int>>& edges) {
  FsmModel m;
  for (int i = 0; i < n_states; ++i) {
    CharacterState s;
    s.id = i;
    s.name = "s" + std::to_string(i);
    m.states.push_back(s);
  }
  for (auto [a, b] : edges) {
    Transition t;
    t.from = "s" + std::to_string(a);
    t.to = "s" + std::to_string(b);
    t.guards = {Guard::pressed("A")};
    m.transitions.push_back(t);
  }
  return m;
}

}  // namespace

TEST_CASE("identical segments form one state") {
  const std::vector<MotionSegment> segs = {seg(0, 10, 0.2, 0, "run"), seg(20, 30, 0.2, 0, "run"), seg(40, 50, 0.2, 0, "run")};
  const auto states = cluster_states(segs);
  REQUIRE(states.size() == 1);
  CHECK(states[0].members.size() == 3);
  CHECK(states[0].ax == doctest::Approx(0.2));
  CHECK(states[0].name == "run");
}

TEST_CASE("identical parameters with disjoint animations stay apart") {
  const std::vector<MotionSegment> segs = {seg(0, 10, 0.2, 0, "walk"), seg(20, 30, 0.2, 0, "swim")};
  CHECK(cluster_states(segs).size() == 2);
}

TEST_CASE("distinct parameters under one animation stay apart") {
  const std::vector<MotionSegment> segs = {seg(0, 10, 0.0, 0.5, "air"), seg(20, 30, 0.0, -0.5, "air")};
  CHECK(cluster_states(segs).size() == 2);
}

TEST_CASE("states are numbered by their earliest member") {
  const std::vector<MotionSegment> segs = {seg(0, 10, 0, 0.5, "b"), seg(10, 20, 0.2, 0, "a"), seg(20, 30, 0, 0.5, "b")};
  const auto states = cluster_states(segs);
  REQUIRE(states.size() == 2);
  CHECK(states[0].name == "b");
  CHECK(states[1].name == "a");
}

TEST_CASE("a transition seen once without conditions is a low-confidence timeout") {
  std::vector<CharacterState> states(2);
  states[0].id = 0;
  states[0].name = "a";
  states[1].id = 1;
  states[1].name = "b";
  TrackHistory h;
  for (std::int64_t f = 0; f < 20; ++f) h.state[f] = f < 10 ? 0 : 1;
  h.changes.emplace_back(10, 0, 1);
  const auto m = induce_transitions(states, {h});
  REQUIRE(m.transitions.size() == 1);
  CHECK(m.transitions[0].guards == std::vector<Guard>{Guard::timeout()});
  CHECK(m.transitions[0].low_confidence);
}

TEST_CASE("a guard that always precedes the change is chosen with full precision") {
  std::vector<CharacterState> states(2);
  states[0].id = 0;
  states[0].name = "a";
  states[1].id = 1;
  states[1].name = "b";
  TrackHistory h;
  for (std::int64_t f = 0; f < 100; ++f) h.state[f] = (f / 20) % 2;
  for (std::int64_t f : {20, 60}) {
    h.changes.emplace_back(f, 0, 1);
    h.conditions[f - 1].push_back(Guard::pressed("A"));
  }
  for (std::int64_t f : {40, 80}) h.changes.emplace_back(f, 1, 0);
  h.conditions[25].push_back(Guard::pressed("A"));  // in state b: not an occurrence for a -> b
  const auto m = induce_transitions(states, {h});
  REQUIRE(m.transitions.size() == 2);
  CHECK(has_guard(m, "a", "b", "pressed(A)"));
  for (const auto& t : m.transitions)
    if (t.from == "a") CHECK(t.precision == 1.0);
}

TEST_CASE("match of identical models is perfect") {
  const auto m = chain_model(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  const auto r = match_fsm(m, m);
  CHECK(r.f1 == 1.0);
  CHECK(r.mapping == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("missing one of six transitions scores F1 = 10/11") {
  const auto truth = chain_model(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}, {1, 3}});
  const auto learned = chain_model(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}});
  CHECK(match_fsm(learned, truth).f1 == doctest::Approx(10.0 / 11.0));
}

TEST_CASE("more than eight states is too large for exhaustive matching") {
  const auto big = chain_model(9, {});
  try {
    match_fsm(big, big);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooLarge);
  }
}

TEST_CASE("coverage trace recovers the four-state player machine") {
  const auto design = default_design();
  const DesignModel model = learn({testing::coverage_trace()});
  const CharacterModel* hero = model.character(model.player_class);
  REQUIRE(hero);
  const FsmModel& fsm = hero->fsm;
  REQUIRE(fsm.states.size() == 4);
  for (const auto& s : fsm.states) {
    const int k = design.state_index(s.name.substr(s.name.find('.') + 1));
    REQUIRE(k >= 0);
    const auto& truth = design.states[static_cast<std::size_t>(k)];
    CHECK(std::fabs(s.ax - truth.ax) <= 0.01);
    CHECK(std::fabs(s.ay - truth.ay) <= 0.01);
  }
  CHECK(has_guard(fsm, "hero.idle", "hero.jump", "pressed(A)"));
  CHECK(has_guard(fsm, "hero.run", "hero.jump", "pressed(A)"));
  CHECK(has_guard(fsm, "hero.fall", "hero.idle", "collision(solid,down)"));
  CHECK(match_fsm(translate_guards(fsm, design), truth_fsm(design)).f1 == 1.0);
}

TEST_CASE("induction is deterministic") {
  const DesignModel a = learn({testing::coverage_trace()});
  const DesignModel b = learn({testing::coverage_trace()});
  CHECK(a.characters == b.characters);
}

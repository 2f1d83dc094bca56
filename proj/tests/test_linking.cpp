#include <doctest.h>

#include <algorithm>

#include "agdl/error.hpp"
#include "agdl/linking.hpp"
#include "agdl/pipeline.hpp"
#include "agdl/scenarios.hpp"
#include "support.hpp"

using namespace agdl;

namespace {

RoomGraph ring(int n, const std::vector<int>& perm) {
  RoomGraph g;
  for (int i = 0; i < n; ++i) g.nodes.push_back({"r" + std::to_string(perm[static_cast<std::size_t>(i)]), 0, 0, {}, 1});
  for (int i = 0; i < n; ++i) {
    g.edges.push_back({i, (i + 1) % n, "right", 1});
    g.edges.push_back({(i + 1) % n, i, "left", 1});
  }
  return g;
}

RoomGraph relabel(const RoomGraph& g, const std::vector<int>& perm) {
  RoomGraph out = g;
  for (auto& e : out.edges) {
    e.from = perm[static_cast<std::size_t>(e.from)];
    e.to = perm[static_cast<std::size_t>(e.to)];
  }
  std::reverse(out.edges.begin(), out.edges.end());
  return out;
}

std::vector<const Trace*> ptrs(const std::vector<Trace>& ts) {
  std::vector<const Trace*> out;
  for (const auto& t : ts) out.push_back(&t);
  return out;
}

PlayerPath path_of(const Trace& t) {
  const auto tracks = track(t);
  const int id = identify_player(tracks, t);
  std::vector<const EntityTrack*> all;
  for (const auto& tr : tracks) all.push_back(&tr);
  const auto classes = character_classes(all);
  const int cls = classes.of(tracks[static_cast<std::size_t>(id)]);
  std::vector<int> ids;
  for (const auto& tr : tracks)
    if (classes.of(tr) == cls) ids.push_back(tr.id);
  return player_path(tracks, ids);
}

}  // namespace

TEST_CASE("a single-room trace is one node without edges") {
  const Trace t = testing::random_trace(arena_design(), 4, 400);
  const RoomGraph g = build_room_graph({&t}, {path_of(t)});
  CHECK(g.nodes.size() == 1);
  CHECK(g.edges.empty());
  REQUIRE(g.nodes[0].grid.has_value());
}

TEST_CASE("the walkthrough graph is isomorphic to the design's adjacency") {
  const auto d = default_design();
  const Trace& t = testing::walkthrough_trace();
  const RoomGraph g = build_room_graph({&t}, {path_of(t)});
  const RoomGraph truth = truth_room_graph(d);
  CHECK(g.nodes.size() == 4);
  CHECK(truth.nodes.size() == 4);
  CHECK(rooms_isomorphic(g, truth));
  const bool portal = std::any_of(g.edges.begin(), g.edges.end(), [](const RoomEdge& e) { return e.exit == "portal"; });
  CHECK(portal);
}

TEST_CASE("two traces crossing the same border accumulate support") {
  const std::vector<Trace> one = {testing::walkthrough_trace()};
  const std::vector<Trace> two = {testing::walkthrough_trace(), testing::walkthrough_trace()};
  const PlayerPath p = path_of(one[0]);
  const RoomGraph g1 = build_room_graph(ptrs(one), {p});
  const RoomGraph g2 = build_room_graph(ptrs(two), {p, p});
  REQUIRE(g1.edges.size() == g2.edges.size());
  for (std::size_t i = 0; i < g1.edges.size(); ++i) CHECK(g2.edges[i].support == 2 * g1.edges[i].support);
}

TEST_CASE("traces from different games are incompatible") {
  const Trace a = testing::random_trace(arena_design(), 1, 100);
  const Trace& b = testing::walkthrough_trace();
  try {
    build_room_graph({&a, &b}, {path_of(a), path_of(b)});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IncompatibleTraces);
  }
}

TEST_CASE("isomorphism of five-room graphs") {
  const RoomGraph a = ring(5, {0, 1, 2, 3, 4});
  CHECK(rooms_isomorphic(a, relabel(a, {3, 0, 4, 1, 2})));
  RoomGraph broken = relabel(a, {3, 0, 4, 1, 2});
  broken.edges[0].exit = "up";
  CHECK_FALSE(rooms_isomorphic(a, broken));
  RoomGraph fewer = a;
  fewer.edges.pop_back();
  CHECK_FALSE(rooms_isomorphic(a, fewer));
}

TEST_CASE("more than eight rooms is too large") {
  const RoomGraph big = ring(9, {0, 1, 2, 3, 4, 5, 6, 7, 8});
  CHECK_THROWS_AS(rooms_isomorphic(big, big), Error);
}

TEST_CASE("empty rows over a solid floor render as dots over hashes") {
  RoomGraph g;
  TileGrid grid{4, 3, {0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1}};
  g.nodes.push_back({"a", 0, 0, grid, 10});
  const std::vector<CollisionRule> rules = {{"hero", "tile:1", Direction::Down, {EffectKind::StopY}, 5, 5, 1.0}};
  const LevelCorpus c = export_level_corpus(g, rules);
  REQUIRE(c.grids.size() == 1);
  CHECK(c.grids.begin()->second == "....\n....\n####\n");
  CHECK(c.skipped.empty());
}

TEST_CASE("rooms without tile data are skipped and named") {
  RoomGraph g;
  g.nodes.push_back({"seen", 0, 0, TileGrid{1, 1, {0}}, 1});
  g.nodes.push_back({"unseen", 0, 0, std::nullopt, 1});
  const LevelCorpus c = export_level_corpus(g, {});
  CHECK(c.grids.size() == 1);
  CHECK(c.skipped == std::vector<std::string>{"unseen"});
}

TEST_CASE("tiles without rules are unknown dots") {
  RoomGraph g;
  g.nodes.push_back({"a", 0, 0, TileGrid{2, 1, {9, 0}}, 1});
  const LevelCorpus c = export_level_corpus(g, {});
  CHECK(c.grids.begin()->second == "..\n");
  const auto it = std::find_if(c.legend.begin(), c.legend.end(), [](const LegendEntry& e) { return e.tile_id == 9; });
  REQUIRE(it != c.legend.end());
  CHECK(it->symbol == '.');
  CHECK(it->properties == std::vector<std::string>{"unknown"});
}

TEST_CASE("corpus grids of the walkthrough equal the design under the learned legend") {
  const auto d = default_design();
  const DesignModel m = learn({testing::walkthrough_trace(), testing::coverage_trace()});
  const Evaluation e = evaluate(m, d);
  CHECK(e.corpus_matches);
  CHECK(e.rooms_isomorphic);
}

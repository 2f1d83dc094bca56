#pragma once

// Room graph recovered from tile-map signature changes and player
// discontinuities, plus the text level corpus derived from it.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agdl/collision.hpp"
#include "agdl/toysim.hpp"
#include "agdl/trace.hpp"
#include "agdl/tracker.hpp"

namespace agdl {

struct TileGrid {
  int cols = 0;
  int rows = 0;
  std::vector<int> ids;  // row-major, 0 = empty

  int at(int col, int row) const { return ids[static_cast<std::size_t>(row * cols + col)]; }

  friend bool operator==(const TileGrid&, const TileGrid&) = default;
};

struct RoomNode {
  std::string signature;
  double cam_x = 0.0;
  double cam_y = 0.0;
  std::optional<TileGrid> grid;
  int frames = 0;  // frames observed in this room, over all traces

  friend bool operator==(const RoomNode&, const RoomNode&) = default;
};

struct RoomEdge {
  int from = 0;
  int to = 0;
  std::string exit;  // "up", "down", "left", "right" or "portal"
  int support = 0;

  friend bool operator==(const RoomEdge&, const RoomEdge&) = default;
};

struct RoomGraph {
  std::vector<RoomNode> nodes;  // in order of first observation
  std::vector<RoomEdge> edges;  // in order of first observation

  int find(const std::string& signature) const;  // -1 when absent

  friend bool operator==(const RoomGraph&, const RoomGraph&) = default;
};

// Per trace: the player's world position by frame, merged over all of the
// player's tracks.
using PlayerPath = std::map<std::int64_t, TrackSample>;

PlayerPath player_path(const std::vector<EntityTrack>& tracks, const std::vector<int>& player_track_ids);

// jump_px <= 0 means 4 tiles of the first trace. Throws
// Error(IncompatibleTraces) when traces come from different games.
RoomGraph build_room_graph(const std::vector<const Trace*>& traces, const std::vector<PlayerPath>& paths,
                           double jump_px = 0.0);

// Adjacency implied by a design: rooms whose borders touch with at least
// three consecutive passable rows (or columns) on both sides, plus portals.
RoomGraph truth_room_graph(const GroundTruthDesign& design);

// Exhaustive search for a node bijection preserving labelled directed edges
// (supports ignored). Throws Error(TooLarge) above 8 nodes.
bool rooms_isomorphic(const RoomGraph& a, const RoomGraph& b);

struct LegendEntry {
  int tile_id = 0;
  char symbol = '.';
  std::vector<std::string> properties;  // learned effects, "unknown" when none
};

struct LevelCorpus {
  std::map<std::string, std::string> grids;  // file name -> text, rows top to bottom
  std::vector<LegendEntry> legend;
  std::vector<std::string> skipped;  // room signatures without tile data
};

// '#' for tiles with stop rules, 'o' for despawn on touch, '^' for teleport,
// '.' for empty or unexplained tiles.
std::vector<LegendEntry> corpus_legend(const RoomGraph& graph, const std::vector<CollisionRule>& rules);
char legend_symbol(const std::vector<LegendEntry>& legend, int tile_id);
std::string render_grid(const TileGrid& grid, const std::vector<LegendEntry>& legend);

LevelCorpus export_level_corpus(const RoomGraph& graph, const std::vector<CollisionRule>& rules);
Json legend_to_json(const std::vector<LegendEntry>& legend);

}  // namespace agdl

#include "agdl/linking.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <tuple>

#include "agdl/error.hpp"

namespace agdl {

namespace {

struct Extent {
  int cols = 0;
  int rows = 0;
};

Extent tile_extent(const Frame& f) {
  Extent e;
  if (!f.tiles) return e;
  for (const auto& t : *f.tiles) {
    e.cols = std::max(e.cols, t.col + 1);
    e.rows = std::max(e.rows, t.row + 1);
  }
  return e;
}

std::string exit_side(const TrackSample& s, double x0, double y0, double x1, double y1) {
  const double cx = s.x + 0.5 * s.w;
  const double cy = s.y + 0.5 * s.h;
  if (cx >= x1) return "right";
  if (cx < x0) return "left";
  if (cy >= y1) return "down";
  if (cy < y0) return "up";
  return "portal";
}

}  // namespace

int RoomGraph::find(const std::string& signature) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].signature == signature) return static_cast<int>(i);
  return -1;
}

PlayerPath player_path(const std::vector<EntityTrack>& tracks, const std::vector<int>& player_track_ids) {
  std::vector<int> ids = player_track_ids;
  std::sort(ids.begin(), ids.end());
  PlayerPath path;
  for (int id : ids) {
    for (const auto& t : tracks) {
      if (t.id != id) continue;
      for (const auto& [f, s] : t.samples) path.emplace(f, s);
    }
  }
  return path;
}

RoomGraph build_room_graph(const std::vector<const Trace*>& traces, const std::vector<PlayerPath>& paths,
                           double jump_px) {
  RoomGraph g;
  if (traces.empty()) return g;
  const std::string game = traces.front()->header.game_id();
  for (const Trace* t : traces) {
    if (t->header.game_id() != game) {
      throw Error(ErrorKind::IncompatibleTraces,
                  "traces come from different games: '" + game + "' and '" + t->header.game_id() + "'");
    }
  }
  const int ts = std::max(1, traces.front()->header.tile_size);
  const double jump = jump_px > 0 ? jump_px : 4.0 * ts;
  std::vector<Extent> extents;
  std::map<std::tuple<int, int, std::string>, std::size_t> edge_index;

  auto node_for = [&](const Frame& f) {
    int k = g.find(f.tilemap_sig);
    const Extent e = tile_extent(f);
    if (k < 0) {
      k = static_cast<int>(g.nodes.size());
      RoomNode n;
      n.signature = f.tilemap_sig;
      n.cam_x = f.cam_x;
      n.cam_y = f.cam_y;
      if (f.tiles) {
        TileGrid grid;
        grid.cols = e.cols;
        grid.rows = e.rows;
        grid.ids.assign(static_cast<std::size_t>(e.cols * e.rows), 0);
        for (const auto& c : *f.tiles) grid.ids[static_cast<std::size_t>(c.row * e.cols + c.col)] = c.id;
        n.grid = std::move(grid);
      }
      g.nodes.push_back(std::move(n));
      extents.push_back(e);
    }
    auto& ext = extents[static_cast<std::size_t>(k)];
    ext.cols = std::max(ext.cols, e.cols);
    ext.rows = std::max(ext.rows, e.rows);
    ++g.nodes[static_cast<std::size_t>(k)].frames;
    return k;
  };

  for (std::size_t ti = 0; ti < traces.size(); ++ti) {
    const Trace& tr = *traces[ti];
    static const PlayerPath kNoPath;
    const PlayerPath& path = ti < paths.size() ? paths[ti] : kNoPath;
    int prev_node = -1;
    const Frame* prev = nullptr;
    for (const Frame& f : tr.frames) {
      const int node = node_for(f);
      if (prev) {
        const auto a = path.find(prev->index);
        const auto b = path.find(f.index);
        const bool both = a != path.end() && b != path.end();
        const bool jumped = both && std::hypot(b->second.x - a->second.x, b->second.y - a->second.y) > jump;
        if (node != prev_node || jumped) {
          std::string exit = "portal";
          if (!jumped && b != path.end()) {
            const Extent& e = extents[static_cast<std::size_t>(prev_node)];
            exit = exit_side(b->second, prev->cam_x, prev->cam_y, prev->cam_x + e.cols * ts,
                             prev->cam_y + e.rows * ts);
          }
          const auto key = std::make_tuple(prev_node, node, exit);
          const auto it = edge_index.find(key);
          if (it == edge_index.end()) {
            edge_index.emplace(key, g.edges.size());
            g.edges.push_back({prev_node, node, exit, 1});
          } else {
            ++g.edges[it->second].support;
          }
        }
      }
      prev_node = node;
      prev = &f;
    }
  }
  // Grids cover the largest extent seen; cells never observed stay empty.
  for (std::size_t k = 0; k < g.nodes.size(); ++k) {
    auto& grid = g.nodes[k].grid;
    if (!grid || (grid->cols == extents[k].cols && grid->rows == extents[k].rows)) continue;
    TileGrid wide;
    wide.cols = extents[k].cols;
    wide.rows = extents[k].rows;
    wide.ids.assign(static_cast<std::size_t>(wide.cols * wide.rows), 0);
    for (int r = 0; r < grid->rows; ++r)
      for (int c = 0; c < grid->cols; ++c) wide.ids[static_cast<std::size_t>(r * wide.cols + c)] = grid->at(c, r);
    grid = std::move(wide);
  }
  return g;
}

RoomGraph truth_room_graph(const GroundTruthDesign& design) {
  RoomGraph g;
  const int ts = design.tile_size;
  for (const auto& r : design.rooms) {
    RoomNode n;
    n.signature = room_signature(r);
    n.cam_x = r.origin_x;
    n.cam_y = r.origin_y;
    TileGrid grid;
    grid.cols = r.cols();
    grid.rows = r.rows();
    for (const auto& row : r.tiles) grid.ids.insert(grid.ids.end(), row.begin(), row.end());
    n.grid = std::move(grid);
    g.nodes.push_back(std::move(n));
  }
  auto passable = [&](const RoomDef& r, int col, int row) {
    return design.tile_class(r.tiles[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)]) !=
           TileClass::Solid;
  };
  // Longest run of consecutive world cells passable on both sides of a border.
  auto longest = [](int begin, int end, const std::function<bool(int)>& open) {
    int best = 0, run = 0;
    for (int k = begin; k < end; ++k) {
      run = open(k) ? run + 1 : 0;
      best = std::max(best, run);
    }
    return best;
  };
  std::set<std::tuple<int, int, std::string>> seen;
  auto add = [&](int a, int b, const std::string& exit) {
    if (seen.insert({a, b, exit}).second) g.edges.push_back({a, b, exit, 1});
  };
  const int n = static_cast<int>(design.rooms.size());
  for (int a = 0; a < n; ++a) {
    const RoomDef& ra = design.rooms[static_cast<std::size_t>(a)];
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      const RoomDef& rb = design.rooms[static_cast<std::size_t>(b)];
      if (ra.origin_x + ra.cols() * ts == rb.origin_x) {
        const int y0 = std::max(ra.origin_y, rb.origin_y) / ts;
        const int y1 = std::min(ra.origin_y + ra.rows() * ts, rb.origin_y + rb.rows() * ts) / ts;
        const int run = longest(y0, y1, [&](int wy) {
          return passable(ra, ra.cols() - 1, wy - ra.origin_y / ts) && passable(rb, 0, wy - rb.origin_y / ts);
        });
        if (run >= 3) {
          add(a, b, "right");
          add(b, a, "left");
        }
      }
      if (ra.origin_y + ra.rows() * ts == rb.origin_y) {
        const int x0 = std::max(ra.origin_x, rb.origin_x) / ts;
        const int x1 = std::min(ra.origin_x + ra.cols() * ts, rb.origin_x + rb.cols() * ts) / ts;
        const int run = longest(x0, x1, [&](int wx) {
          return passable(ra, wx - ra.origin_x / ts, ra.rows() - 1) && passable(rb, wx - rb.origin_x / ts, 0);
        });
        if (run >= 3) {
          add(a, b, "down");
          add(b, a, "up");
        }
      }
    }
    for (const auto& row : ra.tiles) {
      for (const int id : row) {
        const auto it = design.tile_catalog.find(id);
        if (it != design.tile_catalog.end() && it->second.cls == TileClass::Portal && it->second.target_room >= 0)
          add(a, it->second.target_room, "portal");
      }
    }
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const RoomEdge& x, const RoomEdge& y) {
    return std::tie(x.from, x.to, x.exit) < std::tie(y.from, y.to, y.exit);
  });
  return g;
}

bool rooms_isomorphic(const RoomGraph& a, const RoomGraph& b) {
  if (a.nodes.size() > 8 || b.nodes.size() > 8) {
    throw Error(ErrorKind::TooLarge, "room isomorphism check handles at most 8 rooms");
  }
  if (a.nodes.size() != b.nodes.size()) return false;
  using Key = std::tuple<int, int, std::string>;
  std::set<Key> eb;
  for (const auto& e : b.edges) eb.insert({e.from, e.to, e.exit});
  std::set<Key> ea;
  for (const auto& e : a.edges) ea.insert({e.from, e.to, e.exit});
  if (ea.size() != eb.size()) return false;
  std::vector<int> perm(a.nodes.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
  do {
    bool ok = true;
    for (const auto& [f, t, x] : ea) {
      if (!eb.contains({perm[static_cast<std::size_t>(f)], perm[static_cast<std::size_t>(t)], x})) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

std::vector<LegendEntry> corpus_legend(const RoomGraph& graph, const std::vector<CollisionRule>& rules) {
  std::set<int> ids;
  for (const auto& n : graph.nodes)
    if (n.grid)
      for (int id : n.grid->ids)
        if (id != 0) ids.insert(id);
  for (const auto& r : rules)
    if (r.other.starts_with("tile:")) ids.insert(std::stoi(r.other.substr(5)));

  std::vector<LegendEntry> legend;
  for (int id : ids) {
    LegendEntry e;
    e.tile_id = id;
    std::set<std::string> props;
    bool stop = false, despawn = false, teleport = false;
    for (const auto& r : rules) {
      if (r.other != tile_class_label(id)) continue;
      props.insert(to_string(r.effect));
      stop = stop || r.effect.kind == EffectKind::StopX || r.effect.kind == EffectKind::StopY;
      despawn = despawn || r.effect.kind == EffectKind::DespawnOther;
      teleport = teleport || r.effect.kind == EffectKind::Teleport;
    }
    e.symbol = stop ? '#' : despawn ? 'o' : teleport ? '^' : '.';
    e.properties.assign(props.begin(), props.end());
    if (e.properties.empty()) e.properties.push_back("unknown");
    legend.push_back(std::move(e));
  }
  return legend;
}

char legend_symbol(const std::vector<LegendEntry>& legend, int tile_id) {
  for (const auto& e : legend)
    if (e.tile_id == tile_id) return e.symbol;
  return '.';
}

std::string render_grid(const TileGrid& grid, const std::vector<LegendEntry>& legend) {
  std::string out;
  out.reserve(static_cast<std::size_t>((grid.cols + 1) * grid.rows));
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const int id = grid.at(c, r);
      out += id == 0 ? '.' : legend_symbol(legend, id);
    }
    out += '\n';
  }
  return out;
}

LevelCorpus export_level_corpus(const RoomGraph& graph, const std::vector<CollisionRule>& rules) {
  LevelCorpus corpus;
  corpus.legend = corpus_legend(graph, rules);
  for (std::size_t k = 0; k < graph.nodes.size(); ++k) {
    const RoomNode& n = graph.nodes[k];
    if (!n.grid) {
      corpus.skipped.push_back(n.signature);
      continue;
    }
    const std::string name = "room_" + std::to_string(k) + "_" + n.signature.substr(0, 8) + ".txt";
    corpus.grids[name] = render_grid(*n.grid, corpus.legend);
  }
  return corpus;
}

Json legend_to_json(const std::vector<LegendEntry>& legend) {
  Json symbols = Json::object();
  const std::pair<char, const char*> meanings[] = {
      {'#', "solid"}, {'o', "despawn-on-touch"}, {'^', "teleport"}, {'.', "empty-or-unknown"}};
  for (const auto& [sym, meaning] : meanings) {
    Json ids = Json::array();
    for (const auto& e : legend)
      if (e.symbol == sym) ids.push_back(e.tile_id);
    symbols[std::string(1, sym)] = {{"meaning", meaning}, {"tile_ids", ids}};
  }
  Json tiles = Json::array();
  for (const auto& e : legend) {
    tiles.push_back({{"tile_id", e.tile_id}, {"symbol", std::string(1, e.symbol)}, {"properties", e.properties}});
  }
  return {{"symbols", symbols}, {"tiles", tiles}};
}

}  // namespace agdl

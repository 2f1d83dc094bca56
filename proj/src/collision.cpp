#include "agdl/collision.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "agdl/error.hpp"

namespace agdl {

namespace {

constexpr double kEps = 1e-9;

struct Box {
  double x0, y0, x1, y1;
};

// Contact between an entity box and another box: overlapping or flush on one
// axis while overlapping on the other. Direction is the side of `a` touched.
std::optional<std::pair<Direction, double>> contact(const Box& a, const Box& b, bool allow_flush) {
  const double ox = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double oy = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  if (ox < -kEps || oy < -kEps) return std::nullopt;
  const bool pen_x = ox > kEps;
  const bool pen_y = oy > kEps;
  if (!pen_x && !pen_y) return std::nullopt;  // corner touch
  if (!allow_flush && !(pen_x && pen_y)) return std::nullopt;
  const double acx = 0.5 * (a.x0 + a.x1), bcx = 0.5 * (b.x0 + b.x1);
  const double acy = 0.5 * (a.y0 + a.y1), bcy = 0.5 * (b.y0 + b.y1);
  const Direction hx = acx < bcx ? Direction::Right : Direction::Left;
  const Direction hy = acy < bcy ? Direction::Down : Direction::Up;
  if (!pen_x) return std::make_pair(hx, 0.0);
  if (!pen_y) return std::make_pair(hy, 0.0);
  if (ox < oy) return std::make_pair(hx, ox);
  return std::make_pair(hy, oy);
}

Box box_of(const TrackSample& s) { return {s.x, s.y, s.x + s.w, s.y + s.h}; }

const Frame* frame_at(const Trace& trace, std::int64_t f) {
  if (trace.frames.empty()) return nullptr;
  const std::int64_t k = f - trace.frames.front().index;
  if (k < 0 || k >= static_cast<std::int64_t>(trace.frames.size())) return nullptr;
  return &trace.frames[static_cast<std::size_t>(k)];
}

using CellMap = std::map<std::pair<int, int>, int>;

CellMap world_cells(const Frame& f, int ts) {
  CellMap cells;
  if (!f.tiles) return cells;
  const int c0 = static_cast<int>(std::floor(f.cam_x / ts + 0.5));
  const int r0 = static_cast<int>(std::floor(f.cam_y / ts + 0.5));
  for (const TileCell& t : *f.tiles) cells[{c0 + t.col, r0 + t.row}] = t.id;
  return cells;
}

const EntityTrack* find_track(const std::vector<EntityTrack>& tracks, int id) {
  for (const auto& t : tracks)
    if (t.id == id) return &t;
  return nullptr;
}

std::optional<double> velocity(const EntityTrack& t, std::int64_t f, bool x_axis) {
  const auto a = t.samples.find(f - 1);
  const auto b = t.samples.find(f);
  if (a == t.samples.end() || b == t.samples.end()) return std::nullopt;
  return x_axis ? b->second.x - a->second.x : b->second.y - a->second.y;
}

bool stops(const EntityTrack& t, std::int64_t from, std::int64_t to, bool x_axis) {
  for (std::int64_t f = from; f <= to; ++f) {
    const auto v1 = velocity(t, f - 1, x_axis);
    const auto v2 = velocity(t, f, x_axis);
    if (!v1 || !v2) continue;
    if (std::abs(*v1) > kEps && (std::abs(*v2) <= kEps || *v1 * *v2 < 0)) return true;
  }
  return false;
}

// Flush contacts only count when the entity moved toward the surface; sliding
// along it is not an impact.
bool approaching(const EntityTrack& t, std::int64_t f, Direction d) {
  const bool x_axis = d == Direction::Left || d == Direction::Right;
  const auto v = velocity(t, f, x_axis);
  if (!v) return true;
  const bool positive = d == Direction::Right || d == Direction::Down;
  return positive ? *v > kEps : *v < -kEps;
}

std::string class_of(const EntityTrack& t, const CharacterClasses& classes) {
  const int c = classes.of(t);
  return entity_class_label(c >= 0 ? classes.labels[static_cast<std::size_t>(c)] : *t.signatures.begin());
}

// Track ends inside [from, to] before the trace does. Returns whether it
// reappears far away as a track of the same class.
std::optional<bool> ends(const EntityTrack& t, std::int64_t from, std::int64_t to, const Trace& trace,
                         const std::vector<EntityTrack>& tracks, const CharacterClasses& classes,
                         int window, double jump_px) {
  const std::int64_t last = t.last_frame();
  if (last < from || last > to || last >= trace.frames.back().index) return std::nullopt;
  const std::string cls = class_of(t, classes);
  const TrackSample& end = t.samples.rbegin()->second;
  for (const auto& s : tracks) {
    if (s.id == t.id || s.first_frame() <= last || s.first_frame() > last + window + 1) continue;
    if (class_of(s, classes) != cls) continue;
    const TrackSample& start = s.samples.begin()->second;
    if (std::hypot(start.x - end.x, start.y - end.y) > jump_px) return true;
  }
  return false;
}

}  // namespace

std::string tile_class_label(int tile_id) { return "tile:" + std::to_string(tile_id); }
std::string entity_class_label(const std::string& label) { return "entity:" + label; }

std::vector<CollisionEvent> detect_events(const Trace& trace, const std::vector<EntityTrack>& tracks) {
  std::vector<CollisionEvent> events;
  const int ts = std::max(1, trace.header.tile_size);
  std::map<int, std::set<std::pair<int, Direction>>> prev_tiles;
  std::set<std::pair<int, int>> prev_pairs;
  std::map<int, std::int64_t> last_seen;

  for (const Frame& frame : trace.frames) {
    const std::int64_t f = frame.index;
    const CellMap cells = world_cells(frame, ts);
    std::vector<const EntityTrack*> present;
    for (const auto& t : tracks)
      if (t.samples.contains(f)) present.push_back(&t);

    for (const EntityTrack* t : present) {
      const TrackSample& s = t->samples.at(f);
      const Box b = box_of(s);
      std::map<std::pair<int, Direction>, CollisionEvent> now;
      const int cx0 = static_cast<int>(std::floor(b.x0 / ts)) - 1;
      const int cx1 = static_cast<int>(std::floor(b.x1 / ts)) + 1;
      const int cy0 = static_cast<int>(std::floor(b.y0 / ts)) - 1;
      const int cy1 = static_cast<int>(std::floor(b.y1 / ts)) + 1;
      for (int r = cy0; r <= cy1; ++r) {
        for (int c = cx0; c <= cx1; ++c) {
          const auto it = cells.find({c, r});
          if (it == cells.end()) continue;
          const Box cell{double(c) * ts, double(r) * ts, double(c + 1) * ts, double(r + 1) * ts};
          const auto hit = contact(b, cell, true);
          if (!hit) continue;
          CollisionEvent& e = now[{it->second, hit->first}];
          e.frame = f;
          e.track = t->id;
          e.tile_id = it->second;
          e.dir = hit->first;
          e.depth = std::max(e.depth, hit->second);
          e.cells.emplace_back(c, r);
        }
      }
      std::set<std::pair<int, Direction>> keys;
      for (auto& [key, e] : now) {
        keys.insert(key);
        if (f == t->first_frame() || prev_tiles[t->id].contains(key)) continue;
        if (e.depth > 0.0 || approaching(*t, f, e.dir)) events.push_back(std::move(e));
      }
      prev_tiles[t->id] = std::move(keys);
    }

    std::set<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < present.size(); ++i) {
      for (std::size_t j = i + 1; j < present.size(); ++j) {
        const EntityTrack* a = present[i];
        const EntityTrack* b = present[j];
        const auto hit = contact(box_of(a->samples.at(f)), box_of(b->samples.at(f)), false);
        if (!hit) continue;
        const auto key = std::minmax(a->id, b->id);
        pairs.insert(key);
        if (f == a->first_frame() || f == b->first_frame() || prev_pairs.contains(key)) continue;
        CollisionEvent ea;
        ea.frame = f;
        ea.track = a->id;
        ea.other_track = b->id;
        ea.dir = hit->first;
        ea.depth = hit->second;
        CollisionEvent eb = ea;
        eb.track = b->id;
        eb.other_track = a->id;
        eb.dir = opposite(hit->first);
        events.push_back(std::move(ea));
        events.push_back(std::move(eb));
      }
    }
    prev_pairs = std::move(pairs);
  }
  std::stable_sort(events.begin(), events.end(), [](const CollisionEvent& a, const CollisionEvent& b) {
    return std::tie(a.frame, a.track) < std::tie(b.frame, b.track);
  });
  return events;
}

std::string to_string(const Effect& e) {
  switch (e.kind) {
    case EffectKind::StopX: return "stop-x";
    case EffectKind::StopY: return "stop-y";
    case EffectKind::DespawnOther: return "despawn(other)";
    case EffectKind::DespawnSelf: return "despawn(self)";
    case EffectKind::StateTransition: return "state-transition(" + e.from + "," + e.to + ")";
    case EffectKind::Teleport: return "teleport";
  }
  return "?";
}

Effect parse_effect(std::string_view text) {
  if (text == "stop-x") return {EffectKind::StopX, {}, {}};
  if (text == "stop-y") return {EffectKind::StopY, {}, {}};
  if (text == "despawn(other)") return {EffectKind::DespawnOther, {}, {}};
  if (text == "despawn(self)") return {EffectKind::DespawnSelf, {}, {}};
  if (text == "teleport") return {EffectKind::Teleport, {}, {}};
  constexpr std::string_view st = "state-transition(";
  if (text.starts_with(st) && text.ends_with(")")) {
    const std::string_view body = text.substr(st.size(), text.size() - st.size() - 1);
    const auto comma = body.find(',');
    if (comma != std::string_view::npos)
      return {EffectKind::StateTransition, std::string(body.substr(0, comma)), std::string(body.substr(comma + 1))};
  }
  throw Error(ErrorKind::Parse, "unknown effect '" + std::string(text) + "'");
}

std::string other_class(const CollisionEvent& e, const std::vector<EntityTrack>& tracks,
                        const CharacterClasses& classes) {
  if (e.tile_id >= 0) return tile_class_label(e.tile_id);
  const EntityTrack* o = find_track(tracks, e.other_track);
  return o ? class_of(*o, classes) : entity_class_label("?");
}

std::set<Effect> observed_effects(const CollisionEvent& e, const Trace& trace,
                                  const std::vector<EntityTrack>& tracks, const CharacterClasses& classes,
                                  const StateTimeline* states, const MiningConfig& config) {
  std::set<Effect> out;
  const EntityTrack* t = find_track(tracks, e.track);
  if (!t || trace.frames.empty()) return out;
  const std::int64_t t0 = e.frame;
  const std::int64_t t1 = e.frame + config.window;
  const double jump = config.jump_px > 0 ? config.jump_px : 4.0 * std::max(1, trace.header.tile_size);

  if (stops(*t, t0, t1, true)) out.insert({EffectKind::StopX, {}, {}});
  if (stops(*t, t0, t1, false)) out.insert({EffectKind::StopY, {}, {}});

  if (const auto end = ends(*t, t0, t1, trace, tracks, classes, config.window, jump)) {
    out.insert({*end ? EffectKind::Teleport : EffectKind::DespawnSelf, {}, {}});
  }

  if (e.tile_id >= 0) {
    const Frame* base = frame_at(trace, t0);
    for (std::int64_t f = t0 + 1; base && f <= t1; ++f) {
      const Frame* fr = frame_at(trace, f);
      if (!fr || !fr->tiles || fr->tilemap_sig != base->tilemap_sig) continue;
      const CellMap cells = world_cells(*fr, std::max(1, trace.header.tile_size));
      const bool gone = std::any_of(e.cells.begin(), e.cells.end(), [&](const auto& c) {
        const auto it = cells.find(c);
        return it == cells.end() || it->second != e.tile_id;
      });
      if (gone) {
        out.insert({EffectKind::DespawnOther, {}, {}});
        break;
      }
    }
  } else if (const EntityTrack* o = find_track(tracks, e.other_track)) {
    if (const auto end = ends(*o, t0, t1, trace, tracks, classes, config.window, jump); end && !*end) {
      out.insert({EffectKind::DespawnOther, {}, {}});
    }
  }

  if (states) {
    const auto it = states->find(e.track);
    if (it != states->end()) {
      const auto& line = it->second;
      for (std::int64_t f = t0; f <= t1; ++f) {
        const auto a = line.find(f - 1);
        const auto b = line.find(f);
        if (a != line.end() && b != line.end() && a->second != b->second) {
          out.insert({EffectKind::StateTransition, a->second, b->second});
        }
      }
    }
  }
  return out;
}

std::vector<CauseObservation> observe(const std::vector<CollisionEvent>& events, const Trace& trace,
                                      const std::vector<EntityTrack>& tracks, const CharacterClasses& classes,
                                      const StateTimeline* states, const MiningConfig& config) {
  std::vector<CauseObservation> out;
  out.reserve(events.size());
  for (const CollisionEvent& e : events) {
    const EntityTrack* t = find_track(tracks, e.track);
    if (!t) continue;
    out.push_back({class_of(*t, classes), other_class(e, tracks, classes), e.dir,
                   observed_effects(e, trace, tracks, classes, states, config)});
  }
  return out;
}

std::vector<CollisionRule> mine_rules(const std::vector<CauseObservation>& observations,
                                      const MiningConfig& config) {
  using Pair = std::pair<std::string, std::string>;
  std::map<Pair, std::map<Direction, int>> occ;
  std::map<Pair, std::map<Effect, std::map<Direction, int>>> sup;
  for (const auto& o : observations) {
    const Pair key{o.subject, o.other};
    ++occ[key][o.direction];
    for (const Effect& e : o.effects) ++sup[key][e][o.direction];
  }
  auto passes = [&](int s, int n) {
    return s >= config.min_support && n > 0 && static_cast<double>(s) / n >= config.min_precision;
  };

  std::vector<CollisionRule> rules;
  for (const auto& [key, by_effect] : sup) {
    int occ_any = 0;
    for (const auto& [d, n] : occ.at(key)) occ_any += n;
    for (const auto& [effect, by_dir] : by_effect) {
      std::vector<CollisionRule> directional;
      int sup_any = 0;
      for (const auto& [d, s] : by_dir) {
        sup_any += s;
        const int n = occ.at(key).at(d);
        if (passes(s, n)) directional.push_back({key.first, key.second, d, effect, s, n, double(s) / n});
      }
      const double p_any = static_cast<double>(sup_any) / occ_any;
      bool general = passes(sup_any, occ_any);
      for (const auto& r : directional) general = general && p_any >= r.precision - config.generalize_slack;
      if (general) {
        rules.push_back({key.first, key.second, std::nullopt, effect, sup_any, occ_any, p_any});
      } else {
        rules.insert(rules.end(), directional.begin(), directional.end());
      }
    }
  }
  std::sort(rules.begin(), rules.end(), [](const CollisionRule& a, const CollisionRule& b) {
    return std::tie(a.subject, a.other, a.direction, a.effect) < std::tie(b.subject, b.other, b.direction, b.effect);
  });
  return rules;
}

std::vector<CollisionRule> mine_rules(const std::vector<CollisionEvent>& events, const Trace& trace,
                                      const std::vector<EntityTrack>& tracks, const CharacterClasses& classes,
                                      const StateTimeline* states, const MiningConfig& config) {
  return mine_rules(observe(events, trace, tracks, classes, states, config), config);
}

std::set<int> solid_tiles(const std::vector<CollisionRule>& rules) {
  std::set<int> out;
  for (const auto& r : rules) {
    if (r.effect.kind != EffectKind::StopX && r.effect.kind != EffectKind::StopY) continue;
    if (r.other.starts_with("tile:")) out.insert(std::stoi(r.other.substr(5)));
  }
  return out;
}

std::map<std::pair<std::string, std::string>, int> touch_counts(
    const std::vector<CauseObservation>& observations) {
  std::map<std::pair<std::string, std::string>, int> out;
  for (const auto& o : observations) ++out[{o.subject, o.other}];
  return out;
}

}  // namespace agdl

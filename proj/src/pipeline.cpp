#include "agdl/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "agdl/error.hpp"
#include "agdl/hash.hpp"

namespace agdl {

namespace {

// Reads j[key] into out when present; a wrong type is a config error.
template <typename T>
void read_field(const Json& obj, const char* section, const char* key, T& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->template get<T>();
  } catch (const Json::exception&) {
    throw Error(ErrorKind::Config, std::string("config ") + section + "." + key + " has the wrong type");
  }
}

void check_keys(const Json& obj, const char* section, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw Error(ErrorKind::Config, std::string("config section '") + section + "' must be an object");
  for (const auto& [k, v] : obj.items()) {
    (void)v;
    if (std::none_of(keys.begin(), keys.end(), [&](const char* x) { return k == x; })) {
      throw Error(ErrorKind::Config, std::string("unknown config key ") + section + "." + k);
    }
  }
}

template <typename F>
auto staged(std::string_view stage, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw e.with_stage(stage);
  }
}

Json fit_json(const AxisFit& f) { return {{"p0", f.p0}, {"v", f.v}, {"a", f.a}, {"rmse", f.rmse}}; }

AxisFit fit_from(const Json& j) {
  return {j.at("p0").get<double>(), j.at("v").get<double>(), j.at("a").get<double>(), j.at("rmse").get<double>()};
}

Json grid_json(const std::optional<TileGrid>& g) {
  if (!g) return nullptr;
  return {{"cols", g->cols}, {"rows", g->rows}, {"ids", g->ids}};
}

std::vector<std::string> guard_strings(const std::vector<Guard>& gs) {
  std::vector<std::string> out;
  for (const auto& g : gs) out.push_back(to_string(g));
  return out;
}

}  // namespace

Json to_json(const LearnerConfig& c) {
  Json j;
  j["tracker"] = {{"r_max_tiles", c.tracker.r_max_tiles},
                  {"gap_limit", c.tracker.gap_limit},
                  {"group_persistence", c.tracker.group_persistence},
                  {"mi_lag", c.tracker.mi_lag}};
  j["physics"] = {{"min_length", c.physics.min_length},
                  {"penalty", c.physics.penalty ? Json(*c.physics.penalty) : Json(nullptr)},
                  {"penalty_floor", c.physics.penalty_floor},
                  {"accel_tol", c.physics.accel_tol}};
  j["fsm"] = {{"epsilon", c.fsm.epsilon},
              {"window", c.fsm.window},
              {"min_precision", c.fsm.min_precision},
              {"min_support", c.fsm.min_support}};
  j["collision"] = {{"window", c.collision.window},
                    {"min_precision", c.collision.min_precision},
                    {"min_support", c.collision.min_support},
                    {"generalize_slack", c.collision.generalize_slack}};
  j["linking"] = {{"jump_tiles", c.jump_tiles}};
  return j;
}

LearnerConfig config_from_json(const Json& j, LearnerConfig c) {
  check_keys(j, "config", {"tracker", "physics", "fsm", "collision", "linking"});
  if (j.contains("tracker")) {
    const Json& s = j["tracker"];
    check_keys(s, "tracker", {"r_max_tiles", "gap_limit", "group_persistence", "mi_lag"});
    read_field(s, "tracker", "r_max_tiles", c.tracker.r_max_tiles);
    read_field(s, "tracker", "gap_limit", c.tracker.gap_limit);
    read_field(s, "tracker", "group_persistence", c.tracker.group_persistence);
    read_field(s, "tracker", "mi_lag", c.tracker.mi_lag);
  }
  if (j.contains("physics")) {
    const Json& s = j["physics"];
    check_keys(s, "physics", {"min_length", "penalty", "penalty_floor", "accel_tol"});
    read_field(s, "physics", "min_length", c.physics.min_length);
    if (s.contains("penalty")) {
      if (s["penalty"].is_null()) {
        c.physics.penalty.reset();
      } else {
        double p = 0.0;
        read_field(s, "physics", "penalty", p);
        c.physics.penalty = p;
      }
    }
    read_field(s, "physics", "penalty_floor", c.physics.penalty_floor);
    read_field(s, "physics", "accel_tol", c.physics.accel_tol);
  }
  if (j.contains("fsm")) {
    const Json& s = j["fsm"];
    check_keys(s, "fsm", {"epsilon", "window", "min_precision", "min_support"});
    read_field(s, "fsm", "epsilon", c.fsm.epsilon);
    read_field(s, "fsm", "window", c.fsm.window);
    read_field(s, "fsm", "min_precision", c.fsm.min_precision);
    read_field(s, "fsm", "min_support", c.fsm.min_support);
  }
  if (j.contains("collision")) {
    const Json& s = j["collision"];
    check_keys(s, "collision", {"window", "min_precision", "min_support", "generalize_slack"});
    read_field(s, "collision", "window", c.collision.window);
    read_field(s, "collision", "min_precision", c.collision.min_precision);
    read_field(s, "collision", "min_support", c.collision.min_support);
    read_field(s, "collision", "generalize_slack", c.collision.generalize_slack);
  }
  if (j.contains("linking")) {
    const Json& s = j["linking"];
    check_keys(s, "linking", {"jump_tiles"});
    read_field(s, "linking", "jump_tiles", c.jump_tiles);
  }
  if (c.physics.min_length < 1 || c.fsm.window < 0 || c.collision.window < 0 || c.fsm.epsilon < 0 ||
      c.jump_tiles <= 0 || c.tracker.r_max_tiles <= 0 || c.tracker.gap_limit < 0) {
    throw Error(ErrorKind::Config, "config value out of range");
  }
  return c;
}

void apply_override(LearnerConfig& c, std::string_view assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq) {
    throw Error(ErrorKind::Config, "override must look like section.key=value: " + std::string(assignment));
  }
  const std::string section(assignment.substr(0, dot));
  const std::string key(assignment.substr(dot + 1, eq - dot - 1));
  const std::string text(assignment.substr(eq + 1));
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  Json patch;
  patch[section][key] = value;
  c = config_from_json(patch, c);
}

std::string config_digest(const LearnerConfig& c) { return hex64(fnv1a(to_json(c).dump())); }

const CharacterModel* DesignModel::character(std::string_view label) const {
  for (const auto& c : characters)
    if (c.label == label) return &c;
  return nullptr;
}

Json to_json(const DesignModel& m) {
  Json j;
  j["schema"] = kModelSchema;
  j["version"] = kModelVersion;
  Json traces = Json::array();
  for (const auto& t : m.traces) {
    traces.push_back({{"id", t.id}, {"source", t.source}, {"game", t.game}, {"frames", t.frames},
                      {"player_track", t.player_track}});
  }
  j["provenance"] = {{"traces", traces}, {"config_digest", m.config_digest}, {"tool_version", m.tool_version}};
  j["game"] = m.game;
  j["player_class"] = m.player_class;

  Json chars = Json::array();
  for (const auto& c : m.characters) {
    Json states = Json::array();
    for (const auto& s : c.fsm.states) {
      states.push_back({{"id", s.id}, {"name", s.name}, {"ax", s.ax}, {"ay", s.ay}, {"sat_x", s.sat_x},
                        {"sat_y", s.sat_y}, {"animations", s.animations}, {"members", s.members}});
    }
    Json transitions = Json::array();
    for (const auto& t : c.fsm.transitions) {
      transitions.push_back({{"from", t.from}, {"to", t.to}, {"guards", guard_strings(t.guards)},
                             {"support", t.support}, {"precision", t.precision}, {"observed", t.observed},
                             {"low_confidence", t.low_confidence}});
    }
    Json segs = Json::array();
    for (std::size_t k = 0; k < c.segments.size(); ++k) {
      const auto& s = c.segments[k];
      segs.push_back({{"trace", k < c.segment_trace.size() ? c.segment_trace[k] : 0},
                      {"track", s.track_id},
                      {"t0", s.t0},
                      {"t1", s.t1},
                      {"signature", s.signature},
                      {"x", fit_json(s.x)},
                      {"y", fit_json(s.y)},
                      {"sat_x", s.sat_x},
                      {"sat_y", s.sat_y}});
    }
    chars.push_back({{"class", c.label},
                     {"signatures", c.fsm.signatures},
                     {"states", states},
                     {"transitions", transitions},
                     {"segments", segs}});
  }
  j["characters"] = chars;

  Json rules = Json::array();
  for (const auto& r : m.rules) {
    rules.push_back({{"subject", r.subject},
                     {"other", r.other},
                     {"direction", r.direction ? std::string(to_string(*r.direction)) : std::string("any")},
                     {"effect", to_string(r.effect)},
                     {"support", r.support},
                     {"occurrences", r.occurrences},
                     {"precision", r.precision}});
  }
  Json touches = Json::array();
  for (const auto& t : m.touch_counts) touches.push_back({{"subject", t.subject}, {"other", t.other}, {"count", t.count}});
  j["collision"] = {{"rules", rules}, {"touch_counts", touches}, {"solid_tiles", m.solid_tiles}};

  Json nodes = Json::array();
  for (std::size_t k = 0; k < m.rooms.nodes.size(); ++k) {
    const auto& n = m.rooms.nodes[k];
    nodes.push_back({{"id", k}, {"signature", n.signature}, {"cam", {n.cam_x, n.cam_y}}, {"frames", n.frames},
                     {"grid", grid_json(n.grid)}});
  }
  Json edges = Json::array();
  for (const auto& e : m.rooms.edges)
    edges.push_back({{"from", e.from}, {"to", e.to}, {"exit", e.exit}, {"support", e.support}});
  j["rooms"] = {{"nodes", nodes}, {"edges", edges}};

  if (m.jump) {
    const auto& jm = *m.jump;
    Json arcs = Json::array();
    for (const auto& a : jm.per_arc) {
      arcs.push_back({{"takeoff", a.takeoff}, {"height", a.height}, {"hang_frames", a.hang_frames},
                      {"ascent_accel", a.ascent_accel}, {"descent_accel", a.descent_accel}});
    }
    j["jump_metrics"] = {{"arcs", jm.arcs},
                         {"height", jm.height},
                         {"hang_time", jm.hang_time},
                         {"hang_frames", jm.hang_frames},
                         {"ascent_accel", jm.ascent_accel},
                         {"descent_accel", jm.descent_accel},
                         {"asymmetry", jm.asymmetry},
                         {"per_arc", arcs}};
  } else {
    j["jump_metrics"] = nullptr;
  }
  j["extensions"] = m.extensions;
  return j;
}

DesignModel model_from_json(const Json& j) {
  if (!j.is_object() || j.value("schema", "") != kModelSchema) {
    throw Error(ErrorKind::Parse, "not a design model (schema must be '" + std::string(kModelSchema) + "')");
  }
  if (j.value("version", 0) != kModelVersion) {
    throw Error(ErrorKind::UnsupportedVersion, "unsupported design model version " + j.value("version", Json()).dump());
  }
  try {
    DesignModel m;
    const Json& prov = j.at("provenance");
    for (const auto& t : prov.at("traces")) {
      m.traces.push_back({t.at("id").get<std::string>(), t.at("source").get<std::string>(),
                          t.at("game").get<std::string>(), t.at("frames").get<std::int64_t>(),
                          t.at("player_track").get<int>()});
    }
    m.config_digest = prov.at("config_digest").get<std::string>();
    m.tool_version = prov.at("tool_version").get<std::string>();
    m.game = j.at("game").get<std::string>();
    m.player_class = j.at("player_class").get<std::string>();

    for (const auto& c : j.at("characters")) {
      CharacterModel cm;
      cm.label = c.at("class").get<std::string>();
      cm.fsm.character_class = cm.label;
      cm.fsm.signatures = c.at("signatures").get<std::set<std::string>>();
      for (const auto& s : c.at("states")) {
        CharacterState st;
        st.id = s.at("id").get<int>();
        st.name = s.at("name").get<std::string>();
        st.ax = s.at("ax").get<double>();
        st.ay = s.at("ay").get<double>();
        st.sat_x = s.at("sat_x").get<double>();
        st.sat_y = s.at("sat_y").get<double>();
        st.animations = s.at("animations").get<std::set<std::string>>();
        st.members = s.at("members").get<std::vector<std::size_t>>();
        cm.fsm.states.push_back(std::move(st));
      }
      for (const auto& t : c.at("transitions")) {
        Transition tr;
        tr.from = t.at("from").get<std::string>();
        tr.to = t.at("to").get<std::string>();
        for (const auto& g : t.at("guards")) tr.guards.push_back(parse_guard(g.get<std::string>()));
        tr.support = t.at("support").get<int>();
        tr.precision = t.at("precision").get<double>();
        tr.observed = t.at("observed").get<int>();
        tr.low_confidence = t.at("low_confidence").get<bool>();
        cm.fsm.transitions.push_back(std::move(tr));
      }
      for (const auto& s : c.at("segments")) {
        MotionSegment seg;
        seg.track_id = s.at("track").get<int>();
        seg.t0 = s.at("t0").get<std::int64_t>();
        seg.t1 = s.at("t1").get<std::int64_t>();
        seg.signature = s.at("signature").get<std::string>();
        seg.x = fit_from(s.at("x"));
        seg.y = fit_from(s.at("y"));
        seg.sat_x = s.at("sat_x").get<bool>();
        seg.sat_y = s.at("sat_y").get<bool>();
        cm.segments.push_back(std::move(seg));
        cm.segment_trace.push_back(s.at("trace").get<int>());
      }
      m.characters.push_back(std::move(cm));
    }

    const Json& col = j.at("collision");
    for (const auto& r : col.at("rules")) {
      CollisionRule rule;
      rule.subject = r.at("subject").get<std::string>();
      rule.other = r.at("other").get<std::string>();
      const std::string dir = r.at("direction").get<std::string>();
      if (dir != "any") {
        const auto d = parse_direction(dir);
        if (!d) throw Error(ErrorKind::Parse, "bad rule direction '" + dir + "'");
        rule.direction = *d;
      }
      rule.effect = parse_effect(r.at("effect").get<std::string>());
      rule.support = r.at("support").get<int>();
      rule.occurrences = r.at("occurrences").get<int>();
      rule.precision = r.at("precision").get<double>();
      m.rules.push_back(std::move(rule));
    }
    for (const auto& t : col.at("touch_counts")) {
      m.touch_counts.push_back(
          {t.at("subject").get<std::string>(), t.at("other").get<std::string>(), t.at("count").get<int>()});
    }
    m.solid_tiles = col.at("solid_tiles").get<std::vector<int>>();

    const Json& rooms = j.at("rooms");
    for (const auto& n : rooms.at("nodes")) {
      RoomNode node;
      node.signature = n.at("signature").get<std::string>();
      node.cam_x = n.at("cam").at(0).get<double>();
      node.cam_y = n.at("cam").at(1).get<double>();
      node.frames = n.at("frames").get<int>();
      if (!n.at("grid").is_null()) {
        TileGrid g;
        g.cols = n["grid"].at("cols").get<int>();
        g.rows = n["grid"].at("rows").get<int>();
        g.ids = n["grid"].at("ids").get<std::vector<int>>();
        if (g.ids.size() != static_cast<std::size_t>(g.cols * g.rows)) {
          throw Error(ErrorKind::Parse, "room grid size does not match cols x rows");
        }
        node.grid = std::move(g);
      }
      m.rooms.nodes.push_back(std::move(node));
    }
    for (const auto& e : rooms.at("edges")) {
      m.rooms.edges.push_back({e.at("from").get<int>(), e.at("to").get<int>(), e.at("exit").get<std::string>(),
                               e.at("support").get<int>()});
    }

    const Json& jm = j.at("jump_metrics");
    if (!jm.is_null()) {
      JumpMetrics out;
      out.arcs = jm.at("arcs").get<int>();
      out.height = jm.at("height").get<double>();
      out.hang_time = jm.at("hang_time").get<double>();
      out.hang_frames = jm.at("hang_frames").get<double>();
      out.ascent_accel = jm.at("ascent_accel").get<double>();
      out.descent_accel = jm.at("descent_accel").get<double>();
      out.asymmetry = jm.at("asymmetry").get<double>();
      for (const auto& a : jm.at("per_arc")) {
        out.per_arc.push_back({a.at("takeoff").get<std::int64_t>(), a.at("height").get<double>(),
                               a.at("hang_frames").get<int>(), a.at("ascent_accel").get<double>(),
                               a.at("descent_accel").get<double>()});
      }
      m.jump = std::move(out);
    }
    m.extensions = j.value("extensions", Json::object());
    return m;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("malformed design model: ") + e.what());
  }
}

std::string serialize_model(const DesignModel& m) { return to_json(m).dump(2) + "\n"; }

DesignModel read_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open model " + path.string());
  const Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::Parse, "model " + path.string() + " is not valid JSON");
  return model_from_json(j);
}

void write_model(const DesignModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write model " + path.string());
  out << serialize_model(m);
  if (!out) throw Error(ErrorKind::Io, "failed writing model " + path.string());
}

DesignModel learn(const std::vector<Trace>& traces, const LearnerConfig& config) {
  if (traces.empty()) throw Error(ErrorKind::Argument, "learn needs at least one trace");
  const std::string game = traces.front().header.game_id();
  for (const auto& t : traces) {
    if (t.header.game_id() != game) {
      throw Error(ErrorKind::IncompatibleTraces, "traces come from different games: '" + game + "' and '" +
                                                     t.header.game_id() + "'").with_stage("input");
    }
  }
  const int ts = std::max(1, traces.front().header.tile_size);
  const int fps = traces.front().header.fps > 0 ? traces.front().header.fps : 60;
  const std::size_t nt = traces.size();

  DesignModel model;
  model.game = game;
  model.config_digest = config_digest(config);
  model.tool_version = std::string(kToolVersion);

  std::vector<std::vector<EntityTrack>> tracks(nt);
  std::vector<int> player(nt, -1);
  staged("tracker", [&] {
    for (std::size_t i = 0; i < nt; ++i) {
      tracks[i] = track(traces[i], config.tracker);
      player[i] = identify_player(tracks[i], traces[i], config.tracker);
    }
    return 0;
  });
  std::vector<const EntityTrack*> all;
  for (const auto& ts_ : tracks)
    for (const auto& t : ts_) all.push_back(&t);
  const CharacterClasses classes = character_classes(all);

  auto track_of = [&](std::size_t i, int id) -> const EntityTrack& {
    for (const auto& t : tracks[i])
      if (t.id == id) return t;
    throw Error(ErrorKind::NotFound, "track " + std::to_string(id) + " missing");
  };
  std::map<int, int> votes;
  for (std::size_t i = 0; i < nt; ++i) ++votes[classes.of(track_of(i, player[i]))];
  int player_class = votes.begin()->first;
  for (const auto& [c, n] : votes)
    if (n > votes[player_class]) player_class = c;
  model.player_class = classes.labels[static_cast<std::size_t>(player_class)];

  for (std::size_t i = 0; i < nt; ++i) {
    model.traces.push_back({hex64(fnv1a(serialize_trace(traces[i]))), traces[i].header.source, game,
                            static_cast<std::int64_t>(traces[i].frames.size()), player[i]});
  }

  // segments[i][k]: segments of tracks[i][k]
  std::vector<std::vector<std::vector<MotionSegment>>> segments(nt);
  staged("physics", [&] {
    for (std::size_t i = 0; i < nt; ++i) {
      for (const auto& t : tracks[i]) segments[i].push_back(segment_track(t, config.physics));
    }
    return 0;
  });

  MiningConfig mining = config.collision;
  mining.jump_px = config.jump_tiles * ts;
  std::vector<std::vector<CollisionEvent>> events(nt);
  std::set<int> solid;
  staged("collision", [&] {
    std::vector<CauseObservation> obs;
    for (std::size_t i = 0; i < nt; ++i) {
      events[i] = detect_events(traces[i], tracks[i]);
      auto o = observe(events[i], traces[i], tracks[i], classes, nullptr, mining);
      obs.insert(obs.end(), o.begin(), o.end());
    }
    solid = solid_tiles(mine_rules(obs, mining));
    return 0;
  });

  std::vector<StateTimeline> timelines(nt);
  staged("fsm", [&] {
    for (std::size_t c = 0; c < classes.labels.size(); ++c) {
      CharacterModel cm;
      cm.label = classes.labels[c];
      std::vector<std::pair<std::size_t, std::size_t>> owner;  // (trace, track index) per segment
      for (std::size_t i = 0; i < nt; ++i) {
        for (std::size_t k = 0; k < tracks[i].size(); ++k) {
          if (classes.of(tracks[i][k]) != static_cast<int>(c)) continue;
          for (const auto& s : segments[i][k]) {
            cm.segments.push_back(s);
            cm.segment_trace.push_back(static_cast<int>(i));
            owner.emplace_back(i, k);
          }
        }
      }
      if (cm.segments.empty()) continue;
      const auto states = cluster_states(cm.segments, config.fsm.epsilon);
      std::vector<int> state_of(cm.segments.size(), 0);
      for (const auto& st : states)
        for (std::size_t k : st.members) state_of[k] = st.id;

      std::vector<TrackHistory> histories;
      for (std::size_t i = 0; i < nt; ++i) {
        for (std::size_t k = 0; k < tracks[i].size(); ++k) {
          const EntityTrack& t = tracks[i][k];
          if (classes.of(t) != static_cast<int>(c)) continue;
          std::vector<MotionSegment> segs;
          std::vector<int> ids;
          for (std::size_t s = 0; s < cm.segments.size(); ++s) {
            if (owner[s].first != i || owner[s].second != k) continue;
            segs.push_back(cm.segments[s]);
            ids.push_back(state_of[s]);
          }
          std::vector<std::pair<std::int64_t, Guard>> collisions;
          for (const auto& e : events[i]) {
            if (e.track != t.id) continue;
            std::string label = other_class(e, tracks[i], classes);
            if (e.tile_id >= 0 && solid.contains(e.tile_id)) label = "solid";
            collisions.emplace_back(e.frame, Guard::collision(label, e.dir));
          }
          histories.push_back(build_history(traces[i], t, segs, ids, collisions));
          auto& line = timelines[i][t.id];
          for (const auto& [f, s] : histories.back().state) line[f] = states[static_cast<std::size_t>(s)].name;
        }
      }
      cm.fsm = induce_transitions(states, histories, config.fsm);
      cm.fsm.character_class = cm.label;
      model.characters.push_back(std::move(cm));
    }
    return 0;
  });

  staged("collision", [&] {
    std::vector<CauseObservation> obs;
    for (std::size_t i = 0; i < nt; ++i) {
      auto o = observe(events[i], traces[i], tracks[i], classes, &timelines[i], mining);
      obs.insert(obs.end(), o.begin(), o.end());
    }
    model.rules = mine_rules(obs, mining);
    for (const auto& [key, n] : touch_counts(obs)) model.touch_counts.push_back({key.first, key.second, n});
    const auto s = solid_tiles(model.rules);
    model.solid_tiles.assign(s.begin(), s.end());
    return 0;
  });

  if (const CharacterModel* pc = model.character(model.player_class)) {
    std::vector<JumpArc> arcs;
    for (std::size_t i = 0; i < nt; ++i) {
      std::vector<MotionSegment> segs;
      for (std::size_t s = 0; s < pc->segments.size(); ++s)
        if (pc->segment_trace[s] == static_cast<int>(i)) segs.push_back(pc->segments[s]);
      const auto a = find_jump_arcs(segs, config.physics.accel_tol);
      arcs.insert(arcs.end(), a.begin(), a.end());
    }
    if (!arcs.empty()) model.jump = summarize_jumps(std::move(arcs), fps);
  }

  staged("linking", [&] {
    std::vector<const Trace*> ptrs;
    std::vector<PlayerPath> paths;
    for (std::size_t i = 0; i < nt; ++i) {
      ptrs.push_back(&traces[i]);
      std::vector<int> ids;
      for (const auto& t : tracks[i])
        if (classes.of(t) == player_class) ids.push_back(t.id);
      paths.push_back(player_path(tracks[i], ids));
    }
    model.rooms = build_room_graph(ptrs, paths, config.jump_tiles * ts);
    return 0;
  });
  return model;
}

FsmModel truth_fsm(const GroundTruthDesign& design) {
  FsmModel m;
  m.character_class = design.player.name;
  for (std::size_t k = 0; k < design.states.size(); ++k) {
    const auto& s = design.states[k];
    CharacterState st;
    st.id = static_cast<int>(k);
    st.name = s.name;
    st.ax = std::abs(s.ax);
    st.ay = s.ay;
    st.sat_x = s.ax != 0.0 && s.vmax > 0.0 ? 1.0 : 0.0;
    st.animations = {s.sprite};
    m.signatures.insert(s.sprite);
    m.states.push_back(std::move(st));
  }
  for (const auto& t : design.transitions) {
    Transition tr;
    tr.from = t.from;
    tr.to = t.to;
    tr.guards = t.guards;
    tr.precision = 1.0;
    m.transitions.push_back(std::move(tr));
  }
  return m;
}

FsmModel translate_guards(const FsmModel& learned, const GroundTruthDesign& design) {
  FsmModel out = learned;
  for (auto& t : out.transitions) {
    for (auto& g : t.guards) {
      if (g.kind == GuardKind::Collision && g.subject.starts_with("tile:")) {
        g.subject = std::string(to_string(design.tile_class(std::stoi(g.subject.substr(5)))));
      }
    }
  }
  return out;
}

Evaluation evaluate(const DesignModel& model, const GroundTruthDesign& truth, int min_touches) {
  Evaluation ev;
  const CharacterModel* pc = model.character(model.player_class);
  const auto sprites = truth.player_sprites();
  if (pc && !pc->fsm.signatures.empty()) {
    ev.player_correct = std::all_of(pc->fsm.signatures.begin(), pc->fsm.signatures.end(), [&](const std::string& s) {
      return std::find(sprites.begin(), sprites.end(), s) != sprites.end();
    });
  }

  const FsmModel tf = truth_fsm(truth);
  if (pc) {
    const FsmModel lf = translate_guards(pc->fsm, truth);
    ev.state_count_delta = static_cast<int>(lf.states.size()) - static_cast<int>(tf.states.size());
    try {
      const FsmMatch match = match_fsm(lf, tf);
      ev.transition_f1 = match.f1;
      for (std::size_t i = 0; i < match.mapping.size(); ++i) {
        if (match.mapping[i] < 0) continue;
        const auto& l = lf.states[i];
        const auto& t = tf.states[static_cast<std::size_t>(match.mapping[i])];
        ev.state_mapping.emplace_back(l.name, t.name);
        StateError se{l.name, t.name, std::abs(l.ax - t.ax), std::abs(l.ay - t.ay)};
        ev.max_param_error = std::max({ev.max_param_error, se.ax, se.ay});
        ev.state_errors.push_back(std::move(se));
      }
    } catch (const Error&) {
      ev.transition_f1 = 0.0;
    }
  } else {
    ev.state_count_delta = -static_cast<int>(tf.states.size());
  }

  const std::string subject = entity_class_label(model.player_class);
  std::set<int> learned_solid, truth_solid;
  for (const auto& t : model.touch_counts) {
    if (t.subject != subject || !t.other.starts_with("tile:") || t.count < min_touches) continue;
    const int id = std::stoi(t.other.substr(5));
    ev.touched_tiles.push_back(id);
    if (std::find(model.solid_tiles.begin(), model.solid_tiles.end(), id) != model.solid_tiles.end())
      learned_solid.insert(id);
    if (truth.tile_class(id) == TileClass::Solid) truth_solid.insert(id);
  }
  int both = 0;
  for (int id : learned_solid) both += truth_solid.contains(id);
  ev.solidity_precision = learned_solid.empty() ? 1.0 : static_cast<double>(both) / learned_solid.size();
  ev.solidity_recall = truth_solid.empty() ? 1.0 : static_cast<double>(both) / truth_solid.size();
  for (const auto& r : model.rules) {
    if (r.subject != subject || r.effect.kind != EffectKind::DespawnOther || !r.other.starts_with("tile:")) continue;
    if (truth.tile_class(std::stoi(r.other.substr(5))) == TileClass::Pickup) ev.pickup_despawn = true;
  }

  const RoomGraph tg = truth_room_graph(truth);
  ev.rooms_learned = static_cast<int>(model.rooms.nodes.size());
  ev.rooms_truth = static_cast<int>(tg.nodes.size());
  try {
    ev.rooms_isomorphic = rooms_isomorphic(model.rooms, tg);
  } catch (const Error&) {
    ev.rooms_isomorphic = false;
  }
  const auto legend = corpus_legend(model.rooms, model.rules);
  bool any = false, all = true;
  for (const auto& n : model.rooms.nodes) {
    if (!n.grid) continue;
    const int k = tg.find(n.signature);
    if (k < 0) {
      all = false;
      continue;
    }
    any = true;
    all = all && render_grid(*n.grid, legend) == render_grid(*tg.nodes[static_cast<std::size_t>(k)].grid, legend);
  }
  ev.corpus_matches = any && all;
  return ev;
}

Json to_json(const Evaluation& e) {
  Json mapping = Json::array();
  for (const auto& [l, t] : e.state_mapping) mapping.push_back({{"learned", l}, {"truth", t}});
  Json errors = Json::array();
  for (const auto& s : e.state_errors)
    errors.push_back({{"learned", s.learned}, {"truth", s.truth}, {"ax_error", s.ax}, {"ay_error", s.ay}});
  return {{"player_identification_correct", e.player_correct},
          {"state_count_delta", e.state_count_delta},
          {"transition_f1", e.transition_f1},
          {"state_mapping", mapping},
          {"state_parameter_errors", errors},
          {"max_parameter_error", e.max_param_error},
          {"touched_tiles", e.touched_tiles},
          {"solidity_precision", e.solidity_precision},
          {"solidity_recall", e.solidity_recall},
          {"pickup_despawn_rule", e.pickup_despawn},
          {"rooms_learned", e.rooms_learned},
          {"rooms_truth", e.rooms_truth},
          {"room_graph_isomorphic", e.rooms_isomorphic},
          {"corpus_matches_design", e.corpus_matches}};
}

}  // namespace agdl

#include "agdl/toysim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "agdl/error.hpp"
#include "agdl/hash.hpp"

namespace agdl {

std::string_view to_string(TileClass c) {
  switch (c) {
    case TileClass::Empty: return "empty";
    case TileClass::Solid: return "solid";
    case TileClass::Hazard: return "hazard";
    case TileClass::Pickup: return "pickup";
    case TileClass::Portal: return "portal";
  }
  return "empty";
}

TileClass parse_tile_class(std::string_view s) {
  if (s == "empty") return TileClass::Empty;
  if (s == "solid") return TileClass::Solid;
  if (s == "hazard") return TileClass::Hazard;
  if (s == "pickup") return TileClass::Pickup;
  if (s == "portal") return TileClass::Portal;
  throw Error(ErrorKind::Config, "unknown tile class '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Design

int GroundTruthDesign::state_index(std::string_view name) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

TileClass GroundTruthDesign::tile_class(int id) const {
  auto it = tile_catalog.find(id);
  return it == tile_catalog.end() ? TileClass::Empty : it->second.cls;
}

std::vector<std::string> GroundTruthDesign::player_sprites() const {
  std::vector<std::string> out;
  for (const auto& s : states) out.push_back(s.sprite);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void GroundTruthDesign::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Config, msg); };
  if (fps <= 0) fail("fps must be positive");
  if (tile_size <= 0) fail("tile_size must be positive");
  if (states.empty()) fail("design declares no character states");
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      if (states[i].name == states[j].name) fail("duplicate state '" + states[i].name + "'");
    }
    if (states[i].sprite.empty()) fail("state '" + states[i].name + "' has no sprite");
  }
  if (state_index(player.initial_state) < 0) fail("unknown initial state '" + player.initial_state + "'");
  if (state_index(player.support_lost_state) < 0) {
    fail("unknown support-lost state '" + player.support_lost_state + "'");
  }
  for (const auto& t : transitions) {
    if (state_index(t.from) < 0 || state_index(t.to) < 0) {
      fail("transition " + t.from + " -> " + t.to + " references an undefined state");
    }
    if (t.guards.empty()) fail("transition " + t.from + " -> " + t.to + " has no guard");
  }
  if (rooms.empty()) fail("design declares no rooms");
  for (const auto& r : rooms) {
    if (r.rows() == 0 || r.cols() == 0) fail("room '" + r.name + "' is empty");
    for (const auto& row : r.tiles) {
      if (static_cast<int>(row.size()) != r.cols()) fail("room '" + r.name + "' is not rectangular");
      for (int id : row) {
        if (id != 0 && !tile_catalog.contains(id)) {
          fail("room '" + r.name + "' uses uncatalogued tile " + std::to_string(id));
        }
      }
    }
    if (r.origin_x % tile_size != 0 || r.origin_y % tile_size != 0) {
      fail("room '" + r.name + "' origin is not tile aligned");
    }
  }
  for (const auto& [id, def] : tile_catalog) {
    if (id < 0) fail("negative tile id");
    if (def.cls == TileClass::Portal &&
        (def.target_room < 0 || def.target_room >= static_cast<int>(rooms.size()))) {
      fail("portal tile " + std::to_string(id) + " targets a missing room");
    }
  }
  if (player.room < 0 || player.room >= static_cast<int>(rooms.size())) fail("player starts in a missing room");
  if (player.w < 1 || player.h < 1) fail("player box must be at least 1x1");
  for (const auto& e : enemies) {
    if (e.room < 0 || e.room >= static_cast<int>(rooms.size())) fail("enemy '" + e.sprite + "' in a missing room");
    if (e.w < 1 || e.h < 1) fail("enemy box must be at least 1x1");
    for (const auto& s : states) {
      if (s.sprite == e.sprite) fail("enemy sprite '" + e.sprite + "' collides with a player sprite");
    }
  }
}

namespace {

constexpr int kRoomCols = 32;
constexpr int kRoomRows = 16;

std::vector<std::vector<int>> blank_room() {
  std::vector<std::vector<int>> t(kRoomRows, std::vector<int>(kRoomCols, 0));
  for (int c = 0; c < kRoomCols; ++c) {
    t[14][c] = 1;
    t[15][c] = 1;
  }
  return t;
}

void wall(std::vector<std::vector<int>>& t, int col) {
  for (int r = 0; r < 14; ++r) t[r][col] = 2;
}

std::vector<StateDef> default_states() {
  return {
      {"idle", "hero.idle", 0.0, 0.0, 0.0, std::nullopt, false, true},
      {"run", "hero.run", 0.2, 0.0, 2.0, std::nullopt, false, true},
      {"jump", "hero.jump", 0.0, 0.5, 0.0, -5.0, true, false},
      {"fall", "hero.fall", 0.0, 0.5, 0.0, std::nullopt, true, false},
  };
}

std::vector<TransitionDef> default_transitions() {
  const std::string axis(kAxisChannel);
  return {
      {"idle", {Guard::pressed("A")}, "jump"},
      {"run", {Guard::pressed("A")}, "jump"},
      {"idle", {Guard::pressed(axis)}, "run"},
      {"run", {Guard::released(axis)}, "idle"},
      {"jump", {Guard::velocity_zero("y")}, "fall"},
      {"fall", {Guard::collision("solid", Direction::Down)}, "idle"},
  };
}

}  // namespace

GroundTruthDesign default_design() {
  GroundTruthDesign d;
  d.game = "toysim";
  d.states = default_states();
  d.transitions = default_transitions();
  d.tile_catalog = {
      {0, {TileClass::Empty}},
      {1, {TileClass::Solid}},
      {2, {TileClass::Solid}},
      {3, {TileClass::Pickup}},
      {4, {TileClass::Hazard}},
      {5, {TileClass::Portal, 3, 1024.0 + 32.0, 88.0}},
      {6, {TileClass::Portal, 0, 40.0, 88.0}},
  };

  auto start = blank_room();
  wall(start, 0);
  for (int c = 24; c <= 27; ++c) start[8][c] = 2;
  for (int c : {6, 9, 12}) start[12][c] = 3;
  start[9][14] = 3;

  auto middle = blank_room();
  middle[13][20] = 4;
  middle[12][8] = 3;

  auto end = blank_room();
  wall(end, 31);
  for (int c = 8; c <= 11; ++c) end[8][c] = 2;
  end[13][27] = 5;

  auto secret = blank_room();
  wall(secret, 0);
  wall(secret, 31);
  secret[12][12] = 3;
  secret[13][24] = 6;

  d.rooms = {
      {"start", 0, 0, start},
      {"middle", 256, 0, middle},
      {"end", 512, 0, end},
      {"secret", 1024, 0, secret},
  };
  d.enemies = {{"goomba", 0.5, 0.5, 1, 256.0 + 120.0, 96.0, 16, 16}};
  d.player = {"hero", 16, 24, 0, 24.0, 88.0, "idle", "fall"};
  return d;
}

GroundTruthDesign arena_design() {
  GroundTruthDesign d;
  d.game = "toysim-arena";
  d.states = default_states();
  d.transitions = default_transitions();
  d.tile_catalog = {{0, {TileClass::Empty}}, {1, {TileClass::Solid}}, {2, {TileClass::Solid}}};
  auto arena = blank_room();
  wall(arena, 0);
  wall(arena, 31);
  d.rooms = {{"arena", 0, 0, arena}};
  d.enemies = {{"goomba", 0.5, 0.5, 0, 160.0, 96.0, 16, 16}};
  d.player = {"hero", 16, 24, 0, 48.0, 88.0, "idle", "fall"};
  return d;
}

GroundTruthDesign with_gravity(GroundTruthDesign d, double ascent, double descent) {
  for (auto& s : d.states) {
    if (s.impulse) {
      s.ay = ascent;
    } else if (!s.grounded) {
      s.ay = descent;
    }
  }
  char suffix[64];
  std::snprintf(suffix, sizeof suffix, "/gravity:%g:%g", ascent, descent);
  d.game += suffix;
  return d;
}

Json to_json(const GroundTruthDesign& d) {
  Json j;
  j["game"] = d.game;
  j["fps"] = d.fps;
  j["tile_size"] = d.tile_size;
  Json states = Json::array();
  for (const auto& s : d.states) {
    Json js;
    js["name"] = s.name;
    js["sprite"] = s.sprite;
    js["ax"] = s.ax;
    js["ay"] = s.ay;
    js["vmax"] = s.vmax;
    js["impulse"] = s.impulse ? Json(*s.impulse) : Json(nullptr);
    js["hold_vx"] = s.hold_vx;
    js["grounded"] = s.grounded;
    states.push_back(std::move(js));
  }
  j["states"] = std::move(states);
  Json transitions = Json::array();
  for (const auto& t : d.transitions) {
    Json guards = Json::array();
    for (const auto& g : t.guards) guards.push_back(to_string(g));
    transitions.push_back({{"from", t.from}, {"guards", guards}, {"to", t.to}});
  }
  j["transitions"] = std::move(transitions);
  Json catalog = Json::object();
  for (const auto& [id, def] : d.tile_catalog) {
    Json jt;
    jt["class"] = to_string(def.cls);
    if (def.cls == TileClass::Portal) {
      jt["room"] = def.target_room;
      jt["x"] = def.target_x;
      jt["y"] = def.target_y;
    }
    catalog[std::to_string(id)] = std::move(jt);
  }
  j["tile_catalog"] = std::move(catalog);
  Json rooms = Json::array();
  for (const auto& r : d.rooms) {
    rooms.push_back({{"name", r.name}, {"origin", {r.origin_x, r.origin_y}}, {"tiles", r.tiles}});
  }
  j["rooms"] = std::move(rooms);
  Json enemies = Json::array();
  for (const auto& e : d.enemies) {
    enemies.push_back({{"sprite", e.sprite}, {"patrol_speed", e.patrol_speed}, {"gravity", e.gravity},
                       {"room", e.room}, {"x", e.x}, {"y", e.y}, {"w", e.w}, {"h", e.h}});
  }
  j["enemies"] = std::move(enemies);
  const auto& p = d.player;
  j["player"] = {{"name", p.name}, {"w", p.w}, {"h", p.h}, {"room", p.room}, {"x", p.x}, {"y", p.y},
                 {"initial_state", p.initial_state}, {"support_lost_state", p.support_lost_state}};
  return j;
}

GroundTruthDesign design_from_json(const Json& j) {
  GroundTruthDesign d;
  try {
    d.game = j.value("game", std::string("toysim"));
    d.fps = j.value("fps", 60);
    d.tile_size = j.value("tile_size", 8);
    for (const auto& js : j.at("states")) {
      StateDef s;
      s.name = js.at("name").get<std::string>();
      s.sprite = js.at("sprite").get<std::string>();
      s.ax = js.value("ax", 0.0);
      s.ay = js.value("ay", 0.0);
      s.vmax = js.value("vmax", 0.0);
      if (js.contains("impulse") && !js["impulse"].is_null()) s.impulse = js["impulse"].get<double>();
      s.hold_vx = js.value("hold_vx", false);
      s.grounded = js.value("grounded", false);
      d.states.push_back(std::move(s));
    }
    for (const auto& jt : j.at("transitions")) {
      TransitionDef t;
      t.from = jt.at("from").get<std::string>();
      t.to = jt.at("to").get<std::string>();
      for (const auto& g : jt.at("guards")) t.guards.push_back(parse_guard(g.get<std::string>()));
      d.transitions.push_back(std::move(t));
    }
    for (const auto& [key, jt] : j.at("tile_catalog").items()) {
      TileDef def;
      def.cls = parse_tile_class(jt.at("class").get<std::string>());
      if (def.cls == TileClass::Portal) {
        def.target_room = jt.at("room").get<int>();
        def.target_x = jt.at("x").get<double>();
        def.target_y = jt.at("y").get<double>();
      }
      d.tile_catalog[std::stoi(key)] = def;
    }
    for (const auto& jr : j.at("rooms")) {
      RoomDef r;
      r.name = jr.at("name").get<std::string>();
      r.origin_x = jr.at("origin").at(0).get<int>();
      r.origin_y = jr.at("origin").at(1).get<int>();
      r.tiles = jr.at("tiles").get<std::vector<std::vector<int>>>();
      d.rooms.push_back(std::move(r));
    }
    if (j.contains("enemies")) {
      for (const auto& je : j["enemies"]) {
        EnemyDef e;
        e.sprite = je.at("sprite").get<std::string>();
        e.patrol_speed = je.value("patrol_speed", 0.0);
        e.gravity = je.value("gravity", 0.0);
        e.room = je.at("room").get<int>();
        e.x = je.at("x").get<double>();
        e.y = je.at("y").get<double>();
        e.w = je.value("w", 16);
        e.h = je.value("h", 16);
        d.enemies.push_back(std::move(e));
      }
    }
    const auto& jp = j.at("player");
    d.player.name = jp.value("name", std::string("hero"));
    d.player.w = jp.value("w", 16);
    d.player.h = jp.value("h", 24);
    d.player.room = jp.at("room").get<int>();
    d.player.x = jp.at("x").get<double>();
    d.player.y = jp.at("y").get<double>();
    d.player.initial_state = jp.at("initial_state").get<std::string>();
    d.player.support_lost_state = jp.at("support_lost_state").get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::Config, std::string("malformed design: ") + e.what());
  }
  d.validate();
  return d;
}

GroundTruthDesign load_design(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open design " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
  return design_from_json(j);
}

void save_design(const GroundTruthDesign& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write design " + path.string());
  out << to_json(d).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Simulation state serialization

Json to_json(const SimState& s) {
  auto body = [](const Body& b) {
    return Json{{"x", b.x}, {"y", b.y}, {"vx", b.vx}, {"vy", b.vy},
                {"room", b.room}, {"alive", b.alive}, {"facing", b.facing}};
  };
  Json j;
  j["frame"] = s.frame;
  Json p = body(s.player);
  p["state"] = s.player.state;
  j["player"] = std::move(p);
  Json enemies = Json::array();
  for (const auto& e : s.enemies) {
    Json je = body(e);
    je["delay"] = e.delay;
    enemies.push_back(std::move(je));
  }
  j["enemies"] = std::move(enemies);
  j["prev_input"] = s.prev_input.names();
  Json contacts = Json::array();
  for (const auto& c : s.prev_contacts) contacts.push_back({c.cls, to_string(c.dir)});
  j["prev_contacts"] = std::move(contacts);
  auto cells = [](const std::set<std::tuple<int, int, int>>& set) {
    Json a = Json::array();
    for (const auto& [r, c, w] : set) a.push_back({r, c, w});
    return a;
  };
  j["collected"] = cells(s.collected);
  j["pending_collect"] = cells(s.pending_collect);
  j["pending"] = s.pending == PendingKind::Respawn    ? "respawn"
                 : s.pending == PendingKind::Teleport ? "teleport"
                                                      : "none";
  j["pending_target"] = {s.pending_room, s.pending_x, s.pending_y};
  return j;
}

SimState sim_state_from_json(const Json& j) {
  SimState s;
  try {
    auto body = [](const Json& jb, Body& b) {
      b.x = jb.at("x").get<double>();
      b.y = jb.at("y").get<double>();
      b.vx = jb.value("vx", 0.0);
      b.vy = jb.value("vy", 0.0);
      b.room = jb.at("room").get<int>();
      b.alive = jb.value("alive", true);
      b.facing = jb.value("facing", 1);
    };
    s.frame = j.at("frame").get<std::int64_t>();
    body(j.at("player"), s.player);
    s.player.state = j["player"].at("state").get<int>();
    for (const auto& je : j.at("enemies")) {
      EnemyBody e;
      body(je, e);
      e.delay = je.value("delay", 0);
      s.enemies.push_back(e);
    }
    for (const auto& b : j.at("prev_input")) {
      auto button = parse_button(b.get<std::string>());
      if (!button) throw Error(ErrorKind::Parse, "unknown button in state");
      s.prev_input.press(*button);
    }
    for (const auto& c : j.value("prev_contacts", Json::array())) {
      auto dir = parse_direction(c.at(1).get<std::string>());
      if (!dir) throw Error(ErrorKind::Parse, "bad contact direction in state");
      s.prev_contacts.insert({c.at(0).get<std::string>(), *dir});
    }
    for (const auto& c : j.value("collected", Json::array())) {
      s.collected.insert({c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<int>()});
    }
    for (const auto& c : j.value("pending_collect", Json::array())) {
      s.pending_collect.insert({c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<int>()});
    }
    const auto pending = j.value("pending", std::string("none"));
    s.pending = pending == "respawn" ? PendingKind::Respawn
                : pending == "teleport" ? PendingKind::Teleport
                                        : PendingKind::None;
    if (j.contains("pending_target")) {
      s.pending_room = j["pending_target"].at(0).get<int>();
      s.pending_x = j["pending_target"].at(1).get<double>();
      s.pending_y = j["pending_target"].at(2).get<double>();
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("malformed simulation state: ") + e.what());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Simulator

namespace {

constexpr double kFlushEps = 1e-6;

int floor_div(double v, int ts) { return static_cast<int>(std::floor(v / ts)); }
int last_cell(double edge, int ts) { return static_cast<int>(std::ceil(edge / ts - kFlushEps)) - 1; }

// Returns the tile index k when edge lies on a tile boundary k*ts.
std::optional<int> on_boundary(double edge, int ts) {
  const double k = std::round(edge / ts);
  if (std::abs(k * ts - edge) < kFlushEps) return static_cast<int>(k);
  return std::nullopt;
}

struct Edges {
  InputState now;
  InputState prev;
  bool pressed(std::string_view b) const {
    if (b == kAxisChannel) return now.horizontal() != 0 && prev.horizontal() == 0;
    auto button = parse_button(b);
    return button && now.held(*button) && !prev.held(*button);
  }
  bool released(std::string_view b) const {
    if (b == kAxisChannel) return now.horizontal() == 0 && prev.horizontal() != 0;
    auto button = parse_button(b);
    return button && !now.held(*button) && prev.held(*button);
  }
};

bool is_input_guard(const Guard& g) {
  return g.kind == GuardKind::Pressed || g.kind == GuardKind::Released;
}

}  // namespace

Simulator::Simulator(GroundTruthDesign design, std::uint64_t seed) : design_(std::move(design)) {
  design_.validate();
  const auto& p = design_.player;
  state_.player.x = p.x;
  state_.player.y = p.y;
  state_.player.room = p.room;
  state_.player.state = design_.state_index(p.initial_state);
  std::mt19937_64 rng(seed);
  for (const auto& e : design_.enemies) {
    EnemyBody b;
    b.x = e.x;
    b.y = e.y;
    b.room = e.room;
    b.delay = static_cast<int>(rng() % 16);
    b.facing = (rng() & 1u) ? 1 : -1;
    state_.enemies.push_back(b);
  }
  state_.prev_contacts = contacts(state_.player, p.w, p.h);
}

TraceHeader Simulator::header() const {
  TraceHeader h;
  h.fps = design_.fps;
  h.source = "toysim";
  h.tile_size = design_.tile_size;
  h.meta = Json{{"game", design_.game}};
  return h;
}

int Simulator::room_at(double wx, double wy) const {
  const int ts = design_.tile_size;
  for (std::size_t i = 0; i < design_.rooms.size(); ++i) {
    const auto& r = design_.rooms[i];
    if (wx >= r.origin_x && wx < r.origin_x + r.cols() * ts && wy >= r.origin_y &&
        wy < r.origin_y + r.rows() * ts) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

int Simulator::tile_at(int gcol, int grow) const {
  const int ts = design_.tile_size;
  for (std::size_t i = 0; i < design_.rooms.size(); ++i) {
    const auto& r = design_.rooms[i];
    const int c = gcol - r.origin_x / ts;
    const int w = grow - r.origin_y / ts;
    if (c >= 0 && c < r.cols() && w >= 0 && w < r.rows()) {
      if (state_.collected.contains({static_cast<int>(i), c, w})) return 0;
      return r.tiles[w][c];
    }
  }
  return -1;
}

bool Simulator::solid_at(int gcol, int grow) const {
  const int id = tile_at(gcol, grow);
  return id < 0 || design_.tile_class(id) == TileClass::Solid;
}

bool Simulator::box_hits_solid(double x, double y, int w, int h) const {
  const int ts = design_.tile_size;
  for (int r = floor_div(y, ts); r <= last_cell(y + h, ts); ++r) {
    for (int c = floor_div(x, ts); c <= last_cell(x + w, ts); ++c) {
      if (solid_at(c, r)) return true;
    }
  }
  return false;
}

void Simulator::move_and_resolve(Body& b, int w, int h, bool& hit_x, bool& hit_y) const {
  const int ts = design_.tile_size;
  hit_x = hit_y = false;

  b.x += b.vx;
  if (b.vx != 0.0 && box_hits_solid(b.x, b.y, w, h)) {
    const int r0 = floor_div(b.y, ts), r1 = last_cell(b.y + h, ts);
    const int c0 = floor_div(b.x, ts), c1 = last_cell(b.x + w, ts);
    auto column_solid = [&](int c) {
      for (int r = r0; r <= r1; ++r) {
        if (solid_at(c, r)) return true;
      }
      return false;
    };
    if (b.vx > 0) {
      for (int c = c0; c <= c1; ++c) {
        if (column_solid(c)) {
          b.x = static_cast<double>(c * ts - w);
          break;
        }
      }
    } else {
      for (int c = c1; c >= c0; --c) {
        if (column_solid(c)) {
          b.x = static_cast<double>((c + 1) * ts);
          break;
        }
      }
    }
    b.vx = 0.0;
    hit_x = true;
  }

  b.y += b.vy;
  if (b.vy != 0.0 && box_hits_solid(b.x, b.y, w, h)) {
    const int r0 = floor_div(b.y, ts), r1 = last_cell(b.y + h, ts);
    const int c0 = floor_div(b.x, ts), c1 = last_cell(b.x + w, ts);
    auto row_solid = [&](int r) {
      for (int c = c0; c <= c1; ++c) {
        if (solid_at(c, r)) return true;
      }
      return false;
    };
    if (b.vy > 0) {
      for (int r = r0; r <= r1; ++r) {
        if (row_solid(r)) {
          b.y = static_cast<double>(r * ts - h);
          break;
        }
      }
    } else {
      for (int r = r1; r >= r0; --r) {
        if (row_solid(r)) {
          b.y = static_cast<double>((r + 1) * ts);
          break;
        }
      }
    }
    b.vy = 0.0;
    hit_y = true;
  }
}

std::set<Contact> Simulator::contacts(const Body& b, int w, int h) const {
  const int ts = design_.tile_size;
  std::set<Contact> out;
  const int r0 = floor_div(b.y, ts), r1 = last_cell(b.y + h, ts);
  const int c0 = floor_div(b.x, ts), c1 = last_cell(b.x + w, ts);
  auto add_solid = [&](int c, int r, Direction d) {
    const int id = tile_at(c, r);
    if (id >= 0 && design_.tile_class(id) == TileClass::Solid) out.insert({"solid", d});
  };
  if (auto k = on_boundary(b.y + h, ts)) {
    for (int c = c0; c <= c1; ++c) add_solid(c, *k, Direction::Down);
  }
  if (auto k = on_boundary(b.y, ts)) {
    for (int c = c0; c <= c1; ++c) add_solid(c, *k - 1, Direction::Up);
  }
  if (auto k = on_boundary(b.x + w, ts)) {
    for (int r = r0; r <= r1; ++r) add_solid(*k, r, Direction::Right);
  }
  if (auto k = on_boundary(b.x, ts)) {
    for (int r = r0; r <= r1; ++r) add_solid(*k - 1, r, Direction::Left);
  }
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      const int id = tile_at(c, r);
      if (id <= 0) continue;
      const TileClass cls = design_.tile_class(id);
      if (cls == TileClass::Solid || cls == TileClass::Empty) continue;
      const double cx = c * ts, cy = r * ts;
      const double pen[4] = {cy + ts - b.y, b.y + h - cy, cx + ts - b.x, b.x + w - cx};
      const Direction dirs[4] = {Direction::Up, Direction::Down, Direction::Left, Direction::Right};
      const auto k = std::min_element(pen, pen + 4) - pen;
      out.insert({std::string(to_string(cls)), dirs[k]});
    }
  }
  return out;
}

void Simulator::step_enemies() {
  for (std::size_t i = 0; i < state_.enemies.size(); ++i) {
    auto& e = state_.enemies[i];
    const auto& def = design_.enemies[i];
    if (!e.alive) continue;
    if (e.delay > 0) {
      --e.delay;
      e.vx = 0.0;
    } else {
      e.vx = e.facing * def.patrol_speed;
    }
    e.vy += def.gravity;
    bool hit_x = false, hit_y = false;
    move_and_resolve(e, def.w, def.h, hit_x, hit_y);
    const auto& room = design_.rooms[e.room];
    const double left = room.origin_x;
    const double right = room.origin_x + room.cols() * design_.tile_size;
    if (e.x < left) {
      e.x = left;
      hit_x = true;
    } else if (e.x + def.w > right) {
      e.x = right - def.w;
      hit_x = true;
    }
    if (hit_x && e.delay == 0) e.facing = -e.facing;
  }
}

Frame Simulator::step(const InputState& input) {
  auto& s = state_;
  auto& p = s.player;
  const auto& pdef = design_.player;
  const int ts = design_.tile_size;

  for (const auto& cell : s.pending_collect) s.collected.insert(cell);
  s.pending_collect.clear();
  if (s.pending != PendingKind::None) {
    if (s.pending == PendingKind::Respawn) {
      p.x = pdef.x;
      p.y = pdef.y;
      p.room = pdef.room;
      p.state = design_.state_index(pdef.initial_state);
    } else {
      p.x = s.pending_x;
      p.y = s.pending_y;
      p.room = s.pending_room;
    }
    p.vx = p.vy = 0.0;
    s.pending = PendingKind::None;
  }

  const Edges edges{input, s.prev_input};
  auto guard_holds = [&](const Guard& g, const std::set<Contact>* now, double vy0, double vx0) {
    switch (g.kind) {
      case GuardKind::Pressed: return edges.pressed(g.subject);
      case GuardKind::Released: return edges.released(g.subject);
      case GuardKind::Collision:
        if (!now) return false;
        return now->contains({g.subject, g.direction}) && !s.prev_contacts.contains({g.subject, g.direction});
      case GuardKind::VelocityZero: {
        if (!now) return false;
        const double before = g.subject == "x" ? vx0 : vy0;
        const double after = g.subject == "x" ? p.vx : p.vy;
        return (before < 0.0 && after >= 0.0) || (before > 0.0 && after <= 0.0);
      }
      case GuardKind::Timeout: return false;
    }
    return false;
  };
  auto enter = [&](int to) {
    p.state = to;
    const auto& st = design_.states[to];
    if (st.impulse) p.vy = *st.impulse;
  };
  auto fire = [&](bool post, const std::set<Contact>* now, double vy0, double vx0) {
    const std::string& current = design_.states[p.state].name;
    for (const auto& t : design_.transitions) {
      if (t.from != current) continue;
      const bool input_only = std::all_of(t.guards.begin(), t.guards.end(), is_input_guard);
      if (input_only == post) continue;
      if (std::all_of(t.guards.begin(), t.guards.end(),
                      [&](const Guard& g) { return guard_holds(g, now, vy0, vx0); })) {
        enter(design_.state_index(t.to));
        return;
      }
    }
  };

  std::set<Contact> now;
  if (p.alive) {
    fire(false, nullptr, 0.0, 0.0);
    const auto& st = design_.states[p.state];
    const int h = input.horizontal();
    if (st.ax > 0.0 && h != 0) {
      p.vx = std::clamp(p.vx + st.ax * h, -st.vmax, st.vmax);
    } else if (!st.hold_vx) {
      p.vx = 0.0;
    }
    if (h != 0) p.facing = h;
    const double vx0 = p.vx;
    const double vy0 = p.vy;
    p.vy += st.ay;
    bool hit_x = false, hit_y = false;
    move_and_resolve(p, pdef.w, pdef.h, hit_x, hit_y);
    now = contacts(p, pdef.w, pdef.h);
    fire(true, &now, vy0, vx0);
    if (design_.states[p.state].grounded && !now.contains({"solid", Direction::Down})) {
      enter(design_.state_index(pdef.support_lost_state));
    }

    const int r0 = floor_div(p.y, ts), r1 = last_cell(p.y + pdef.h, ts);
    const int c0 = floor_div(p.x, ts), c1 = last_cell(p.x + pdef.w, ts);
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        const int id = tile_at(c, r);
        if (id <= 0) continue;
        const auto& def = design_.tile_catalog.at(id);
        const int room = room_at(c * ts + 0.5, r * ts + 0.5);
        if (def.cls == TileClass::Pickup) {
          const auto& rd = design_.rooms[room];
          s.pending_collect.insert({room, c - rd.origin_x / ts, r - rd.origin_y / ts});
        } else if (def.cls == TileClass::Hazard && s.pending == PendingKind::None) {
          s.pending = PendingKind::Respawn;
        } else if (def.cls == TileClass::Portal && s.pending == PendingKind::None) {
          s.pending = PendingKind::Teleport;
          s.pending_room = def.target_room;
          s.pending_x = def.target_x;
          s.pending_y = def.target_y;
        }
      }
    }
    const int room = room_at(p.x + 0.5 * pdef.w, p.y + 0.5 * pdef.h);
    if (room >= 0) p.room = room;
  }

  step_enemies();

  Frame f = emit(input);
  s.prev_input = input;
  s.prev_contacts = std::move(now);
  ++s.frame;
  return f;
}

Frame Simulator::emit(const InputState& input) const {
  const auto& s = state_;
  const auto& p = s.player;
  const auto& room = design_.rooms[p.room];
  Frame f;
  f.index = s.frame;
  f.cam_x = room.origin_x;
  f.cam_y = room.origin_y;
  f.input = input;
  if (p.alive) {
    f.entities.push_back({design_.states[p.state].sprite, p.x, p.y, design_.player.w, design_.player.h,
                          p.facing < 0, false});
  }
  for (std::size_t i = 0; i < s.enemies.size(); ++i) {
    const auto& e = s.enemies[i];
    if (!e.alive || e.room != p.room) continue;
    const auto& def = design_.enemies[i];
    f.entities.push_back({def.sprite, e.x, e.y, def.w, def.h, e.facing < 0, false});
  }
  std::vector<TileCell> tiles;
  for (int r = 0; r < room.rows(); ++r) {
    for (int c = 0; c < room.cols(); ++c) {
      const int id = room.tiles[r][c];
      if (id == 0 || s.collected.contains({p.room, c, r})) continue;
      tiles.push_back({c, r, id});
    }
  }
  f.tilemap_sig = room_signature(room);
  f.tiles = std::move(tiles);
  return f;
}

std::string room_signature(const RoomDef& room) {
  std::string layout = room.name;
  for (const auto& row : room.tiles)
    for (const int id : row) layout += static_cast<char>('0' + id % 64);
  return hex64(fnv1a(layout));
}

Trace simulate(const GroundTruthDesign& design, std::span<const InputState> inputs, std::uint64_t seed) {
  if (inputs.empty()) throw Error(ErrorKind::Argument, "simulate needs at least one input frame");
  Simulator sim(design, seed);
  Trace t;
  t.header = sim.header();
  t.frames.reserve(inputs.size());
  for (const auto& in : inputs) t.frames.push_back(sim.step(in));
  return t;
}

Trace branch_prefix(const GroundTruthDesign& design, std::span<const InputState> base_inputs,
                    std::size_t cut, std::span<const InputState> suffix, std::uint64_t seed) {
  if (cut > base_inputs.size()) {
    throw Error(ErrorKind::Argument, "cut " + std::to_string(cut) + " exceeds base length " +
                                         std::to_string(base_inputs.size()));
  }
  std::vector<InputState> inputs(base_inputs.begin(), base_inputs.begin() + static_cast<std::ptrdiff_t>(cut));
  inputs.insert(inputs.end(), suffix.begin(), suffix.end());
  return simulate(design, inputs, seed);
}

// ---------------------------------------------------------------------------
// Probes

std::string probe_player_identity(const GroundTruthDesign& design, const SimState& start) {
  Simulator sim(design, 0);
  struct Candidate {
    bool player;
    std::size_t index;
    std::string signature;
  };
  std::vector<Candidate> candidates;
  if (start.player.alive) candidates.push_back({true, 0, design.states[start.player.state].sprite});
  for (std::size_t i = 0; i < start.enemies.size(); ++i) {
    if (start.enemies[i].alive && start.enemies[i].room == start.player.room) {
      candidates.push_back({false, i, design.enemies[i].sprite});
    }
  }
  if (candidates.empty()) throw Error(ErrorKind::InconclusiveProbe, "no entity on screen");

  // Airborne characters ignore horizontal input, so let the player land first.
  sim.set_state(start);
  for (int k = 0; k < kProbeSettleFrames && !design.states[sim.state().player.state].grounded; ++k) {
    sim.step(InputState{});
  }
  const SimState settled = sim.state();

  const InputState branches[3] = {InputState{Button::L}, InputState{Button::R}, InputState{}};
  std::vector<std::vector<double>> displacement(candidates.size());
  for (const auto& in : branches) {
    sim.set_state(settled);
    sim.step(InputState{});  // release everything so the held button is a fresh press
    for (int k = 0; k < kProbeFrames; ++k) sim.step(in);
    const auto& end = sim.state();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const Body& b0 = candidates[c].player ? static_cast<const Body&>(settled.player)
                                            : settled.enemies[candidates[c].index];
      const Body& b1 = candidates[c].player ? static_cast<const Body&>(end.player)
                                            : end.enemies[candidates[c].index];
      displacement[c].push_back(b1.x - b0.x);
    }
  }
  std::size_t best = 0;
  double best_spread = -1.0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const auto [lo, hi] = std::minmax_element(displacement[c].begin(), displacement[c].end());
    const double spread = *hi - *lo;
    if (spread > best_spread) {
      best_spread = spread;
      best = c;
    }
  }
  if (best_spread < 1.0) {
    throw Error(ErrorKind::InconclusiveProbe, "no entity responds differentially to input");
  }
  return candidates[best].signature;
}

bool probe_gravity(const GroundTruthDesign& design, const SimState& start, std::string_view signature) {
  Simulator sim(design, 0);
  SimState s = start;
  Body* body = nullptr;
  int w = 0, h = 0;
  if (s.player.alive && design.states[s.player.state].sprite == signature) {
    body = &s.player;
    w = design.player.w;
    h = design.player.h;
  } else {
    for (std::size_t i = 0; i < s.enemies.size(); ++i) {
      if (s.enemies[i].alive && design.enemies[i].sprite == signature) {
        body = &s.enemies[i];
        w = design.enemies[i].w;
        h = design.enemies[i].h;
        break;
      }
    }
  }
  if (!body) throw Error(ErrorKind::NotFound, "no entity with signature '" + std::string(signature) + "'");

  const int ts = design.tile_size;
  const auto& room = design.rooms[body->room];
  sim.set_state(s);
  std::optional<std::pair<double, double>> spot;
  for (int r = 0; r < room.rows() && !spot; ++r) {
    for (int c = 0; c < room.cols() && !spot; ++c) {
      const double x = room.origin_x + c * ts;
      const double y = room.origin_y + r * ts;
      if (x + w > room.origin_x + room.cols() * ts) continue;
      bool clear = !sim.box_hits_solid(x, y, w, h + ts);
      for (int rr = floor_div(y, ts); clear && rr <= last_cell(y + h, ts); ++rr) {
        for (int cc = floor_div(x, ts); clear && cc <= last_cell(x + w, ts); ++cc) {
          if (sim.tile_at(cc, rr) != 0) clear = false;
        }
      }
      if (clear) spot = {x, y};
    }
  }
  if (!spot) throw Error(ErrorKind::InconclusiveProbe, "no empty-air position in room " + room.name);

  body->x = spot->first;
  body->y = spot->second;
  body->vx = body->vy = 0.0;
  s.prev_input = InputState{};
  sim.set_state(s);
  const bool is_player = body == &s.player;
  const std::size_t enemy_index = is_player ? 0 : static_cast<std::size_t>(static_cast<EnemyBody*>(body) - s.enemies.data());
  for (int k = 0; k < kProbeFrames; ++k) sim.step(InputState{});
  const Body& end = is_player ? static_cast<const Body&>(sim.state().player) : sim.state().enemies[enemy_index];
  return end.y - spot->second > kGravityThreshold;
}

}  // namespace agdl

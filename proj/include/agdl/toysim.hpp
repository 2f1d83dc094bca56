#pragma once

// Deterministic tile platformer with a fully declared design. It generates
// traces, answers active probes and serves as ground truth for evaluation.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "agdl/guard.hpp"
#include "agdl/trace.hpp"

namespace agdl {

struct StateDef {
  std::string name;
  std::string sprite;         // appearance signature emitted while in this state
  double ax = 0.0;            // horizontal acceleration while the axis is held
  double ay = 0.0;            // vertical acceleration (gravity) in this state
  double vmax = 0.0;          // horizontal speed cap
  std::optional<double> impulse;  // vertical velocity set on entry
  bool hold_vx = false;       // keep horizontal momentum when not accelerating
  bool grounded = false;      // requires solid support, otherwise support_lost_state
};

struct TransitionDef {
  std::string from;
  std::vector<Guard> guards;  // conjunction
  std::string to;
};

enum class TileClass { Empty, Solid, Hazard, Pickup, Portal };

std::string_view to_string(TileClass c);
TileClass parse_tile_class(std::string_view s);

struct TileDef {
  TileClass cls = TileClass::Empty;
  int target_room = -1;  // portals only
  double target_x = 0.0;  // world position of the player's top-left after teleport
  double target_y = 0.0;
};

struct RoomDef {
  std::string name;
  int origin_x = 0;  // world pixels, multiple of tile_size
  int origin_y = 0;
  std::vector<std::vector<int>> tiles;  // row-major, row 0 = top

  int rows() const { return static_cast<int>(tiles.size()); }
  int cols() const { return tiles.empty() ? 0 : static_cast<int>(tiles.front().size()); }
};

struct EnemyDef {
  std::string sprite;
  double patrol_speed = 0.0;
  double gravity = 0.0;
  int room = 0;
  double x = 0.0;  // world position
  double y = 0.0;
  int w = 16;
  int h = 16;
};

struct PlayerDef {
  std::string name = "hero";
  int w = 16;
  int h = 24;
  int room = 0;
  double x = 0.0;
  double y = 0.0;
  std::string initial_state;
  std::string support_lost_state;
};

struct GroundTruthDesign {
  std::string game = "toysim";
  int fps = 60;
  int tile_size = 8;
  std::vector<StateDef> states;
  std::vector<TransitionDef> transitions;
  std::map<int, TileDef> tile_catalog;
  std::vector<RoomDef> rooms;
  std::vector<EnemyDef> enemies;
  PlayerDef player;

  // Throws Error(Config) on any invariant violation.
  void validate() const;
  int state_index(std::string_view name) const;  // -1 when unknown
  TileClass tile_class(int id) const;
  std::vector<std::string> player_sprites() const;
};

// Signature the simulator reports as tilemap_sig: a hash of the base layout,
// so collected pickups do not change room identity.
std::string room_signature(const RoomDef& room);

Json to_json(const GroundTruthDesign& d);
GroundTruthDesign design_from_json(const Json& j);
GroundTruthDesign load_design(const std::filesystem::path& path);
void save_design(const GroundTruthDesign& d, const std::filesystem::path& path);

// Four rooms: three side by side, the fourth reachable only by portal.
GroundTruthDesign default_design();
// One walled room with a single patrolling enemy.
GroundTruthDesign arena_design();
// Same design with ascent / descent gravity replaced; the game id gains a
// "/gravity:UP:DOWN" suffix.
GroundTruthDesign with_gravity(GroundTruthDesign d, double ascent, double descent);

struct Body {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  int room = 0;
  bool alive = true;
  int facing = 1;

  friend bool operator==(const Body&, const Body&) = default;
};

struct PlayerBody : Body {
  int state = 0;

  friend bool operator==(const PlayerBody&, const PlayerBody&) = default;
};

struct EnemyBody : Body {
  int delay = 0;  // frames before the patrol starts

  friend bool operator==(const EnemyBody&, const EnemyBody&) = default;
};

struct Contact {
  std::string cls;  // tile class name
  Direction dir = Direction::Down;
  friend auto operator<=>(const Contact&, const Contact&) = default;
};

enum class PendingKind { None, Respawn, Teleport };

struct SimState {
  std::int64_t frame = 0;  // index of the next frame to emit
  PlayerBody player;
  std::vector<EnemyBody> enemies;
  InputState prev_input;
  std::set<Contact> prev_contacts;
  std::set<std::tuple<int, int, int>> collected;       // (room, col, row)
  std::set<std::tuple<int, int, int>> pending_collect;
  PendingKind pending = PendingKind::None;
  int pending_room = 0;
  double pending_x = 0.0;
  double pending_y = 0.0;

  friend bool operator==(const SimState&, const SimState&) = default;
};

Json to_json(const SimState& s);
SimState sim_state_from_json(const Json& j);

class Simulator {
 public:
  // seed only shifts enemy patrol phases.
  Simulator(GroundTruthDesign design, std::uint64_t seed);

  const GroundTruthDesign& design() const { return design_; }
  const SimState& state() const { return state_; }
  void set_state(SimState s) { state_ = std::move(s); }
  TraceHeader header() const;

  Frame step(const InputState& input);

  int room_at(double wx, double wy) const;  // -1 outside every room
  int tile_at(int gcol, int grow) const;    // global tile coords; -1 outside rooms
  bool solid_at(int gcol, int grow) const;
  bool box_hits_solid(double x, double y, int w, int h) const;

 private:
  void move_and_resolve(Body& b, int w, int h, bool& hit_x, bool& hit_y) const;
  std::set<Contact> contacts(const Body& b, int w, int h) const;
  void step_enemies();
  Frame emit(const InputState& input) const;

  GroundTruthDesign design_;
  SimState state_;
};

Trace simulate(const GroundTruthDesign& design, std::span<const InputState> inputs, std::uint64_t seed);

// Simulates base_inputs[0, cut) followed by suffix.
Trace branch_prefix(const GroundTruthDesign& design, std::span<const InputState> base_inputs,
                    std::size_t cut, std::span<const InputState> suffix, std::uint64_t seed);

inline constexpr int kProbeFrames = 16;
inline constexpr int kProbeSettleFrames = 120;
inline constexpr double kGravityThreshold = 2.0;

// Holds L, holds R and idles for kProbeFrames from start; returns the
// signature of the entity whose horizontal displacement differs most.
std::string probe_player_identity(const GroundTruthDesign& design, const SimState& start);

// Moves the entity with this signature into empty air and reports whether it
// falls more than kGravityThreshold pixels within kProbeFrames.
bool probe_gravity(const GroundTruthDesign& design, const SimState& start, std::string_view signature);

}  // namespace agdl

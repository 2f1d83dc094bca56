#pragma once

// Contact events between tracked entities and tiles, and the cause/effect
// rules mined from them.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "agdl/guard.hpp"
#include "agdl/trace.hpp"
#include "agdl/tracker.hpp"

namespace agdl {

struct CollisionEvent {
  std::int64_t frame = 0;
  int track = 0;
  int other_track = -1;  // -1 for tile contacts
  int tile_id = -1;      // -1 for entity contacts
  std::vector<std::pair<int, int>> cells;  // world (col, row) of touched cells of tile_id
  Direction dir = Direction::Down;         // side of the track where the contact is
  double depth = 0.0;                      // 0 for flush contact

  friend bool operator==(const CollisionEvent&, const CollisionEvent&) = default;
};

std::string tile_class_label(int tile_id);           // "tile:N"
std::string entity_class_label(const std::string& label);  // "entity:<label>"

// One event per contact onset, for every (track, class, direction). Contacts
// already present on a track's first frame are not onsets. Entity overlaps
// produce one event for each participant.
std::vector<CollisionEvent> detect_events(const Trace& trace, const std::vector<EntityTrack>& tracks);

enum class EffectKind { StopX, StopY, DespawnOther, DespawnSelf, StateTransition, Teleport };

struct Effect {
  EffectKind kind = EffectKind::StopX;
  std::string from;  // StateTransition only
  std::string to;

  friend bool operator==(const Effect&, const Effect&) = default;
  friend auto operator<=>(const Effect&, const Effect&) = default;
};

// "stop-x", "stop-y", "despawn(other)", "despawn(self)", "state-transition(a,b)", "teleport".
std::string to_string(const Effect& e);
Effect parse_effect(std::string_view text);

struct CollisionRule {
  std::string subject;               // class of the track the event belongs to
  std::string other;                 // entity or tile class
  std::optional<Direction> direction;  // empty: any direction
  Effect effect;
  int support = 0;                   // cause occurrences followed by the effect
  int occurrences = 0;               // cause occurrences
  double precision = 0.0;            // support / occurrences

  friend bool operator==(const CollisionRule&, const CollisionRule&) = default;
};

// Per track: frame -> state name, for state-transition effects.
using StateTimeline = std::map<int, std::map<std::int64_t, std::string>>;

struct MiningConfig {
  int window = 3;
  double min_precision = 0.9;
  int min_support = 2;
  double generalize_slack = 0.02;
  double jump_px = 0.0;  // teleport distance; 0 means 4 tiles
};

// Class label of the other participant ("tile:N" or "entity:<label>").
std::string other_class(const CollisionEvent& e, const std::vector<EntityTrack>& tracks,
                        const CharacterClasses& classes);

// Effects observed for the event's track within [frame, frame + window].
std::set<Effect> observed_effects(const CollisionEvent& e, const Trace& trace,
                                  const std::vector<EntityTrack>& tracks, const CharacterClasses& classes,
                                  const StateTimeline* states, const MiningConfig& config);

// One cause occurrence with its observed effects; the unit rules are mined from.
struct CauseObservation {
  std::string subject;
  std::string other;
  Direction direction = Direction::Down;
  std::set<Effect> effects;
};

std::vector<CauseObservation> observe(const std::vector<CollisionEvent>& events, const Trace& trace,
                                      const std::vector<EntityTrack>& tracks, const CharacterClasses& classes,
                                      const StateTimeline* states, const MiningConfig& config = {});

// Rules ordered by (subject, other, direction with "any" first, effect).
std::vector<CollisionRule> mine_rules(const std::vector<CauseObservation>& observations,
                                      const MiningConfig& config = {});

std::vector<CollisionRule> mine_rules(const std::vector<CollisionEvent>& events, const Trace& trace,
                                      const std::vector<EntityTrack>& tracks, const CharacterClasses& classes,
                                      const StateTimeline* states, const MiningConfig& config = {});

// Tile ids with a stop-x or stop-y rule.
std::set<int> solid_tiles(const std::vector<CollisionRule>& rules);

// Cause occurrence counts keyed by (subject class, other class).
std::map<std::pair<std::string, std::string>, int> touch_counts(
    const std::vector<CauseObservation>& observations);

}  // namespace agdl

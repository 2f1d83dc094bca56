#pragma once

// Character states clustered from motion segments, and guarded transitions
// induced between them.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "agdl/collision.hpp"
#include "agdl/guard.hpp"
#include "agdl/physics.hpp"
#include "agdl/trace.hpp"

namespace agdl {

struct CharacterState {
  int id = 0;
  std::string name;
  double ax = 0.0;     // mean |ax| of members
  double ay = 0.0;
  double sat_x = 0.0;  // fraction of members with a velocity cap
  double sat_y = 0.0;
  std::set<std::string> animations;
  std::vector<std::size_t> members;  // indices into the clustered segment list

  friend bool operator==(const CharacterState&, const CharacterState&) = default;
};

struct Transition {
  std::string from;
  std::string to;
  std::vector<Guard> guards;  // empty never; a single timeout guard when nothing explains it
  int support = 0;
  double precision = 0.0;
  int observed = 0;           // changepoints assigned to this transition
  bool low_confidence = false;

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct FsmModel {
  std::string character_class;
  std::set<std::string> signatures;
  std::vector<CharacterState> states;
  std::vector<Transition> transitions;

  int state_index(const std::string& name) const;  // -1 when absent

  friend bool operator==(const FsmModel&, const FsmModel&) = default;
};

struct FsmConfig {
  double epsilon = 0.1;
  int window = 3;
  double min_precision = 0.9;
  int min_support = 2;
};

// Agglomerative complete-linkage clustering over normalized (|ax|, ay, sat_x,
// sat_y). Clusters merge only below epsilon and with overlapping animation sets.
// States are numbered by their earliest member segment.
std::vector<CharacterState> cluster_states(const std::vector<MotionSegment>& segments, double epsilon = 0.1);

// Everything transition induction needs from one track.
struct TrackHistory {
  std::map<std::int64_t, int> state;                   // frame -> state id
  std::map<std::int64_t, std::vector<Guard>> conditions;  // frame -> conditions occurring there
  std::vector<std::tuple<std::int64_t, int, int>> changes;  // (first frame of new state, from, to)
};

// segment_states[k] is the state of segments[k]; only segments of `track` are used.
// Collision events are turned into guards with `collision_label`.
TrackHistory build_history(const Trace& trace, const EntityTrack& track,
                           const std::vector<MotionSegment>& segments, const std::vector<int>& segment_states,
                           const std::vector<std::pair<std::int64_t, Guard>>& collisions);

FsmModel induce_transitions(const std::vector<CharacterState>& states, const std::vector<TrackHistory>& histories,
                            const FsmConfig& config = {});

struct FsmMatch {
  std::vector<int> mapping;  // learned state index -> truth state index or -1
  int true_positives = 0;
  double f1 = 0.0;
};

// Exhaustive over injective mappings; throws Error(TooLarge) above 8 states.
FsmMatch match_fsm(const FsmModel& learned, const FsmModel& truth);

}  // namespace agdl

#pragma once

// End-to-end learner: tracker, physics, collision, fsm and linking stages
// composed into a DesignModel, plus evaluation against a known design.

#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "agdl/collision.hpp"
#include "agdl/fsm.hpp"
#include "agdl/linking.hpp"
#include "agdl/physics.hpp"
#include "agdl/toysim.hpp"
#include "agdl/trace.hpp"
#include "agdl/tracker.hpp"

namespace agdl {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kModelSchema = "agdl-design-model";
inline constexpr int kModelVersion = 1;

struct LearnerConfig {
  TrackerConfig tracker;
  SegmentConfig physics;
  FsmConfig fsm;
  MiningConfig collision;
  double jump_tiles = 4.0;  // room-link discontinuity threshold
};

// Nested object with every field; the canonical form the digest is taken over.
Json to_json(const LearnerConfig& c);
// Unknown keys and wrong types are Error(Config). Missing keys keep defaults.
LearnerConfig config_from_json(const Json& j, LearnerConfig base = {});
// "fsm.epsilon=0.2" style override applied on top of `c`.
void apply_override(LearnerConfig& c, std::string_view assignment);
std::string config_digest(const LearnerConfig& c);

struct TraceProvenance {
  std::string id;  // digest of the serialized trace
  std::string source;
  std::string game;
  std::int64_t frames = 0;
  int player_track = -1;

  friend bool operator==(const TraceProvenance&, const TraceProvenance&) = default;
};

struct CharacterModel {
  std::string label;  // smallest appearance signature of the class
  FsmModel fsm;
  std::vector<MotionSegment> segments;  // state members index into this list
  std::vector<int> segment_trace;       // trace index of each segment

  friend bool operator==(const CharacterModel&, const CharacterModel&) = default;
};

struct TouchCount {
  std::string subject;
  std::string other;
  int count = 0;

  friend bool operator==(const TouchCount&, const TouchCount&) = default;
};

struct DesignModel {
  std::vector<TraceProvenance> traces;
  std::string config_digest;
  std::string tool_version;
  std::string game;
  std::string player_class;  // label of the player's character class
  std::vector<CharacterModel> characters;
  std::vector<CollisionRule> rules;
  std::vector<TouchCount> touch_counts;
  std::vector<int> solid_tiles;
  RoomGraph rooms;
  std::optional<JumpMetrics> jump;
  Json extensions = Json::object();

  const CharacterModel* character(std::string_view label) const;

  friend bool operator==(const DesignModel&, const DesignModel&) = default;
};

Json to_json(const DesignModel& m);
DesignModel model_from_json(const Json& j);
std::string serialize_model(const DesignModel& m);  // pretty JSON with trailing newline
DesignModel read_model(const std::filesystem::path& path);
void write_model(const DesignModel& m, const std::filesystem::path& path);

// Throws Error(Argument) for no traces; stage failures carry a "[stage]" prefix.
DesignModel learn(const std::vector<Trace>& traces, const LearnerConfig& config = {});

// Guard and transition model of a design, in the learner's vocabulary.
FsmModel truth_fsm(const GroundTruthDesign& design);

// Learned tile-class labels ("tile:3") replaced by catalog class names.
FsmModel translate_guards(const FsmModel& learned, const GroundTruthDesign& design);

struct StateError {
  std::string learned;
  std::string truth;
  double ax = 0.0;
  double ay = 0.0;
};

struct Evaluation {
  bool player_correct = false;
  int state_count_delta = 0;
  double transition_f1 = 0.0;
  std::vector<std::pair<std::string, std::string>> state_mapping;  // learned -> truth
  std::vector<StateError> state_errors;
  double max_param_error = 0.0;
  std::vector<int> touched_tiles;
  double solidity_precision = 1.0;
  double solidity_recall = 1.0;
  bool pickup_despawn = false;
  bool rooms_isomorphic = false;
  int rooms_learned = 0;
  int rooms_truth = 0;
  bool corpus_matches = false;
};

Evaluation evaluate(const DesignModel& model, const GroundTruthDesign& truth, int min_touches = 2);
Json to_json(const Evaluation& e);

}  // namespace agdl

#pragma once

// Sprite grouping and multi-frame tracking of entity observations.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "agdl/trace.hpp"

namespace agdl {

struct TrackerConfig {
  double r_max_tiles = 2.0;  // max displacement per frame, in tiles
  int gap_limit = 8;         // frames an identity survives without observations
  int group_persistence = 4; // prior frames with a stable offset before sprites merge
  int mi_lag = 4;            // input-to-motion lag window for player identification
};

struct TrackSample {
  double x = 0.0;
  double y = 0.0;
  int w = 1;
  int h = 1;
  std::string signature;

  friend bool operator==(const TrackSample&, const TrackSample&) = default;
};

struct EntityTrack {
  int id = 0;
  std::set<std::string> signatures;
  std::map<std::int64_t, TrackSample> samples;
  std::vector<std::pair<std::int64_t, std::int64_t>> gaps;  // [begin, end) frames without samples

  std::int64_t first_frame() const { return samples.begin()->first; }
  std::int64_t last_frame() const { return samples.rbegin()->first; }

  friend bool operator==(const EntityTrack&, const EntityTrack&) = default;
};

// Merges hardware-sprite sized observations that move together into one
// character-sized observation. Stateful: offsets must persist across frames.
class SpriteGrouper {
 public:
  // Only parts no larger than one hardware sprite (tile_size square) are merged.
  explicit SpriteGrouper(int persistence = 4, int tile_size = 8)
      : persistence_(persistence), tile_size_(tile_size) {}

  std::vector<EntityObservation> group(const Frame& frame);

 private:
  using PairKey = std::tuple<std::string, std::string, long, long>;
  int persistence_;
  int tile_size_;
  std::map<PairKey, int> seen_;
};

std::vector<EntityTrack> track(const Trace& trace, const TrackerConfig& config = {});

// Empirical mutual information (nats) between the horizontal input axis and
// the sign of the track's horizontal velocity, maximised over lags 0..lag_window.
double input_motion_information(const EntityTrack& track, const Trace& trace, int lag_window);

// Throws Error(InsufficientSignal) when the horizontal input never varies.
int identify_player(const std::vector<EntityTrack>& tracks, const Trace& trace,
                    const TrackerConfig& config = {});

// Character classes: tracks whose signature sets overlap (transitively) share a class.
struct CharacterClasses {
  std::vector<std::set<std::string>> members;  // signature sets, ordered by label
  std::vector<std::string> labels;             // smallest signature of each class

  int find(const std::string& signature) const;  // -1 when unknown
  int of(const EntityTrack& t) const { return find(*t.signatures.begin()); }
};

CharacterClasses character_classes(const std::vector<const EntityTrack*>& tracks);

}  // namespace agdl

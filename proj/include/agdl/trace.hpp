#pragma once

// Observation data model and the agdl-trace v1 JSON Lines format.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace agdl {

using Json = nlohmann::ordered_json;

enum class Button : std::uint8_t { L, R, U, D, A, B, Start, Select };

inline constexpr std::array<std::string_view, 8> kButtonNames = {
    "L", "R", "U", "D", "A", "B", "Start", "Select"};

std::optional<Button> parse_button(std::string_view name);
std::string_view button_name(Button b);

// Set of held buttons. Backed by a bitmask so duplicates cannot exist.
class InputState {
 public:
  InputState() = default;
  InputState(std::initializer_list<Button> buttons);

  bool held(Button b) const { return (mask_ >> static_cast<unsigned>(b)) & 1u; }
  void press(Button b) { mask_ |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(b)); }
  void release(Button b) { mask_ &= static_cast<std::uint8_t>(~(1u << static_cast<unsigned>(b))); }
  bool empty() const { return mask_ == 0; }
  std::uint8_t mask() const { return mask_; }

  // Horizontal axis: R = +1, L = -1, both or neither = 0.
  int horizontal() const { return (held(Button::R) ? 1 : 0) - (held(Button::L) ? 1 : 0); }

  // Canonical button order (L R U D A B Start Select).
  std::vector<std::string> names() const;

  friend bool operator==(const InputState&, const InputState&) = default;

 private:
  std::uint8_t mask_ = 0;
};

struct EntityObservation {
  std::string signature;
  double x = 0.0;  // world coordinates, top-left
  double y = 0.0;
  int w = 1;
  int h = 1;
  bool hflip = false;
  bool vflip = false;

  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double center_x() const { return x + 0.5 * w; }
  double center_y() const { return y + 0.5 * h; }

  friend bool operator==(const EntityObservation&, const EntityObservation&) = default;
};

struct TileCell {
  int col = 0;  // relative to the camera, in tiles
  int row = 0;
  int id = 0;

  friend bool operator==(const TileCell&, const TileCell&) = default;
};

struct Frame {
  std::int64_t index = 0;
  double cam_x = 0.0;
  double cam_y = 0.0;
  InputState input;
  std::vector<EntityObservation> entities;
  std::string tilemap_sig;
  std::optional<std::vector<TileCell>> tiles;

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct TraceHeader {
  int fps = 60;
  std::string source;
  int tile_size = 8;
  Json meta = Json::object();

  // meta.game when present, otherwise the source label.
  std::string game_id() const;

  friend bool operator==(const TraceHeader&, const TraceHeader&) = default;
};

struct Trace {
  TraceHeader header;
  std::vector<Frame> frames;

  friend bool operator==(const Trace&, const Trace&) = default;
};

inline constexpr std::string_view kTraceFormat = "agdl-trace";
inline constexpr int kTraceVersion = 1;

// Throws Error(Integrity) when a type invariant is violated.
void validate(const Trace& trace);

Trace parse_trace(std::istream& in);
void serialize_trace(const Trace& trace, std::ostream& out);
std::string serialize_trace(const Trace& trace);

Trace read_trace(const std::filesystem::path& path);
void write_trace(const Trace& trace, const std::filesystem::path& path);

Json frame_to_json(const Frame& frame);
Frame frame_from_json(const Json& j);

}  // namespace agdl

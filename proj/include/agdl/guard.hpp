#pragma once

// Transition guard language shared by the simulator's ground truth and the
// learned state machines.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agdl {

enum class GuardKind { Pressed, Released, Collision, VelocityZero, Timeout };

// Direction of a contact, as seen from the first participant.
enum class Direction { Up, Down, Left, Right };

std::string_view to_string(Direction d);
std::optional<Direction> parse_direction(std::string_view s);
Direction opposite(Direction d);

// Input channel name for the horizontal axis (L or R held).
inline constexpr std::string_view kAxisChannel = "X";

struct Guard {
  GuardKind kind = GuardKind::Timeout;
  // Pressed/Released: a button name or the axis channel "X".
  // Collision: a class label ("tile:3", "entity:goomba" or a catalog class such as "solid").
  // VelocityZero: "x" or "y".
  std::string subject;
  Direction direction = Direction::Down;  // Collision only

  static Guard pressed(std::string b) { return {GuardKind::Pressed, std::move(b), Direction::Down}; }
  static Guard released(std::string b) { return {GuardKind::Released, std::move(b), Direction::Down}; }
  static Guard collision(std::string cls, Direction d) { return {GuardKind::Collision, std::move(cls), d}; }
  static Guard velocity_zero(std::string axis) { return {GuardKind::VelocityZero, std::move(axis), Direction::Down}; }
  static Guard timeout() { return {}; }

  friend bool operator==(const Guard& a, const Guard& b) {
    if (a.kind != b.kind || a.subject != b.subject) return false;
    return a.kind != GuardKind::Collision || a.direction == b.direction;
  }
  // Orders by kind first: input edges sort before collisions and physics events.
  friend bool operator<(const Guard& a, const Guard& b);
};

// "pressed(A)", "released(X)", "collision(tile:1,down)", "velocity-zero(y)", "timeout".
std::string to_string(const Guard& g);
Guard parse_guard(std::string_view text);

std::string to_string(const std::vector<Guard>& guards);

}  // namespace agdl

#include "agdl/guard.hpp"

#include <tuple>

#include "agdl/error.hpp"

namespace agdl {

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Up: return "up";
    case Direction::Down: return "down";
    case Direction::Left: return "left";
    case Direction::Right: return "right";
  }
  return "down";
}

std::optional<Direction> parse_direction(std::string_view s) {
  if (s == "up") return Direction::Up;
  if (s == "down") return Direction::Down;
  if (s == "left") return Direction::Left;
  if (s == "right") return Direction::Right;
  return std::nullopt;
}

Direction opposite(Direction d) {
  switch (d) {
    case Direction::Up: return Direction::Down;
    case Direction::Down: return Direction::Up;
    case Direction::Left: return Direction::Right;
    case Direction::Right: return Direction::Left;
  }
  return d;
}

bool operator<(const Guard& a, const Guard& b) {
  const int da = a.kind == GuardKind::Collision ? static_cast<int>(a.direction) : -1;
  const int db = b.kind == GuardKind::Collision ? static_cast<int>(b.direction) : -1;
  return std::tie(a.kind, a.subject, da) < std::tie(b.kind, b.subject, db);
}

std::string to_string(const Guard& g) {
  switch (g.kind) {
    case GuardKind::Pressed: return "pressed(" + g.subject + ")";
    case GuardKind::Released: return "released(" + g.subject + ")";
    case GuardKind::Collision:
      return "collision(" + g.subject + "," + std::string(to_string(g.direction)) + ")";
    case GuardKind::VelocityZero: return "velocity-zero(" + g.subject + ")";
    case GuardKind::Timeout: return "timeout";
  }
  return "timeout";
}

Guard parse_guard(std::string_view text) {
  if (text == "timeout") return Guard::timeout();
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') {
    throw Error(ErrorKind::Parse, "malformed guard '" + std::string(text) + "'");
  }
  const std::string_view head = text.substr(0, open);
  const std::string_view arg = text.substr(open + 1, text.size() - open - 2);
  if (head == "pressed") return Guard::pressed(std::string(arg));
  if (head == "released") return Guard::released(std::string(arg));
  if (head == "velocity-zero") {
    if (arg != "x" && arg != "y") throw Error(ErrorKind::Parse, "velocity-zero axis must be x or y");
    return Guard::velocity_zero(std::string(arg));
  }
  if (head == "collision") {
    const auto comma = arg.rfind(',');
    if (comma == std::string_view::npos) throw Error(ErrorKind::Parse, "collision guard needs a direction");
    auto dir = parse_direction(arg.substr(comma + 1));
    if (!dir) throw Error(ErrorKind::Parse, "bad direction in '" + std::string(text) + "'");
    return Guard::collision(std::string(arg.substr(0, comma)), *dir);
  }
  throw Error(ErrorKind::Parse, "unknown guard '" + std::string(text) + "'");
}

std::string to_string(const std::vector<Guard>& guards) {
  std::string out;
  for (std::size_t i = 0; i < guards.size(); ++i) {
    if (i) out += " & ";
    out += to_string(guards[i]);
  }
  return out;
}

}  // namespace agdl

#include "agdl/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "agdl/error.hpp"

namespace agdl {

std::vector<InputState> parse_input_script(std::istream& in) {
  std::vector<InputState> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream tokens(line);
    InputState state;
    std::string tok;
    while (tokens >> tok) {
      auto b = parse_button(tok);
      if (!b) {
        throw Error(ErrorKind::Parse, "input script line " + std::to_string(line_no) +
                                          ": unknown button '" + tok + "'");
      }
      state.press(*b);
    }
    out.push_back(state);
  }
  return out;
}

std::vector<InputState> read_input_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open input script " + path.string());
  return parse_input_script(in);
}

void write_input_script(std::span<const InputState> inputs, std::ostream& out) {
  for (const auto& in : inputs) {
    const auto names = in.names();
    for (std::size_t i = 0; i < names.size(); ++i) out << (i ? " " : "") << names[i];
    out << '\n';
  }
}

std::vector<InputState> random_walk_inputs(std::uint64_t seed, std::size_t frames) {
  // Raw engine output only: distributions are not portable across standard libraries.
  std::mt19937_64 rng(seed);
  std::vector<InputState> out;
  out.reserve(frames);
  while (out.size() < frames) {
    const std::size_t len = 4 + rng() % 27;
    const auto dir = rng() % 3;
    const bool jump = rng() % 10 < 3;
    const std::size_t jump_len = 1 + rng() % 8;
    // A neutral first frame makes every chunk's direction a fresh press; the
    // jump sits at the chunk end so landing is followed by a new press.
    for (std::size_t k = 0; k < len && out.size() < frames; ++k) {
      InputState in;
      if (k > 0 && dir == 1) in.press(Button::R);
      if (k > 0 && dir == 2) in.press(Button::L);
      if (jump && k > 0 && k + jump_len >= len) in.press(Button::A);
      out.push_back(in);
    }
  }
  return out;
}

std::vector<InputState> resolve_inputs(std::string_view spec) {
  if (spec.starts_with("random:")) {
    const std::string rest(spec.substr(7));
    const auto colon = rest.find(':');
    if (colon == std::string::npos) throw Error(ErrorKind::Argument, "expected random:<seed>:<n>");
    try {
      const auto seed = std::stoull(rest.substr(0, colon));
      const auto n = std::stoull(rest.substr(colon + 1));
      if (n == 0) throw Error(ErrorKind::Argument, "random input length must be positive");
      return random_walk_inputs(seed, n);
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::Argument, "expected random:<seed>:<n>, got '" + std::string(spec) + "'");
    }
  }
  if (spec.starts_with("script:")) return read_input_script(std::string(spec.substr(7)));
  return read_input_script(std::string(spec));
}

namespace {

// Drives the simulator frame by frame so that scripted playthroughs can react
// to the character's position. The recorded inputs replay the same run.
class Autopilot {
 public:
  explicit Autopilot(const GroundTruthDesign& design) : sim_(design, 0), design_(&design) {}

  const PlayerBody& player() const { return sim_.state().player; }
  const std::string& state_name() const { return design_->states[player().state].name; }
  std::size_t frames() const { return inputs_.size(); }

  void hold(InputState in, int n) {
    for (int k = 0; k < n; ++k) step(in);
  }

  // Holds `in` until pred holds (checked after each frame) or the cap is reached.
  void hold_until(InputState in, const std::function<bool()>& pred, int cap = 600) {
    for (int k = 0; k < cap && !pred(); ++k) step(in);
  }

  void settle(int idle_frames = 20) {
    hold_until(InputState{}, [&] { return state_name() == "idle"; });
    hold(InputState{}, idle_frames);
  }

  void jump_in_place() {
    hold(InputState{Button::A}, 4);
    settle();
  }

  void run(Button dir, int n) {
    hold(InputState{dir}, n);
    settle();
  }

  void run_jump(Button dir, int run_frames) {
    hold(InputState{dir}, run_frames);
    hold(InputState{dir, Button::A}, 4);
    hold_until(InputState{dir}, [&] { return player().vy > 0.0; });
    settle();
  }

  // Runs flush against a wall and releases. A run away from the wall
  // first is chosen by lookahead so that the last step is a whole step: a
  // clipped or blocked step would read as a spurious motion segment.
  void bump(Button dir) {
    const Button away = dir == Button::L ? Button::R : Button::L;
    for (int prep = 0; prep <= kMaxBumpPrep; prep = std::max(prep + 1, kMinBumpPrep)) {
      Autopilot trial = *this;
      if (prep > 0) trial.run(away, prep);
      if (trial.raw_bump(dir)) {
        *this = std::move(trial);
        settle();
        return;
      }
    }
    raw_bump(dir);
    settle();
  }

  // Runs toward target_x (player left edge); releases once it is passed.
  void run_to(double target_x, int cap = 1200) {
    const Button dir = player().x < target_x ? Button::R : Button::L;
    if (dir == Button::R) {
      hold_until(InputState{dir}, [&] { return player().x >= target_x; }, cap);
    } else {
      hold_until(InputState{dir}, [&] { return player().x <= target_x; }, cap);
    }
    settle(10);
  }

  void run_until_room(Button dir, int room) {
    hold_until(InputState{dir}, [&] { return player().room == room; });
    settle(10);
  }

  // Keeps running and jumps as soon as the left edge crosses takeoff_x.
  void run_and_hop(Button dir, double takeoff_x) {
    if (dir == Button::R) {
      hold_until(InputState{dir}, [&] { return player().x >= takeoff_x; });
    } else {
      hold_until(InputState{dir}, [&] { return player().x <= takeoff_x; });
    }
    hold(InputState{dir, Button::A}, 4);
    hold_until(InputState{dir}, [&] { return state_name() == "idle"; });
    settle(10);
  }

  std::vector<InputState> finish(std::size_t frames) {
    while (inputs_.size() < frames) step(InputState{});
    inputs_.resize(frames);
    return inputs_;
  }
  std::vector<InputState> finish() { return inputs_; }

 private:
  void step(InputState in) {
    inputs_.push_back(in);
    sim_.step(in);
  }

  Simulator sim_;
  // Preparatory runs reach the speed cap so they read as ordinary capped runs.
  static constexpr int kMinBumpPrep = 24;
  static constexpr int kMaxBumpPrep = 80;

  // Holds dir until the next step would be blocked, then releases; true when
  // the motion kept a constant second difference up to the flush frame.
  bool raw_bump(Button dir) {
    std::vector<double> xs{player().x};
    for (int k = 0; k < 600; ++k) {
      step(InputState{dir});
      xs.push_back(player().x);
      Autopilot peek = *this;
      peek.step(InputState{dir});
      if (peek.player().x != player().x) continue;
      const std::size_t n = xs.size();
      if (n < 4) return false;
      const double last = xs[n - 1] - 2 * xs[n - 2] + xs[n - 3];
      const double before = xs[n - 2] - 2 * xs[n - 3] + xs[n - 4];
      return std::abs(last - before) < 1e-9;
    }
    return false;
  }

  const GroundTruthDesign* design_;
  std::vector<InputState> inputs_;
};

}  // namespace

std::vector<InputState> coverage_inputs(const GroundTruthDesign& design, std::size_t frames) {
  Autopilot ap(design);
  ap.hold(InputState{}, 20);
  int k = 0;
  while (ap.frames() + 260 < frames) {
    const Button dir = ap.player().x < 90.0 ? Button::R : Button::L;
    switch (k++ % 4) {
      case 0: ap.jump_in_place(); break;
      case 1: ap.run(dir, 30); break;
      case 2: ap.run_jump(dir, 20); break;
      case 3: ap.bump(Button::L); break;
    }
  }
  return ap.finish(frames);
}

std::vector<InputState> no_jump_inputs(const GroundTruthDesign& design, std::size_t frames) {
  Autopilot ap(design);
  ap.hold(InputState{}, 20);
  while (ap.frames() + 80 < frames) {
    const Button dir = ap.player().x < 90.0 ? Button::R : Button::L;
    ap.run(dir, 30);
  }
  return ap.finish(frames);
}

std::vector<InputState> jump_in_place_inputs(const GroundTruthDesign& design, int jumps) {
  Autopilot ap(design);
  ap.hold(InputState{}, 20);
  ap.run(Button::R, 12);
  ap.run(Button::L, 12);
  for (int i = 0; i < jumps; ++i) ap.jump_in_place();
  return ap.finish();
}

std::vector<InputState> walkthrough_inputs(const GroundTruthDesign& design) {
  Autopilot ap(design);
  ap.hold(InputState{}, 10);
  // start -> middle -> start
  ap.run_to(300.0);
  ap.run_to(200.0);
  // start -> middle, over the spike, -> end
  ap.run_and_hop(Button::R, 394.0);
  ap.run_to(560.0);
  // end -> middle and back
  ap.run_to(480.0);
  ap.run_to(560.0);
  // into the portal, then through the secret room's portal back to start
  ap.run_until_room(Button::R, 3);
  ap.run_until_room(Button::R, 0);
  ap.run_to(80.0);
  return ap.finish();
}

}  // namespace agdl

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "agdl/error.hpp"
#include "agdl/toysim.hpp"
#include "agdl/trace.hpp"
#include "support.hpp"

using namespace agdl;
using agdl::testing::data_dir;

namespace {

ErrorKind kind_of(const std::filesystem::path& p) {
  try {
    read_trace(p);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error reading " << p);
  return ErrorKind::Parse;
}

std::string message_of(const std::filesystem::path& p) {
  try {
    read_trace(p);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("three well-formed frames parse with consecutive indices") {
  const Trace t = read_trace(data_dir() / "three_frames.jsonl");
  REQUIRE(t.frames.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(t.frames[i].index == static_cast<std::int64_t>(i));
  CHECK(t.header.game_id() == "handmade");
  CHECK(t.frames[0].entities.at(0).x == 12.5);
  CHECK(t.frames[1].input.held(Button::R));
  CHECK_FALSE(t.frames[1].input.held(Button::A));
  CHECK(t.frames[2].input == InputState{Button::R, Button::A});
  CHECK(t.frames[1].entities.at(1).hflip);
  CHECK(t.frames[0].tiles.has_value());
  CHECK_FALSE(t.frames[1].tiles.has_value());
}

TEST_CASE("a jump in frame indices is an integrity error naming the line") {
  CHECK(kind_of(data_dir() / "bad_index.jsonl") == ErrorKind::Integrity);
  CHECK(message_of(data_dir() / "bad_index.jsonl").find("line 3") != std::string::npos);
}

TEST_CASE("version mismatch and malformed lines are reported") {
  CHECK(kind_of(data_dir() / "bad_version.jsonl") == ErrorKind::UnsupportedVersion);
  CHECK(kind_of(data_dir() / "malformed.jsonl") == ErrorKind::Parse);
  CHECK(message_of(data_dir() / "malformed.jsonl").find("line 3") != std::string::npos);
  CHECK(kind_of(data_dir() / "does_not_exist.jsonl") == ErrorKind::Io);
}

TEST_CASE("one empty frame serializes to exactly two lines") {
  Trace t;
  t.header.source = "x";
  Frame f;
  f.tilemap_sig = "s";
  t.frames.push_back(f);
  const std::string text = serialize_trace(t);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}

TEST_CASE("real-valued positions survive a round trip exactly") {
  Trace t = read_trace(data_dir() / "three_frames.jsonl");
  for (double v : {12.5, 0.1, 1.0 / 3.0, -7.25e-3, 123456.789}) {
    t.frames[0].entities[0].x = v;
    std::istringstream in(serialize_trace(t));
    CHECK(parse_trace(in).frames[0].entities[0].x == v);
  }
}

TEST_CASE("read after write is the identity on every fixture") {
  const auto dir = std::filesystem::temp_directory_path() / "agdl_trace_roundtrip";
  std::filesystem::create_directories(dir);
  std::vector<Trace> traces = {testing::coverage_trace(), testing::walkthrough_trace(),
                               testing::random_trace(arena_design(), 5, 300)};
  for (const char* name : {"three_frames.jsonl", "one_empty_frame.jsonl"}) traces.push_back(read_trace(data_dir() / name));
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto p = dir / ("t" + std::to_string(i) + ".jsonl");
    write_trace(traces[i], p);
    CHECK(read_trace(p) == traces[i]);
  }
  // The serialized text of a fixture file is reproduced byte for byte.
  std::ifstream in(data_dir() / "three_frames.jsonl");
  std::stringstream original;
  original << in.rdbuf();
  CHECK(serialize_trace(read_trace(data_dir() / "three_frames.jsonl")) == original.str());
}

TEST_CASE("simulated trace entities match the simulator's bodies") {
  const auto d = default_design();
  Simulator sim(d, 0);
  Trace t;
  t.header = sim.header();
  std::vector<std::pair<double, double>> bodies;
  std::uint64_t s = 11;
  for (int i = 0; i < 600; ++i) {
    s = s * 6364136223846793005ull + 1442695040888963407ull;
    InputState in;
    if ((s >> 33) % 3 == 0) in.press(Button::R);
    if ((s >> 40) % 7 == 0) in.press(Button::A);
    t.frames.push_back(sim.step(in));
    bodies.emplace_back(sim.state().player.x, sim.state().player.y);
  }
  const auto path = std::filesystem::temp_directory_path() / "agdl_trace_emit.jsonl";
  write_trace(t, path);
  const Trace back = read_trace(path);
  REQUIRE(back.frames.size() == 600);
  const auto sprites = d.player_sprites();
  for (std::size_t i = 0; i < 600; ++i) {
    int found = 0;
    for (const auto& e : back.frames[i].entities) {
      if (std::find(sprites.begin(), sprites.end(), e.signature) == sprites.end()) continue;
      ++found;
      CHECK(e.x == bodies[i].first);
      CHECK(e.y == bodies[i].second);
      CHECK(e.w == d.player.w);
      CHECK(e.h == d.player.h);
    }
    CHECK(found == 1);
  }
}

TEST_CASE("unwritable path is an I/O error") {
  Trace t = read_trace(data_dir() / "one_empty_frame.jsonl");
  try {
    write_trace(t, "/nonexistent_dir/x/y.jsonl");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
}

TEST_CASE("validate rejects duplicate indices") {
  Trace t = read_trace(data_dir() / "three_frames.jsonl");
  t.frames[2].index = 1;
  CHECK_THROWS_AS(validate(t), Error);
}

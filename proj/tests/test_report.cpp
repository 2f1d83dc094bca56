#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "agdl/error.hpp"
#include "agdl/report.hpp"
#include "agdl/scenarios.hpp"
#include "support.hpp"

using namespace agdl;

namespace {

const DesignModel& coverage_model() {
  static const DesignModel m = learn({testing::coverage_trace()});
  return m;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> csv_cells(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("the player machine exports as a four-node DOT graph") {
  const std::string dot = export_dot_fsm(coverage_model(), "player");
  CHECK(dot.starts_with("digraph"));
  CHECK(count(dot, "[label=\"") - count(dot, " -> ") == 4);
  CHECK(dot.find("pressed(A)") != std::string::npos);
  CHECK(export_dot_fsm(coverage_model(), coverage_model().player_class) == dot);
}

TEST_CASE("unknown classes are not found") {
  try {
    export_dot_fsm(coverage_model(), "nobody");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotFound);
  }
}

TEST_CASE("a model without rooms exports an empty digraph") {
  DesignModel m;
  const std::string dot = export_dot_rooms(m);
  CHECK(dot.starts_with("digraph"));
  CHECK(dot.find(" -> ") == std::string::npos);
  CHECK(dot.find("[label=") == std::string::npos);
}

TEST_CASE("exports are deterministic") {
  CHECK(export_dot_fsm(coverage_model(), "player") == export_dot_fsm(coverage_model(), "player"));
  CHECK(export_dot_rooms(coverage_model()) == export_dot_rooms(coverage_model()));
}

TEST_CASE("jump table over three gravity variants") {
  const std::vector<std::pair<double, double>> variants = {{0.5, 0.5}, {0.3, 0.3}, {0.4, 0.8}};
  std::vector<DesignModel> models;
  for (auto [up, down] : variants) models.push_back(learn({testing::gravity_trace(up, down)}));
  std::vector<std::string> warnings;
  const auto rows = lines_of(jump_table(models, true, &warnings));
  CHECK(warnings.empty());
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "game,gravity_up,gravity_down,jump_height_px,hang_time_s,asymmetry");
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const auto cells = csv_cells(rows[i + 1]);
    REQUIRE(cells.size() == 6);
    CHECK(std::fabs(std::stod(cells[1]) - variants[i].first) <= 0.01);
    CHECK(std::fabs(std::stod(cells[2]) - variants[i].second) <= 0.01);
  }
  CHECK(lines_of(jump_table({models[0]}, true)).size() == 2);
}

TEST_CASE("models without jumps leave empty cells") {
  const DesignModel no_jump = learn({testing::no_jump_trace()});
  std::vector<std::string> warnings;
  const auto rows = lines_of(jump_table({coverage_model(), no_jump}, true, &warnings));
  REQUIRE(rows.size() == 3);
  CHECK(csv_cells(rows[1])[3] != "");
  const auto empty = csv_cells(rows[2]);
  REQUIRE(empty.size() == 6);
  for (std::size_t i = 1; i < 6; ++i) CHECK(empty[i].empty());
  CHECK(warnings.size() == 1);

  warnings.clear();
  CHECK(lines_of(jump_table({no_jump}, false, &warnings)).size() == 2);
  CHECK(warnings.size() == 2);
  warnings.clear();
  CHECK(lines_of(jump_table({}, true, &warnings)).size() == 1);
  CHECK(warnings.size() == 1);
}

TEST_CASE("text tables align columns") {
  const auto rows = lines_of(jump_table({coverage_model()}, false));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].starts_with("game"));
  CHECK(rows[0].size() == rows[1].size());
}

TEST_CASE("corpus export writes grids and a legend") {
  const auto dir = std::filesystem::temp_directory_path() / "agdl_corpus_test";
  std::filesystem::remove_all(dir);
  const auto warnings = write_corpus(coverage_model(), dir);
  CHECK(warnings.empty());
  CHECK(std::filesystem::exists(dir / "legend.json"));
  int grids = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) grids += e.path().extension() == ".txt";
  CHECK(grids == static_cast<int>(coverage_model().rooms.nodes.size()));
}

TEST_CASE("builtin design names resolve") {
  CHECK(resolve_design("builtin:default").rooms.size() == 4);
  CHECK(resolve_design("builtin:arena").rooms.size() == 1);
  const auto g = resolve_design("builtin:gravity:0.4:0.8");
  CHECK(g.states[static_cast<std::size_t>(g.state_index("jump"))].ay == 0.4);
  CHECK(g.states[static_cast<std::size_t>(g.state_index("fall"))].ay == 0.8);
  CHECK_THROWS_AS(resolve_design("builtin:gravity:x"), Error);
}

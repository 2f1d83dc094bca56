#pragma once

// Input sources for the simulator: script files, seeded random walks and
// closed-loop scripted playthroughs of the bundled designs.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "agdl/toysim.hpp"

namespace agdl {

// One frame per line, buttons separated by spaces or commas. Blank line = no
// input. Lines starting with '#' are comments.
std::vector<InputState> parse_input_script(std::istream& in);
std::vector<InputState> read_input_script(const std::filesystem::path& path);
void write_input_script(std::span<const InputState> inputs, std::ostream& out);

// Held-input chunks of random length: horizontal direction, optional jump.
std::vector<InputState> random_walk_inputs(std::uint64_t seed, std::size_t frames);

// "script:<file>" or "random:<seed>:<n>"; a bare path is read as a script.
std::vector<InputState> resolve_inputs(std::string_view spec);

// Scripted playthroughs for default_design(); each returns exactly `frames`
// inputs (padded with idle frames).
std::vector<InputState> coverage_inputs(const GroundTruthDesign& design, std::size_t frames = 2000);
std::vector<InputState> no_jump_inputs(const GroundTruthDesign& design, std::size_t frames = 600);
// A short walk right and back, then `jumps` standing jumps.
std::vector<InputState> jump_in_place_inputs(const GroundTruthDesign& design, int jumps = 3);
// Visits every room of default_design(), using both side exits and both portals.
std::vector<InputState> walkthrough_inputs(const GroundTruthDesign& design);

}  // namespace agdl

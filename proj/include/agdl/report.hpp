#pragma once

// Human-readable exports of a DesignModel and the command-line entry point.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "agdl/pipeline.hpp"

namespace agdl {

// `label` may be "player" for the player's class. Throws Error(NotFound)
// when the model has no such class.
std::string export_dot_fsm(const DesignModel& model, std::string_view label);
std::string export_dot_rooms(const DesignModel& model);

// One row per model: game, gravity up, gravity down, height, hang time, asymmetry.
// Models without jump metrics get empty cells and a warning.
std::string jump_table(const std::vector<DesignModel>& models, bool csv, std::vector<std::string>* warnings = nullptr);

// Writes one .txt per room plus legend.json into `dir`; returns skipped-room warnings.
std::vector<std::string> write_corpus(const DesignModel& model, const std::filesystem::path& dir);

// Resolves "builtin:default", "builtin:arena", "builtin:gravity:UP:DOWN" or a design file.
GroundTruthDesign resolve_design(std::string_view spec);

int cli_main(int argc, char** argv);

}  // namespace agdl

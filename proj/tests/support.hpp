#pragma once

// Shared fixtures and independent oracles for the test binaries.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "agdl/toysim.hpp"
#include "agdl/trace.hpp"

namespace agdl::testing {

std::filesystem::path data_dir();

// Simulated traces of the bundled designs, built once per process.
const Trace& coverage_trace();      // default design, 2000 frames
const Trace& walkthrough_trace();   // default design, visits all four rooms
const Trace& no_jump_trace();       // default design, 600 frames, never presses A
Trace random_trace(const GroundTruthDesign& design, std::uint64_t seed, std::size_t frames);
Trace gravity_trace(double ascent, double descent);  // jumps in place

// Exact least squares of p against [1, t, t^2] by Gaussian elimination on the
// normal equations in long double, returning the residual sum of squares.
double quadratic_sse(const std::vector<double>& t, const std::vector<double>& p);

struct BruteSegmentation {
  std::vector<std::size_t> starts;
  double objective = 0.0;
};

// Enumerates every segmentation into pieces of at least min_len samples with
// at most max_changes changepoints and returns the cheapest (earliest starts
// on ties). Costs come from quadratic_sse on both axes.
BruteSegmentation brute_force_segmentation(const std::vector<double>& xs, const std::vector<double>& ys,
                                           double penalty, std::size_t min_len, std::size_t max_changes);

// Semi-implicit Euler jump from rest on flat ground: vy = impulse, then each
// frame vy += g (ascent gravity while rising), y += vy, until y returns to 0.
struct DiscreteJump {
  double height = 0.0;
  int airborne_frames = 0;
};
DiscreteJump integrate_jump(double impulse, double ascent, double descent);

// A single-entity trace over a static tile layout (camera at the origin).
struct Scripted {
  std::string signature;
  std::vector<std::pair<double, double>> path;  // top-left per frame
  int w = 8;
  int h = 8;
};
Trace synthetic_trace(const std::vector<Scripted>& entities, const std::vector<TileCell>& tiles,
                      const std::vector<InputState>& inputs = {});

}  // namespace agdl::testing

#pragma once

// Piecewise constant-acceleration fits of entity tracks.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agdl/tracker.hpp"

namespace agdl {

// p(t) = p0 + v (t - t0) + a (t - t0)^2 / 2, with t0 the first sample time.
struct AxisFit {
  double p0 = 0.0;
  double v = 0.0;
  double a = 0.0;
  double rmse = 0.0;

  double at(double tau) const { return p0 + v * tau + 0.5 * a * tau * tau; }
  // Displacement over the frame step ending at tau.
  double step(double tau) const { return at(tau) - at(tau - 1.0); }

  friend bool operator==(const AxisFit&, const AxisFit&) = default;
};

// Throws Error(InsufficientData) for fewer than 3 samples or mismatched spans.
AxisFit fit_quadratic(std::span<const double> t, std::span<const double> p);

struct MotionSegment {
  int track_id = 0;
  std::int64_t t0 = 0;
  std::int64_t t1 = 0;  // exclusive
  AxisFit x;
  AxisFit y;
  bool sat_x = false;
  bool sat_y = false;
  std::string signature;  // animation signature shared by every frame of the segment

  std::int64_t length() const { return t1 - t0; }

  friend bool operator==(const MotionSegment&, const MotionSegment&) = default;
};

struct SegmentConfig {
  std::size_t min_length = 5;
  std::optional<double> penalty;  // defaults to penalty_for(track, run length)
  double penalty_floor = 1e-4;
  double accel_tol = 1e-3;        // |a| below this counts as zero when detecting velocity caps
  bool parallel = true;
};

// Noise scale from the median absolute third difference of both axes.
double noise_sigma(const EntityTrack& track);
double default_penalty(double sigma, std::size_t n, double floor = 1e-4);

// Each run of consecutive frames with one animation signature is segmented
// independently. Segments come back ordered by t0.
std::vector<MotionSegment> segment_track(const EntityTrack& track, const SegmentConfig& config = {});

struct JumpArc {
  std::int64_t takeoff = 0;  // first airborne frame
  double height = 0.0;
  int hang_frames = 0;
  double ascent_accel = 0.0;
  double descent_accel = 0.0;

  friend bool operator==(const JumpArc&, const JumpArc&) = default;
};

struct JumpMetrics {
  int arcs = 0;
  double height = 0.0;      // px
  double hang_time = 0.0;   // s
  double hang_frames = 0.0;
  double ascent_accel = 0.0;
  double descent_accel = 0.0;
  double asymmetry = 0.0;   // descent / ascent
  std::vector<JumpArc> per_arc;

  friend bool operator==(const JumpMetrics&, const JumpMetrics&) = default;
};

std::vector<JumpArc> find_jump_arcs(std::span<const MotionSegment> segments, double accel_tol = 1e-3);

// Medians over the arcs. Both throw Error(NoJumpFound) when no arc is present.
JumpMetrics summarize_jumps(std::vector<JumpArc> arcs, int fps);
JumpMetrics jump_metrics(std::span<const MotionSegment> segments, int fps);

}  // namespace agdl

#include "support.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "agdl/scenarios.hpp"

namespace agdl::testing {

std::filesystem::path data_dir() { return AGDL_TEST_DATA_DIR; }

const Trace& coverage_trace() {
  static const Trace t = [] {
    const auto d = default_design();
    return simulate(d, coverage_inputs(d, 2000), 0);
  }();
  return t;
}

const Trace& walkthrough_trace() {
  static const Trace t = [] {
    const auto d = default_design();
    return simulate(d, walkthrough_inputs(d), 0);
  }();
  return t;
}

const Trace& no_jump_trace() {
  static const Trace t = [] {
    const auto d = default_design();
    return simulate(d, no_jump_inputs(d, 600), 0);
  }();
  return t;
}

Trace random_trace(const GroundTruthDesign& design, std::uint64_t seed, std::size_t frames) {
  return simulate(design, random_walk_inputs(seed, frames), seed);
}

Trace gravity_trace(double ascent, double descent) {
  const auto d = with_gravity(default_design(), ascent, descent);
  return simulate(d, jump_in_place_inputs(d, 3), 0);
}

double quadratic_sse(const std::vector<double>& t, const std::vector<double>& p) {
  using R = long double;
  const std::size_t n = t.size();
  const R mean = std::accumulate(t.begin(), t.end(), R{0}) / static_cast<R>(n);
  std::array<std::array<R, 4>, 3> m{};
  for (std::size_t k = 0; k < n; ++k) {
    const R u = t[k] - mean;
    const std::array<R, 3> row = {1, u, u * u};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) m[i][j] += row[i] * row[j];
      m[i][3] += row[i] * p[k];
    }
  }
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
    std::swap(m[c], m[piv]);
    for (int r = 0; r < 3; ++r) {
      if (r == c) continue;
      const R f = m[r][c] / m[c][c];
      for (int k = c; k < 4; ++k) m[r][k] -= f * m[c][k];
    }
  }
  const R b0 = m[0][3] / m[0][0], b1 = m[1][3] / m[1][1], b2 = m[2][3] / m[2][2];
  R sse = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const R u = t[k] - mean;
    const R r = p[k] - (b0 + b1 * u + b2 * u * u);
    sse += r * r;
  }
  return static_cast<double>(sse);
}

BruteSegmentation brute_force_segmentation(const std::vector<double>& xs, const std::vector<double>& ys,
                                           double penalty, std::size_t min_len, std::size_t max_changes) {
  const std::size_t n = xs.size();
  // cost[i][j] for [i, j)
  std::vector<std::vector<double>> cost(n + 1, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + min_len; j <= n; ++j) {
      std::vector<double> t, px(xs.begin() + i, xs.begin() + j), py(ys.begin() + i, ys.begin() + j);
      for (std::size_t k = i; k < j; ++k) t.push_back(static_cast<double>(k));
      cost[i][j] = quadratic_sse(t, px) + quadratic_sse(t, py);
    }
  }
  BruteSegmentation best;
  best.objective = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> starts = {0};
  std::function<void(std::size_t, double)> rec = [&](std::size_t from, double acc) {
    const double closing = acc + cost[from][n] + penalty;
    if (n - from >= min_len && closing < best.objective - 1e-12 * std::max(1.0, std::fabs(closing))) {
      best.objective = closing;
      best.starts = starts;
    }
    if (starts.size() > max_changes) return;
    for (std::size_t next = from + min_len; next + min_len <= n; ++next) {
      starts.push_back(next);
      rec(next, acc + cost[from][next] + penalty);
      starts.pop_back();
    }
  };
  if (n >= min_len) rec(0, 0.0);
  return best;
}

DiscreteJump integrate_jump(double impulse, double ascent, double descent) {
  DiscreteJump out;
  double y = 0.0, vy = impulse;
  do {
    vy += vy < 0.0 ? ascent : descent;
    y += vy;
    out.height = std::max(out.height, -y);
    ++out.airborne_frames;
  } while (y < 0.0);
  return out;
}

Trace synthetic_trace(const std::vector<Scripted>& entities, const std::vector<TileCell>& tiles,
                      const std::vector<InputState>& inputs) {
  std::size_t frames = inputs.size();
  for (const auto& e : entities) frames = std::max(frames, e.path.size());
  Trace t;
  t.header.source = "synthetic";
  t.header.meta["game"] = "synthetic";
  for (std::size_t f = 0; f < frames; ++f) {
    Frame fr;
    fr.index = static_cast<std::int64_t>(f);
    if (f < inputs.size()) fr.input = inputs[f];
    for (const auto& e : entities) {
      if (f >= e.path.size()) continue;
      EntityObservation o;
      o.signature = e.signature;
      o.x = e.path[f].first;
      o.y = e.path[f].second;
      o.w = e.w;
      o.h = e.h;
      fr.entities.push_back(o);
    }
    fr.tilemap_sig = "static";
    fr.tiles = tiles;
    t.frames.push_back(std::move(fr));
  }
  return t;
}

}  // namespace agdl::testing

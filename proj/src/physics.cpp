#include "agdl/physics.hpp"

#include <algorithm>
#include <cmath>

#include "agdl/error.hpp"
#include "agdl/segment_kernels.hpp"

namespace agdl {

namespace {

// Givens-updated least squares with C basis columns and one right-hand side.
template <int C>
struct Qr {
  double r[C][C] = {};
  double z[C] = {};
  double sse = 0.0;

  void add(const double* row, double b) {
    double a[C];
    std::copy(row, row + C, a);
    for (int k = 0; k < C; ++k) {
      if (a[k] == 0.0) continue;
      const double rad = std::hypot(r[k][k], a[k]);
      const double c = r[k][k] / rad;
      const double s = a[k] / rad;
      r[k][k] = rad;
      for (int m = k + 1; m < C; ++m) {
        const double rk = r[k][m];
        r[k][m] = c * rk + s * a[m];
        a[m] = -s * rk + c * a[m];
      }
      const double zk = z[k];
      z[k] = c * zk + s * b;
      b = -s * zk + c * b;
    }
    sse += b * b;
  }

  void solve(double* out) const {
    for (int k = C - 1; k >= 0; --k) {
      double acc = z[k];
      for (int m = k + 1; m < C; ++m) acc -= r[k][m] * out[m];
      out[k] = r[k][k] == 0.0 ? 0.0 : acc / r[k][k];
    }
  }
};

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

struct Run {
  std::vector<std::int64_t> frames;
  std::vector<double> xs;
  std::vector<double> ys;
  std::string signature;
};

std::vector<Run> signature_runs(const EntityTrack& track) {
  std::vector<Run> runs;
  std::int64_t last = 0;
  for (const auto& [f, s] : track.samples) {
    if (runs.empty() || f != last + 1 || s.signature != runs.back().signature) {
      runs.push_back({});
      runs.back().signature = s.signature;
    }
    runs.back().frames.push_back(f);
    runs.back().xs.push_back(s.x);
    runs.back().ys.push_back(s.y);
    last = f;
  }
  return runs;
}

AxisFit fit_range(const std::vector<double>& p, std::size_t i, std::size_t j) {
  std::vector<double> t(j - i);
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = static_cast<double>(k);
  return fit_quadratic(t, std::span<const double>(p).subspan(i, j - i));
}

double sse_of(const AxisFit& f, std::int64_t n) { return f.rmse * f.rmse * static_cast<double>(n); }

// Fraction of the quadratic residual left after the best split into an
// accelerating piece followed by a constant-velocity piece.
double two_piece_ratio(const std::vector<double>& p, std::size_t i, std::size_t j) {
  const std::size_t n = j - i;
  if (n < 6) return 1.0;
  Qr<3> whole;
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double tau = static_cast<double>(k);
    const double row[3] = {1.0, tau, tau * tau};
    whole.add(row, p[i + k] - p[i]);
    prefix[k + 1] = whole.sse;
  }
  if (whole.sse <= 1e-9 * static_cast<double>(n)) return 1.0;
  Qr<2> tail;
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t k = n; k-- > 0;) {
    const double tau = static_cast<double>(k) - static_cast<double>(n - 1);
    const double row[2] = {1.0, tau};
    tail.add(row, p[i + k] - p[j - 1]);
    suffix[k] = tail.sse;
  }
  double best = whole.sse;
  for (std::size_t k = 3; k + 2 <= n; ++k) best = std::min(best, prefix[k] + suffix[k]);
  return best / whole.sse;
}

// Accelerating piece a followed by a constant-velocity piece b on one axis:
// b continues a's trajectory and its velocity lies within one frame of
// acceleration of a's extrapolated step.
bool saturates(const AxisFit& a, std::int64_t len_a, const AxisFit& b, double tol) {
  if (std::abs(a.a) <= tol || std::abs(b.a) > tol || std::abs(b.v) <= tol) return false;
  if ((a.a > 0) != (b.v > 0)) return false;
  const double next = static_cast<double>(len_a);
  if (std::abs(a.at(next) - b.p0) > std::abs(a.a) + tol) return false;
  const double step = a.step(next);
  if (std::abs(b.v) + tol < std::abs(step)) return false;
  return std::abs(b.v - step) <= std::abs(a.a) + tol;
}

}  // namespace

AxisFit fit_quadratic(std::span<const double> t, std::span<const double> p) {
  if (t.size() != p.size()) throw Error(ErrorKind::InsufficientData, "fit_quadratic: sample count mismatch");
  if (t.size() < 3) throw Error(ErrorKind::InsufficientData, "fit_quadratic needs at least 3 samples");
  const double t0 = t.front();
  double scale = 0.0;
  for (double ti : t) scale = std::max(scale, std::abs(ti - t0));
  if (scale == 0.0) throw Error(ErrorKind::InsufficientData, "fit_quadratic needs distinct sample times");
  const double p_ref = p.front();
  Qr<3> qr;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double u = (t[k] - t0) / scale;
    const double row[3] = {1.0, u, u * u};
    qr.add(row, p[k] - p_ref);
  }
  double c[3];
  qr.solve(c);
  AxisFit fit;
  fit.p0 = p_ref + c[0];
  fit.v = c[1] / scale;
  fit.a = 2.0 * c[2] / (scale * scale);
  fit.rmse = std::sqrt(std::max(0.0, qr.sse) / static_cast<double>(t.size()));
  return fit;
}

double noise_sigma(const EntityTrack& track) {
  std::vector<double> d3;
  for (const Run& run : signature_runs(track)) {
    for (const auto* p : {&run.xs, &run.ys}) {
      for (std::size_t k = 3; k < p->size(); ++k) {
        const auto& v = *p;
        d3.push_back(std::abs(v[k] - 3 * v[k - 1] + 3 * v[k - 2] - v[k - 3]));
      }
    }
  }
  // Third differences of white noise have variance 20 sigma^2.
  return 1.4826 * median(std::move(d3)) / std::sqrt(20.0);
}

double default_penalty(double sigma, std::size_t n, double floor) {
  const double ln = std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
  return std::max(2.0 * sigma * sigma * ln, floor);
}

std::vector<MotionSegment> segment_track(const EntityTrack& track, const SegmentConfig& config) {
  std::vector<MotionSegment> out;
  if (track.samples.empty()) return out;
  const double sigma = config.penalty ? 0.0 : noise_sigma(track);
  const std::size_t lmin = std::max<std::size_t>(config.min_length, 1);
  for (const Run& run : signature_runs(track)) {
    const std::size_t n = run.frames.size();
    if (n < lmin) continue;
    const double beta = config.penalty ? *config.penalty : default_penalty(sigma, n, config.penalty_floor);
    const Segmentation seg = config.parallel ? segment_series_parallel(run.xs, run.ys, beta, lmin)
                                             : segment_series_serial(run.xs, run.ys, beta, lmin);
    std::vector<MotionSegment> local;
    std::vector<std::pair<std::size_t, std::size_t>> bounds;
    for (std::size_t k = 0; k < seg.starts.size(); ++k) {
      const std::size_t i = seg.starts[k];
      const std::size_t j = k + 1 < seg.starts.size() ? seg.starts[k + 1] : n;
      MotionSegment m;
      m.track_id = track.id;
      m.t0 = run.frames[i];
      m.t1 = run.frames[j - 1] + 1;
      m.signature = run.signature;
      if (j - i >= 3) {
        m.x = fit_range(run.xs, i, j);
        m.y = fit_range(run.ys, i, j);
      } else {
        m.x.p0 = run.xs[i];
        m.y.p0 = run.ys[i];
      }
      m.sat_x = two_piece_ratio(run.xs, i, j) < 0.5;
      m.sat_y = two_piece_ratio(run.ys, i, j) < 0.5;
      local.push_back(m);
      bounds.emplace_back(i, j);
    }
    // Merge an accelerating piece with the capped constant-velocity piece that follows it.
    std::vector<MotionSegment> merged;
    for (std::size_t k = 0; k < local.size(); ++k) {
      if (k + 1 < local.size() && !local[k].sat_x && !local[k].sat_y) {
        const MotionSegment& a = local[k];
        const MotionSegment& b = local[k + 1];
        const bool on_x = saturates(a.x, a.length(), b.x, config.accel_tol);
        const bool on_y = saturates(a.y, a.length(), b.y, config.accel_tol);
        if (on_x != on_y) {
          const auto [i, mid] = bounds[k];
          const std::size_t j = bounds[k + 1].second;
          const auto& other = on_x ? run.ys : run.xs;
          const AxisFit& oa = on_x ? a.y : a.x;
          const AxisFit& ob = on_x ? b.y : b.x;
          const AxisFit joined = fit_range(other, i, j);
          const double split = sse_of(oa, a.length()) + sse_of(ob, b.length());
          if (sse_of(joined, b.t1 - a.t0) - split <= beta) {
            MotionSegment m = a;
            m.t1 = b.t1;
            const double total = static_cast<double>(m.length());
            AxisFit& sat = on_x ? m.x : m.y;
            const AxisFit& sa = on_x ? a.x : a.y;
            const AxisFit& sb = on_x ? b.x : b.y;
            sat.rmse = std::sqrt((sse_of(sa, a.length()) + sse_of(sb, b.length())) / total);
            (on_x ? m.y : m.x) = joined;
            (on_x ? m.sat_x : m.sat_y) = true;
            merged.push_back(m);
            ++k;
            (void)mid;
            continue;
          }
        }
      }
      merged.push_back(local[k]);
    }
    out.insert(out.end(), merged.begin(), merged.end());
  }
  return out;
}

std::vector<JumpArc> find_jump_arcs(std::span<const MotionSegment> segments, double tol) {
  std::vector<JumpArc> arcs;
  auto touching = [&](std::size_t a, std::size_t b) {
    return b < segments.size() && segments[a].track_id == segments[b].track_id &&
           segments[a].t1 == segments[b].t0;
  };
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const MotionSegment& up = segments[k];
    const double len = static_cast<double>(up.length());
    if (up.length() < 3 || up.y.a <= tol || up.y.step(0.0) >= -tol) continue;
    if (k > 0 && touching(k - 1, k) && segments[k - 1].y.a > tol &&
        std::abs(segments[k - 1].y.a - up.y.a) <= tol)
      continue;  // continuation of an earlier ascent
    JumpArc arc;
    arc.takeoff = up.t0;
    arc.ascent_accel = up.y.a;
    const double ground = up.y.at(-1.0);
    double apex = ground;
    for (double tau = 0; tau < len; tau += 1.0) apex = std::min(apex, up.y.at(tau));
    std::int64_t end = up.t1;
    std::size_t last = k;
    if (up.y.step(len - 1.0) > tol) {
      arc.descent_accel = up.y.a;
    } else {
      const std::size_t d = k + 1;
      if (!touching(k, d) || segments[d].y.a <= tol || segments[d].y.step(0.0) < -std::abs(up.y.a) - tol)
        continue;
      arc.descent_accel = segments[d].y.a;
      apex = std::min(apex, segments[d].y.at(0.0));
      end = segments[d].t1;
      last = d;
    }
    while (touching(last, last + 1) && std::abs(segments[last + 1].y.a - arc.descent_accel) <= tol &&
           segments[last + 1].y.step(0.0) > 0) {
      ++last;
      end = segments[last].t1;
    }
    arc.height = ground - apex;
    arc.hang_frames = static_cast<int>(end - up.t0);
    arcs.push_back(arc);
    k = last;
  }
  return arcs;
}

JumpMetrics jump_metrics(std::span<const MotionSegment> segments, int fps) {
  return summarize_jumps(find_jump_arcs(segments), fps);
}

JumpMetrics summarize_jumps(std::vector<JumpArc> arcs, int fps) {
  JumpMetrics m;
  m.per_arc = std::move(arcs);
  if (m.per_arc.empty()) throw Error(ErrorKind::NoJumpFound, "no airborne arc in the segments");
  std::vector<double> h, f, up, down, ratio;
  for (const JumpArc& a : m.per_arc) {
    h.push_back(a.height);
    f.push_back(a.hang_frames);
    up.push_back(a.ascent_accel);
    down.push_back(a.descent_accel);
    ratio.push_back(a.descent_accel / a.ascent_accel);
  }
  m.arcs = static_cast<int>(m.per_arc.size());
  m.height = median(h);
  m.hang_frames = median(f);
  m.hang_time = m.hang_frames / static_cast<double>(fps > 0 ? fps : 60);
  m.ascent_accel = median(up);
  m.descent_accel = median(down);
  m.asymmetry = median(ratio);
  return m;
}

}  // namespace agdl

#include "agdl/tracker.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "agdl/error.hpp"
#include "agdl/hash.hpp"

namespace agdl {

namespace {

// Positive-length contact along one axis and at least touching along the other.
bool edge_adjacent(const EntityObservation& a, const EntityObservation& b) {
  const double ox = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double oy = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  return (ox > 0.0 && oy >= 0.0) || (ox >= 0.0 && oy > 0.0);
}

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// Minimum-cost perfect matching on a square matrix (Hungarian algorithm with
// potentials). Returns the column assigned to each row.
std::vector<std::size_t> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);  // match[col] = row, 1-based
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[col0] = true;
      const std::size_t r = match[col0];
      double delta = kInf;
      std::size_t col1 = 0;
      for (std::size_t c = 1; c <= n; ++c) {
        if (used[c]) continue;
        const double cur = cost[r - 1][c - 1] - u[r] - v[c];
        if (cur < minv[c]) {
          minv[c] = cur;
          way[c] = col0;
        }
        if (minv[c] < delta) {
          delta = minv[c];
          col1 = c;
        }
      }
      for (std::size_t c = 0; c <= n; ++c) {
        if (used[c]) {
          u[match[c]] += delta;
          v[c] -= delta;
        } else {
          minv[c] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<std::size_t> out(n);
  for (std::size_t c = 1; c <= n; ++c) out[match[c] - 1] = c - 1;
  return out;
}

}  // namespace

std::vector<EntityObservation> SpriteGrouper::group(const Frame& frame) {
  const auto& obs = frame.entities;
  DisjointSets sets(obs.size());
  std::set<PairKey> this_frame;
  const auto part = [&](const EntityObservation& o) { return o.w <= tile_size_ && o.h <= tile_size_; };
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (!part(obs[i])) continue;
    for (std::size_t j = i + 1; j < obs.size(); ++j) {
      if (!part(obs[j]) || !edge_adjacent(obs[i], obs[j])) continue;
      const auto& [a, b] = std::tie(obs[i], obs[j]);
      const bool swap = std::tie(b.signature, b.x, b.y) < std::tie(a.signature, a.x, a.y);
      const auto& first = swap ? b : a;
      const auto& second = swap ? a : b;
      PairKey key{first.signature, second.signature, std::lround(second.x - first.x),
                  std::lround(second.y - first.y)};
      auto it = seen_.find(key);
      if (it != seen_.end() && it->second >= persistence_) sets.unite(i, j);
      this_frame.insert(std::move(key));
    }
  }
  for (const auto& key : this_frame) ++seen_[key];

  std::map<std::size_t, std::vector<std::size_t>> components;
  for (std::size_t i = 0; i < obs.size(); ++i) components[sets.find(i)].push_back(i);

  std::vector<EntityObservation> out;
  for (const auto& [root, idx] : components) {
    if (idx.size() == 1) {
      out.push_back(obs[idx.front()]);
      continue;
    }
    double x0 = obs[idx.front()].x, y0 = obs[idx.front()].y;
    double x1 = obs[idx.front()].right(), y1 = obs[idx.front()].bottom();
    for (std::size_t i : idx) {
      x0 = std::min(x0, obs[i].x);
      y0 = std::min(y0, obs[i].y);
      x1 = std::max(x1, obs[i].right());
      y1 = std::max(y1, obs[i].bottom());
    }
    std::vector<std::string> parts;
    for (std::size_t i : idx) {
      parts.push_back(obs[i].signature + "@" + std::to_string(std::lround(obs[i].x - x0)) + "," +
                      std::to_string(std::lround(obs[i].y - y0)));
    }
    std::sort(parts.begin(), parts.end());
    std::string joined;
    for (const auto& p : parts) joined += p + ";";
    EntityObservation merged;
    merged.signature = "c:" + hex64(fnv1a(joined));
    merged.x = x0;
    merged.y = y0;
    merged.w = static_cast<int>(std::lround(x1 - x0));
    merged.h = static_cast<int>(std::lround(y1 - y0));
    merged.hflip = obs[idx.front()].hflip;
    merged.vflip = obs[idx.front()].vflip;
    out.push_back(std::move(merged));
  }
  return out;
}

std::vector<EntityTrack> track(const Trace& trace, const TrackerConfig& config) {
  const double r_max = config.r_max_tiles * trace.header.tile_size;
  struct Active {
    std::size_t track;
    std::int64_t last;
    double x, y, vx, vy;
    int w, h;
    std::string sig;
  };
  std::vector<EntityTrack> tracks;
  std::vector<Active> active;
  SpriteGrouper grouper(config.group_persistence, trace.header.tile_size);

  for (const Frame& frame : trace.frames) {
    const std::int64_t f = frame.index;
    std::erase_if(active, [&](const Active& a) { return f - a.last - 1 > config.gap_limit; });
    const auto obs = grouper.group(frame);

    // Gated pairs only; the rest cost more than any set of gated pairs so the
    // solver maximizes the number of matches before minimizing distance.
    const std::size_t n = std::max(active.size(), obs.size());
    std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
    std::vector<std::vector<bool>> gated(n, std::vector<bool>(n, false));
    double forbidden = 1.0;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const Active& act = active[a];
      const auto dt = static_cast<double>(f - act.last);
      const double px = act.x + act.vx * dt, py = act.y + act.vy * dt;
      for (std::size_t o = 0; o < obs.size(); ++o) {
        const bool known = tracks[act.track].signatures.contains(obs[o].signature);
        if (!known && (obs[o].w != act.w || obs[o].h != act.h)) continue;
        const double dist = std::hypot(obs[o].x - px, obs[o].y - py);
        if (dist > r_max * dt) continue;
        cost[a][o] = dist + (obs[o].signature == act.sig ? 0.0 : 1.0);
        gated[a][o] = true;
        forbidden += cost[a][o];
      }
    }
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t o = 0; o < n; ++o)
        if (!gated[a][o]) cost[a][o] = forbidden;
    const auto assignment = min_cost_assignment(cost);
    std::vector<bool> o_used(obs.size(), false);
    for (std::size_t a = 0; a < active.size(); ++a) {
      const std::size_t o = assignment[a];
      if (o >= obs.size() || !gated[a][o]) continue;
      o_used[o] = true;
      Active& act = active[a];
      const auto& ob = obs[o];
      const auto dt = static_cast<double>(f - act.last);
      EntityTrack& t = tracks[act.track];
      if (f - act.last > 1) t.gaps.emplace_back(act.last + 1, f);
      t.samples[f] = {ob.x, ob.y, ob.w, ob.h, ob.signature};
      t.signatures.insert(ob.signature);
      act.vx = (ob.x - act.x) / dt;
      act.vy = (ob.y - act.y) / dt;
      act.x = ob.x;
      act.y = ob.y;
      act.w = ob.w;
      act.h = ob.h;
      act.sig = ob.signature;
      act.last = f;
    }
    for (std::size_t o = 0; o < obs.size(); ++o) {
      if (o_used[o]) continue;
      const auto& ob = obs[o];
      EntityTrack t;
      t.signatures.insert(ob.signature);
      t.samples[f] = {ob.x, ob.y, ob.w, ob.h, ob.signature};
      tracks.push_back(std::move(t));
      active.push_back({tracks.size() - 1, f, ob.x, ob.y, 0.0, 0.0, ob.w, ob.h, ob.signature});
    }
  }

  std::stable_sort(tracks.begin(), tracks.end(), [](const EntityTrack& a, const EntityTrack& b) {
    const auto& sa = a.samples.begin()->second;
    const auto& sb = b.samples.begin()->second;
    return std::tie(a.samples.begin()->first, sa.x, sa.y) < std::tie(b.samples.begin()->first, sb.x, sb.y);
  });
  for (std::size_t i = 0; i < tracks.size(); ++i) tracks[i].id = static_cast<int>(i);
  return tracks;
}

namespace {

int sign_of(double v) {
  constexpr double kEps = 1e-9;
  return v > kEps ? 1 : (v < -kEps ? -1 : 0);
}

double mutual_information(const std::array<std::array<double, 3>, 3>& joint, double n) {
  if (n <= 0) return 0.0;
  std::array<double, 3> pa{}, pb{};
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      pa[a] += joint[a][b];
      pb[b] += joint[a][b];
    }
  }
  double mi = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (joint[a][b] == 0.0) continue;
      const double pab = joint[a][b] / n;
      mi += pab * std::log(pab / ((pa[a] / n) * (pb[b] / n)));
    }
  }
  return mi;
}

std::size_t aligned_pairs(const EntityTrack& t) {
  std::size_t n = 0;
  for (const auto& [f, s] : t.samples) n += t.samples.contains(f - 1) ? 1 : 0;
  return n;
}

}  // namespace

double input_motion_information(const EntityTrack& track, const Trace& trace, int lag_window) {
  const std::int64_t base = trace.frames.front().index;
  auto axis_at = [&](std::int64_t f) -> std::optional<int> {
    const std::int64_t i = f - base;
    if (i < 0 || i >= static_cast<std::int64_t>(trace.frames.size())) return std::nullopt;
    return trace.frames[static_cast<std::size_t>(i)].input.horizontal();
  };
  double best = 0.0;
  for (int lag = 0; lag <= lag_window; ++lag) {
    std::array<std::array<double, 3>, 3> joint{};
    double n = 0;
    for (const auto& [f, s] : track.samples) {
      auto prev = track.samples.find(f - 1);
      if (prev == track.samples.end()) continue;
      auto axis = axis_at(f - lag);
      if (!axis) continue;
      joint[*axis + 1][sign_of(s.x - prev->second.x) + 1] += 1.0;
      n += 1.0;
    }
    best = std::max(best, mutual_information(joint, n));
  }
  return best;
}

int identify_player(const std::vector<EntityTrack>& tracks, const Trace& trace, const TrackerConfig& config) {
  std::set<int> axis_values;
  for (const auto& f : trace.frames) axis_values.insert(f.input.horizontal());
  if (axis_values.size() < 2) {
    throw Error(ErrorKind::InsufficientSignal, "horizontal input never varies in trace");
  }
  if (tracks.empty()) throw Error(ErrorKind::InsufficientSignal, "trace has no tracks");
  constexpr std::size_t kMinPairs = 10;
  const bool any_long = std::any_of(tracks.begin(), tracks.end(),
                                    [](const EntityTrack& t) { return aligned_pairs(t) >= kMinPairs; });
  int best = -1;
  double best_score = -1.0;
  std::size_t best_len = 0;
  for (const auto& t : tracks) {
    if (any_long && aligned_pairs(t) < kMinPairs) continue;
    const double score = input_motion_information(t, trace, config.mi_lag);
    const std::size_t len = t.samples.size();
    if (score > best_score || (score == best_score && (len > best_len || (len == best_len && t.id < best)))) {
      best = t.id;
      best_score = score;
      best_len = len;
    }
  }
  return best;
}

int CharacterClasses::find(const std::string& signature) const {
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i].contains(signature)) return static_cast<int>(i);
  }
  return -1;
}

CharacterClasses character_classes(const std::vector<const EntityTrack*>& tracks) {
  std::vector<std::set<std::string>> sets;
  for (const EntityTrack* t : tracks) {
    std::set<std::string> merged = t->signatures;
    std::vector<std::set<std::string>> keep;
    for (auto& s : sets) {
      const bool overlap = std::any_of(s.begin(), s.end(), [&](const std::string& sig) { return merged.contains(sig); });
      if (overlap) {
        merged.insert(s.begin(), s.end());
      } else {
        keep.push_back(std::move(s));
      }
    }
    keep.push_back(std::move(merged));
    sets = std::move(keep);
  }
  std::sort(sets.begin(), sets.end(), [](const auto& a, const auto& b) { return *a.begin() < *b.begin(); });
  CharacterClasses out;
  for (auto& s : sets) {
    out.labels.push_back(*s.begin());
    out.members.push_back(std::move(s));
  }
  return out;
}

}  // namespace agdl

#include "agdl/fsm.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "agdl/error.hpp"

namespace agdl {

namespace {

constexpr double kEps = 1e-9;

bool overlaps(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return true;
  for (const auto& s : a)
    if (b.contains(s)) return true;
  return false;
}

struct Features {
  double v[4];
};

double distance(const Features& a, const Features& b) {
  double s = 0.0;
  for (int k = 0; k < 4; ++k) s += (a.v[k] - b.v[k]) * (a.v[k] - b.v[k]);
  return std::sqrt(s);
}

std::vector<Guard> sorted(std::vector<Guard> g) {
  std::sort(g.begin(), g.end());
  return g;
}

std::optional<double> velocity(const EntityTrack& t, std::int64_t f, bool x_axis) {
  const auto a = t.samples.find(f - 1);
  const auto b = t.samples.find(f);
  if (a == t.samples.end() || b == t.samples.end()) return std::nullopt;
  return x_axis ? b->second.x - a->second.x : b->second.y - a->second.y;
}

}  // namespace

int FsmModel::state_index(const std::string& name) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i].name == name) return static_cast<int>(i);
  return -1;
}

std::vector<CharacterState> cluster_states(const std::vector<MotionSegment>& segments, double epsilon) {
  std::vector<CharacterState> out;
  if (segments.empty()) return out;
  double max_ax = 0.0, max_ay = 0.0;
  for (const auto& s : segments) {
    max_ax = std::max(max_ax, std::abs(s.x.a));
    max_ay = std::max(max_ay, std::abs(s.y.a));
  }
  auto features = [&](const MotionSegment& s) {
    Features f{};
    f.v[0] = max_ax > 0 ? std::abs(s.x.a) / max_ax : 0.0;
    f.v[1] = max_ay > 0 ? s.y.a / max_ay : 0.0;
    f.v[2] = s.sat_x ? 1.0 : 0.0;
    f.v[3] = s.sat_y ? 1.0 : 0.0;
    return f;
  };

  struct Cluster {
    std::vector<std::size_t> members;
    std::set<std::string> animations;
    Features rep;
    bool active = true;
  };
  std::vector<Cluster> clusters;
  // Identical feature vectors with the same animation start in one cluster;
  // their distance is zero, so they would merge first anyway.
  std::map<std::tuple<double, double, double, double, std::string>, std::size_t> seed;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const Features f = features(segments[k]);
    const auto key = std::make_tuple(f.v[0], f.v[1], f.v[2], f.v[3], segments[k].signature);
    const auto it = epsilon > 0 ? seed.find(key) : seed.end();
    if (it != seed.end()) {
      clusters[it->second].members.push_back(k);
      continue;
    }
    seed.emplace(key, clusters.size());
    Cluster c;
    c.members = {k};
    if (!segments[k].signature.empty()) c.animations.insert(segments[k].signature);
    c.rep = f;
    clusters.push_back(std::move(c));
  }

  const std::size_t n = clusters.size();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = distance(clusters[i].rep, clusters[j].rep);

  for (;;) {
    double best = epsilon;
    std::size_t bi = n, bj = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!clusters[i].active) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!clusters[j].active || d[i * n + j] >= best) continue;
        if (!overlaps(clusters[i].animations, clusters[j].animations)) continue;
        best = d[i * n + j];
        bi = i;
        bj = j;
      }
    }
    if (bi == n) break;
    Cluster& a = clusters[bi];
    Cluster& b = clusters[bj];
    a.members.insert(a.members.end(), b.members.begin(), b.members.end());
    a.animations.insert(b.animations.begin(), b.animations.end());
    b.active = false;
    for (std::size_t k = 0; k < n; ++k) {
      const double m = std::max(d[bi * n + k], d[bj * n + k]);
      d[bi * n + k] = d[k * n + bi] = m;
    }
  }

  std::vector<Cluster*> live;
  for (auto& c : clusters) {
    if (!c.active) continue;
    std::sort(c.members.begin(), c.members.end());
    live.push_back(&c);
  }
  std::sort(live.begin(), live.end(), [](const Cluster* a, const Cluster* b) { return a->members[0] < b->members[0]; });

  std::map<std::string, int> name_uses;
  for (const Cluster* c : live) {
    CharacterState st;
    st.id = static_cast<int>(out.size());
    st.animations = c->animations;
    st.members = c->members;
    for (std::size_t k : c->members) {
      const auto& s = segments[k];
      st.ax += std::abs(s.x.a);
      st.ay += s.y.a;
      st.sat_x += s.sat_x ? 1.0 : 0.0;
      st.sat_y += s.sat_y ? 1.0 : 0.0;
    }
    const double m = static_cast<double>(c->members.size());
    st.ax /= m;
    st.ay /= m;
    st.sat_x /= m;
    st.sat_y /= m;
    const std::string base = st.animations.empty() ? "state" : *st.animations.begin();
    const int uses = name_uses[base]++;
    st.name = uses == 0 ? base : base + "#" + std::to_string(uses);
    out.push_back(std::move(st));
  }
  // A later duplicate may collide with an earlier base name such as "a#1".
  std::set<std::string> seen;
  for (auto& st : out) {
    while (seen.contains(st.name)) st.name += "'";
    seen.insert(st.name);
  }
  return out;
}

TrackHistory build_history(const Trace& trace, const EntityTrack& track,
                           const std::vector<MotionSegment>& segments, const std::vector<int>& segment_states,
                           const std::vector<std::pair<std::int64_t, Guard>>& collisions) {
  TrackHistory h;
  std::vector<std::size_t> mine;
  for (std::size_t k = 0; k < segments.size(); ++k)
    if (segments[k].track_id == track.id) mine.push_back(k);
  std::sort(mine.begin(), mine.end(), [&](std::size_t a, std::size_t b) { return segments[a].t0 < segments[b].t0; });
  for (std::size_t n = 0; n < mine.size(); ++n) {
    const MotionSegment& s = segments[mine[n]];
    const int st = segment_states[mine[n]];
    for (std::int64_t f = s.t0; f < s.t1; ++f) h.state[f] = st;
    if (n > 0) {
      const MotionSegment& p = segments[mine[n - 1]];
      const int ps = segment_states[mine[n - 1]];
      if (p.t1 == s.t0 && ps != st) h.changes.emplace_back(s.t0, ps, st);
    }
  }

  if (trace.frames.empty()) return h;
  const std::int64_t base = trace.frames.front().index;
  const std::string axis(kAxisChannel);
  for (const auto& [f, sample] : track.samples) {
    (void)sample;
    const std::int64_t k = f - base;
    if (k <= 0 || k >= static_cast<std::int64_t>(trace.frames.size())) continue;
    const InputState& now = trace.frames[static_cast<std::size_t>(k)].input;
    const InputState& prev = trace.frames[static_cast<std::size_t>(k - 1)].input;
    std::vector<Guard> conds;
    for (std::size_t b = 0; b < kButtonNames.size(); ++b) {
      const auto btn = static_cast<Button>(b);
      if (now.held(btn) && !prev.held(btn)) conds.push_back(Guard::pressed(std::string(kButtonNames[b])));
      if (!now.held(btn) && prev.held(btn)) conds.push_back(Guard::released(std::string(kButtonNames[b])));
    }
    if (now.horizontal() != 0 && prev.horizontal() == 0) conds.push_back(Guard::pressed(axis));
    if (now.horizontal() == 0 && prev.horizontal() != 0) conds.push_back(Guard::released(axis));
    for (const bool x_axis : {true, false}) {
      const auto v1 = velocity(track, f - 1, x_axis);
      const auto v2 = velocity(track, f, x_axis);
      if (v1 && v2 && std::abs(*v1) > kEps && (std::abs(*v2) <= kEps || *v1 * *v2 < 0))
        conds.push_back(Guard::velocity_zero(x_axis ? "x" : "y"));
    }
    if (!conds.empty()) h.conditions[f] = std::move(conds);
  }
  for (const auto& [f, g] : collisions) {
    auto& v = h.conditions[f];
    if (std::find(v.begin(), v.end(), g) == v.end()) v.push_back(g);
  }
  return h;
}

FsmModel induce_transitions(const std::vector<CharacterState>& states, const std::vector<TrackHistory>& histories,
                            const FsmConfig& config) {
  FsmModel model;
  model.states = states;
  for (const auto& s : states) model.signatures.insert(s.animations.begin(), s.animations.end());
  const int w = config.window;

  std::map<std::pair<int, int>, int> observed;
  std::map<int, int> exits;
  for (const auto& h : histories) {
    for (const auto& [t, a, b] : h.changes) {
      ++observed[{a, b}];
      ++exits[a];
    }
  }

  auto state_before = [](const TrackHistory& h, std::int64_t f) {
    const auto it = h.state.find(f - 1);
    return it == h.state.end() ? -1 : it->second;
  };
  auto has = [](const TrackHistory& h, std::int64_t f, const Guard& g) {
    const auto it = h.conditions.find(f);
    return it != h.conditions.end() && std::find(it->second.begin(), it->second.end(), g) != it->second.end();
  };
  auto follows = [&](const TrackHistory& h, std::int64_t f, int a, int b) {
    for (const auto& [t, x, y] : h.changes)
      if (x == a && y == b && t >= f && t <= f + w) return true;
    return false;
  };

  // An occurrence only counts when the state is observed over its whole window;
  // otherwise a transition could hide in frames no segment covers.
  auto known = [&](const TrackHistory& h, std::int64_t f) {
    for (std::int64_t k = f; k <= f + w; ++k)
      if (!h.state.contains(k)) return false;
    return true;
  };

  struct Score {
    int occ = 0;
    int succ = 0;
    double precision() const { return occ ? static_cast<double>(succ) / occ : 0.0; }
  };
  // occurs(h, f) says whether the candidate occurs at frame f.
  auto score = [&](int a, int b, const std::function<bool(const TrackHistory&, std::int64_t)>& occurs) {
    Score s;
    for (const auto& h : histories) {
      for (const auto& [f, conds] : h.conditions) {
        (void)conds;
        if (state_before(h, f) != a || !known(h, f) || !occurs(h, f)) continue;
        ++s.occ;
        if (follows(h, f, a, b)) ++s.succ;
      }
    }
    return s;
  };

  for (const auto& [pair, count] : observed) {
    const auto [a, b] = pair;
    std::set<Guard> candidates;
    for (const auto& h : histories) {
      for (const auto& [t, x, y] : h.changes) {
        if (x != a || y != b) continue;
        for (auto it = h.conditions.lower_bound(t - w); it != h.conditions.end() && it->first <= t; ++it) {
          if (state_before(h, it->first) == a) candidates.insert(it->second.begin(), it->second.end());
        }
      }
    }

    Transition tr;
    tr.from = states[static_cast<std::size_t>(a)].name;
    tr.to = states[static_cast<std::size_t>(b)].name;
    tr.observed = count;
    bool found = false;
    auto consider = [&](std::vector<Guard> guards, const Score& s) {
      if (s.succ < config.min_support || s.precision() < config.min_precision) return;
      const bool better = !found || s.precision() > tr.precision ||
                          (s.precision() == tr.precision && (s.succ > tr.support ||
                                                             (s.succ == tr.support && guards < tr.guards)));
      if (!better) return;
      found = true;
      tr.guards = std::move(guards);
      tr.support = s.succ;
      tr.precision = s.precision();
    };
    for (const Guard& g : candidates) {
      consider({g}, score(a, b, [&](const TrackHistory& h, std::int64_t f) { return has(h, f, g); }));
    }
    if (!found) {
      auto near = [&](const TrackHistory& h, std::int64_t f, const Guard& g) {
        for (std::int64_t k = f - w; k <= f; ++k)
          if (has(h, k, g)) return true;
        return false;
      };
      for (auto i = candidates.begin(); i != candidates.end(); ++i) {
        for (auto j = std::next(i); j != candidates.end(); ++j) {
          const Guard& g1 = *i;
          const Guard& g2 = *j;
          consider({g1, g2}, score(a, b, [&](const TrackHistory& h, std::int64_t f) {
                     return (has(h, f, g1) && near(h, f, g2)) || (has(h, f, g2) && near(h, f, g1));
                   }));
        }
      }
    }
    if (!found) {
      tr.guards = {Guard::timeout()};
      tr.support = count;
      tr.precision = static_cast<double>(count) / exits[a];
      tr.low_confidence = true;
    }
    model.transitions.push_back(std::move(tr));
  }
  return model;
}

FsmMatch match_fsm(const FsmModel& learned, const FsmModel& truth) {
  constexpr std::size_t kMax = 8;
  if (learned.states.size() > kMax || truth.states.size() > kMax) {
    throw Error(ErrorKind::TooLarge, "match_fsm handles at most 8 states per model");
  }
  using Key = std::tuple<int, int, std::vector<Guard>>;
  std::vector<Key> truth_keys;
  for (const auto& t : truth.transitions)
    truth_keys.emplace_back(truth.state_index(t.from), truth.state_index(t.to), sorted(t.guards));
  struct Edge {
    int from, to;
    std::vector<Guard> guards;
  };
  std::vector<Edge> edges;
  for (const auto& t : learned.transitions)
    edges.push_back({learned.state_index(t.from), learned.state_index(t.to), sorted(t.guards)});

  const std::size_t n = learned.states.size();
  const std::size_t m = truth.states.size();
  std::vector<int> overlap(n * m, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      for (const auto& s : learned.states[i].animations) overlap[i * m + j] += truth.states[j].animations.contains(s);

  FsmMatch best;
  best.true_positives = -1;
  int best_overlap = -1;
  std::vector<int> map(n, -1);
  std::vector<bool> used(m, false);
  std::function<void(std::size_t, int)> search = [&](std::size_t i, int ov) {
    if (i == n) {
      int tp = 0;
      std::vector<bool> hit(truth_keys.size(), false);
      for (const auto& e : edges) {
        if (e.from < 0 || e.to < 0) continue;
        const int f = map[static_cast<std::size_t>(e.from)];
        const int t = map[static_cast<std::size_t>(e.to)];
        if (f < 0 || t < 0) continue;
        for (std::size_t k = 0; k < truth_keys.size(); ++k) {
          if (hit[k] || std::get<0>(truth_keys[k]) != f || std::get<1>(truth_keys[k]) != t ||
              std::get<2>(truth_keys[k]) != e.guards)
            continue;
          hit[k] = true;
          ++tp;
          break;
        }
      }
      if (tp > best.true_positives || (tp == best.true_positives && ov > best_overlap)) {
        best.true_positives = tp;
        best.mapping = map;
        best_overlap = ov;
      }
      return;
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (used[j]) continue;
      used[j] = true;
      map[i] = static_cast<int>(j);
      search(i + 1, ov + overlap[i * m + j]);
      used[j] = false;
    }
    map[i] = -1;
    search(i + 1, ov);
  };
  search(0, 0);
  const std::size_t total = edges.size() + truth_keys.size();
  best.f1 = total ? 2.0 * best.true_positives / static_cast<double>(total) : 1.0;
  return best;
}

}  // namespace agdl

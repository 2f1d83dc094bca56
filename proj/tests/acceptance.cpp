// Prints one PASS/FAIL line per acceptance criterion; exits non-zero on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "agdl/error.hpp"
#include "agdl/pipeline.hpp"
#include "agdl/scenarios.hpp"
#include "agdl/segment_kernels.hpp"
#include "support.hpp"

using namespace agdl;

namespace {

// Tolerances.
constexpr double kAccelTol = 0.01;
constexpr double kRuntimeLimitS = 5.0;
constexpr long kChangepointTol = 1;
constexpr double kSolidityPrecision = 0.95;
constexpr double kSolidityRecall = 0.9;
constexpr int kMiSeeds = 20;
constexpr int kMiRequired = 19;
constexpr double kJumpHeightTol = 1.0;
constexpr double kHangFramesTol = 2.0;
constexpr double kAsymmetryTarget = 2.0;
constexpr double kAsymmetryTol = 0.05;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* spec, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, spec, args...);
  return buf;
}

bool is_player_sprite(const GroundTruthDesign& d, const std::set<std::string>& sigs) {
  const auto sprites = d.player_sprites();
  return std::any_of(sigs.begin(), sigs.end(),
                     [&](const std::string& s) { return std::count(sprites.begin(), sprites.end(), s) > 0; });
}

Outcome physics_recovery() {
  const auto d = default_design();
  const Trace t = simulate(d, coverage_inputs(d, 600), 0);
  LearnerConfig cfg;
  cfg.physics.parallel = false;
  const auto t0 = std::chrono::steady_clock::now();
  const DesignModel m = learn({t}, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const Evaluation e = evaluate(m, d);
  const bool all_mapped = e.state_errors.size() == m.character(m.player_class)->fsm.states.size();
  return {e.max_param_error <= kAccelTol && secs < kRuntimeLimitS && all_mapped,
          fmt("max |da| = %.2e over %zu states, learn took %.3f s", e.max_param_error, e.state_errors.size(), secs)};
}

Outcome changepoints() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> len(10, 40);
  // Short tracks use longer pieces so they have at most four, the brute-force limit.
  std::uniform_int_distribution<int> short_len(25, 40);
  std::uniform_real_distribution<double> par(-1.0, 1.0);
  int located = 0, series = 0, dp_matches = 0, dp_trials = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const bool short_track = trial % 2 == 1;
    std::vector<double> xs, ys;
    std::vector<std::size_t> truth;
    double x = 0, y = 0, prev_ax = 10, prev_ay = 10;
    while (xs.size() < (short_track ? 100u : 200u)) {
      double vx = 3 * par(rng), ax = par(rng), vy = 3 * par(rng), ay = par(rng);
      if (std::max(std::fabs(ax - prev_ax), std::fabs(ay - prev_ay)) < 0.2) continue;
      prev_ax = ax;
      prev_ay = ay;
      const int n = short_track ? short_len(rng) : len(rng);
      truth.push_back(xs.size());
      for (int k = 0; k < n; ++k) {
        xs.push_back(x + vx * k + 0.5 * ax * k * k);
        ys.push_back(y + vy * k + 0.5 * ay * k * k);
      }
      x += vx * n + 0.5 * ax * n * n;
      y += vy * n + 0.5 * ay * n * n;
    }
    if (short_track) {
      xs.resize(std::min<std::size_t>(xs.size(), 120));
      ys.resize(xs.size());
      while (!truth.empty() && truth.back() + 5 > xs.size()) truth.pop_back();
      // A noisy copy keeps the optimum unique but non-trivial.
      std::normal_distribution<double> noise(0.0, 0.1);
      for (auto& v : xs) v += noise(rng);
      for (auto& v : ys) v += noise(rng);
      // Well above the SSE a spurious split can remove at this noise level.
      const double beta = 2.0;
      const auto dp = segment_series_serial(xs, ys, beta, 5);
      if (dp.segments() <= 4) {
        const auto bf = testing::brute_force_segmentation(xs, ys, beta, 5, 3);
        ++dp_trials;
        dp_matches += dp.starts == bf.starts && std::fabs(dp.objective - bf.objective) <= 1e-7 * std::max(1.0, bf.objective);
      } else {
        ++dp_trials;  // brute force is limited to 3 changepoints; count as a mismatch
      }
      continue;
    }
    ++series;
    const auto seg = segment_series_parallel(xs, ys, default_penalty(0.0, xs.size()), 5);
    bool ok = seg.segments() == truth.size();
    for (std::size_t k = 0; ok && k < truth.size(); ++k)
      ok = std::labs(static_cast<long>(seg.starts[k]) - static_cast<long>(truth[k])) <= kChangepointTol;
    located += ok;
  }
  return {located == series && dp_matches == dp_trials,
          fmt("%d/%d series with every changepoint within +-%ld; DP == brute force on %d/%d tracks", located, series,
              kChangepointTol, dp_matches, dp_trials)};
}

Outcome fsm_recovery() {
  const auto d = default_design();
  const DesignModel m = learn({testing::coverage_trace()});
  const FsmModel& fsm = m.character(m.player_class)->fsm;
  const double f1 = match_fsm(translate_guards(fsm, d), truth_fsm(d)).f1;
  auto guarded = [&](const std::string& from, const std::string& to, const std::string& g) {
    return std::any_of(fsm.transitions.begin(), fsm.transitions.end(), [&](const Transition& t) {
      return t.from == from && t.to == to && to_string(t.guards) == g;
    });
  };
  const bool guards = guarded("hero.idle", "hero.jump", "pressed(A)") && guarded("hero.run", "hero.jump", "pressed(A)") &&
                      guarded("hero.fall", "hero.idle", "collision(solid,down)");
  return {fsm.states.size() == 4 && f1 == 1.0 && guards,
          fmt("%zu states, F1 = %.4f, required guards %s", fsm.states.size(), f1, guards ? "present" : "missing")};
}

Outcome collision_rules() {
  const auto d = default_design();
  const DesignModel m = learn({testing::random_trace(d, 1, 1000)});
  const Evaluation e = evaluate(m, d);
  return {e.solidity_precision >= kSolidityPrecision && e.solidity_recall >= kSolidityRecall && e.pickup_despawn,
          fmt("solidity precision %.3f recall %.3f, pickup despawn rule %s", e.solidity_precision, e.solidity_recall,
              e.pickup_despawn ? "present" : "missing")};
}

Outcome player_identification() {
  const auto d = arena_design();
  int mi_ok = 0, probe_ok = 0;
  for (int seed = 1; seed <= kMiSeeds; ++seed) {
    const auto inputs = random_walk_inputs(static_cast<std::uint64_t>(seed), 600);
    const Trace t = simulate(d, inputs, static_cast<std::uint64_t>(seed));
    const auto tracks = track(t);
    try {
      const int id = identify_player(tracks, t);
      mi_ok += is_player_sprite(d, tracks[static_cast<std::size_t>(id)].signatures);
    } catch (const Error&) {
    }
    Simulator sim(d, static_cast<std::uint64_t>(seed));
    for (std::size_t i = 0; i < 300; ++i) sim.step(inputs[i]);
    try {
      probe_ok += is_player_sprite(d, {probe_player_identity(d, sim.state())});
    } catch (const Error&) {
    }
  }
  return {mi_ok >= kMiRequired && probe_ok == kMiSeeds,
          fmt("mutual information %d/%d, probe %d/%d", mi_ok, kMiSeeds, probe_ok, kMiSeeds)};
}

Outcome room_graph() {
  const auto d = default_design();
  const DesignModel m = learn({testing::walkthrough_trace()});
  const Evaluation e = evaluate(m, d);
  return {e.rooms_isomorphic && e.corpus_matches,
          fmt("%d learned rooms vs %d, isomorphic %s, corpus %s", e.rooms_learned, e.rooms_truth,
              e.rooms_isomorphic ? "yes" : "no", e.corpus_matches ? "matches" : "differs")};
}

Outcome jump_metrics_check() {
  struct Variant {
    double up, down;
  };
  bool ok = true;
  std::string detail;
  for (const Variant v : {Variant{0.5, 0.5}, Variant{0.3, 0.3}, Variant{0.4, 0.8}}) {
    const DesignModel m = learn({testing::gravity_trace(v.up, v.down)});
    const auto oracle = testing::integrate_jump(-5.0, v.up, v.down);
    if (!m.jump) {
      ok = false;
      detail += fmt("[%.1f/%.1f no jump] ", v.up, v.down);
      continue;
    }
    const double dh = m.jump->height - oracle.height;
    const double dt = m.jump->hang_frames - oracle.airborne_frames;
    bool this_ok = std::fabs(dh) <= kJumpHeightTol && std::fabs(dt) <= kHangFramesTol;
    if (v.down != v.up) this_ok = this_ok && std::fabs(m.jump->asymmetry - kAsymmetryTarget) <= kAsymmetryTol;
    ok = ok && this_ok;
    detail += fmt("[%.1f/%.1f dh=%+.2f px dt=%+.0f f ratio=%.3f] ", v.up, v.down, dh, dt, m.jump->asymmetry);
  }
  detail.pop_back();
  return {ok, detail};
}

Outcome determinism() {
  const std::vector<Trace> traces = {testing::coverage_trace(), testing::walkthrough_trace()};
  const bool same_model = serialize_model(learn(traces)) == serialize_model(learn(traces));
  int fixtures = 0, identical = 0;
  std::vector<Trace> all = traces;
  all.push_back(testing::no_jump_trace());
  for (const char* name : {"three_frames.jsonl", "one_empty_frame.jsonl"}) all.push_back(read_trace(testing::data_dir() / name));
  for (const auto& t : all) {
    ++fixtures;
    std::istringstream in(serialize_trace(t));
    identical += parse_trace(in) == t;
  }
  return {same_model && identical == fixtures,
          fmt("model bytes %s, trace round trip identity on %d/%d fixtures", same_model ? "identical" : "differ",
              identical, fixtures)};
}

Outcome no_jump_robustness() {
  try {
    const DesignModel m = learn({testing::no_jump_trace()});
    const FsmModel& fsm = m.character(m.player_class)->fsm;
    const bool airborne = std::any_of(fsm.states.begin(), fsm.states.end(),
                                      [](const CharacterState& s) { return std::fabs(s.ay) > kAccelTol; });
    const Evaluation e = evaluate(m, default_design());
    return {!airborne && !m.jump && fsm.states.size() == 2,
            fmt("%zu states, airborne state %s, jump metrics %s, state delta %d", fsm.states.size(),
                airborne ? "present" : "absent", m.jump ? "present" : "absent", e.state_count_delta)};
  } catch (const std::exception& ex) {
    return {false, std::string("error: ") + ex.what()};
  }
}

}  // namespace

int main() {
  setenv("AGDL_THREADS", "1", 1);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"physics parameters and runtime", physics_recovery},
      {"changepoint localization", changepoints},
      {"state machine recovery", fsm_recovery},
      {"collision rules", collision_rules},
      {"player identification", player_identification},
      {"room graph and corpus", room_graph},
      {"jump metrics", jump_metrics_check},
      {"determinism", determinism},
      {"no-jump robustness", no_jump_robustness},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}

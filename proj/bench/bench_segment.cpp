// Times the serial and OpenMP segmentation kernels on a synthetic
// piecewise-quadratic track and checks that both return the same result.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#include "agdl/segment_kernels.hpp"

namespace {

struct Series {
  std::vector<double> xs, ys;
};

Series make_series(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> acc(-0.8, 0.8);
  std::uniform_int_distribution<int> len(20, 60);
  std::normal_distribution<double> noise(0.0, 0.05);
  Series s;
  double x = 0, y = 0, vx = 0, vy = 0, ax = 0, ay = 0;
  int left = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (left-- <= 0) {
      left = len(rng);
      ax = acc(rng);
      ay = acc(rng);
      vx = acc(rng) * 4;
      vy = acc(rng) * 4;
    }
    vx += ax;
    vy += ay;
    x += vx;
    y += vy;
    s.xs.push_back(x + noise(rng));
    s.ys.push_back(y + noise(rng));
  }
  return s;
}

template <class F>
double seconds(F&& f, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 1500;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 3;
  const Series s = make_series(n, 7);
  const double penalty = 1.0;
  agdl::Segmentation a, b;
  const double ts = seconds([&] { a = agdl::segment_series_serial(s.xs, s.ys, penalty, 5); }, reps);
  const double tp = seconds([&] { b = agdl::segment_series_parallel(s.xs, s.ys, penalty, 5); }, reps);
  const bool same = a.starts == b.starts && a.objective == b.objective;
  std::printf("n=%zu threads=%d segments=%zu\n", n, agdl::kernel_threads(), a.segments());
  std::printf("serial   %.4f s\nparallel %.4f s\nspeedup  %.2fx\nidentical %s\n", ts, tp, ts / tp,
              same ? "yes" : "NO");
  return same ? 0 : 1;
}

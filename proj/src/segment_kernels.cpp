#include "agdl/segment_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace agdl {

namespace {

// Upper-triangular factor of the design rows [1, tau, tau^2] plus the rotated
// right-hand sides of both axes.
struct QrAccumulator {
  double r[3][3] = {};
  double zx[3] = {};
  double zy[3] = {};
  double sse_x = 0.0;
  double sse_y = 0.0;

  void add(double tau, double bx, double by) {
    double a[3] = {1.0, tau, tau * tau};
    for (int k = 0; k < 3; ++k) {
      if (a[k] == 0.0) continue;
      const double rad = std::hypot(r[k][k], a[k]);
      const double c = r[k][k] / rad;
      const double s = a[k] / rad;
      r[k][k] = rad;
      for (int m = k + 1; m < 3; ++m) {
        const double rk = r[k][m];
        r[k][m] = c * rk + s * a[m];
        a[m] = -s * rk + c * a[m];
      }
      const double zxk = zx[k];
      zx[k] = c * zxk + s * bx;
      bx = -s * zxk + c * bx;
      const double zyk = zy[k];
      zy[k] = c * zyk + s * by;
      by = -s * zyk + c * by;
    }
    sse_x += bx * bx;
    sse_y += by * by;
  }
};

using Path = std::vector<std::size_t>;

Path starts_of(const std::vector<std::size_t>& prev, std::size_t end) {
  Path p;
  for (std::size_t j = end; j > 0; j = prev[j]) p.push_back(prev[j]);
  std::reverse(p.begin(), p.end());
  return p;
}

struct Recurrence {
  std::vector<double> best;
  std::vector<std::size_t> count;
  std::vector<std::size_t> prev;
  double penalty;
  std::size_t min_len;

  Recurrence(std::size_t n, double pen, std::size_t len)
      : best(n + 1, std::numeric_limits<double>::infinity()), count(n + 1, 0), prev(n + 1, 0),
        penalty(pen), min_len(len) {
    best[0] = 0.0;
  }

  // col[i] holds the cost of [i, j).
  void relax(std::size_t j, std::span<const double> col) {
    for (std::size_t i = 0; i + min_len <= j; ++i) {
      if (!std::isfinite(best[i])) continue;
      const double cand = best[i] + col[i] + penalty;
      const std::size_t cnt = count[i] + 1;
      bool take = cand < best[j] || (cand == best[j] && cnt < count[j]);
      if (!take && cand == best[j] && cnt == count[j]) {
        Path mine = starts_of(prev, i);
        mine.push_back(i);
        take = mine < starts_of(prev, j);
      }
      if (take) {
        best[j] = cand;
        count[j] = cnt;
        prev[j] = i;
      }
    }
  }

  Segmentation result(std::size_t n) const {
    Segmentation s;
    s.objective = best[n];
    s.starts = starts_of(prev, n);
    return s;
  }
};

}  // namespace

void segment_cost_column(std::span<const double> xs, std::span<const double> ys, std::size_t j,
                         std::size_t min_len, std::span<double> col) {
  if (j < min_len || j == 0) return;
  QrAccumulator acc;
  const double ref_x = xs[j - 1];
  const double ref_y = ys[j - 1];
  for (std::size_t i = j; i-- > 0;) {
    const double tau = static_cast<double>(i) - static_cast<double>(j - 1);
    acc.add(tau, xs[i] - ref_x, ys[i] - ref_y);
    if (j - i >= min_len) col[i] = acc.sse_x + acc.sse_y;
  }
}

Segmentation segment_series_serial(std::span<const double> xs, std::span<const double> ys,
                                   double penalty, std::size_t min_len) {
  const std::size_t n = xs.size();
  if (n < min_len || n == 0) return {};
  Recurrence rec(n, penalty, min_len);
  std::vector<double> col(n + 1, 0.0);
  for (std::size_t j = min_len; j <= n; ++j) {
    segment_cost_column(xs, ys, j, min_len, col);
    rec.relax(j, col);
  }
  return rec.result(n);
}

Segmentation segment_series_parallel(std::span<const double> xs, std::span<const double> ys,
                                     double penalty, std::size_t min_len) {
  const std::size_t n = xs.size();
  if (n < min_len || n == 0) return {};
  Recurrence rec(n, penalty, min_len);
  constexpr std::size_t kBlock = 128;
  const std::size_t stride = n + 1;
  std::vector<double> block(kBlock * stride, 0.0);
  for (std::size_t j0 = min_len; j0 <= n; j0 += kBlock) {
    const std::size_t j1 = std::min(n + 1, j0 + kBlock);
    const auto width = static_cast<std::ptrdiff_t>(j1 - j0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 4) num_threads(kernel_threads())
#endif
    for (std::ptrdiff_t k = 0; k < width; ++k) {
      const std::size_t j = j0 + static_cast<std::size_t>(k);
      segment_cost_column(xs, ys, j, min_len,
                          std::span<double>(block).subspan(static_cast<std::size_t>(k) * stride, stride));
    }
    for (std::size_t j = j0; j < j1; ++j) {
      rec.relax(j, std::span<const double>(block).subspan((j - j0) * stride, stride));
    }
  }
  return rec.result(n);
}

int kernel_threads() {
  if (const char* env = std::getenv("AGDL_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace agdl

#pragma once

// Exact penalized segmentation of a two-axis series into quadratic pieces.
//
// The cost of a segment [i, j) is the sum over both axes of the residual sum
// of squares of its least-squares quadratic. Costs are produced one column
// (fixed end j, all starts i) at a time by adding rows to a 3x3 QR factor with
// Givens rotations, which stays accurate for long segments where the normal
// equations would not.
//
// Two drivers share the recurrence: a serial reference and an OpenMP version
// that fills blocks of columns in parallel. Both perform identical floating
// point operations per column, so their results agree bit for bit.

#include <cstddef>
#include <span>
#include <vector>

namespace agdl {

struct Segmentation {
  std::vector<std::size_t> starts;  // first index of every segment, starts[0] == 0
  double objective = 0.0;           // total SSE + penalty * segment count

  std::size_t segments() const { return starts.size(); }
};

// Fills col[i] = cost of [i, j) for i in [0, j - min_len]; other entries untouched.
void segment_cost_column(std::span<const double> xs, std::span<const double> ys, std::size_t j,
                         std::size_t min_len, std::span<double> col);

// Minimizes sum of segment costs + penalty * count over segmentations whose
// pieces all have at least min_len samples. Ties: fewer segments, then the
// lexicographically earliest changepoints. Returns an empty segmentation when
// the series is shorter than min_len.
Segmentation segment_series_serial(std::span<const double> xs, std::span<const double> ys,
                                   double penalty, std::size_t min_len);
Segmentation segment_series_parallel(std::span<const double> xs, std::span<const double> ys,
                                     double penalty, std::size_t min_len);

// Threads used by the parallel kernels (AGDL_THREADS when set and positive).
int kernel_threads();

}  // namespace agdl

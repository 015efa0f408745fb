#pragma once

#include <span>

#include "emofad/embedding_io.hpp"
#include "emofad/gaussian_stats.hpp"

namespace emofad::kernels {

/// Rows per block in the parallel accumulation kernel. Fixed, so the
/// floating-point result never depends on the thread count.
inline constexpr Eigen::Index kBlockRows = 512;

/// Serial reference: one Welford update per row.
StatsAccumulator accumulate_rows_serial(const RowMatrix& rows);

/// Blocked kernel. Each block of kBlockRows rows is reduced with a two-pass
/// centered product, then blocks are merged left to right. OpenMP distributes
/// blocks over `jobs` threads.
StatsAccumulator accumulate_rows(const RowMatrix& rows, int jobs = 1);

/// Same, over the subset `row_indices` of `rows` (in the given order).
StatsAccumulator accumulate_rows(const RowMatrix& rows, std::span<const Eigen::Index> row_indices,
                                 int jobs = 1);

}  // namespace emofad::kernels

#include "emofad/kernels.hpp"

#include <numeric>
#include <vector>

#include <omp.h>

#include "emofad/error.hpp"

namespace emofad::kernels {

namespace {

StatsAccumulator reduce_block(const RowMatrix& block) {
  Eigen::VectorXd mean = block.colwise().mean().transpose();
  const RowMatrix centered = block.rowwise() - mean.transpose();
  Eigen::MatrixXd comoment = centered.transpose() * centered;
  return StatsAccumulator(block.rows(), std::move(mean), std::move(comoment));
}

}  // namespace

StatsAccumulator accumulate_rows_serial(const RowMatrix& rows) {
  StatsAccumulator acc(rows.cols());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    acc.accumulate(std::span<const double>(rows.row(r).data(), static_cast<std::size_t>(rows.cols())));
  }
  return acc;
}

StatsAccumulator accumulate_rows(const RowMatrix& rows, std::span<const Eigen::Index> row_indices, int jobs) {
  const Eigen::Index dim = rows.cols();
  const auto n = static_cast<Eigen::Index>(row_indices.size());
  for (auto idx : row_indices) {
    if (idx < 0 || idx >= rows.rows()) {
      throw Error(ErrorCode::kDimensionMismatch, "row index " + std::to_string(idx) + " out of range");
    }
  }
  if (n == 0) return StatsAccumulator(dim);
  if (!rows.allFinite()) throw Error(ErrorCode::kNonFinite, "non-finite entry in accumulated rows");

  const Eigen::Index blocks = (n + kBlockRows - 1) / kBlockRows;
  std::vector<StatsAccumulator> partial(static_cast<std::size_t>(blocks), StatsAccumulator(dim));

#pragma omp parallel for schedule(static) num_threads(jobs > 0 ? jobs : 1) if (blocks > 1)
  for (Eigen::Index b = 0; b < blocks; ++b) {
    const Eigen::Index begin = b * kBlockRows;
    const Eigen::Index end = std::min(n, begin + kBlockRows);
    RowMatrix block(end - begin, dim);
    for (Eigen::Index i = begin; i < end; ++i) block.row(i - begin) = rows.row(row_indices[i]);
    partial[static_cast<std::size_t>(b)] = reduce_block(block);
  }

  StatsAccumulator acc(dim);
  for (const auto& p : partial) acc = merge(acc, p);
  return acc;
}

StatsAccumulator accumulate_rows(const RowMatrix& rows, int jobs) {
  std::vector<Eigen::Index> all(static_cast<std::size_t>(rows.rows()));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  return accumulate_rows(rows, all, jobs);
}

}  // namespace emofad::kernels

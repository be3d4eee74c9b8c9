#pragma once

#include <cstddef>
#include <initializer_list>
#include <limits>
#include <utility>
#include <vector>

namespace utrack {

/// Dense row-major matrix of similarities. Rows index detections of the
/// current frame, columns index tracks.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  SimilarityMatrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }

  std::vector<double> row(std::size_t r) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

struct Matching {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // sorted by (row, col)
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;
};

inline constexpr double kNoFloor = -std::numeric_limits<double>::infinity();

/// Sum of matched similarities, accumulated in pair order.
double total_similarity(const SimilarityMatrix& m, const Matching& matching);

/// Maximum-similarity assignment of min(rows, cols) pairs, then drops pairs
/// with similarity <= floor. Among assignments whose totals agree to within
/// 1e-9 * (1 + max|entry|), the lexicographically smallest sorted pair list
/// wins, so results are reproducible under ties.
Matching hungarian_max(const SimilarityMatrix& m, double floor = kNoFloor);

/// Exhaustive oracle with the same contract. Throws TooLarge when
/// min(rows, cols) > 8.
Matching brute_force_max(const SimilarityMatrix& m, double floor = kNoFloor);

}  // namespace utrack

#include "utrack/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "utrack/error.hpp"

namespace utrack {

SimilarityMatrix::SimilarityMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  values_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) {
      throw Error(ErrorCode::DimensionMismatch, "ragged similarity matrix literal");
    }
    values_.insert(values_.end(), r.begin(), r.end());
  }
}

std::vector<double> SimilarityMatrix::row(std::size_t r) const {
  return {values_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
          values_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_)};
}

double total_similarity(const SimilarityMatrix& m, const Matching& matching) {
  double total = 0.0;
  for (const auto& [r, c] : matching.pairs) total += m(r, c);
  return total;
}

namespace {

double tie_tolerance(const SimilarityMatrix& m) {
  double scale = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) scale = std::max(scale, std::abs(m(r, c)));
  }
  return 1e-9 * (1.0 + scale);
}

// Builds the public result from a row -> column map over the real matrix,
// where -1 marks an unmatched row.
Matching finish(const SimilarityMatrix& m, const std::vector<int>& row_to_col, double floor) {
  Matching out;
  std::vector<bool> col_used(m.cols(), false);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const int c = row_to_col[r];
    if (c >= 0 && m(r, static_cast<std::size_t>(c)) > floor) {
      out.pairs.emplace_back(r, static_cast<std::size_t>(c));
      col_used[static_cast<std::size_t>(c)] = true;
    } else {
      out.unmatched_rows.push_back(r);
    }
  }
  for (std::size_t c = 0; c < m.cols(); ++c) {
    if (!col_used[c]) out.unmatched_cols.push_back(c);
  }
  return out;
}

Matching all_unmatched(const SimilarityMatrix& m) {
  Matching out;
  for (std::size_t r = 0; r < m.rows(); ++r) out.unmatched_rows.push_back(r);
  for (std::size_t c = 0; c < m.cols(); ++c) out.unmatched_cols.push_back(c);
  return out;
}

}  // namespace

Matching hungarian_max(const SimilarityMatrix& m, double floor) {
  if (m.empty()) return all_unmatched(m);

  // Square min-cost problem on the padded matrix: cost = -similarity for real
  // cells, 0 for padding. Padding rows/columns sit after the real ones, so a
  // real row taking a padding column means "unmatched".
  const std::size_t n = std::max(m.rows(), m.cols());
  auto cost = [&](std::size_t r, std::size_t c) {
    return (r < m.rows() && c < m.cols()) ? -m(r, c) : 0.0;
  };

  // Shortest augmenting path with potentials (1-based, O(n^3)).
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), INFINITY);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = INFINITY;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_of_col(n), col_of_row(n);
  for (std::size_t j = 1; j <= n; ++j) {
    row_of_col[j - 1] = static_cast<int>(p[j] - 1);
    col_of_row[p[j] - 1] = static_cast<int>(j - 1);
  }

  // Lexicographic refinement. Every optimal assignment lives on the tight
  // edges of the final dual; walk rows in order and move each one to the
  // smallest tight column that still admits a perfect matching of the rest.
  const double tol = tie_tolerance(m);
  auto tight = [&](std::size_t r, std::size_t c) { return cost(r, c) - u[r + 1] - v[c + 1] <= tol; };
  std::vector<bool> fixed(n, false);
  std::vector<bool> visited(n);
  std::function<bool(std::size_t)> augment = [&](std::size_t r) -> bool {
    for (std::size_t c = 0; c < n; ++c) {
      if (visited[c] || !tight(r, c)) continue;
      visited[c] = true;
      const int owner = row_of_col[c];
      if (owner < 0 || (!fixed[static_cast<std::size_t>(owner)] &&
                        augment(static_cast<std::size_t>(owner)))) {
        row_of_col[c] = static_cast<int>(r);
        col_of_row[r] = static_cast<int>(c);
        return true;
      }
    }
    return false;
  };
  for (std::size_t r = 0; r < n; ++r) {
    fixed[r] = true;
    for (std::size_t c = 0; c < n && c != static_cast<std::size_t>(col_of_row[r]); ++c) {
      const int owner = row_of_col[c];
      if (!tight(r, c) || (owner >= 0 && fixed[static_cast<std::size_t>(owner)])) continue;
      const auto saved_rows = row_of_col;
      const auto saved_cols = col_of_row;
      // Hand c to r; its former owner must find another tight column, with
      // r's old column freed.
      const int old = col_of_row[r];
      row_of_col[static_cast<std::size_t>(old)] = -1;
      row_of_col[c] = static_cast<int>(r);
      col_of_row[r] = static_cast<int>(c);
      std::fill(visited.begin(), visited.end(), false);
      visited[c] = true;
      if (augment(static_cast<std::size_t>(owner))) break;
      row_of_col = saved_rows;
      col_of_row = saved_cols;
    }
  }

  std::vector<int> row_to_col(m.rows(), -1);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (static_cast<std::size_t>(col_of_row[r]) < m.cols()) row_to_col[r] = col_of_row[r];
  }
  return finish(m, row_to_col, floor);
}

Matching brute_force_max(const SimilarityMatrix& m, double floor) {
  if (std::min(m.rows(), m.cols()) > 8) {
    throw Error(ErrorCode::TooLarge,
                "brute force limited to min dimension 8, got " + std::to_string(std::min(m.rows(), m.cols())));
  }
  if (m.empty()) return all_unmatched(m);

  // Enumerate injections from the smaller side into the larger one; each is
  // converted to a row -> column map.
  const bool by_rows = m.rows() <= m.cols();
  const std::size_t small = by_rows ? m.rows() : m.cols();
  const std::size_t large = by_rows ? m.cols() : m.rows();
  std::vector<std::vector<int>> candidates;
  std::vector<int> choice(small);
  std::vector<bool> taken(large, false);
  std::function<void(std::size_t)> enumerate = [&](std::size_t k) {
    if (k == small) {
      std::vector<int> row_to_col(m.rows(), -1);
      for (std::size_t s = 0; s < small; ++s) {
        if (by_rows) {
          row_to_col[s] = choice[s];
        } else {
          row_to_col[static_cast<std::size_t>(choice[s])] = static_cast<int>(s);
        }
      }
      candidates.push_back(std::move(row_to_col));
      return;
    }
    for (std::size_t l = 0; l < large; ++l) {
      if (taken[l]) continue;
      taken[l] = true;
      choice[k] = static_cast<int>(l);
      enumerate(k + 1);
      taken[l] = false;
    }
  };
  enumerate(0);

  auto total = [&](const std::vector<int>& row_to_col) {
    double t = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (row_to_col[r] >= 0) t += m(r, static_cast<std::size_t>(row_to_col[r]));
    }
    return t;
  };
  // Sorted pair list of a candidate, for lexicographic comparison.
  auto pairs_of = [&](const std::vector<int>& row_to_col) {
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (row_to_col[r] >= 0) pairs.emplace_back(static_cast<int>(r), row_to_col[r]);
    }
    return pairs;
  };

  double best = -INFINITY;
  for (const auto& c : candidates) best = std::max(best, total(c));
  const double tol = tie_tolerance(m);
  const std::vector<int>* winner = nullptr;
  std::vector<std::pair<int, int>> winner_pairs;
  for (const auto& c : candidates) {
    if (total(c) < best - tol) continue;
    auto pairs = pairs_of(c);
    if (winner == nullptr || pairs < winner_pairs) {
      winner = &c;
      winner_pairs = std::move(pairs);
    }
  }
  return finish(m, *winner, floor);
}

}  // namespace utrack

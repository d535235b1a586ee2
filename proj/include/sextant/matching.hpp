#pragma once

// Optimal injective assignment between predicted and gold items.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

namespace sextant {

struct Assignment {
  /// (pred index, gold index), sorted by gold index. Only pairs with a
  /// positive score are listed.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double total = 0.0;

  std::size_t size() const { return pairs.size(); }
};

namespace detail {

// Kuhn-Munkres with potentials, O(rows^2 * cols), rows <= cols. Returns the
// column assigned to each row and minimizes the summed cost.
inline std::vector<std::size_t> hungarian_min(const std::vector<std::vector<double>>& cost,
                                              std::size_t rows, std::size_t cols) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<std::size_t> p(cols + 1, 0), way(cols + 1, 0);
  for (std::size_t i = 1; i <= rows; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(cols + 1, inf);
    std::vector<char> used(cols + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= cols; ++j) {
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
  std::vector<std::size_t> row_to_col(rows, 0);
  for (std::size_t j = 1; j <= cols; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

/// Maximum total score over injective assignments of a dense matrix
/// (scores[r][c] >= 0). Empty dimensions give 0.
inline double max_assignment_total(const std::vector<std::vector<double>>& scores) {
  const std::size_t rows = scores.size();
  const std::size_t cols = rows ? scores[0].size() : 0;
  if (rows == 0 || cols == 0) return 0.0;
  const bool transpose = rows > cols;
  const std::size_t r = transpose ? cols : rows;
  const std::size_t c = transpose ? rows : cols;
  std::vector<std::vector<double>> cost(r, std::vector<double>(c));
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) cost[i][j] = -(transpose ? scores[j][i] : scores[i][j]);
  }
  auto assign = hungarian_min(cost, r, c);
  double total = 0.0;
  for (std::size_t i = 0; i < r; ++i) total += -cost[i][assign[i]];
  return total;
}

inline bool close_enough(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace detail

/// Injective pred->gold assignment with the largest total score. Among
/// optimal assignments, golds are settled in index order, each taking the
/// lowest-index pred that still admits an optimal completion. With 0/1
/// scores this is a maximum-cardinality matching.
inline Assignment match_tuples(std::size_t n_pred, std::size_t n_gold,
                               const std::function<double(std::size_t pred, std::size_t gold)>& score) {
  Assignment out;
  if (n_pred == 0 || n_gold == 0) return out;

  // Rows are golds, columns preds.
  std::vector<std::vector<double>> s(n_gold, std::vector<double>(n_pred, 0.0));
  for (std::size_t g = 0; g < n_gold; ++g) {
    for (std::size_t p = 0; p < n_pred; ++p) s[g][p] = std::max(0.0, score(p, g));
  }

  std::vector<std::size_t> golds(n_gold), preds(n_pred);
  for (std::size_t i = 0; i < n_gold; ++i) golds[i] = i;
  for (std::size_t i = 0; i < n_pred; ++i) preds[i] = i;

  auto sub_total = [&](const std::vector<std::size_t>& gs, const std::vector<std::size_t>& ps) {
    std::vector<std::vector<double>> m(gs.size(), std::vector<double>(ps.size()));
    for (std::size_t a = 0; a < gs.size(); ++a) {
      for (std::size_t b = 0; b < ps.size(); ++b) m[a][b] = s[gs[a]][ps[b]];
    }
    return detail::max_assignment_total(m);
  };

  double remaining = sub_total(golds, preds);
  while (!golds.empty() && remaining > 0.0) {
    const std::size_t g = golds.front();
    std::vector<std::size_t> rest_g(golds.begin() + 1, golds.end());
    for (std::size_t k = 0; k < preds.size(); ++k) {
      const std::size_t p = preds[k];
      if (s[g][p] <= 0.0) continue;
      std::vector<std::size_t> rest_p = preds;
      rest_p.erase(rest_p.begin() + static_cast<std::ptrdiff_t>(k));
      const double with = s[g][p] + sub_total(rest_g, rest_p);
      if (detail::close_enough(with, remaining) || with > remaining) {
        out.pairs.emplace_back(p, g);
        remaining -= s[g][p];
        preds = std::move(rest_p);
        break;
      }
    }
    golds = std::move(rest_g);
  }
  for (const auto& [p, g] : out.pairs) out.total += s[g][p];
  return out;
}

}  // namespace sextant

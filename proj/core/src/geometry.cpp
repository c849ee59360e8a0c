#include "figlabel/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "figlabel/error.hpp"

namespace figlabel {

double iou(const BBox& a, const BBox& b) {
  const double ix1 = std::max(a.x1, b.x1);
  const double iy1 = std::max(a.y1, b.y1);
  const double ix2 = std::min(a.x2, b.x2);
  const double iy2 = std::min(a.y2, b.y2);
  if (ix1 >= ix2 || iy1 >= iy2) return 0.0;
  const double inter = (ix2 - ix1) * (iy2 - iy1);
  const double uni = a.area() + b.area() - inter;
  return inter / uni;
}

Point center(const BBox& b) {
  return Point{(b.x1 + b.x2) / 2.0, (b.y1 + b.y2) / 2.0};
}

double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

BBox enclosing_box(std::span<const BBox> boxes) {
  if (boxes.empty()) throw Error("empty geometry set");
  BBox out = boxes.front();
  for (const BBox& b : boxes.subspan(1)) {
    out.x1 = std::min(out.x1, b.x1);
    out.y1 = std::min(out.y1, b.y1);
    out.x2 = std::max(out.x2, b.x2);
    out.y2 = std::max(out.y2, b.y2);
  }
  return out;
}

BBox enclosing_box(std::span<const Point> points) {
  if (points.empty()) throw Error("empty geometry set");
  BBox out{points[0].x, points[0].y, points[0].x, points[0].y};
  for (const Point& p : points.subspan(1)) {
    out.x1 = std::min(out.x1, p.x);
    out.y1 = std::min(out.y1, p.y);
    out.x2 = std::max(out.x2, p.x);
    out.y2 = std::max(out.y2, p.y);
  }
  return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shortest-augmenting-path solver for the rectangular assignment problem.
// `get(i, j)` must be the cost of pairing row i with column j, rows <= cols.
// Returns the optimal total cost.
template <typename CostFn>
double augmenting_path_cost(int rows, int cols, CostFn get) {
  // 1-indexed potentials with a virtual 0 row/column (classic formulation).
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<int> assigned_row(cols + 1, 0);  // column -> row, 0 = free
  std::vector<int> way(cols + 1, 0);

  for (int i = 1; i <= rows; ++i) {
    assigned_row[0] = i;
    int j0 = 0;
    std::vector<double> min_cost(cols + 1, kInf);
    std::vector<char> used(cols + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = assigned_row[j0];
      double delta = kInf;
      int j1 = -1;
      for (int j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = get(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < min_cost[j]) {
          min_cost[j] = cur;
          way[j] = j0;
        }
        if (min_cost[j] < delta) {
          delta = min_cost[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[assigned_row[j]] += delta;
          v[j] -= delta;
        } else {
          min_cost[j] -= delta;
        }
      }
      j0 = j1;
    } while (assigned_row[j0] != 0);
    do {
      const int j1 = way[j0];
      assigned_row[j0] = assigned_row[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  double total = 0.0;
  for (int j = 1; j <= cols; ++j) {
    if (assigned_row[j] != 0) total += get(assigned_row[j] - 1, j - 1);
  }
  return total;
}

// Optimal cost over a submatrix given by explicit row/column index lists.
double optimal_cost(const std::vector<std::vector<double>>& cost,
                    const std::vector<int>& row_ids,
                    const std::vector<int>& col_ids) {
  const int r = static_cast<int>(row_ids.size());
  const int c = static_cast<int>(col_ids.size());
  if (r == 0 || c == 0) return 0.0;
  if (r <= c) {
    return augmenting_path_cost(
        r, c, [&](int i, int j) { return cost[row_ids[i]][col_ids[j]]; });
  }
  return augmenting_path_cost(
      c, r, [&](int i, int j) { return cost[row_ids[j]][col_ids[i]]; });
}

}  // namespace

Assignment solve_assignment(const std::vector<std::vector<double>>& cost) {
  const int rows = static_cast<int>(cost.size());
  if (rows == 0) throw Error("invalid cost: empty matrix");
  const int cols = static_cast<int>(cost[0].size());
  if (cols == 0) throw Error("invalid cost: empty matrix");
  for (const auto& row : cost) {
    if (static_cast<int>(row.size()) != cols)
      throw Error("invalid cost: ragged matrix");
    for (double c : row) {
      if (!std::isfinite(c) || c < 0.0) throw Error("invalid cost");
    }
  }

  std::vector<int> all_rows(rows), all_cols(cols);
  for (int i = 0; i < rows; ++i) all_rows[i] = i;
  for (int j = 0; j < cols; ++j) all_cols[j] = j;
  const double best = optimal_cost(cost, all_rows, all_cols);

  // Fix pairs one by one in lexicographic order, keeping only choices that
  // still admit a completion with the optimal total cost. Pair lists are
  // sorted by row, so once a row is fixed only later rows may follow.
  const int n_pairs = std::min(rows, cols);
  const double eps = 1e-7 * (1.0 + std::abs(best));
  Assignment result;
  result.pairs.reserve(n_pairs);
  std::vector<char> col_used(cols, 0);
  double fixed_cost = 0.0;
  int next_row = 0;

  for (int k = 0; k < n_pairs; ++k) {
    const int remaining = n_pairs - k - 1;
    bool fixed = false;
    for (int r = next_row; r + remaining < rows && !fixed; ++r) {
      for (int c = 0; c < cols && !fixed; ++c) {
        if (col_used[c]) continue;
        std::vector<int> sub_rows, sub_cols;
        for (int rr = r + 1; rr < rows; ++rr) sub_rows.push_back(rr);
        for (int cc = 0; cc < cols; ++cc) {
          if (!col_used[cc] && cc != c) sub_cols.push_back(cc);
        }
        double completion = 0.0;
        if (remaining > 0) {
          // The completion must place all remaining pairs; rows are the
          // scarce side exactly when no rows may be skipped.
          if (std::min(sub_rows.size(), sub_cols.size()) <
              static_cast<size_t>(remaining)) {
            continue;
          }
          completion = optimal_cost(cost, sub_rows, sub_cols);
        }
        if (fixed_cost + cost[r][c] + completion <= best + eps) {
          result.pairs.emplace_back(r, c);
          fixed_cost += cost[r][c];
          col_used[c] = 1;
          next_row = r + 1;
          fixed = true;
        }
      }
    }
  }

  result.total_cost = fixed_cost;
  return result;
}

}  // namespace figlabel

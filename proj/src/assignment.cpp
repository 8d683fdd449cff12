#include "mofasm/assignment.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mofasm {

Assignment solve_hungarian(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n)
    throw std::invalid_argument("assignment needs a square cost matrix");
  Assignment out;
  if (n == 0)
    return out;

  const double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials; p[j] is the row matched to column j, column 0 is virtual.
  std::vector<double> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j])
          continue;
        double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
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
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  out.col_for_row.assign(n, -1);
  for (int j = 1; j <= n; ++j)
    out.col_for_row[p[j] - 1] = j - 1;
  for (int i = 0; i < n; ++i)
    out.cost += cost(i, out.col_for_row[i]);
  return out;
}

Assignment solve_greedy_two_swap(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n)
    throw std::invalid_argument("assignment needs a square cost matrix");
  Assignment out;
  out.col_for_row.assign(n, -1);

  std::vector<int> order(static_cast<std::size_t>(n) * n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return cost(a / n, a % n) < cost(b / n, b % n); });
  std::vector<char> row_used(n), col_used(n);
  for (int k : order) {
    int i = k / n, j = k % n;
    if (row_used[i] || col_used[j])
      continue;
    row_used[i] = col_used[j] = 1;
    out.col_for_row[i] = j;
  }

  auto& c = out.col_for_row;
  for (bool improved = true; improved;) {
    improved = false;
    for (int i = 0; i < n; ++i)
      for (int k = i + 1; k < n; ++k) {
        double before = cost(i, c[i]) + cost(k, c[k]);
        double after = cost(i, c[k]) + cost(k, c[i]);
        if (after < before - 1e-15) {
          std::swap(c[i], c[k]);
          improved = true;
        }
      }
  }
  for (int i = 0; i < n; ++i)
    out.cost += cost(i, c[i]);
  return out;
}

} // namespace mofasm

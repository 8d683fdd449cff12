// Minimum-cost perfect assignment on square cost matrices.

#ifndef MOFASM_ASSIGNMENT_HPP_
#define MOFASM_ASSIGNMENT_HPP_

#include <vector>

#include <Eigen/Dense>

namespace mofasm {

struct Assignment {
  /// col_for_row[i] is the column assigned to row i.
  std::vector<int> col_for_row;
  double cost = 0;
};

/// Exact O(n^3) Hungarian method (shortest augmenting paths with potentials).
Assignment solve_hungarian(const Eigen::MatrixXd& cost);

/// Greedy nearest pairs followed by pairwise-swap descent until no swap of
/// two rows lowers the cost. Not optimal in general.
Assignment solve_greedy_two_swap(const Eigen::MatrixXd& cost);

} // namespace mofasm

#endif

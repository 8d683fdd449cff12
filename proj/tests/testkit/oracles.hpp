// Independent reference computations for tests. None of these call the
// library code they are used to check.

#ifndef MOFASM_TESTKIT_ORACLES_HPP_
#define MOFASM_TESTKIT_ORACLES_HPP_

#include <vector>

#include "mofasm/assembler.hpp"
#include "mofasm/matcher.hpp"

namespace mofasm::testkit {

/// Rz(yaw) * Ry(pitch) * Rx(roll) as an explicit product.
Mat3 euler_product(double roll, double pitch, double yaw);

/// Minimum over k in {-r..r}^3 of |(f1 - f2 + k) L|.
double brute_min_image(const Vec3& f1, const Vec3& f2, const Mat3& rows, int r);

/// Successive minima of the lattice generated by `rows`, searched over
/// integer combinations in [-r, r]^3.
Vec3 successive_minima(const Mat3& rows, int r = 4);

/// Cheapest assignment by enumerating all permutations (n <= 8).
double brute_assignment_cost(const Eigen::MatrixXd& cost);

struct OracleMatch {
  bool lattice_matched = false;
  bool matched = false;
  double rmse = 0;        // best rmse among states within stol
  double best_max = 0;    // smallest max displacement found
};

/// Exhaustive reference matcher for small cells (per-species classes of at
/// most 4 atoms). Lattice mappings come from all integer bases of L2 with
/// coefficients in [-2,2] compared directly with the rows of L1 (L1 must be
/// reduced). For each mapping a grid of n^3 translations seeds a polish
/// that alternates the optimal permutation (by enumeration) with the
/// least-squares translation for that permutation.
OracleMatch oracle_match(const AtomStructure& s1, const AtomStructure& s2, const MatchTolerances& tol,
                         int grid = 64);

/// Fraction of an a^3 cube outside a sphere of radius r (r < a/2).
double sphere_void_fraction(double r, double a);

} // namespace mofasm::testkit

#endif

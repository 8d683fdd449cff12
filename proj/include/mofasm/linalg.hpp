// Fixed-size vector/matrix aliases used across the library.
//
// Points are stored as column vectors but all lattice algebra follows the
// crystallographic row-vector convention: a lattice matrix holds the lattice
// vectors as rows and x = f * L, which in column form is x = L^T f.

#ifndef MOFASM_LINALG_HPP_
#define MOFASM_LINALG_HPP_

#include <Eigen/Dense>
#include <vector>

namespace mofasm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec3i = Eigen::Vector3i;
using Mat3i = Eigen::Matrix3i;
using Points = std::vector<Vec3>;

inline Mat3 to_real(const Mat3i& m) { return m.cast<double>(); }

} // namespace mofasm

#endif

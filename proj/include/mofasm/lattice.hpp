// Lattice parameterization, fractional/Cartesian transforms, periodic
// distances and Niggli reduction.
//
// Convention: lattice vectors are the rows of a LatticeMatrix and Cartesian
// positions follow x = f * L. Angles are in degrees.

#ifndef MOFASM_LATTICE_HPP_
#define MOFASM_LATTICE_HPP_

#include "mofasm/linalg.hpp"

namespace mofasm {

struct LatticeParams {
  double a = 1, b = 1, c = 1;
  double alpha = 90, beta = 90, gamma = 90;
};

/// Lattice vectors as rows l1, l2, l3 (Angstrom).
struct LatticeMatrix {
  Mat3 rows = Mat3::Identity();

  LatticeMatrix() = default;
  explicit LatticeMatrix(const Mat3& m) : rows(m) {}
  static LatticeMatrix diagonal(double a, double b, double c);

  Vec3 row(int i) const { return rows.row(i).transpose(); }
  double det() const { return rows.determinant(); }
  /// Metric tensor G = L L^T.
  Mat3 metric() const { return rows * rows.transpose(); }
};

/// 1 - cos^2(alpha) - cos^2(beta) - cos^2(gamma) + 2 cos(alpha) cos(beta) cos(gamma)
double volume_discriminant(double alpha, double beta, double gamma);
bool is_valid(const LatticeParams& p);
/// Analytic cell volume abc * sqrt(discriminant).
double analytic_volume(const LatticeParams& p);

/// l1 along +x, l2 in the xy-plane with positive y, l3 with positive z.
/// Throws InvalidLattice / InvalidAngleTriple.
LatticeMatrix params_to_matrix(const LatticeParams& p);
/// Throws DegenerateLattice when a row has norm below 1e-12.
LatticeParams matrix_to_params(const LatticeMatrix& L);

Vec3 frac_to_cart(const Vec3& f, const LatticeMatrix& L);
/// Throws SingularLattice when L is not invertible.
Vec3 cart_to_frac(const Vec3& x, const LatticeMatrix& L);
Points frac_to_cart(const Points& f, const LatticeMatrix& L);
Points cart_to_frac(const Points& x, const LatticeMatrix& L);

double wrap_unit(double x);
Vec3 wrap_frac(const Vec3& f);

/// Fractional displacement f1 - f2 + k with the shortest Cartesian length,
/// k searched over {-range..range}^3 after rounding to the nearest image.
Vec3 min_image_frac(const Vec3& f1, const Vec3& f2, const LatticeMatrix& L,
                    int range = 1);
/// Minimum-image distance. range 1 assumes a reduced cell; pass 2 to widen.
double min_image_distance(const Vec3& f1, const Vec3& f2, const LatticeMatrix& L,
                          int range = 1);

struct NiggliResult {
  LatticeMatrix reduced;
  /// Unimodular change of basis: reduced.rows = transform * L.rows.
  Mat3i transform;
  int iterations = 0;
};

/// Krivy-Gruber reduction with tolerance 1e-5 * V^(1/3).
/// Throws NiggliNonConvergence after `max_iterations` passes.
NiggliResult niggli_reduce(const LatticeMatrix& L, int max_iterations = 100);

/// True when `L` satisfies the Niggli conditions within `eps` (metric units).
bool is_niggli_reduced(const LatticeMatrix& L, double eps);

/// Integer inverse of a unimodular matrix.
Mat3i unimodular_inverse(const Mat3i& m);

} // namespace mofasm

#endif

// Data-parallel geometry kernels. Each kernel has a plain serial reference
// (exhaustive periodic-image search) and an OpenMP version that prunes
// image checks; tests assert the two agree exactly.

#ifndef MOFASM_KERNELS_HPP_
#define MOFASM_KERNELS_HPP_

#include <span>

#include "mofasm/lattice.hpp"

namespace mofasm::kernels {

/// Smallest pair distance including self-images. Expects a reduced cell.
double min_pair_distance_serial(const Points& frac, const LatticeMatrix& L);
double min_pair_distance_omp(const Points& frac, const LatticeMatrix& L);

/// Fraction of the n^3 vertex grid {i/n} farther than radii[a] from every
/// atom a (strict inequality).
double void_fraction_serial(const Points& frac, std::span<const double> radii,
                            const LatticeMatrix& L, int n);
double void_fraction_omp(const Points& frac, std::span<const double> radii,
                         const LatticeMatrix& L, int n);

/// max over grid points of min over atoms (distance - radii[a]); may be
/// negative when every grid point is inside some sphere.
double max_clearance_serial(const Points& frac, std::span<const double> radii,
                            const LatticeMatrix& L, int n);
double max_clearance_omp(const Points& frac, std::span<const double> radii,
                         const LatticeMatrix& L, int n);

/// Interplanar spacings V / |l_j x l_k|; any non-nearest periodic image lies
/// at least half the smallest of these away.
double min_interplanar_spacing(const LatticeMatrix& L);

} // namespace mofasm::kernels

#endif

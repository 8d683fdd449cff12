#include "mofasm/block_frames.hpp"

#include <cmath>
#include <stdexcept>

#include "mofasm/elements.hpp"

namespace mofasm {

namespace {

constexpr double kGapTol = 1e-6;
constexpr double kRefTol = 1e-9;

// Sign rule for one PCA axis. In order of precedence: the mass-weighted
// mean displacement, the third moment of the projections, and finally the
// first non-negligible component of the axis itself.
Vec3 orient_axis(const Vec3& axis, const Points& centered, const Vec3& mass_ref) {
  double ref = axis.dot(mass_ref);
  if (std::abs(ref) >= kRefTol)
    return ref < 0 ? Vec3(-axis) : axis;

  double skew = 0, scale = 0;
  for (const Vec3& p : centered) {
    double t = p.dot(axis);
    skew += t * t * t;
    scale += std::abs(t * t * t);
  }
  if (scale > 0 && std::abs(skew) > 1e-9 * scale)
    return skew < 0 ? Vec3(-axis) : axis;

  for (int i = 0; i < 3; ++i)
    if (std::abs(axis[i]) > 1e-12)
      return axis[i] < 0 ? Vec3(-axis) : axis;
  return axis;
}

} // namespace

LocalFrame extract_local_frame(const Points& global_coords, const std::vector<int>& species) {
  const std::size_t n = global_coords.size();
  if (n == 0)
    throw std::invalid_argument("extract_local_frame: empty block");
  if (species.size() != n)
    throw std::invalid_argument("extract_local_frame: species/coordinate count mismatch");

  LocalFrame out;
  out.block.species = species;
  out.block.molecular_weight = molecular_weight(species);

  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : global_coords)
    centroid += p;
  centroid /= static_cast<double>(n);
  out.centroid = centroid;

  if (n == 1) {
    out.block.local_coords = {Vec3::Zero()};
    out.degenerate = true;
    return out;
  }

  Points centered;
  centered.reserve(n);
  Mat3 cov = Mat3::Zero();
  Vec3 mass_ref = Vec3::Zero();
  double total_mass = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 d = global_coords[i] - centroid;
    centered.push_back(d);
    cov += d * d.transpose();
    double m = atomic_mass(species[i]);
    mass_ref += m * d;
    total_mass += m;
  }
  cov /= static_cast<double>(n);
  if (total_mass > 0)
    mass_ref /= total_mass;

  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  // ascending order from Eigen; we want descending variance
  Vec3 lambda = eig.eigenvalues();
  Vec3 e1 = eig.eigenvectors().col(2);
  Vec3 e2 = eig.eigenvectors().col(1);
  out.degenerate = (lambda[2] - lambda[1] < kGapTol) || (lambda[1] - lambda[0] < kGapTol);

  e1 = orient_axis(e1, centered, mass_ref);
  e2 = orient_axis(e2, centered, mass_ref);
  Vec3 e3 = e1.cross(e2);

  Mat3 R;
  R.col(0) = e1;
  R.col(1) = e2;
  R.col(2) = e3;
  out.rotation = R;

  out.block.local_coords.reserve(n);
  for (const Vec3& d : centered)
    out.block.local_coords.push_back(R.transpose() * d);
  out.block.pca_span = pca_span(out.block.local_coords);
  return out;
}

Vec3 pca_span(const Points& local_coords) {
  if (local_coords.empty())
    return Vec3::Zero();
  Vec3 lo = local_coords.front(), hi = local_coords.front();
  for (const Vec3& p : local_coords) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return hi - lo;
}

Vec3 pca_span(const BuildingBlock& block) { return pca_span(block.local_coords); }

Vec3 rotated_principal_axis(const RotationMatrix& R) { return R.col(0); }

BuildingBlock make_block(std::vector<int> species, Points local_coords, std::string smiles) {
  if (species.size() != local_coords.size())
    throw std::invalid_argument("make_block: species/coordinate count mismatch");
  BuildingBlock b;
  b.molecular_weight = molecular_weight(species);
  b.pca_span = pca_span(local_coords);
  b.species = std::move(species);
  b.local_coords = std::move(local_coords);
  b.smiles = std::move(smiles);
  return b;
}

} // namespace mofasm

// SE(3)-invariant local frames for rigid building blocks, plus the
// per-block spatial features used in pre-training prompts.

#ifndef MOFASM_BLOCK_FRAMES_HPP_
#define MOFASM_BLOCK_FRAMES_HPP_

#include <string>
#include <vector>

#include "mofasm/lattice.hpp"
#include "mofasm/rotations.hpp"

namespace mofasm {

struct BuildingBlock {
  std::vector<int> species;
  /// Centered, principal axis along +x.
  Points local_coords;
  /// Opaque label, carried through untouched.
  std::string smiles;
  double molecular_weight = 0;
  Vec3 pca_span = Vec3::Zero();

  std::size_t size() const { return species.size(); }
};

/// Fractional translation of the block centroid plus its orientation.
struct BlockPose {
  Vec3 translation = Vec3::Zero();
  EulerAngles euler;
};

struct LocalFrame {
  BuildingBlock block;
  /// Maps local to global: global = R * local + centroid.
  RotationMatrix rotation = Mat3::Identity();
  Vec3 centroid = Vec3::Zero();
  /// Two PCA eigenvalues closer than 1e-6; the frame is deterministic but
  /// not guaranteed to be invariant under rigid motions.
  bool degenerate = false;
};

/// Throws UnknownElement for species outside the mass table and
/// std::invalid_argument for empty or mismatched input.
LocalFrame extract_local_frame(const Points& global_coords, const std::vector<int>& species);

/// Per-axis extent (max - min) of the local coordinates.
Vec3 pca_span(const BuildingBlock& block);
Vec3 pca_span(const Points& local_coords);

/// Image of the local principal axis (1,0,0) under R.
Vec3 rotated_principal_axis(const RotationMatrix& R);

/// Build a block from coordinates that are already in the local frame.
BuildingBlock make_block(std::vector<int> species, Points local_coords, std::string smiles = {});

} // namespace mofasm

#endif

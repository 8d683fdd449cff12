// Block-level <-> atom-level conversion for periodic structures.

#ifndef MOFASM_ASSEMBLER_HPP_
#define MOFASM_ASSEMBLER_HPP_

#include <string>
#include <vector>

#include "mofasm/block_frames.hpp"
#include "mofasm/lattice.hpp"

namespace mofasm {

struct AtomStructure {
  std::vector<int> species;
  /// Wrapped to [0,1).
  Points frac_coords;
  LatticeMatrix lattice;

  std::size_t size() const { return species.size(); }
};

struct AssemblySpec {
  LatticeParams lattice;
  std::vector<BuildingBlock> blocks;
  std::vector<BlockPose> poses;
};

/// Atoms are emitted grouped by block, in block order.
/// Throws InvalidLattice / InvalidAngleTriple / CountMismatch.
AtomStructure assemble(const AssemblySpec& spec);

/// Inverse of assemble for a given atom partition. Blocks crossing the cell
/// boundary are unwrapped by chaining minimum images from the first atom.
/// Throws InvalidPartition.
AssemblySpec disassemble(const AtomStructure& structure,
                         const std::vector<std::vector<std::size_t>>& partition);

/// Smallest distance between any two atoms, periodic images included (a
/// lone atom reports its distance to its own nearest image).
double min_interatomic_distance(const AtomStructure& structure);

/// Niggli-reduces the cell and re-expresses the coordinates in it.
AtomStructure reduce_structure(const AtomStructure& structure);

/// Minimal P1 CIF (cell parameters + fractional atom sites).
std::string write_cif(const AtomStructure& structure, const std::string& name = "mofasm");

} // namespace mofasm

#endif

// Deterministic fixtures shared by the unit and acceptance tests.

#ifndef MOFASM_TESTKIT_FIXTURES_HPP_
#define MOFASM_TESTKIT_FIXTURES_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mofasm/assembler.hpp"
#include "mofasm/io.hpp"

namespace mofasm::testkit {

/// Round to `decimals` places (half away from zero on the binary value).
double quantize(double v, int decimals);

/// Random point cloud with well separated principal variances and a mass
/// reference that is not orthogonal to any principal axis.
struct RawBlock {
  std::vector<int> species;
  Points coords;  // arbitrary frame
};
RawBlock random_raw_block(std::mt19937_64& rng, int n_atoms);

/// 20 non-degenerate blocks (4..13 atoms), already in their local frames.
const std::vector<BuildingBlock>& fixture_blocks();
/// The raw point clouds the fixture blocks were extracted from.
const std::vector<RawBlock>& fixture_raw_blocks();

/// Valid triclinic parameters with lengths in [lmin, lmax] and angles in
/// [amin, amax] degrees.
LatticeParams random_lattice(std::mt19937_64& rng, double lmin, double lmax, double amin, double amax);

/// Random pose with Euler angles inside the canonical ranges.
BlockPose random_pose(std::mt19937_64& rng);

/// Lattice quantized to 2 decimals, poses to 3, so that rendering and
/// parsing reproduce the record exactly.
StructureRecord quantized(StructureRecord r);

/// 1..max_blocks fixture blocks with random poses in a random cell.
StructureRecord random_record(std::mt19937_64& rng, int max_blocks, const std::string& id);
std::vector<StructureRecord> fixture_records(std::size_t count, std::uint64_t seed, bool quantize_values);

/// Random unimodular integer matrix (product of elementary shears), det +1.
Mat3i random_unimodular(std::mt19937_64& rng, int shears, int max_coeff = 2);

/// A ground truth and a prediction drawn from a mix of perturbations
/// (small jitter, displaced atoms, unrelated sites, strained cells, large
/// jitter). The ground truth lattice is Niggli-reduced; the prediction is
/// permuted, shifted, rotated and re-expressed in a sheared basis whose
/// inverse has entries within [-2,2]. At most 8 atoms, species classes of
/// at most 3.
struct MatcherCase {
  AtomStructure gt;
  AtomStructure pred;
  std::string kind;
};
MatcherCase random_matcher_case(std::mt19937_64& rng);

/// Re-express `s` in the basis U*L rotated by Q, with atoms permuted and
/// shifted by `shift` (fractional).
AtomStructure re_express(const AtomStructure& s, const Mat3i& U, const Mat3& Q, const Vec3& shift,
                         std::mt19937_64& rng);

/// Two blocks (Zn and a four-atom linker) in a hexagonal-ish cell, built
/// by hand so the golden texts do not depend on library RNG distributions.
AssemblySpec golden_spec();

/// 27 single-atom blocks of distinct species (Z = 1..27) on a 3x3x3 grid in
/// a 12 A cube, so the normalization length is 4 A. `moved` displaces site
/// 13 by `normalized` (in units of that length, as seen after the fitted
/// shift) along a fixed direction.
StructureRecord grid27_record();
StructureRecord grid27_moved(double normalized);

} // namespace mofasm::testkit

#endif

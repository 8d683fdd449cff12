#include "mofasm/assembler.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>

#include "mofasm/elements.hpp"
#include "mofasm/error.hpp"
#include "mofasm/kernels.hpp"

namespace mofasm {

AtomStructure assemble(const AssemblySpec& spec) {
  if (spec.blocks.size() != spec.poses.size())
    throw Error(ErrorKind::CountMismatch, std::to_string(spec.blocks.size()) + " blocks but " +
                                              std::to_string(spec.poses.size()) + " poses");
  LatticeMatrix L = params_to_matrix(spec.lattice);
  Mat3 inv = L.rows.transpose().inverse();

  AtomStructure out;
  out.lattice = L;
  for (std::size_t m = 0; m < spec.blocks.size(); ++m) {
    const BuildingBlock& block = spec.blocks[m];
    if (block.species.size() != block.local_coords.size())
      throw Error(ErrorKind::CountMismatch, "block " + std::to_string(m) + " species/coords differ");
    RotationMatrix R = euler_to_matrix(spec.poses[m].euler);
    Vec3 t = frac_to_cart(spec.poses[m].translation, L);
    for (std::size_t i = 0; i < block.size(); ++i) {
      out.species.push_back(block.species[i]);
      out.frac_coords.push_back(wrap_frac(inv * (R * block.local_coords[i] + t)));
    }
  }
  return out;
}

AssemblySpec disassemble(const AtomStructure& structure,
                         const std::vector<std::vector<std::size_t>>& partition) {
  const std::size_t n = structure.size();
  if (structure.frac_coords.size() != n)
    throw Error(ErrorKind::InvalidPartition, "species/coordinate count mismatch");
  std::vector<int> seen(n, 0);
  for (const auto& group : partition) {
    if (group.empty())
      throw Error(ErrorKind::InvalidPartition, "empty block");
    for (std::size_t idx : group) {
      if (idx >= n)
        throw Error(ErrorKind::InvalidPartition, "atom index " + std::to_string(idx) + " out of range");
      if (seen[idx]++)
        throw Error(ErrorKind::InvalidPartition, "atom index " + std::to_string(idx) + " repeated");
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!seen[i])
      throw Error(ErrorKind::InvalidPartition, "atom index " + std::to_string(i) + " not covered");

  AssemblySpec spec;
  spec.lattice = matrix_to_params(structure.lattice);
  // Cartesian frame of the standard orientation that assemble() will use.
  LatticeMatrix L = params_to_matrix(spec.lattice);

  for (const auto& group : partition) {
    Points frac;
    std::vector<int> species;
    frac.push_back(structure.frac_coords[group[0]]);
    species.push_back(structure.species[group[0]]);
    for (std::size_t k = 1; k < group.size(); ++k) {
      const Vec3& f = structure.frac_coords[group[k]];
      // attach to the closest atom already placed
      std::size_t anchor = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < frac.size(); ++j) {
        double d = min_image_distance(f, frac[j], L);
        if (d < best) {
          best = d;
          anchor = j;
        }
      }
      frac.push_back(frac[anchor] + min_image_frac(f, frac[anchor], L));
      species.push_back(structure.species[group[k]]);
    }

    LocalFrame lf = extract_local_frame(frac_to_cart(frac, L), species);
    BlockPose pose;
    pose.translation = wrap_frac(cart_to_frac(lf.centroid, L));
    pose.euler = matrix_to_euler(lf.rotation);
    spec.blocks.push_back(std::move(lf.block));
    spec.poses.push_back(pose);
  }
  return spec;
}

AtomStructure reduce_structure(const AtomStructure& structure) {
  NiggliResult nr = niggli_reduce(structure.lattice);
  // x = f L = f' (T L)  =>  f' = f T^-1
  Mat3 tinv_t = to_real(unimodular_inverse(nr.transform)).transpose();
  AtomStructure out;
  out.species = structure.species;
  out.lattice = nr.reduced;
  out.frac_coords.reserve(structure.size());
  for (const Vec3& f : structure.frac_coords)
    out.frac_coords.push_back(wrap_frac(tinv_t * f));
  return out;
}

double min_interatomic_distance(const AtomStructure& structure) {
  if (structure.size() == 0)
    throw std::invalid_argument("min_interatomic_distance: empty structure");
  AtomStructure reduced = reduce_structure(structure);
  return kernels::min_pair_distance_omp(reduced.frac_coords, reduced.lattice);
}

std::string write_cif(const AtomStructure& structure, const std::string& name) {
  LatticeParams p = matrix_to_params(structure.lattice);
  std::string out;
  char buf[1024];
  out += "data_" + name + "\n";
  out += "_symmetry_space_group_name_H-M   'P 1'\n";
  out += "_symmetry_Int_Tables_number      1\n";
  std::snprintf(buf, sizeof buf,
                "_cell_length_a    %.6f\n_cell_length_b    %.6f\n_cell_length_c    %.6f\n"
                "_cell_angle_alpha %.6f\n_cell_angle_beta  %.6f\n_cell_angle_gamma %.6f\n",
                p.a, p.b, p.c, p.alpha, p.beta, p.gamma);
  out += buf;
  std::snprintf(buf, sizeof buf, "_cell_volume      %.6f\n", std::abs(structure.lattice.det()));
  out += buf;
  out += "loop_\n_atom_site_label\n_atom_site_type_symbol\n"
         "_atom_site_fract_x\n_atom_site_fract_y\n_atom_site_fract_z\n";
  std::map<int, int> counter;
  for (std::size_t i = 0; i < structure.size(); ++i) {
    std::string sym(element_symbol(structure.species[i]));
    int k = ++counter[structure.species[i]];
    const Vec3& f = structure.frac_coords[i];
    std::snprintf(buf, sizeof buf, "%s%d %s %.6f %.6f %.6f\n", sym.c_str(), k, sym.c_str(),
                  f.x(), f.y(), f.z());
    out += buf;
  }
  return out;
}

} // namespace mofasm

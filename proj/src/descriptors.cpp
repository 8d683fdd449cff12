#include "mofasm/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mofasm/elements.hpp"
#include "mofasm/kernels.hpp"

namespace mofasm {

namespace {

void check_grid(int n) {
  if (n < 8)
    throw std::invalid_argument("grid resolution must be at least 8 per axis");
}

std::vector<double> radii_of(const AtomStructure& s, double probe) {
  std::vector<double> r;
  r.reserve(s.size());
  for (int z : s.species)
    r.push_back(vdw_radius(z) + probe);
  return r;
}

} // namespace

double unit_cell_volume(const LatticeMatrix& L) { return std::abs(L.det()); }

double density(const AtomStructure& structure) {
  if (structure.size() == 0)
    throw std::invalid_argument("density of an empty structure");
  double mass = molecular_weight(structure.species);
  // amu -> g over A^3 -> cm^3; the 1e-24 factors cancel
  return mass * kAmuToGram / (unit_cell_volume(structure.lattice) * 1e-24);
}

double void_fraction_grid(const AtomStructure& structure, double probe_radius, int n_per_axis,
                          Exec exec) {
  check_grid(n_per_axis);
  AtomStructure reduced = reduce_structure(structure);
  auto radii = radii_of(reduced, probe_radius);
  return exec == Exec::Serial
             ? kernels::void_fraction_serial(reduced.frac_coords, radii, reduced.lattice, n_per_axis)
             : kernels::void_fraction_omp(reduced.frac_coords, radii, reduced.lattice, n_per_axis);
}

double lcd_grid(const AtomStructure& structure, int n_per_axis, Exec exec) {
  check_grid(n_per_axis);
  if (structure.size() == 0)
    throw std::invalid_argument("lcd of an empty structure");
  AtomStructure reduced = reduce_structure(structure);
  auto radii = radii_of(reduced, 0.0);
  double clearance =
      exec == Exec::Serial
          ? kernels::max_clearance_serial(reduced.frac_coords, radii, reduced.lattice, n_per_axis)
          : kernels::max_clearance_omp(reduced.frac_coords, radii, reduced.lattice, n_per_axis);
  return 2 * std::max(clearance, 0.0);
}

DescriptorReport compute_descriptors(const AtomStructure& structure, double probe_radius,
                                     int n_per_axis) {
  DescriptorReport r;
  r.ucv = unit_cell_volume(structure.lattice);
  r.density = density(structure);
  r.void_fraction = void_fraction_grid(structure, probe_radius, n_per_axis);
  r.lcd = lcd_grid(structure, n_per_axis);
  r.grid_resolution = n_per_axis;
  r.probe_radius = probe_radius;
  return r;
}

} // namespace mofasm

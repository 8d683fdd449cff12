// Grid-based geometric descriptors: cell volume, density, void fraction
// and largest cavity diameter. The grid estimators are approximations and
// are reported as vf_grid / lcd_grid.

#ifndef MOFASM_DESCRIPTORS_HPP_
#define MOFASM_DESCRIPTORS_HPP_

#include "mofasm/assembler.hpp"
#include "mofasm/exec.hpp"

namespace mofasm {

struct DescriptorReport {
  double ucv = 0;            // A^3
  double density = 0;        // g/cm^3
  double void_fraction = 0;  // vf_grid
  double lcd = 0;            // lcd_grid, A
  int grid_resolution = 0;
  double probe_radius = 0;
};

constexpr double kAmuToGram = 1.66054e-24;

double unit_cell_volume(const LatticeMatrix& L);
/// Throws UnknownElement; std::invalid_argument for an empty structure.
double density(const AtomStructure& structure);

/// Throws std::invalid_argument when n_per_axis < 8.
double void_fraction_grid(const AtomStructure& structure, double probe_radius, int n_per_axis,
                          Exec exec = Exec::Parallel);
double lcd_grid(const AtomStructure& structure, int n_per_axis, Exec exec = Exec::Parallel);

DescriptorReport compute_descriptors(const AtomStructure& structure, double probe_radius = 0.0,
                                     int n_per_axis = 64);

} // namespace mofasm

#endif

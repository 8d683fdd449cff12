// Element data: symbols, standard atomic weights and van der Waals radii
// for Z = 1..96.

#ifndef MOFASM_ELEMENTS_HPP_
#define MOFASM_ELEMENTS_HPP_

#include <span>
#include <string_view>

namespace mofasm {

constexpr int kMaxElement = 96;

bool is_known_element(int z);
/// Throws UnknownElement.
std::string_view element_symbol(int z);
/// Case-sensitive symbol lookup ("Zn", "C"). Throws UnknownElement.
int atomic_number(std::string_view symbol);
/// Standard atomic weight in amu. Throws UnknownElement.
double atomic_mass(int z);
/// Bondi radius where tabulated, 2.00 A otherwise. Throws UnknownElement.
double vdw_radius(int z);

/// Sum of atomic masses; empty input gives 0.
double molecular_weight(std::span<const int> species);

} // namespace mofasm

#endif

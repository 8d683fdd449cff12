#include "mofasm/elements.hpp"

#include <array>
#include <string>

#include "mofasm/error.hpp"

namespace mofasm {

namespace {

struct ElementData {
  const char* symbol;
  double mass;  // IUPAC conventional / standard atomic weight, amu
  double vdw;   // Bondi (1964) radius, 0 when not tabulated
};

// index = Z - 1
constexpr std::array<ElementData, kMaxElement> kElements = {{
    {"H", 1.008, 1.20},     {"He", 4.0026, 1.40},   {"Li", 6.94, 1.82},
    {"Be", 9.0122, 0},      {"B", 10.81, 0},        {"C", 12.011, 1.70},
    {"N", 14.007, 1.55},    {"O", 15.999, 1.52},    {"F", 18.998, 1.47},
    {"Ne", 20.180, 1.54},   {"Na", 22.990, 2.27},   {"Mg", 24.305, 1.73},
    {"Al", 26.982, 0},      {"Si", 28.085, 2.10},   {"P", 30.974, 1.80},
    {"S", 32.06, 1.80},     {"Cl", 35.45, 1.75},    {"Ar", 39.948, 1.88},
    {"K", 39.098, 2.75},    {"Ca", 40.078, 0},      {"Sc", 44.956, 0},
    {"Ti", 47.867, 0},      {"V", 50.942, 0},       {"Cr", 51.996, 0},
    {"Mn", 54.938, 0},      {"Fe", 55.845, 0},      {"Co", 58.933, 0},
    {"Ni", 58.693, 1.63},   {"Cu", 63.546, 1.40},   {"Zn", 65.38, 1.39},
    {"Ga", 69.723, 1.87},   {"Ge", 72.630, 0},      {"As", 74.922, 1.85},
    {"Se", 78.971, 1.90},   {"Br", 79.904, 1.85},   {"Kr", 83.798, 2.02},
    {"Rb", 85.468, 0},      {"Sr", 87.62, 0},       {"Y", 88.906, 0},
    {"Zr", 91.224, 0},      {"Nb", 92.906, 0},      {"Mo", 95.95, 0},
    {"Tc", 97.907, 0},      {"Ru", 101.07, 0},      {"Rh", 102.91, 0},
    {"Pd", 106.42, 1.63},   {"Ag", 107.87, 1.72},   {"Cd", 112.41, 1.58},
    {"In", 114.82, 1.93},   {"Sn", 118.71, 2.17},   {"Sb", 121.76, 0},
    {"Te", 127.60, 2.06},   {"I", 126.90, 1.98},    {"Xe", 131.29, 2.16},
    {"Cs", 132.91, 0},      {"Ba", 137.33, 0},      {"La", 138.91, 0},
    {"Ce", 140.12, 0},      {"Pr", 140.91, 0},      {"Nd", 144.24, 0},
    {"Pm", 144.91, 0},      {"Sm", 150.36, 0},      {"Eu", 151.96, 0},
    {"Gd", 157.25, 0},      {"Tb", 158.93, 0},      {"Dy", 162.50, 0},
    {"Ho", 164.93, 0},      {"Er", 167.26, 0},      {"Tm", 168.93, 0},
    {"Yb", 173.05, 0},      {"Lu", 174.97, 0},      {"Hf", 178.49, 0},
    {"Ta", 180.95, 0},      {"W", 183.84, 0},       {"Re", 186.21, 0},
    {"Os", 190.23, 0},      {"Ir", 192.22, 0},      {"Pt", 195.08, 1.72},
    {"Au", 196.97, 1.66},   {"Hg", 200.59, 1.55},   {"Tl", 204.38, 1.96},
    {"Pb", 207.2, 2.02},    {"Bi", 208.98, 0},      {"Po", 208.98, 0},
    {"At", 209.99, 0},      {"Rn", 222.02, 0},      {"Fr", 223.02, 0},
    {"Ra", 226.03, 0},      {"Ac", 227.03, 0},      {"Th", 232.04, 0},
    {"Pa", 231.04, 0},      {"U", 238.03, 1.86},    {"Np", 237.05, 0},
    {"Pu", 244.06, 0},      {"Am", 243.06, 0},      {"Cm", 247.07, 0},
}};

// Radius used for elements without a Bondi value (CSD convention).
constexpr double kDefaultVdw = 2.00;

const ElementData& lookup(int z) {
  if (!is_known_element(z))
    throw Error(ErrorKind::UnknownElement, "atomic number " + std::to_string(z));
  return kElements[z - 1];
}

} // namespace

bool is_known_element(int z) { return z >= 1 && z <= kMaxElement; }

std::string_view element_symbol(int z) { return lookup(z).symbol; }

int atomic_number(std::string_view symbol) {
  for (int z = 1; z <= kMaxElement; ++z)
    if (symbol == kElements[z - 1].symbol)
      return z;
  throw Error(ErrorKind::UnknownElement, "element symbol '" + std::string(symbol) + "'");
}

double atomic_mass(int z) { return lookup(z).mass; }

double vdw_radius(int z) {
  double r = lookup(z).vdw;
  return r > 0 ? r : kDefaultVdw;
}

double molecular_weight(std::span<const int> species) {
  double total = 0;
  for (int z : species)
    total += atomic_mass(z);
  return total;
}

} // namespace mofasm

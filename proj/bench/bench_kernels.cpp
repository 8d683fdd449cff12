// Serial reference against OpenMP for the grid and pair kernels, plus the
// matcher on a mid-sized cell. Run with --benchmark_filter=... as usual.

#include <random>

#include <benchmark/benchmark.h>

#include "mofasm/assembler.hpp"
#include "mofasm/descriptors.hpp"
#include "mofasm/elements.hpp"
#include "mofasm/kernels.hpp"
#include "mofasm/matcher.hpp"

using namespace mofasm;

namespace {

// n random atoms in a reduced 20 A cell
AtomStructure random_cell(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  static const int species[] = {30, 8, 6, 1};
  AtomStructure s;
  s.lattice = params_to_matrix({20, 21, 22, 88, 91, 93});
  for (int i = 0; i < n; ++i) {
    s.species.push_back(species[i % 4]);
    s.frac_coords.push_back(Vec3(u(rng), u(rng), u(rng)));
  }
  return reduce_structure(s);
}

std::vector<double> radii(const AtomStructure& s) {
  std::vector<double> r;
  for (int z : s.species)
    r.push_back(vdw_radius(z));
  return r;
}

void BM_void_fraction(benchmark::State& state, Exec exec) {
  AtomStructure s = random_cell(static_cast<int>(state.range(0)), 1);
  auto r = radii(s);
  const int n = static_cast<int>(state.range(1));
  for (auto _ : state) {
    double v = exec == Exec::Serial ? kernels::void_fraction_serial(s.frac_coords, r, s.lattice, n)
                                    : kernels::void_fraction_omp(s.frac_coords, r, s.lattice, n);
    benchmark::DoNotOptimize(v);
  }
  state.SetItemsProcessed(state.iterations() * n * n * n);
}

void BM_max_clearance(benchmark::State& state, Exec exec) {
  AtomStructure s = random_cell(static_cast<int>(state.range(0)), 2);
  auto r = radii(s);
  const int n = static_cast<int>(state.range(1));
  for (auto _ : state) {
    double v = exec == Exec::Serial ? kernels::max_clearance_serial(s.frac_coords, r, s.lattice, n)
                                    : kernels::max_clearance_omp(s.frac_coords, r, s.lattice, n);
    benchmark::DoNotOptimize(v);
  }
  state.SetItemsProcessed(state.iterations() * n * n * n);
}

void BM_min_pair(benchmark::State& state, Exec exec) {
  AtomStructure s = random_cell(static_cast<int>(state.range(0)), 3);
  for (auto _ : state) {
    double v = exec == Exec::Serial ? kernels::min_pair_distance_serial(s.frac_coords, s.lattice)
                                    : kernels::min_pair_distance_omp(s.frac_coords, s.lattice);
    benchmark::DoNotOptimize(v);
  }
}

void BM_structures_match(benchmark::State& state) {
  AtomStructure gt = random_cell(static_cast<int>(state.range(0)), 4);
  AtomStructure pred = gt;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0, 0.005);
  for (Vec3& f : pred.frac_coords)
    f = wrap_frac(f + Vec3(g(rng), g(rng), g(rng)));
  for (auto _ : state)
    benchmark::DoNotOptimize(structures_match(pred, gt, kStrictTolerances));
}

} // namespace

BENCHMARK_CAPTURE(BM_void_fraction, serial, Exec::Serial)->Args({100, 32})->Args({100, 64})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_void_fraction, omp, Exec::Parallel)->Args({100, 32})->Args({100, 64})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_max_clearance, serial, Exec::Serial)->Args({100, 32})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_max_clearance, omp, Exec::Parallel)->Args({100, 32})->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_min_pair, serial, Exec::Serial)->Arg(200)->Arg(800)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_min_pair, omp, Exec::Parallel)->Arg(200)->Arg(800)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_structures_match)->Arg(24)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

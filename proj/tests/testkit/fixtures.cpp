#include "fixtures.hpp"

#include <algorithm>
#include <cmath>

#include "mofasm/block_frames.hpp"
#include "mofasm/elements.hpp"
#include "mofasm/rotations.hpp"

namespace mofasm::testkit {

double quantize(double v, int decimals) {
  double s = std::pow(10.0, decimals);
  return std::round(v * s) / s;
}

namespace {

// gaps between the principal variances, relative to the largest
bool well_conditioned(const RawBlock& b) {
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : b.coords)
    c += p;
  c /= static_cast<double>(b.coords.size());
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : b.coords)
    cov += (p - c) * (p - c).transpose();
  cov /= static_cast<double>(b.coords.size());
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  Vec3 ev = eig.eigenvalues();  // ascending
  if (ev[2] - ev[1] < 0.1 * ev[2] || ev[1] - ev[0] < 0.1 * ev[2])
    return false;
  LocalFrame f = extract_local_frame(b.coords, b.species);
  Vec3 ref = Vec3::Zero();
  double mass = 0;
  for (std::size_t i = 0; i < b.coords.size(); ++i) {
    double m = atomic_mass(b.species[i]);
    ref += m * (b.coords[i] - c);
    mass += m;
  }
  ref /= mass;
  for (int k = 0; k < 3; ++k)
    if (std::abs(ref.dot(f.rotation.col(k))) < 1e-2)
      return false;
  return true;
}

} // namespace

RawBlock random_raw_block(std::mt19937_64& rng, int n_atoms) {
  static const int kSpecies[] = {1, 6, 7, 8, 29, 30};
  std::uniform_int_distribution<int> pick(0, 5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Vec3 sigma(2.6, 1.3, 0.5);
  for (;;) {
    RawBlock b;
    for (int i = 0; i < n_atoms; ++i) {
      b.species.push_back(kSpecies[pick(rng)]);
      b.coords.push_back(Vec3(sigma[0] * gauss(rng), sigma[1] * gauss(rng), sigma[2] * gauss(rng)));
    }
    if (well_conditioned(b))
      return b;
  }
}

const std::vector<RawBlock>& fixture_raw_blocks() {
  static const std::vector<RawBlock> blocks = [] {
    std::vector<RawBlock> out;
    std::mt19937_64 rng(20240611);
    for (int k = 0; k < 20; ++k)
      out.push_back(random_raw_block(rng, 4 + k % 10));
    return out;
  }();
  return blocks;
}

const std::vector<BuildingBlock>& fixture_blocks() {
  static const std::vector<BuildingBlock> blocks = [] {
    std::vector<BuildingBlock> out;
    int k = 0;
    for (const RawBlock& r : fixture_raw_blocks()) {
      BuildingBlock b = extract_local_frame(r.coords, r.species).block;
      b.smiles = "B" + std::to_string(k++);
      b.pca_span = pca_span(b);
      out.push_back(b);
    }
    return out;
  }();
  return blocks;
}

LatticeParams random_lattice(std::mt19937_64& rng, double lmin, double lmax, double amin, double amax) {
  std::uniform_real_distribution<double> len(lmin, lmax), ang(amin, amax);
  for (;;) {
    LatticeParams p{len(rng), len(rng), len(rng), ang(rng), ang(rng), ang(rng)};
    if (volume_discriminant(p.alpha, p.beta, p.gamma) > 0.2)
      return p;
  }
}

BlockPose random_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double pi = 3.14159265358979323846;
  BlockPose p;
  p.translation = Vec3(u(rng), u(rng), u(rng));
  p.euler = {pi * (2 * u(rng) - 1), 0.5 * pi * (2 * u(rng) - 1), pi * (2 * u(rng) - 1)};
  return p;
}

StructureRecord quantized(StructureRecord r) {
  LatticeParams& l = r.spec.lattice;
  for (double* v : {&l.a, &l.b, &l.c, &l.alpha, &l.beta, &l.gamma})
    *v = quantize(*v, 2);
  for (BlockPose& p : r.spec.poses) {
    for (int k = 0; k < 3; ++k)
      p.translation[k] = quantize(p.translation[k], 3);
    // stay inside the canonical ranges after rounding
    p.euler.roll = quantize(std::clamp(p.euler.roll, -3.141, 3.141), 3);
    p.euler.pitch = quantize(std::clamp(p.euler.pitch, -1.570, 1.570), 3);
    p.euler.yaw = quantize(std::clamp(p.euler.yaw, -3.141, 3.141), 3);
  }
  return r;
}

StructureRecord random_record(std::mt19937_64& rng, int max_blocks, const std::string& id) {
  const auto& blocks = fixture_blocks();
  std::uniform_int_distribution<int> nblocks(1, max_blocks);
  std::uniform_int_distribution<std::size_t> pick(0, blocks.size() - 1);
  StructureRecord r;
  r.id = id;
  r.spec.lattice = random_lattice(rng, 8.0, 20.0, 70.0, 110.0);
  int m = nblocks(rng);
  for (int k = 0; k < m; ++k) {
    r.spec.blocks.push_back(blocks[pick(rng)]);
    r.spec.poses.push_back(random_pose(rng));
  }
  r.topology_code = "pcu";
  r.topology_description = "a primitive cubic net";
  return r;
}

std::vector<StructureRecord> fixture_records(std::size_t count, std::uint64_t seed, bool quantize_values) {
  std::mt19937_64 rng(seed);
  std::vector<StructureRecord> out;
  for (std::size_t k = 0; k < count; ++k) {
    StructureRecord r = random_record(rng, 4, "fx" + std::to_string(k));
    out.push_back(quantize_values ? quantized(std::move(r)) : std::move(r));
  }
  return out;
}

Mat3i random_unimodular(std::mt19937_64& rng, int shears, int max_coeff) {
  std::uniform_int_distribution<int> axis(0, 2), coeff(-max_coeff, max_coeff);
  Mat3i m = Mat3i::Identity();
  for (int s = 0; s < shears; ++s) {
    int i = axis(rng), j = axis(rng);
    if (i == j)
      continue;
    Mat3i e = Mat3i::Identity();
    e(i, j) = coeff(rng);
    m = e * m;
  }
  return m;
}

AtomStructure re_express(const AtomStructure& s, const Mat3i& U, const Mat3& Q, const Vec3& shift,
                         std::mt19937_64& rng) {
  // rows' = U L Q^T, and x = L^T f = Q^T rows'^T f'  =>  f' = U^-T f
  Mat3 uinv_t = to_real(unimodular_inverse(U)).transpose();
  std::vector<std::size_t> perm(s.size());
  for (std::size_t i = 0; i < perm.size(); ++i)
    perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  AtomStructure out;
  out.lattice = LatticeMatrix(to_real(U) * s.lattice.rows * Q.transpose());
  for (std::size_t i : perm) {
    out.species.push_back(s.species[i]);
    out.frac_coords.push_back(wrap_frac(uinv_t * (s.frac_coords[i] + shift)));
  }
  return out;
}

MatcherCase random_matcher_case(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> natoms(2, 8);
  static const int kZ[] = {30, 8, 6, 1};

  MatcherCase c;
  int n = natoms(rng);
  for (int i = 0; i < n; ++i)
    c.gt.species.push_back(kZ[i / 3]);
  c.gt.lattice = niggli_reduce(params_to_matrix(random_lattice(rng, 5.0, 9.0, 70.0, 110.0))).reduced;
  for (int i = 0; i < n; ++i)
    c.gt.frac_coords.push_back(Vec3(u(rng), u(rng), u(rng)));

  const double scale = std::cbrt(std::abs(c.gt.lattice.det()) / n);
  AtomStructure pred = c.gt;
  LatticeMatrix L = c.gt.lattice;
  Mat3 inv = L.rows.transpose().inverse();
  auto jitter = [&](double sigma) {
    for (Vec3& f : pred.frac_coords)
      f = wrap_frac(f + inv * (sigma * Vec3(gauss(rng), gauss(rng), gauss(rng))));
  };

  double r = u(rng);
  if (r < 0.4) {
    c.kind = "jitter";
    jitter(0.05);
    if (u(rng) < 0.25) {
      // a percent-level strain at fixed fractional coordinates
      LatticeParams p = matrix_to_params(L);
      p.a *= 1 + 0.02 * (2 * u(rng) - 1);
      p.c *= 1 + 0.02 * (2 * u(rng) - 1);
      pred.lattice = params_to_matrix(p);
    }
  } else if (r < 0.7) {
    c.kind = "displaced";
    jitter(0.05);
    int moved = 1 + static_cast<int>(u(rng) < 0.4);
    for (int k = 0; k < moved; ++k) {
      Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
      double len = (0.2 + 1.0 * u(rng)) * scale;
      Vec3& f = pred.frac_coords[static_cast<std::size_t>(u(rng) * n) % n];
      f = wrap_frac(f + inv * (len * dir.normalized()));
    }
  } else if (r < 0.8) {
    c.kind = "unrelated";
    for (Vec3& f : pred.frac_coords)
      f = Vec3(u(rng), u(rng), u(rng));
  } else if (r < 0.9) {
    c.kind = "strain";
    LatticeParams p = matrix_to_params(L);
    if (u(rng) < 0.5)
      p.gamma += 2.0;
    else
      p.b *= 1.4;
    pred.lattice = params_to_matrix(p);
  } else {
    c.kind = "large-jitter";
    jitter((0.1 + 0.3 * u(rng)) * scale);
  }

  Mat3i U;
  do {
    U = random_unimodular(rng, 3, 1);
  } while (unimodular_inverse(U).cwiseAbs().maxCoeff() > 2);
  c.pred = re_express(pred, U, random_rotation(rng()), Vec3(u(rng), u(rng), u(rng)), rng);
  return c;
}

AssemblySpec golden_spec() {
  BuildingBlock zn = make_block({30}, {Vec3::Zero()}, "[Zn]");
  BuildingBlock bdc = make_block({6, 6, 8, 8}, {Vec3(-1.4, 0.2, 0), Vec3(1.4, -0.2, 0), Vec3(2.1, 1.0, 0.1), Vec3(-2.1, -1.0, -0.1)},
                                 "O=C(O)c1ccccc1");
  AssemblySpec s;
  s.lattice = {6.7, 12.345, 9.0, 90, 90, 120.004};
  s.blocks = {zn, bdc};
  s.poses = {{Vec3(0.5, 0.5, 0.5), {0, 0, 0}}, {Vec3(0.1255, 0.0004, 0.9995), {-3.14159, 1.2, 0.0005}}};
  return s;
}

StructureRecord grid27_record() {
  StructureRecord r;
  r.id = "grid27";
  r.spec.lattice = {12, 12, 12, 90, 90, 90};
  for (int i = 0; i < 27; ++i) {
    r.spec.blocks.push_back(make_block({i + 1}, {Vec3::Zero()}, "[" + std::string(element_symbol(i + 1)) + "]"));
    r.spec.poses.push_back({Vec3(i % 3, i / 3 % 3, i / 9) / 3.0 + Vec3(0.05, 0.05, 0.05), {}});
  }
  return r;
}

StructureRecord grid27_moved(double normalized) {
  StructureRecord r = grid27_record();
  // the fitted shift takes back 1/27 of the move, hence 27/26
  r.spec.poses[13].translation += Vec3(2, 1, 2).normalized() * (normalized * 4.0 * 27.0 / 26.0 / 12.0);
  return r;
}

} // namespace mofasm::testkit

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "mofasm/block_frames.hpp"
#include "mofasm/elements.hpp"
#include "mofasm/error.hpp"

using namespace mofasm;
using doctest::Approx;

namespace {

double max_diff(const Points& a, const Points& b) {
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, (a[i] - b[i]).cwiseAbs().maxCoeff());
  return worst;
}

Vec3 variances(const Points& pts) {
  Vec3 v = Vec3::Zero();
  for (const Vec3& p : pts)
    v += p.cwiseProduct(p);
  return v / static_cast<double>(pts.size());
}

} // namespace

TEST_CASE("two equal atoms on the x axis") {
  LocalFrame f = extract_local_frame({Vec3(0, 0, 0), Vec3(2, 0, 0)}, {6, 6});
  CHECK((f.centroid - Vec3(1, 0, 0)).norm() < 1e-15);
  CHECK((f.block.local_coords[0] - Vec3(-1, 0, 0)).norm() < 1e-12);
  CHECK((f.block.local_coords[1] - Vec3(1, 0, 0)).norm() < 1e-12);
  CHECK(f.degenerate);  // the two minor variances are both zero
  CHECK((f.block.pca_span - Vec3(2, 0, 0)).norm() < 1e-12);
}

TEST_CASE("single atom") {
  LocalFrame f = extract_local_frame({Vec3(3, -1, 2)}, {30});
  CHECK(f.block.local_coords.size() == 1);
  CHECK(f.block.local_coords[0] == Vec3::Zero());
  CHECK(f.rotation == Mat3::Identity());
  CHECK(f.centroid == Vec3(3, -1, 2));
  CHECK(pca_span(f.block) == Vec3::Zero());
}

TEST_CASE("invalid input") {
  CHECK_THROWS_AS(extract_local_frame({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(extract_local_frame({Vec3::Zero()}, {6, 6}), std::invalid_argument);
  try {
    extract_local_frame({Vec3::Zero(), Vec3::UnitX()}, {6, 200});
    FAIL("expected UnknownElement");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownElement);
  }
}

TEST_CASE("molecular weight") {
  std::vector<int> carbon{6}, none, water{8, 1, 1};
  CHECK(molecular_weight(carbon) == Approx(12.011).epsilon(1e-9));
  CHECK(molecular_weight(none) == 0.0);
  CHECK(std::abs(molecular_weight(water) - 18.015) < 1e-3);
  CHECK(make_block(water, {Vec3::Zero(), Vec3::UnitX(), -Vec3::UnitX()}).molecular_weight ==
        Approx(molecular_weight(water)));
}

TEST_CASE("pca_span of a planar hexagon") {
  const double r = 1.39;
  Points ring;
  std::vector<int> species(6, 6);
  Mat3 R = random_rotation(5);
  for (int k = 0; k < 6; ++k) {
    double t = k * M_PI / 3;
    ring.push_back(R * Vec3(r * std::cos(t), r * std::sin(t), 0) + Vec3(4, 5, 6));
  }
  LocalFrame f = extract_local_frame(ring, species);
  CHECK(std::abs(f.block.pca_span[2]) < 1e-9);
  CHECK(make_block({6, 6}, {Vec3(1, 0, 0), Vec3(-1, 0, 0)}).pca_span == Vec3(2, 0, 0));
}

TEST_CASE("rotated principal axis") {
  CHECK(rotated_principal_axis(Mat3::Identity()) == Vec3::UnitX());
  CHECK((rotated_principal_axis(euler_to_matrix({0, 0, M_PI / 2})) - Vec3::UnitY()).norm() < 1e-15);
  for (std::uint64_t s = 0; s < 100; ++s)
    CHECK(rotated_principal_axis(random_rotation(s)).norm() == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("local frame invariants on the fixture blocks") {
  for (const auto& raw : testkit::fixture_raw_blocks()) {
    LocalFrame f = extract_local_frame(raw.coords, raw.species);
    CHECK_FALSE(f.degenerate);
    CHECK(is_rotation(f.rotation, 1e-12));
    Vec3 c = std::accumulate(f.block.local_coords.begin(), f.block.local_coords.end(), Vec3(Vec3::Zero()));
    CHECK(c.norm() < 1e-9);
    Vec3 var = variances(f.block.local_coords);
    CHECK(var[0] >= var[1]);
    CHECK(var[1] >= var[2]);
    // off-diagonal covariance vanishes in the principal frame
    Mat3 cov = Mat3::Zero();
    for (const Vec3& p : f.block.local_coords)
      cov += p * p.transpose();
    cov /= static_cast<double>(f.block.size());
    CHECK(std::abs(cov(0, 1)) < 1e-9);
    CHECK(std::abs(cov(0, 2)) < 1e-9);
    CHECK(std::abs(cov(1, 2)) < 1e-9);
    // reassembly
    Points back;
    for (const Vec3& p : f.block.local_coords)
      back.push_back(f.rotation * p + f.centroid);
    CHECK(max_diff(back, raw.coords) < 1e-9);
  }
}

TEST_CASE("SE(3) invariance over random rigid transforms") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> shift(-50, 50);
  const auto& raws = testkit::fixture_raw_blocks();
  double worst = 0, worst_span = 0;
  for (int t = 0; t < 500; ++t) {
    const auto& raw = raws[t % raws.size()];
    LocalFrame ref = extract_local_frame(raw.coords, raw.species);
    Mat3 R = random_rotation(1000 + t);
    Vec3 d(shift(rng), shift(rng), shift(rng));
    Points moved;
    for (const Vec3& p : raw.coords)
      moved.push_back(R * p + d);
    LocalFrame f = extract_local_frame(moved, raw.species);
    worst = std::max(worst, max_diff(f.block.local_coords, ref.block.local_coords));
    worst_span = std::max(worst_span, (f.block.pca_span - ref.block.pca_span).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-7);
  CHECK(worst_span < 1e-7);
}

TEST_CASE("atom order permutes the local coordinates only") {
  std::mt19937_64 rng(22);
  for (const auto& raw : testkit::fixture_raw_blocks()) {
    std::vector<std::size_t> perm(raw.coords.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Points coords;
    std::vector<int> species;
    for (std::size_t i : perm) {
      coords.push_back(raw.coords[i]);
      species.push_back(raw.species[i]);
    }
    LocalFrame a = extract_local_frame(raw.coords, raw.species);
    LocalFrame b = extract_local_frame(coords, species);
    for (std::size_t k = 0; k < perm.size(); ++k)
      CHECK((b.block.local_coords[k] - a.block.local_coords[perm[k]]).norm() < 1e-9);
    CHECK((a.block.pca_span - b.block.pca_span).norm() < 1e-9);
  }
}

TEST_CASE("mirror-symmetric block falls back deterministically") {
  // zero mass reference: symmetric about the centroid along every axis
  Points pts{Vec3(3, 0, 0), Vec3(-3, 0, 0), Vec3(0, 1.5, 0), Vec3(0, -1.5, 0), Vec3(0, 0, 0.5),
             Vec3(0, 0, -0.5)};
  std::vector<int> species(6, 8);
  LocalFrame a = extract_local_frame(pts, species);
  LocalFrame b = extract_local_frame(pts, species);
  CHECK(a.rotation == b.rotation);
  CHECK(is_rotation(a.rotation, 1e-12));
  CHECK_FALSE(a.degenerate);
}

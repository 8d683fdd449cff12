#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "mofasm/error.hpp"
#include "mofasm/lattice.hpp"
#include "oracles.hpp"

using namespace mofasm;
using doctest::Approx;

namespace {

double max_param_diff(const LatticeParams& x, const LatticeParams& y) {
  return std::max({std::abs(x.a - y.a), std::abs(x.b - y.b), std::abs(x.c - y.c), std::abs(x.alpha - y.alpha),
                   std::abs(x.beta - y.beta), std::abs(x.gamma - y.gamma)});
}

} // namespace

TEST_CASE("params_to_matrix: cubic cell is diagonal") {
  LatticeMatrix L = params_to_matrix({2, 2, 2, 90, 90, 90});
  CHECK((L.rows - 2 * Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("params_to_matrix: hexagonal cell") {
  LatticeMatrix L = params_to_matrix({1, 1, 2, 90, 90, 120});
  Vec3 l2 = L.row(1);
  CHECK(l2.x() == Approx(-0.5).epsilon(1e-12));
  CHECK(l2.y() == Approx(std::sqrt(3.0) / 2).epsilon(1e-12));
  CHECK(std::abs(l2.z()) < 1e-12);
  // independent check: length and angle recomputed from the vectors
  Vec3 l1 = L.row(0);
  CHECK(l2.norm() == Approx(1.0).epsilon(1e-12));
  CHECK(std::acos(l1.dot(l2) / (l1.norm() * l2.norm())) * 180 / M_PI == Approx(120.0).epsilon(1e-12));
  CHECK(L.det() > 0);
}

TEST_CASE("params_to_matrix rejects impossible angle triples") {
  CHECK_THROWS_AS(params_to_matrix({1, 1, 1, 60, 60, 120}), Error);
  CHECK_THROWS_AS(params_to_matrix({1, 1, 1, 10, 10, 100}), Error);
  CHECK_THROWS_AS(params_to_matrix({-1, 1, 1, 90, 90, 90}), Error);
  CHECK_THROWS_AS(params_to_matrix({1, 1, 1, 180, 90, 90}), Error);
}

TEST_CASE("matrix_to_params examples") {
  LatticeParams p = matrix_to_params(LatticeMatrix(Mat3::Identity()));
  CHECK(max_param_diff(p, {1, 1, 1, 90, 90, 90}) < 1e-12);
  p = matrix_to_params(LatticeMatrix::diagonal(3, 4, 5));
  CHECK(max_param_diff(p, {3, 4, 5, 90, 90, 90}) < 1e-12);
  p = matrix_to_params(params_to_matrix({1, 1, 2, 90, 90, 120}));
  CHECK(max_param_diff(p, {1, 1, 2, 90, 90, 120}) < 1e-9);
  Mat3 bad = Mat3::Identity();
  bad.row(1).setZero();
  CHECK_THROWS_AS(matrix_to_params(LatticeMatrix(bad)), Error);
}

TEST_CASE("params round trip and analytic volume over 1000 seeds") {
  std::mt19937_64 rng(1);
  double worst = 0, worst_vol = 0;
  for (int k = 0; k < 1000; ++k) {
    LatticeParams p = testkit::random_lattice(rng, 1.0, 30.0, 40.0, 140.0);
    LatticeMatrix L = params_to_matrix(p);
    worst = std::max(worst, max_param_diff(matrix_to_params(L), p));
    double abc = p.a * p.b * p.c;
    double ca = std::cos(p.alpha * M_PI / 180), cb = std::cos(p.beta * M_PI / 180),
           cg = std::cos(p.gamma * M_PI / 180);
    double vol = abc * std::sqrt(1 - ca * ca - cb * cb - cg * cg + 2 * ca * cb * cg);
    worst_vol = std::max(worst_vol, std::abs(L.det() - vol) / vol);
    CHECK(L.det() > 0);
    CHECK(std::abs(L.rows(0, 1)) + std::abs(L.rows(0, 2)) + std::abs(L.rows(1, 2)) == 0.0);
  }
  CHECK(worst < 1e-9);
  CHECK(worst_vol < 1e-12);
}

TEST_CASE("frac/cart transforms") {
  LatticeMatrix L = LatticeMatrix::diagonal(2, 2, 2);
  CHECK((frac_to_cart(Vec3(0.5, 0.5, 0.5), L) - Vec3(1, 1, 1)).norm() < 1e-15);
  CHECK(cart_to_frac(Vec3::Zero(), params_to_matrix({3, 4, 5, 70, 80, 100})).norm() == 0.0);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2, 2);
  double worst = 0;
  for (int k = 0; k < 500; ++k) {
    LatticeMatrix M = params_to_matrix(testkit::random_lattice(rng, 2, 20, 50, 130));
    Vec3 f(u(rng), u(rng), u(rng));
    Vec3 x = frac_to_cart(f, M);
    // row-vector convention x = f L
    CHECK((x.transpose() - f.transpose() * M.rows).norm() < 1e-12);
    worst = std::max(worst, (cart_to_frac(x, M) - f).norm());
  }
  CHECK(worst < 1e-10);
  CHECK_THROWS_AS(cart_to_frac(Vec3(1, 1, 1), LatticeMatrix(Mat3::Zero())), Error);
}

TEST_CASE("wrap_frac examples") {
  CHECK((wrap_frac(Vec3(1.25, -0.25, 0.0)) - Vec3(0.25, 0.75, 0.0)).norm() < 1e-15);
  CHECK((wrap_frac(Vec3(0.999, 0.0, 0.5)) - Vec3(0.999, 0.0, 0.5)).norm() == 0.0);
  CHECK((wrap_frac(Vec3(-3.7, 5.2, 1.0)) - Vec3(0.3, 0.2, 0.0)).cwiseAbs().maxCoeff() < 1e-12);
  // tiny negatives must not wrap to exactly 1.0
  Vec3 w = wrap_frac(Vec3(-1e-18, -0.0, 1.0 - 1e-17));
  for (int k = 0; k < 3; ++k) {
    CHECK(w[k] >= 0.0);
    CHECK(w[k] < 1.0);
  }
}

TEST_CASE("min_image_distance examples") {
  LatticeMatrix L = LatticeMatrix::diagonal(10, 10, 10);
  CHECK(min_image_distance(Vec3(0.3, 0.2, 0.1), Vec3(0.3, 0.2, 0.1), L) == 0.0);
  CHECK(min_image_distance(Vec3(0.05, 0, 0), Vec3(0.95, 0, 0), L) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("min_image_distance on reduced skewed cells equals the {-2..2} search") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 300; ++k) {
    LatticeMatrix raw = params_to_matrix(testkit::random_lattice(rng, 3, 15, 45, 135));
    LatticeMatrix L = niggli_reduce(raw).reduced;
    Vec3 f1(u(rng), u(rng), u(rng)), f2(u(rng), u(rng), u(rng));
    double d = min_image_distance(f1, f2, L);
    CHECK(d == Approx(testkit::brute_min_image(f1, f2, L.rows, 2)).epsilon(1e-12));
    // symmetry and triangle inequality
    Vec3 f3(u(rng), u(rng), u(rng));
    CHECK(d == Approx(min_image_distance(f2, f1, L)).epsilon(1e-12));
    CHECK(d <= min_image_distance(f1, f3, L) + min_image_distance(f3, f2, L) + 1e-12);
  }
}

TEST_CASE("niggli: reduced cubic cell is unchanged") {
  NiggliResult r = niggli_reduce(LatticeMatrix::diagonal(4, 4, 4));
  CHECK(r.transform == Mat3i::Identity());
  CHECK((r.reduced.rows - 4 * Mat3::Identity()).norm() < 1e-12);
}

TEST_CASE("niggli: sheared cell recovers the original") {
  LatticeMatrix L = params_to_matrix({4, 5, 6, 85, 95, 100});
  NiggliResult base = niggli_reduce(L);
  Mat3 sheared = base.reduced.rows;
  sheared.row(1) += 3 * sheared.row(0);
  NiggliResult r = niggli_reduce(LatticeMatrix(sheared));
  LatticeParams a = matrix_to_params(base.reduced), b = matrix_to_params(r.reduced);
  CHECK(max_param_diff(a, b) < 1e-9);
  CHECK(r.reduced.det() == Approx(L.det()).epsilon(1e-12));
  // transform reproduces the reduced rows and is unimodular
  CHECK((to_real(r.transform) * sheared - r.reduced.rows).norm() < 1e-9);
  CHECK(std::abs(to_real(r.transform).determinant()) == Approx(1.0));
}

TEST_CASE("niggli: 1000 unimodular images of a reduced cell reduce to the same parameters") {
  std::mt19937_64 rng(4);
  LatticeMatrix base = niggli_reduce(params_to_matrix({5.1, 6.3, 7.7, 79, 84, 97})).reduced;
  LatticeParams ref = matrix_to_params(base);
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    Mat3i M = testkit::random_unimodular(rng, 6);
    NiggliResult r = niggli_reduce(LatticeMatrix(to_real(M) * base.rows));
    worst = std::max(worst, max_param_diff(matrix_to_params(r.reduced), ref));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("niggli: reduced lengths are the successive minima, idempotent, volume preserving") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 300; ++k) {
    LatticeMatrix base = params_to_matrix(testkit::random_lattice(rng, 3, 12, 50, 130));
    Mat3i M = testkit::random_unimodular(rng, 4);
    LatticeMatrix L(to_real(M) * base.rows);
    NiggliResult r = niggli_reduce(L);
    // same lattice; the unsheared basis keeps the search range small
    Vec3 lambda = testkit::successive_minima(base.rows);
    Vec3 lens(r.reduced.row(0).norm(), r.reduced.row(1).norm(), r.reduced.row(2).norm());
    CHECK((lens - lambda).cwiseAbs().maxCoeff() < 1e-6 * lambda.maxCoeff());
    CHECK(std::abs(r.reduced.det() - L.det()) < 1e-9 * std::abs(L.det()));
    double eps = 1e-5 * std::cbrt(std::abs(L.det()));
    CHECK(is_niggli_reduced(r.reduced, eps));
    NiggliResult again = niggli_reduce(r.reduced);
    CHECK(max_param_diff(matrix_to_params(again.reduced), matrix_to_params(r.reduced)) < 1e-9);
    CHECK((to_real(r.transform) * L.rows - r.reduced.rows).norm() < 1e-8 * L.rows.norm());
  }
}

TEST_CASE("unimodular_inverse") {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 100; ++k) {
    Mat3i M = testkit::random_unimodular(rng, 5);
    CHECK(M * unimodular_inverse(M) == Mat3i::Identity());
  }
}

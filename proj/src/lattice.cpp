#include "mofasm/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mofasm/error.hpp"

namespace mofasm {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double angle_deg(const Vec3& u, const Vec3& v) {
  double c = u.dot(v) / (u.norm() * v.norm());
  return std::acos(std::clamp(c, -1.0, 1.0)) / kDeg;
}

int sign_of(double x) { return x < 0 ? -1 : 1; }

} // namespace

LatticeMatrix LatticeMatrix::diagonal(double a, double b, double c) {
  Mat3 m = Mat3::Zero();
  m(0, 0) = a;
  m(1, 1) = b;
  m(2, 2) = c;
  return LatticeMatrix(m);
}

double volume_discriminant(double alpha, double beta, double gamma) {
  double ca = std::cos(alpha * kDeg), cb = std::cos(beta * kDeg), cg = std::cos(gamma * kDeg);
  return 1 - ca * ca - cb * cb - cg * cg + 2 * ca * cb * cg;
}

bool is_valid(const LatticeParams& p) {
  for (double len : {p.a, p.b, p.c})
    if (!std::isfinite(len) || len <= 0)
      return false;
  for (double ang : {p.alpha, p.beta, p.gamma})
    if (!std::isfinite(ang) || ang <= 0 || ang >= 180)
      return false;
  return volume_discriminant(p.alpha, p.beta, p.gamma) > 0;
}

double analytic_volume(const LatticeParams& p) {
  return p.a * p.b * p.c * std::sqrt(volume_discriminant(p.alpha, p.beta, p.gamma));
}

LatticeMatrix params_to_matrix(const LatticeParams& p) {
  for (double len : {p.a, p.b, p.c})
    if (!std::isfinite(len) || len <= 0)
      throw Error(ErrorKind::InvalidLattice, "lattice lengths must be positive");
  for (double ang : {p.alpha, p.beta, p.gamma})
    if (!std::isfinite(ang) || ang <= 0 || ang >= 180)
      throw Error(ErrorKind::InvalidLattice, "lattice angles must lie in (0, 180)");
  double disc = volume_discriminant(p.alpha, p.beta, p.gamma);
  if (disc <= 0)
    throw Error(ErrorKind::InvalidAngleTriple, "angles do not form a valid cell");

  double ca = std::cos(p.alpha * kDeg), cb = std::cos(p.beta * kDeg);
  double cg = std::cos(p.gamma * kDeg), sg = std::sin(p.gamma * kDeg);
  Mat3 m;
  m << p.a, 0, 0,
       p.b * cg, p.b * sg, 0,
       p.c * cb, p.c * (ca - cb * cg) / sg, p.c * std::sqrt(disc) / sg;
  return LatticeMatrix(m);
}

LatticeParams matrix_to_params(const LatticeMatrix& L) {
  Vec3 l1 = L.row(0), l2 = L.row(1), l3 = L.row(2);
  if (l1.norm() < 1e-12 || l2.norm() < 1e-12 || l3.norm() < 1e-12)
    throw Error(ErrorKind::DegenerateLattice, "lattice vector with zero length");
  LatticeParams p;
  p.a = l1.norm();
  p.b = l2.norm();
  p.c = l3.norm();
  p.alpha = angle_deg(l2, l3);
  p.beta = angle_deg(l1, l3);
  p.gamma = angle_deg(l1, l2);
  return p;
}

Vec3 frac_to_cart(const Vec3& f, const LatticeMatrix& L) {
  return L.rows.transpose() * f;
}

Vec3 cart_to_frac(const Vec3& x, const LatticeMatrix& L) {
  double det = L.det();
  if (!std::isfinite(det) || std::abs(det) < 1e-12)
    throw Error(ErrorKind::SingularLattice, "lattice matrix is not invertible");
  return L.rows.transpose().partialPivLu().solve(x);
}

Points frac_to_cart(const Points& f, const LatticeMatrix& L) {
  Points out;
  out.reserve(f.size());
  Mat3 lt = L.rows.transpose();
  for (const Vec3& v : f)
    out.push_back(lt * v);
  return out;
}

Points cart_to_frac(const Points& x, const LatticeMatrix& L) {
  double det = L.det();
  if (!std::isfinite(det) || std::abs(det) < 1e-12)
    throw Error(ErrorKind::SingularLattice, "lattice matrix is not invertible");
  Mat3 inv = L.rows.transpose().inverse();
  Points out;
  out.reserve(x.size());
  for (const Vec3& v : x)
    out.push_back(inv * v);
  return out;
}

double wrap_unit(double x) {
  double w = x - std::floor(x);
  // x slightly below an integer can round up to exactly 1.0
  return w >= 1.0 ? 0.0 : w;
}

Vec3 wrap_frac(const Vec3& f) {
  return Vec3(wrap_unit(f.x()), wrap_unit(f.y()), wrap_unit(f.z()));
}

Vec3 min_image_frac(const Vec3& f1, const Vec3& f2, const LatticeMatrix& L, int range) {
  Vec3 d = f1 - f2;
  for (int i = 0; i < 3; ++i)
    d[i] -= std::round(d[i]);
  Mat3 lt = L.rows.transpose();
  Vec3 best = d;
  double best_d2 = (lt * d).squaredNorm();
  for (int i = -range; i <= range; ++i)
    for (int j = -range; j <= range; ++j)
      for (int k = -range; k <= range; ++k) {
        Vec3 cand = d + Vec3(i, j, k);
        double d2 = (lt * cand).squaredNorm();
        if (d2 < best_d2) {
          best_d2 = d2;
          best = cand;
        }
      }
  return best;
}

double min_image_distance(const Vec3& f1, const Vec3& f2, const LatticeMatrix& L, int range) {
  return frac_to_cart(min_image_frac(f1, f2, L, range), L).norm();
}

namespace {

struct Metric {
  double A, B, C, xi, eta, zeta;
};

Metric metric_of(const Mat3& b) {
  Vec3 a = b.row(0).transpose(), bb = b.row(1).transpose(), c = b.row(2).transpose();
  return {a.dot(a), bb.dot(bb), c.dot(c), 2 * bb.dot(c), 2 * a.dot(c), 2 * a.dot(bb)};
}

int eps_sign(double x, double eps) {
  if (x > eps) return 1;
  if (x < -eps) return -1;
  return 0;
}

} // namespace

NiggliResult niggli_reduce(const LatticeMatrix& L, int max_iterations) {
  double det = L.det();
  if (!std::isfinite(det) || det <= 0)
    throw Error(ErrorKind::InvalidLattice, "niggli_reduce requires det L > 0");
  const double eps = 1e-5 * std::cbrt(det);

  Mat3 basis = L.rows;
  Mat3i total = Mat3i::Identity();
  auto apply = [&](const Mat3i& step) {
    basis = step.cast<double>() * basis;
    total = step * total;
  };

  for (int it = 0; it < max_iterations; ++it) {
    Metric g = metric_of(basis);
    // N1
    if (g.A > g.B + eps || (std::abs(g.A - g.B) <= eps && std::abs(g.xi) > std::abs(g.eta) + eps)) {
      apply((Mat3i() << 0, -1, 0, -1, 0, 0, 0, 0, -1).finished());
      continue;
    }
    // N2
    if (g.B > g.C + eps || (std::abs(g.B - g.C) <= eps && std::abs(g.eta) > std::abs(g.zeta) + eps)) {
      apply((Mat3i() << -1, 0, 0, 0, 0, -1, 0, -1, 0).finished());
      continue;
    }
    // N3 / N4: make the off-diagonal terms all positive or all non-positive
    // using a proper (det +1) sign flip of the basis vectors.
    {
      int l = eps_sign(g.xi, eps), m = eps_sign(g.eta, eps), n = eps_sign(g.zeta, eps);
      bool want_positive = (l * m * n == 1);
      static const int flips[4][3] = {{1, 1, 1}, {-1, -1, 1}, {-1, 1, -1}, {1, -1, -1}};
      for (const auto& s : flips) {
        int nl = l * s[1] * s[2], nm = m * s[0] * s[2], nn = n * s[0] * s[1];
        bool ok = want_positive ? (nl > 0 && nm > 0 && nn > 0)
                                : (nl <= 0 && nm <= 0 && nn <= 0);
        if (ok) {
          if (s[0] != 1 || s[1] != 1)
            apply(Vec3i(s[0], s[1], s[2]).asDiagonal().toDenseMatrix());
          break;
        }
      }
      g = metric_of(basis);
    }
    // N5
    if (std::abs(g.xi) > g.B + eps || (std::abs(g.xi - g.B) <= eps && 2 * g.eta < g.zeta - eps) ||
        (std::abs(g.xi + g.B) <= eps && g.zeta < -eps)) {
      int s = sign_of(g.xi);
      apply((Mat3i() << 1, 0, 0, 0, 1, 0, 0, -s, 1).finished());
      continue;
    }
    // N6
    if (std::abs(g.eta) > g.A + eps || (std::abs(g.eta - g.A) <= eps && 2 * g.xi < g.zeta - eps) ||
        (std::abs(g.eta + g.A) <= eps && g.zeta < -eps)) {
      int s = sign_of(g.eta);
      apply((Mat3i() << 1, 0, 0, 0, 1, 0, -s, 0, 1).finished());
      continue;
    }
    // N7
    if (std::abs(g.zeta) > g.A + eps || (std::abs(g.zeta - g.A) <= eps && 2 * g.xi < g.eta - eps) ||
        (std::abs(g.zeta + g.A) <= eps && g.eta < -eps)) {
      int s = sign_of(g.zeta);
      apply((Mat3i() << 1, 0, 0, -s, 1, 0, 0, 0, 1).finished());
      continue;
    }
    // N8
    double sum = g.xi + g.eta + g.zeta + g.A + g.B;
    if (sum < -eps || (std::abs(sum) <= eps && 2 * (g.A + g.eta) + g.zeta > eps)) {
      apply((Mat3i() << 1, 0, 0, 0, 1, 0, 1, 1, 1).finished());
      continue;
    }
    // Rebuild from the integer transform so the result is exact in L.
    return {LatticeMatrix(total.cast<double>() * L.rows), total, it + 1};
  }
  throw Error(ErrorKind::NiggliNonConvergence, "niggli reduction did not converge");
}

bool is_niggli_reduced(const LatticeMatrix& L, double eps) {
  Metric g = metric_of(L.rows);
  auto eq = [&](double x, double y) { return std::abs(x - y) <= eps; };
  if (g.A > g.B + eps || g.B > g.C + eps)
    return false;
  if (std::abs(g.xi) > g.B + eps || std::abs(g.eta) > g.A + eps || std::abs(g.zeta) > g.A + eps)
    return false;
  int l = eps_sign(g.xi, eps), m = eps_sign(g.eta, eps), n = eps_sign(g.zeta, eps);
  bool positive = (l > 0 && m > 0 && n > 0);
  bool negative = (l <= 0 && m <= 0 && n <= 0);
  if (!positive && !negative)
    return false;
  if (eq(g.A, g.B) && std::abs(g.xi) > std::abs(g.eta) + eps)
    return false;
  if (eq(g.B, g.C) && std::abs(g.eta) > std::abs(g.zeta) + eps)
    return false;
  if (positive) {
    if (eq(g.xi, g.B) && g.zeta > 2 * g.eta + eps) return false;
    if (eq(g.eta, g.A) && g.zeta > 2 * g.xi + eps) return false;
    if (eq(g.zeta, g.A) && g.eta > 2 * g.xi + eps) return false;
  } else {
    if (eq(g.xi, -g.B) && !eq(g.zeta, 0)) return false;
    if (eq(g.eta, -g.A) && !eq(g.zeta, 0)) return false;
    if (eq(g.zeta, -g.A) && !eq(g.eta, 0)) return false;
    if (eq(g.xi + g.eta + g.zeta + g.A + g.B, 0) && 2 * (g.A + g.eta) + g.zeta > eps)
      return false;
  }
  return true;
}

Mat3i unimodular_inverse(const Mat3i& m) {
  // adjugate / det with det = +-1
  Mat3i adj;
  adj(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  adj(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
  adj(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
  adj(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
  adj(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
  adj(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
  adj(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
  adj(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
  adj(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  int det = m(0, 0) * adj(0, 0) + m(0, 1) * adj(1, 0) + m(0, 2) * adj(2, 0);
  return det == -1 ? Mat3i(-adj) : adj;
}

} // namespace mofasm

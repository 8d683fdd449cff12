#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_set>

namespace mofasm::testkit {

Mat3 euler_product(double roll, double pitch, double yaw) {
  Mat3 rx, ry, rz;
  rx << 1, 0, 0, 0, std::cos(roll), -std::sin(roll), 0, std::sin(roll), std::cos(roll);
  ry << std::cos(pitch), 0, std::sin(pitch), 0, 1, 0, -std::sin(pitch), 0, std::cos(pitch);
  rz << std::cos(yaw), -std::sin(yaw), 0, std::sin(yaw), std::cos(yaw), 0, 0, 0, 1;
  return rz * ry * rx;
}

double brute_min_image(const Vec3& f1, const Vec3& f2, const Mat3& rows, int r) {
  double best = std::numeric_limits<double>::infinity();
  for (int x = -r; x <= r; ++x)
    for (int y = -r; y <= r; ++y)
      for (int z = -r; z <= r; ++z) {
        Vec3 d = f1 - f2 + Vec3(x, y, z);
        best = std::min(best, (rows.transpose() * d).norm());
      }
  return best;
}

Vec3 successive_minima(const Mat3& rows, int r) {
  std::vector<Vec3> vecs;
  for (int x = -r; x <= r; ++x)
    for (int y = -r; y <= r; ++y)
      for (int z = -r; z <= r; ++z)
        if (x || y || z)
          vecs.push_back(rows.transpose() * Vec3(x, y, z));
  std::sort(vecs.begin(), vecs.end(), [](const Vec3& a, const Vec3& b) { return a.norm() < b.norm(); });
  const Vec3& v1 = vecs[0];
  const double scale = v1.norm();
  std::size_t k2 = 1;
  while (v1.cross(vecs[k2]).norm() < 1e-9 * scale * vecs[k2].norm())
    ++k2;
  const Vec3& v2 = vecs[k2];
  std::size_t k3 = k2 + 1;
  while (std::abs(v1.cross(v2).dot(vecs[k3])) < 1e-9 * scale * v2.norm() * vecs[k3].norm())
    ++k3;
  return Vec3(v1.norm(), v2.norm(), vecs[k3].norm());
}

double brute_assignment_cost(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0;
    for (int i = 0; i < n; ++i)
      c += cost(i, p[i]);
    best = std::min(best, c);
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

double sphere_void_fraction(double r, double a) {
  return 1.0 - 4.0 / 3.0 * 3.14159265358979323846 * r * r * r / (a * a * a);
}

// ---------------------------------------------------------------- matcher

namespace {

double deg_between(const Vec3& u, const Vec3& v) {
  double c = std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0);
  return std::acos(c) * 180.0 / 3.14159265358979323846;
}

std::vector<Mat3i> oracle_mappings(const Mat3& A, const Mat3& B, double ltol, double atol) {
  std::vector<std::pair<Vec3i, Vec3>> cand[3];
  for (int x = -2; x <= 2; ++x)
    for (int y = -2; y <= 2; ++y)
      for (int z = -2; z <= 2; ++z) {
        if (!x && !y && !z)
          continue;
        Vec3 v = x * B.row(0).transpose() + y * B.row(1).transpose() + z * B.row(2).transpose();
        for (int i = 0; i < 3; ++i) {
          double li = A.row(i).norm();
          if (std::abs(v.norm() - li) / li <= ltol)
            cand[i].push_back({Vec3i(x, y, z), v});
        }
      }
  Vec3 a0 = A.row(0), a1 = A.row(1), a2 = A.row(2);
  double al = deg_between(a1, a2), be = deg_between(a0, a2), ga = deg_between(a0, a1);
  std::vector<Mat3i> out;
  for (auto& [c0, v0] : cand[0])
    for (auto& [c1, v1] : cand[1])
      for (auto& [c2, v2] : cand[2]) {
        if (std::abs(deg_between(v1, v2) - al) > atol || std::abs(deg_between(v0, v2) - be) > atol ||
            std::abs(deg_between(v0, v1) - ga) > atol)
          continue;
        Mat3i N;
        N << c0.transpose(), c1.transpose(), c2.transpose();
        long det = static_cast<long>(std::llround(N.cast<double>().determinant()));
        if (det != 1 && det != -1)
          continue;
        if ((v0.cross(v1).dot(v2) > 0) != (A.determinant() > 0))
          continue;
        out.push_back(N);
      }
  return out;
}

struct Problem {
  std::vector<Vec3> f1, f2;
  std::vector<std::vector<int>> c1, c2;  // species classes (indices)
  Mat3 G;
  double norm;
};

double sq(const Vec3& d, const Mat3& G) { return d.dot(G * d); }

Vec3 exact_image(Vec3 d, const Mat3& G) {
  for (int k = 0; k < 3; ++k)
    d[k] -= std::round(d[k]);
  Vec3 best = d;
  for (int x = -1; x <= 1; ++x)
    for (int y = -1; y <= 1; ++y)
      for (int z = -1; z <= 1; ++z) {
        Vec3 e = d + Vec3(x, y, z);
        if (sq(e, G) < sq(best, G))
          best = e;
      }
  return best;
}

// Optimal permutation per class at translation t by enumeration; returns the
// per-atom displacements (indexed by S1 atom) and the chosen partners.
void assign(const Problem& p, const Vec3& t, bool exact, std::vector<int>& partner, std::vector<Vec3>& disp) {
  const std::size_t n = p.f1.size();
  partner.assign(n, -1);
  disp.assign(n, Vec3::Zero());
  for (std::size_t c = 0; c < p.c1.size(); ++c) {
    const auto& r = p.c1[c];
    const auto& q = p.c2[c];
    const int k = static_cast<int>(r.size());
    Vec3 d[4][4];
    double cost[4][4];
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        Vec3 v = p.f2[q[j]] + t - p.f1[r[i]];
        if (exact) {
          v = exact_image(v, p.G);
        } else {
          for (int a = 0; a < 3; ++a)
            v[a] -= std::round(v[a]);
        }
        d[i][j] = v;
        cost[i][j] = sq(v, p.G);
      }
    int perm[4] = {0, 1, 2, 3}, best[4] = {0, 1, 2, 3};
    double best_cost = std::numeric_limits<double>::infinity();
    do {
      double s = 0;
      for (int i = 0; i < k; ++i)
        s += cost[i][perm[i]];
      if (s < best_cost) {
        best_cost = s;
        std::copy(perm, perm + k, best);
      }
    } while (std::next_permutation(perm, perm + k));
    for (int i = 0; i < k; ++i) {
      partner[r[i]] = q[best[i]];
      disp[r[i]] = d[i][best[i]];
    }
  }
}

void polish(const Problem& p, Vec3 t, double& rmse, double& maxd) {
  std::vector<int> partner, next_partner;
  std::vector<Vec3> disp;
  assign(p, t, true, partner, disp);
  for (int iter = 0; iter < 200; ++iter) {
    Vec3 mean = Vec3::Zero();
    for (const Vec3& d : disp)
      mean += d;
    mean /= static_cast<double>(disp.size());
    if (mean.norm() < 1e-13)
      break;
    t -= mean;
    assign(p, t, true, next_partner, disp);
    bool stable = next_partner == partner;
    partner = next_partner;
    if (stable && mean.norm() < 1e-10)
      break;
  }
  double s = 0, m = 0;
  for (const Vec3& d : disp) {
    double q = sq(d, p.G);
    s += q;
    m = std::max(m, q);
  }
  rmse = std::sqrt(s / static_cast<double>(disp.size())) / p.norm;
  maxd = std::sqrt(m) / p.norm;
}

} // namespace

OracleMatch oracle_match(const AtomStructure& s1, const AtomStructure& s2, const MatchTolerances& tol, int grid) {
  OracleMatch out;
  out.best_max = std::numeric_limits<double>::infinity();
  out.rmse = std::numeric_limits<double>::quiet_NaN();

  std::vector<int> a = s1.species, b = s2.species;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b)
    return out;

  const Mat3& A = s1.lattice.rows;
  const Mat3& B = s2.lattice.rows;
  std::vector<Mat3i> maps = oracle_mappings(A, B, tol.ltol, tol.atol);
  out.lattice_matched = !maps.empty();
  double best_rmse = std::numeric_limits<double>::infinity();

  for (const Mat3i& N : maps) {
    Problem p;
    Mat3 Bp = N.cast<double>() * B;
    Mat3 inv_t = N.cast<double>().inverse().transpose();
    p.f1 = s1.frac_coords;
    for (const Vec3& f : s2.frac_coords)
      p.f2.push_back(inv_t * f);
    p.G = 0.5 * (A * A.transpose() + Bp * Bp.transpose());
    p.norm = std::cbrt(std::sqrt(p.G.determinant()) / static_cast<double>(s1.size()));
    std::map<int, std::pair<std::vector<int>, std::vector<int>>> classes;
    for (std::size_t i = 0; i < s1.size(); ++i)
      classes[s1.species[i]].first.push_back(static_cast<int>(i));
    for (std::size_t i = 0; i < s2.size(); ++i)
      classes[s2.species[i]].second.push_back(static_cast<int>(i));
    for (auto& [z, c] : classes) {
      p.c1.push_back(c.first);
      p.c2.push_back(c.second);
    }

    // seeds are keyed by (permutation, rounding images); equal keys polish
    // to the same state
    std::unordered_set<std::uint64_t> seen;
    std::vector<int> partner;
    std::vector<Vec3> disp;
    for (int i = 0; i < grid; ++i)
      for (int j = 0; j < grid; ++j)
        for (int k = 0; k < grid; ++k) {
          Vec3 t(static_cast<double>(i) / grid, static_cast<double>(j) / grid, static_cast<double>(k) / grid);
          assign(p, t, false, partner, disp);
          std::uint64_t key = 1469598103934665603ull;
          for (std::size_t q = 0; q < partner.size(); ++q) {
            Vec3 raw = p.f2[partner[q]] + t - p.f1[q];
            key = (key ^ static_cast<std::uint64_t>(partner[q])) * 1099511628211ull;
            for (int ax = 0; ax < 3; ++ax)
              key = (key ^ static_cast<std::uint64_t>(std::llround(raw[ax] - disp[q][ax]) + 8)) * 1099511628211ull;
          }
          if (!seen.insert(key).second)
            continue;
          // the least-squares translation of the seed depends only on the key
          Vec3 mean = Vec3::Zero();
          for (const Vec3& d : disp)
            mean += d;
          double rmse, maxd;
          polish(p, t - mean / static_cast<double>(disp.size()), rmse, maxd);
          out.best_max = std::min(out.best_max, maxd);
          if (maxd <= tol.stol && rmse < best_rmse)
            best_rmse = rmse;
        }
  }
  out.matched = out.best_max <= tol.stol;
  if (out.matched)
    out.rmse = best_rmse;
  return out;
}

} // namespace mofasm::testkit

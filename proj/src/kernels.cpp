#include "mofasm/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mofasm::kernels {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::array<Vec3, 27> image_shifts(const Mat3& lt) {
  std::array<Vec3, 27> out;
  int idx = 0;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      for (int k = -1; k <= 1; ++k)
        out[idx++] = lt * Vec3(i, j, k);
  return out;
}

inline Vec3 nearest_image_cart(const Vec3& f1, const Vec3& f2, const Mat3& lt) {
  Vec3 d = f1 - f2;
  d.x() -= std::round(d.x());
  d.y() -= std::round(d.y());
  d.z() -= std::round(d.z());
  return lt * d;
}

inline double min_sq_over_images(const Vec3& dc, const std::array<Vec3, 27>& shifts) {
  double best = kInf;
  for (const Vec3& s : shifts)
    best = std::min(best, (dc + s).squaredNorm());
  return best;
}

void check_grid(int n, std::size_t atoms, std::size_t radii) {
  if (n < 1)
    throw std::invalid_argument("grid size must be positive");
  if (atoms != radii)
    throw std::invalid_argument("one radius per atom required");
}

} // namespace

double min_interplanar_spacing(const LatticeMatrix& L) {
  Vec3 a = L.row(0), b = L.row(1), c = L.row(2);
  double v = std::abs(L.det());
  return std::min({v / b.cross(c).norm(), v / a.cross(c).norm(), v / a.cross(b).norm()});
}

double min_pair_distance_serial(const Points& frac, const LatticeMatrix& L) {
  Mat3 lt = L.rows.transpose();
  auto shifts = image_shifts(lt);
  double best = kInf;
  for (const Vec3& s : shifts)
    if (s.squaredNorm() > 0)
      best = std::min(best, s.squaredNorm());
  for (std::size_t i = 0; i < frac.size(); ++i)
    for (std::size_t j = i + 1; j < frac.size(); ++j)
      best = std::min(best, min_sq_over_images(nearest_image_cart(frac[i], frac[j], lt), shifts));
  return std::sqrt(best);
}

double min_pair_distance_omp(const Points& frac, const LatticeMatrix& L) {
  Mat3 lt = L.rows.transpose();
  auto shifts = image_shifts(lt);
  double self = kInf;
  for (const Vec3& s : shifts)
    if (s.squaredNorm() > 0)
      self = std::min(self, s.squaredNorm());
  const double half_h = 0.5 * min_interplanar_spacing(L);
  const double half_h2 = half_h * half_h;
  const long n = static_cast<long>(frac.size());
  double best = self;
#pragma omp parallel for reduction(min : best) schedule(dynamic, 16)
  for (long i = 0; i < n; ++i) {
    for (long j = i + 1; j < n; ++j) {
      Vec3 dc = nearest_image_cart(frac[i], frac[j], lt);
      double d2 = dc.squaredNorm();
      if (d2 >= half_h2)
        d2 = min_sq_over_images(dc, shifts);
      best = std::min(best, d2);
    }
  }
  return std::sqrt(best);
}

double void_fraction_serial(const Points& frac, std::span<const double> radii,
                            const LatticeMatrix& L, int n) {
  check_grid(n, frac.size(), radii.size());
  Mat3 lt = L.rows.transpose();
  auto shifts = image_shifts(lt);
  long free_points = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Vec3 g(double(i) / n, double(j) / n, double(k) / n);
        bool occupied = false;
        for (std::size_t a = 0; a < frac.size() && !occupied; ++a) {
          double d2 = min_sq_over_images(nearest_image_cart(g, frac[a], lt), shifts);
          occupied = d2 <= radii[a] * radii[a];
        }
        if (!occupied)
          ++free_points;
      }
  return double(free_points) / (double(n) * n * n);
}

double void_fraction_omp(const Points& frac, std::span<const double> radii,
                         const LatticeMatrix& L, int n) {
  check_grid(n, frac.size(), radii.size());
  Mat3 lt = L.rows.transpose();
  auto shifts = image_shifts(lt);
  const double half_h = 0.5 * min_interplanar_spacing(L);
  const long na = static_cast<long>(frac.size());
  long free_points = 0;
#pragma omp parallel for reduction(+ : free_points) schedule(static)
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Vec3 g(double(i) / n, double(j) / n, double(k) / n);
        bool occupied = false;
        for (long a = 0; a < na && !occupied; ++a) {
          double r2 = radii[a] * radii[a];
          Vec3 dc = nearest_image_cart(g, frac[a], lt);
          double d2 = dc.squaredNorm();
          // other images are >= half_h away; only look when they could matter
          if (d2 > r2 && radii[a] >= half_h)
            d2 = min_sq_over_images(dc, shifts);
          occupied = d2 <= r2;
        }
        if (!occupied)
          ++free_points;
      }
  }
  return double(free_points) / (double(n) * n * n);
}

double max_clearance_serial(const Points& frac, std::span<const double> radii,
                            const LatticeMatrix& L, int n) {
  check_grid(n, frac.size(), radii.size());
  if (frac.empty())
    throw std::invalid_argument("max_clearance: no atoms");
  Mat3 lt = L.rows.transpose();
  auto shifts = image_shifts(lt);
  double best = -kInf;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Vec3 g(double(i) / n, double(j) / n, double(k) / n);
        double clearance = kInf;
        for (std::size_t a = 0; a < frac.size(); ++a) {
          double d = std::sqrt(min_sq_over_images(nearest_image_cart(g, frac[a], lt), shifts));
          clearance = std::min(clearance, d - radii[a]);
        }
        best = std::max(best, clearance);
      }
  return best;
}

double max_clearance_omp(const Points& frac, std::span<const double> radii,
                         const LatticeMatrix& L, int n) {
  check_grid(n, frac.size(), radii.size());
  if (frac.empty())
    throw std::invalid_argument("max_clearance: no atoms");
  Mat3 lt = L.rows.transpose();
  auto shifts = image_shifts(lt);
  const double half_h = 0.5 * min_interplanar_spacing(L);
  const double half_h2 = half_h * half_h;
  const long na = static_cast<long>(frac.size());
  double best = -kInf;
#pragma omp parallel for reduction(max : best) schedule(static)
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Vec3 g(double(i) / n, double(j) / n, double(k) / n);
        double clearance = kInf;
        for (long a = 0; a < na; ++a) {
          Vec3 dc = nearest_image_cart(g, frac[a], lt);
          double d2 = dc.squaredNorm();
          if (d2 >= half_h2)
            d2 = min_sq_over_images(dc, shifts);
          clearance = std::min(clearance, std::sqrt(d2) - radii[a]);
        }
        best = std::max(best, clearance);
      }
  }
  return best;
}

} // namespace mofasm::kernels

#include "mofasm/matcher.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>

#include "mofasm/assignment.hpp"
#include "mofasm/error.hpp"

namespace mofasm {

double tier_stol(MatchTier t) {
  switch (t) {
    case MatchTier::Tight: return 0.5;
    case MatchTier::Medium: return 0.75;
    case MatchTier::Loose: return 1.0;
    case MatchTier::None: break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

const char* to_string(MatchTier t) {
  switch (t) {
    case MatchTier::Tight: return "0.5";
    case MatchTier::Medium: return "0.75";
    case MatchTier::Loose: return "1.0";
    case MatchTier::None: break;
  }
  return "none";
}

const char* to_string(AssignmentSolverKind k) {
  return k == AssignmentSolverKind::Hungarian ? "hungarian" : "greedy-2swap";
}

// ---------------------------------------------------------------- lattices

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double angle_deg(const Vec3& u, const Vec3& v) {
  double c = u.dot(v) / (u.norm() * v.norm());
  return std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

struct CandidateVector {
  Vec3i coeff;
  Vec3 vec;
};

std::vector<LatticeMapping> enumerate_mappings(const NiggliResult& r1, const NiggliResult& r2, int range,
                                               double ltol, double atol) {
  const Mat3& A = r1.reduced.rows;
  const Mat3& B = r2.reduced.rows;
  Vec3 len;
  for (int i = 0; i < 3; ++i)
    len[i] = A.row(i).norm();
  const double alpha = angle_deg(A.row(1), A.row(2));
  const double beta = angle_deg(A.row(0), A.row(2));
  const double gamma = angle_deg(A.row(0), A.row(1));
  const bool right_handed = A.determinant() > 0;

  std::vector<CandidateVector> cand[3];
  for (int x = -range; x <= range; ++x)
    for (int y = -range; y <= range; ++y)
      for (int z = -range; z <= range; ++z) {
        if (!x && !y && !z)
          continue;
        Vec3i c(x, y, z);
        Vec3 v = B.transpose() * c.cast<double>();
        double n = v.norm();
        for (int i = 0; i < 3; ++i)
          if (std::abs(n - len[i]) / len[i] <= ltol)
            cand[i].push_back({c, v});
      }

  std::vector<LatticeMapping> out;
  for (const auto& c0 : cand[0])
    for (const auto& c1 : cand[1]) {
      if (std::abs(angle_deg(c0.vec, c1.vec) - gamma) > atol)
        continue;
      for (const auto& c2 : cand[2]) {
        if (std::abs(angle_deg(c1.vec, c2.vec) - alpha) > atol ||
            std::abs(angle_deg(c0.vec, c2.vec) - beta) > atol)
          continue;
        Mat3i N;
        N.row(0) = c0.coeff.transpose();
        N.row(1) = c1.coeff.transpose();
        N.row(2) = c2.coeff.transpose();
        int det = N.determinant();
        if (det != 1 && det != -1)
          continue;
        Mat3 l2 = to_real(N) * B;
        if ((l2.determinant() > 0) != right_handed)
          continue;
        out.push_back({r1.transform, N * r2.transform, r1.reduced, LatticeMatrix(l2)});
      }
    }
  return out;
}

} // namespace

std::vector<LatticeMapping> lattices_match(const LatticeMatrix& L1, const LatticeMatrix& L2, double ltol,
                                           double atol) {
  NiggliResult r1 = niggli_reduce(L1);
  NiggliResult r2 = niggli_reduce(L2);
  auto out = enumerate_mappings(r1, r2, 2, ltol, atol);
  if (!out.empty())
    return out;
  for (int i = 0; i < 3; ++i) {
    double l1 = r1.reduced.row(i).norm(), l2 = r2.reduced.row(i).norm();
    if (std::abs(l2 - l1) / l1 > 2 * ltol)
      return out;
  }
  return enumerate_mappings(r1, r2, 3, ltol, atol);
}

// ---------------------------------------------------------------- sites

namespace {

// Neighbouring images e with their e^T G e, for the image search.
struct ImageTable {
  Vec3 shift[26];
  double quad[26];

  explicit ImageTable(const Mat3& G) {
    int k = 0;
    for (int x = -1; x <= 1; ++x)
      for (int y = -1; y <= 1; ++y)
        for (int z = -1; z <= 1; ++z)
          if (x || y || z) {
            shift[k] = Vec3(x, y, z);
            quad[k] = shift[k].dot(G * shift[k]);
            ++k;
          }
  }
};

struct MinImage {
  Vec3 d;
  double sq;
};

MinImage min_image(Vec3 d, const Mat3& G, double unique_sq, const ImageTable& images) {
  for (int k = 0; k < 3; ++k)
    d[k] -= std::round(d[k]);
  Vec3 gd = G * d;
  double base = d.dot(gd);
  if (base <= unique_sq)
    return {d, base};
  // |d + e|^2 = |d|^2 + 2 e.Gd + e.Ge
  int best = -1;
  double best_sq = base;
  for (int k = 0; k < 26; ++k) {
    double sq = base + 2 * images.shift[k].dot(gd) + images.quad[k];
    if (sq < best_sq) {
      best_sq = sq;
      best = k;
    }
  }
  return best < 0 ? MinImage{d, base} : MinImage{d + images.shift[best], best_sq};
}

// Seed budgets; see add_seeds.
constexpr std::size_t kExhaustiveSeedBudget = 256;
constexpr double kPermutationSeedBudget = 1000;
constexpr double kExactDisp = 1e-10;

struct SiteCandidate {
  double rmse;
  double max_disp;
};

struct SiteProblem {
  Points f1, f2;
  Mat3 G;
  double norm = 1;
  // (shortest lattice vector / 2)^2: rounded vectors shorter than this are
  // already minimum images
  double unique_sq = 0;
  ImageTable images{Mat3::Identity()};
  // per species: indices into f1 and f2, same sizes
  std::vector<std::vector<int>> cls1, cls2;
  // starting translations for the mean-shift iteration
  std::vector<Vec3> seeds;
  AssignmentSolverKind solver = AssignmentSolverKind::Hungarian;
};

bool same_composition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size())
    return false;
  std::vector<int> x = a, y = b;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  return x == y;
}

Points to_basis(const Points& f, const Mat3i& basis) {
  // x = f L = f B^-1 (B L), so coordinates in the new basis are f B^-1.
  Mat3 inv_t = to_real(unimodular_inverse(basis)).transpose();
  Points out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    out[i] = inv_t * f[i];
  return out;
}

// Seeds, from cheapest to most thorough:
//  - the first atom of the scarcest species aligned with each partner;
//  - every same-species pair alignment, when there are few pairs;
//  - for every within-species permutation and every anchor atom, the
//    least-squares translation with images taken relative to the anchor,
//    when there are few permutations.
// The last set reaches fixed points whose displacements are all similar,
// which no single-pair alignment lands near.
void add_seeds(SiteProblem& p, int anchor, const std::vector<int>& anchor_targets) {
  std::size_t pairs = 0;
  double perms = 1;
  for (const auto& c : p.cls1) {
    pairs += c.size() * c.size();
    for (std::size_t k = 2; k <= c.size(); ++k)
      perms *= static_cast<double>(k);
  }
  if (pairs > kExhaustiveSeedBudget) {
    for (int j : anchor_targets)
      p.seeds.push_back(p.f1[anchor] - p.f2[j]);
    return;
  }
  for (std::size_t c = 0; c < p.cls1.size(); ++c)
    for (int i : p.cls1[c])
      for (int j : p.cls2[c])
        p.seeds.push_back(p.f1[i] - p.f2[j]);
  if (perms > kPermutationSeedBudget)
    return;

  const std::size_t n = p.f1.size();
  std::vector<std::vector<int>> order = p.cls2;
  for (auto& o : order)
    std::sort(o.begin(), o.end());
  std::vector<int> partner(n);
  // odometer over the per-class permutations
  for (;;) {
    for (std::size_t c = 0; c < order.size(); ++c)
      for (std::size_t k = 0; k < order[c].size(); ++k)
        partner[p.cls1[c][k]] = order[c][k];
    for (std::size_t a = 0; a < n; ++a) {
      Vec3 t0 = p.f1[a] - p.f2[partner[a]];
      Vec3 mean = Vec3::Zero();
      for (std::size_t i = 0; i < n; ++i)
        mean += min_image(p.f2[partner[i]] + t0 - p.f1[i], p.G, p.unique_sq, p.images).d;
      p.seeds.push_back(t0 - mean / static_cast<double>(n));
    }
    std::size_t c = 0;
    while (c < order.size() && !std::next_permutation(order[c].begin(), order[c].end()))
      ++c;
    if (c == order.size())
      break;
  }

  // every anchor of one permutation lands on the same translation
  std::set<std::array<long long, 3>> seen;
  std::vector<Vec3> unique;
  for (const Vec3& t : p.seeds) {
    std::array<long long, 3> key;
    for (int k = 0; k < 3; ++k)
      key[k] = std::llround((t[k] - std::floor(t[k])) * 1e7) % 10000000;
    if (seen.insert(key).second)
      unique.push_back(t);
  }
  p.seeds = std::move(unique);
}

SiteProblem prepare(const AtomStructure& s1, const AtomStructure& s2, const LatticeMapping& m) {
  SiteProblem p;
  p.f1 = to_basis(s1.frac_coords, m.s1_basis);
  p.f2 = to_basis(s2.frac_coords, m.s2_basis);
  p.G = 0.5 * (m.l1.metric() + m.l2.metric());
  const double n = static_cast<double>(s1.size());
  p.norm = std::cbrt(std::sqrt(p.G.determinant()) / n);
  double shortest = std::numeric_limits<double>::infinity();
  for (int x = -2; x <= 2; ++x)
    for (int y = -2; y <= 2; ++y)
      for (int z = -2; z <= 2; ++z)
        if (x || y || z) {
          Vec3 v(x, y, z);
          shortest = std::min(shortest, v.dot(p.G * v));
        }
  // small safety margin against rounding in the comparison
  p.unique_sq = 0.25 * shortest * (1 - 1e-9);
  p.images = ImageTable(p.G);

  std::map<int, std::vector<int>> by1, by2;
  for (std::size_t i = 0; i < s1.size(); ++i)
    by1[s1.species[i]].push_back(static_cast<int>(i));
  for (std::size_t i = 0; i < s2.size(); ++i)
    by2[s2.species[i]].push_back(static_cast<int>(i));
  int anchor_species = 0;
  std::size_t anchor_count = std::numeric_limits<std::size_t>::max();
  for (auto& [z, idx] : by1) {
    p.cls1.push_back(idx);
    p.cls2.push_back(by2[z]);
    if (idx.size() > static_cast<std::size_t>(kHungarianMaxClass))
      p.solver = AssignmentSolverKind::GreedyTwoSwap;
    if (idx.size() < anchor_count) {  // map order gives the smallest Z on ties
      anchor_count = idx.size();
      anchor_species = z;
    }
  }
  add_seeds(p, by1[anchor_species].front(), by2[anchor_species]);
  return p;
}

struct Evaluation {
  std::vector<int> partner;  // S2 atom for each S1 atom
  std::vector<Vec3> disp;    // frac displacement f2 + t - f1, minimum image
  double sum_sq = 0;
  double max_sq = 0;
};

Evaluation evaluate_at(const SiteProblem& p, const Vec3& t) {
  Evaluation e;
  const std::size_t n = p.f1.size();
  e.partner.assign(n, -1);
  e.disp.assign(n, Vec3::Zero());
  for (std::size_t c = 0; c < p.cls1.size(); ++c) {
    const auto& r = p.cls1[c];
    const auto& q = p.cls2[c];
    const int k = static_cast<int>(r.size());
    Eigen::MatrixXd cost(k, k);
    std::vector<Vec3> d(static_cast<std::size_t>(k) * k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        MinImage m = min_image(p.f2[q[j]] + t - p.f1[r[i]], p.G, p.unique_sq, p.images);
        d[static_cast<std::size_t>(i) * k + j] = m.d;
        cost(i, j) = m.sq;
      }
    Assignment a = k > kHungarianMaxClass ? solve_greedy_two_swap(cost) : solve_hungarian(cost);
    for (int i = 0; i < k; ++i) {
      int j = a.col_for_row[i];
      e.partner[r[i]] = q[j];
      e.disp[r[i]] = d[static_cast<std::size_t>(i) * k + j];
      double sq = cost(i, j);
      e.sum_sq += sq;
      e.max_sq = std::max(e.max_sq, sq);
    }
  }
  return e;
}

SiteCandidate summarize(const SiteProblem& p, const Evaluation& e) {
  double n = static_cast<double>(p.f1.size());
  return {std::sqrt(e.sum_sq / n) / p.norm, std::sqrt(e.max_sq) / p.norm};
}

// True when every S1 atom has a same-species S2 atom within `limit`
// (squared, metric units) at translation t.
bool all_within(const SiteProblem& p, const Vec3& t, double limit) {
  for (std::size_t c = 0; c < p.cls1.size(); ++c)
    for (int i : p.cls1[c]) {
      bool near = false;
      for (int j : p.cls2[c]) {
        if (min_image(p.f2[j] + t - p.f1[i], p.G, p.unique_sq, p.images).sq <= limit) {
          near = true;
          break;
        }
      }
      if (!near)
        return false;
    }
  return true;
}

// Each seed translation starts a mean-shift iteration that moves t to the
// least-squares optimum of the current assignment and reassigns until the
// assignment is stable. Only the converged state is scored.
//
// A state with every displacement within s has, at the anchor translation
// of its own anchor pairing, every displacement within 2s. Seeds failing
// that test for s = `reach` are skipped.
// Returns true once a candidate with no displacement turns up; nothing can
// beat it on either criterion, so callers stop searching.
bool collect_candidates(const SiteProblem& p, double reach, std::vector<SiteCandidate>& out) {
  const std::size_t n = p.f1.size();
  const double limit = std::pow(2 * reach * p.norm, 2);
  for (Vec3 t : p.seeds) {
    if (!all_within(p, t, limit))
      continue;
    Evaluation e = evaluate_at(p, t);
    for (int iter = 0; iter < 50; ++iter) {
      Vec3 mean = Vec3::Zero();
      for (const Vec3& d : e.disp)
        mean += d;
      mean /= static_cast<double>(n);
      if (mean.norm() < 1e-13)
        break;
      t -= mean;
      Evaluation next = evaluate_at(p, t);
      bool stable = next.partner == e.partner;
      // only the approximate solver can fail to lower the cost; stop there
      // rather than cycle
      if (!stable && next.sum_sq >= e.sum_sq)
        break;
      e = std::move(next);
      if (stable && mean.norm() < 1e-10)
        break;
    }
    out.push_back(summarize(p, e));
    if (out.back().max_disp < kExactDisp)
      return true;
  }
  return false;
}

struct Selection {
  bool matched = false;
  double rmse = kNaN;
  double max_disp = kNaN;
  double best_max = std::numeric_limits<double>::infinity();
};

// Matched at stol: lowest rmse among candidates within stol. Unmatched: the
// candidate with the smallest max displacement.
Selection select(const std::vector<SiteCandidate>& cands, double stol) {
  Selection s;
  double best_rmse = std::numeric_limits<double>::infinity();
  double unmatched_rmse = kNaN;
  for (const SiteCandidate& c : cands) {
    if (c.max_disp < s.best_max) {
      s.best_max = c.max_disp;
      unmatched_rmse = c.rmse;
    }
    if (c.max_disp <= stol && c.rmse < best_rmse) {
      best_rmse = c.rmse;
      s.matched = true;
      s.rmse = c.rmse;
      s.max_disp = c.max_disp;
    }
  }
  if (!s.matched && !cands.empty()) {
    s.rmse = unmatched_rmse;
    s.max_disp = s.best_max;
  }
  return s;
}

MatchTier tier_from(double best_max) {
  if (best_max <= 0.5)
    return MatchTier::Tight;
  if (best_max <= 0.75)
    return MatchTier::Medium;
  if (best_max <= 1.0)
    return MatchTier::Loose;
  return MatchTier::None;
}

} // namespace

SiteMatch sites_match(const AtomStructure& s1, const AtomStructure& s2, const LatticeMapping& mapping,
                      double stol) {
  if (!same_composition(s1.species, s2.species))
    throw Error(ErrorKind::SpeciesMismatch, "structures have different compositions");
  if (s1.size() == 0)
    throw std::invalid_argument("cannot match empty structures");
  SiteProblem p = prepare(s1, s2, mapping);
  std::vector<SiteCandidate> cands;
  collect_candidates(p, std::max(stol, kTierStols[2]), cands);
  Selection sel = select(cands, stol);
  return {sel.matched, sel.rmse, sel.max_disp, sel.best_max, p.solver};
}

MatchReport structures_match(const AtomStructure& pred, const AtomStructure& gt, const MatchTolerances& tol) {
  MatchReport r;
  r.rmse = r.max_disp = kNaN;
  if (pred.size() == 0 || !same_composition(gt.species, pred.species))
    return r;
  try {
    auto mappings = lattices_match(gt.lattice, pred.lattice, tol.ltol, tol.atol);
    r.mappings = mappings.size();
    r.lattice_matched = !mappings.empty();
    std::vector<SiteCandidate> cands;
    for (const LatticeMapping& m : mappings) {
      SiteProblem p = prepare(gt, pred, m);
      if (p.solver == AssignmentSolverKind::GreedyTwoSwap)
        r.solver = p.solver;
      if (collect_candidates(p, std::max(tol.stol, kTierStols[2]), cands))
        break;
    }
    Selection sel = select(cands, tol.stol);
    r.matched = sel.matched;
    r.rmse = sel.rmse;
    r.max_disp = sel.max_disp;
    r.tier = tier_from(sel.best_max);
  } catch (const Error&) {
    // a cell that cannot be reduced cannot be matched
  }
  return r;
}

MatchTier minimal_match_tier(const AtomStructure& pred, const AtomStructure& gt) {
  return structures_match(pred, gt, {0.5, 0.3, 1.0}).tier;
}

// ---------------------------------------------------------------- batches

namespace {

CaseOutcome evaluate_case(const CandidateSet& cands, const AtomStructure& gt, const MatchTolerances& tol) {
  CaseOutcome out;
  out.rmse = kNaN;
  for (std::size_t k = 0; k < cands.size(); ++k) {
    if (!cands[k])
      continue;
    MatchReport r = structures_match(*cands[k], gt, tol);
    if (r.matched && (!out.matched || r.rmse < out.rmse)) {
      out.matched = true;
      out.rmse = r.rmse;
      out.best_candidate = static_cast<int>(k);
    }
  }
  return out;
}

} // namespace

BatchSummary evaluate_batch(const std::vector<CandidateSet>& candidates, const std::vector<AtomStructure>& gts,
                            const MatchTolerances& tol, Exec exec) {
  if (candidates.size() != gts.size())
    throw Error(ErrorKind::LengthMismatch, "candidate sets and ground truths differ in length");
  BatchSummary s;
  const long n = static_cast<long>(gts.size());
  s.cases.resize(gts.size());
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i)
      s.cases[i] = evaluate_case(candidates[i], gts[i], tol);
  } else {
    for (long i = 0; i < n; ++i)
      s.cases[i] = evaluate_case(candidates[i], gts[i], tol);
  }
  double rmse_sum = 0;
  for (const CaseOutcome& c : s.cases)
    if (c.matched) {
      ++s.matched;
      rmse_sum += c.rmse;
    }
  s.match_rate = n ? 100.0 * static_cast<double>(s.matched) / static_cast<double>(n) : 0.0;
  s.mean_rmse = s.matched ? rmse_sum / static_cast<double>(s.matched) : kNaN;
  return s;
}

double match_rate(const std::vector<CandidateSet>& candidates, const std::vector<AtomStructure>& gts,
                  const MatchTolerances& tol, Exec exec) {
  return evaluate_batch(candidates, gts, tol, exec).match_rate;
}

double best_rmse(const std::vector<CandidateSet>& candidates, const std::vector<AtomStructure>& gts,
                 const MatchTolerances& tol, Exec exec) {
  return evaluate_batch(candidates, gts, tol, exec).mean_rmse;
}

} // namespace mofasm

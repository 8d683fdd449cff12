// Periodic structure matching: lattice mappings, per-species site
// assignment, normalized displacements, tiers and batch match rates.
//
// Displacements are normalized by (V/N)^(1/3). Both cells are Niggli-reduced
// before matching; no primitive-cell search and no volume rescaling.

#ifndef MOFASM_MATCHER_HPP_
#define MOFASM_MATCHER_HPP_

#include <optional>
#include <vector>

#include "mofasm/assembler.hpp"
#include "mofasm/exec.hpp"
#include "mofasm/lattice.hpp"

namespace mofasm {

struct MatchTolerances {
  double stol = 0.5;  // normalized site tolerance
  double ltol = 0.3;  // fractional length tolerance
  double atol = 1.0;  // degrees
};

/// The two tolerance sets used for reporting match rates.
inline constexpr MatchTolerances kStrictTolerances{0.5, 0.3, 1.0};
inline constexpr MatchTolerances kLooseTolerances{1.0, 0.3, 1.0};

enum class MatchTier { Tight, Medium, Loose, None };
/// 0.5, 0.75, 1.0; NaN for None.
double tier_stol(MatchTier t);
const char* to_string(MatchTier t);
inline constexpr double kTierStols[3] = {0.5, 0.75, 1.0};

enum class AssignmentSolverKind { Hungarian, GreedyTwoSwap };
const char* to_string(AssignmentSolverKind k);

/// Classes up to this size use the exact Hungarian solver.
inline constexpr int kHungarianMaxClass = 64;

struct LatticeMapping {
  /// Niggli basis of the first lattice: l1 = s1_basis * L1.
  Mat3i s1_basis;
  /// Basis of the second lattice aligned to l1: l2 = s2_basis * L2.
  Mat3i s2_basis;
  LatticeMatrix l1;
  LatticeMatrix l2;
};

/// Candidate bases of L2 (integer combinations of its Niggli basis) whose
/// lengths and angles agree with the Niggli basis of L1. Orientation is
/// preserved. The coefficient range [-2,2] widens to [-3,3] when nothing is
/// found but the reduced lengths agree within 2*ltol.
std::vector<LatticeMapping> lattices_match(const LatticeMatrix& L1, const LatticeMatrix& L2, double ltol,
                                           double atol);

struct SiteMatch {
  bool matched = false;
  double rmse = 0;
  double max_disp = 0;
  /// Smallest max displacement over all candidate translations.
  double best_max_disp = 0;
  AssignmentSolverKind solver = AssignmentSolverKind::Hungarian;
};

/// Throws SpeciesMismatch when the species multisets differ.
SiteMatch sites_match(const AtomStructure& s1, const AtomStructure& s2, const LatticeMapping& mapping,
                      double stol);

struct MatchReport {
  bool matched = false;
  bool lattice_matched = false;
  /// NaN when no lattice mapping exists or the compositions differ.
  double rmse = 0;
  double max_disp = 0;
  /// Evaluated at the report's ltol/atol.
  MatchTier tier = MatchTier::None;
  std::size_t mappings = 0;
  AssignmentSolverKind solver = AssignmentSolverKind::Hungarian;
};

/// The ground truth supplies the reference lattice for ltol. Ties keep the
/// lowest rmse, then the first mapping in enumeration order.
MatchReport structures_match(const AtomStructure& pred, const AtomStructure& gt,
                             const MatchTolerances& tol = kStrictTolerances);

/// Smallest stol in {0.5, 0.75, 1.0} that matches at ltol 0.3, atol 1.0.
MatchTier minimal_match_tier(const AtomStructure& pred, const AtomStructure& gt);

/// A case's candidates; nullopt marks a candidate that failed to parse or
/// assemble.
using CandidateSet = std::vector<std::optional<AtomStructure>>;

struct CaseOutcome {
  bool matched = false;
  double rmse = 0;  // best-matching candidate; NaN when unmatched
  int best_candidate = -1;
};

struct BatchSummary {
  double match_rate = 0;  // percent
  double mean_rmse = 0;   // over matched cases; NaN when none matched
  std::size_t matched = 0;
  std::vector<CaseOutcome> cases;
};

/// Throws LengthMismatch when the lists differ in length. Results do not
/// depend on `exec`.
BatchSummary evaluate_batch(const std::vector<CandidateSet>& candidates,
                            const std::vector<AtomStructure>& gts, const MatchTolerances& tol,
                            Exec exec = Exec::Parallel);

double match_rate(const std::vector<CandidateSet>& candidates, const std::vector<AtomStructure>& gts,
                  const MatchTolerances& tol, Exec exec = Exec::Parallel);
double best_rmse(const std::vector<CandidateSet>& candidates, const std::vector<AtomStructure>& gts,
                 const MatchTolerances& tol, Exec exec = Exec::Parallel);

} // namespace mofasm

#endif

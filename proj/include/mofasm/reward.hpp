// Matching-driven reward, group-normalized advantages, the sigmoid-gated
// policy objective and the supervised generation loss.

#ifndef MOFASM_REWARD_HPP_
#define MOFASM_REWARD_HPP_

#include <span>
#include <vector>

#include "mofasm/assembler.hpp"
#include "mofasm/matcher.hpp"
#include "mofasm/text_codec.hpp"

namespace mofasm {

struct RewardOutcome {
  double reward = -1;
  bool parsed = false;
  MatchTier tier = MatchTier::None;
  double rmse = 0;  // NaN unless tier is Tight
};

/// -1 on parse failure; otherwise assemble with `blocks` and score the tier:
/// Tight -> 1 + 0.5 exp(-4 rmse), Medium -> 0.6, Loose -> 0.3, None -> 0.
/// A prediction that cannot be assembled (block count differs) scores as a
/// parse failure.
RewardOutcome compute_reward(const ParseResult& parsed, const std::vector<BuildingBlock>& blocks,
                             const AtomStructure& gt);

/// Reward for a known tier and rmse.
double tier_reward(MatchTier tier, double rmse);

/// (r - mean) / (population std + eps).
std::vector<double> group_advantages(std::span<const double> rewards, double eps = 1e-6);

double sigmoid(double x);
/// sigma(tau (x - 1)) * 4 / tau.
double gate(double x, double tau);
/// d gate / dx = 4 sigma (1 - sigma).
double gate_derivative(double x, double tau);

struct GroupSample {
  std::vector<double> logp_policy;
  std::vector<double> logp_ref;
  double reward = 0;
};

inline constexpr double kLogRatioClamp = 50.0;

/// exp(logp_policy - logp_ref) per token with the exponent clamped to
/// [-50, 50]. Throws LengthMismatch.
std::vector<double> importance_ratios(const GroupSample& sample);

struct SapoConfig {
  int group_size = 8;
  double tau_pos = 1.0;
  double tau_neg = 1.05;
  double advantage_epsilon = 1e-6;
};

struct SampleDiagnostics {
  double advantage = 0;
  double tau = 0;
  double mean_gate = 0;
  /// Fraction of tokens whose sigmoid is below 0.05 or above 0.95.
  double saturated_fraction = 0;
  /// dJ/d logp_policy per token; zero where the log-ratio is clamped.
  std::vector<double> grad_logp;
};

struct SapoResult {
  double objective = 0;
  std::vector<SampleDiagnostics> samples;
};

/// J = (1/G) sum_i (1/|R_i|) sum_t gate_{tau_i}(ratio_it) A_i with
/// tau_i = tau_pos when A_i > 0, tau_neg otherwise. Advantages come from the
/// sample rewards. Throws EmptySequence, LengthMismatch, and
/// std::invalid_argument when the group size differs from cfg.group_size.
SapoResult sapo_objective(const std::vector<GroupSample>& group, const SapoConfig& cfg);

/// -sum logp. Throws EmptySequence.
double sft_nll(std::span<const double> token_logprobs);

} // namespace mofasm

#endif

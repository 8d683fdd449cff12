#include "mofasm/reward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mofasm/error.hpp"

namespace mofasm {

double tier_reward(MatchTier tier, double rmse) {
  switch (tier) {
    case MatchTier::Tight: return 1.0 + 0.5 * std::exp(-4.0 * rmse);
    case MatchTier::Medium: return 0.6;
    case MatchTier::Loose: return 0.3;
    case MatchTier::None: break;
  }
  return 0.0;
}

RewardOutcome compute_reward(const ParseResult& parsed, const std::vector<BuildingBlock>& blocks,
                             const AtomStructure& gt) {
  RewardOutcome out;
  out.rmse = std::numeric_limits<double>::quiet_NaN();
  const auto* pred = std::get_if<ParsedPrediction>(&parsed);
  if (!pred || pred->poses.size() != blocks.size())
    return out;
  AtomStructure s;
  try {
    s = assemble({pred->lattice, blocks, pred->poses});
  } catch (const Error&) {
    return out;
  }
  out.parsed = true;
  MatchReport r = structures_match(s, gt, kStrictTolerances);
  out.tier = r.tier;
  if (r.tier == MatchTier::Tight)
    out.rmse = r.rmse;
  out.reward = tier_reward(out.tier, out.rmse);
  return out;
}

std::vector<double> group_advantages(std::span<const double> rewards, double eps) {
  const double n = static_cast<double>(rewards.size());
  std::vector<double> out(rewards.size(), 0.0);
  if (rewards.empty())
    return out;
  double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  double var = 0;
  for (double r : rewards)
    var += (r - mean) * (r - mean);
  double sd = std::sqrt(var / n);
  for (std::size_t i = 0; i < rewards.size(); ++i)
    out[i] = (rewards[i] - mean) / (sd + eps);
  return out;
}

double sigmoid(double x) {
  if (x >= 0)
    return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double gate(double x, double tau) { return sigmoid(tau * (x - 1.0)) * 4.0 / tau; }

double gate_derivative(double x, double tau) {
  double s = sigmoid(tau * (x - 1.0));
  return 4.0 * s * (1.0 - s);
}

std::vector<double> importance_ratios(const GroupSample& sample) {
  if (sample.logp_policy.size() != sample.logp_ref.size())
    throw Error(ErrorKind::LengthMismatch, "policy and reference log-probs differ in length");
  std::vector<double> r(sample.logp_policy.size());
  for (std::size_t t = 0; t < r.size(); ++t)
    r[t] = std::exp(std::clamp(sample.logp_policy[t] - sample.logp_ref[t], -kLogRatioClamp, kLogRatioClamp));
  return r;
}

SapoResult sapo_objective(const std::vector<GroupSample>& group, const SapoConfig& cfg) {
  if (static_cast<int>(group.size()) != cfg.group_size)
    throw std::invalid_argument("group size differs from the configured G");
  std::vector<double> rewards;
  for (const GroupSample& s : group) {
    if (s.logp_policy.empty())
      throw Error(ErrorKind::EmptySequence, "sample without tokens");
    rewards.push_back(s.reward);
  }
  std::vector<double> adv = group_advantages(rewards, cfg.advantage_epsilon);

  SapoResult res;
  const double G = static_cast<double>(group.size());
  for (std::size_t i = 0; i < group.size(); ++i) {
    const GroupSample& s = group[i];
    std::vector<double> ratios = importance_ratios(s);
    SampleDiagnostics d;
    d.advantage = adv[i];
    d.tau = adv[i] > 0 ? cfg.tau_pos : cfg.tau_neg;
    const double len = static_cast<double>(ratios.size());
    double sum_gate = 0;
    std::size_t saturated = 0;
    d.grad_logp.assign(ratios.size(), 0.0);
    for (std::size_t t = 0; t < ratios.size(); ++t) {
      double g = gate(ratios[t], d.tau);
      sum_gate += g;
      double sg = sigmoid(d.tau * (ratios[t] - 1.0));
      if (sg < 0.05 || sg > 0.95)
        ++saturated;
      double diff = s.logp_policy[t] - s.logp_ref[t];
      if (std::abs(diff) < kLogRatioClamp)
        d.grad_logp[t] = gate_derivative(ratios[t], d.tau) * ratios[t] * adv[i] / (G * len);
    }
    d.mean_gate = sum_gate / len;
    d.saturated_fraction = static_cast<double>(saturated) / len;
    res.objective += d.mean_gate * adv[i] / G;
    res.samples.push_back(std::move(d));
  }
  return res;
}

double sft_nll(std::span<const double> token_logprobs) {
  if (token_logprobs.empty())
    throw Error(ErrorKind::EmptySequence, "no tokens");
  double s = 0;
  for (double lp : token_logprobs)
    s -= lp;
  return s;
}

} // namespace mofasm

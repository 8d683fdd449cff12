// A small autoregressive categorical policy over discretized placement
// tokens, used to exercise the supervised and policy-gradient training math
// end to end with analytic gradients.

#ifndef MOFASM_POLICY_SIM_HPP_
#define MOFASM_POLICY_SIM_HPP_

#include <array>
#include <cstdint>
#include <ostream>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mofasm/assembler.hpp"
#include "mofasm/reward.hpp"
#include "mofasm/text_codec.hpp"

namespace mofasm {

/// Slot layout: a b c alpha beta gamma, then per block tx ty tz roll pitch
/// yaw, then a single-option end marker.
struct TokenVocab {
  std::vector<double> lengths{6, 10, 14, 18};
  std::vector<double> angles{60, 75, 90, 105, 120};
  int translation_bins = 16;
  int euler_bins = 16;

  std::vector<int> slot_sizes(std::size_t n_blocks) const;

  double translation_center(int k) const;
  /// Component 0 and 2 span [-pi, pi), component 1 spans [-pi/2, pi/2].
  double euler_center(int component, int k) const;
  int encode_translation(double t) const;
  int encode_euler(int component, double v) const;
  static int nearest(const std::vector<double>& grid, double v);

  std::vector<int> encode(const LatticeParams& lattice, const std::vector<BlockPose>& poses) const;
  /// Throws std::invalid_argument for a sequence of the wrong length.
  ParsedPrediction decode(const std::vector<int>& tokens) const;
};

struct Scenario {
  std::string name;
  std::vector<BuildingBlock> blocks;
  LatticeParams gt_lattice;
  std::vector<BlockPose> gt_poses;
  TokenVocab vocab;

  AtomStructure gt_structure() const;
  std::vector<int> gt_tokens() const;
};

/// Two single-atom blocks (Cu, Zn) in a 10 A cube, poses on bin centers.
Scenario two_block_scenario();

struct ToyPolicy {
  std::vector<int> slot_sizes;
  bool conditioned = false;
  double temperature = 1.0;
  /// logits[s](context, token); a single context row unless conditioned on
  /// the previous slot's token.
  std::vector<Eigen::MatrixXd> logits;

  static ToyPolicy uniform(std::vector<int> slot_sizes, bool conditioned = false, double temperature = 1.0);

  std::size_t num_slots() const { return slot_sizes.size(); }
  int context(std::size_t slot, const std::vector<int>& tokens) const;
  Eigen::VectorXd probs(std::size_t slot, int context) const;
  std::vector<double> token_logprobs(const std::vector<int>& tokens) const;
  std::vector<int> sample(std::mt19937_64& rng) const;
  std::size_t num_params() const;
  double& param(std::size_t k);
};

/// Flat gradient laid out like the policy's logits.
using PolicyGradient = std::vector<Eigen::MatrixXd>;

/// d/dlogits of sum_t w_t logp_t for the given sequence, accumulated into g.
void accumulate_logp_gradient(const ToyPolicy& policy, const std::vector<int>& tokens,
                              const std::vector<double>& weights, PolicyGradient& g);

struct SftStep {
  ToyPolicy policy;
  double nll = 0;  // before the step
};

/// One gradient-descent step on the sequence NLL.
SftStep sft_step(const ToyPolicy& policy, const std::vector<int>& gt_tokens, double learning_rate);

struct Rollout {
  std::vector<std::vector<int>> tokens;
  std::vector<GroupSample> samples;
  std::vector<ParsedPrediction> decoded;
  std::vector<RewardOutcome> outcomes;
};

/// Draws G sequences from `sampler` (deterministic in seed). Log-probs are
/// filled under `policy` and `ref`; rewards are left at zero.
Rollout sample_group(const ToyPolicy& sampler, const ToyPolicy& policy, const ToyPolicy& ref,
                     const TokenVocab& vocab, int G, std::uint64_t seed);

/// Renders each decoded prediction, parses it back and scores it.
void score_rollout(Rollout& rollout, const Scenario& scenario, const AtomStructure& gt);

/// Recomputes J and dJ/dlogits for fixed tokens, reference log-probs and
/// rewards under `policy`.
struct SapoGradient {
  SapoResult result;
  PolicyGradient grad;
};
SapoGradient sapo_gradient(const ToyPolicy& policy, const Rollout& rollout, const SapoConfig& cfg);

struct StepStats {
  int step = 0;
  double mean_reward = 0;
  double mean_abs_advantage = 0;
  double gate_saturation = 0;
  double objective = 0;
  /// Tight, Medium, Loose, None, parse failure.
  std::array<int, 5> tiers{};
};

struct SapoStep {
  ToyPolicy policy;
  StepStats stats;
};

/// Samples from ref, scores against the scenario and takes one ascent step
/// on J.
SapoStep sapo_step(const ToyPolicy& policy, const ToyPolicy& ref, const Scenario& scenario,
                   const AtomStructure& gt, const SapoConfig& cfg, double learning_rate, std::uint64_t seed);

struct TrainConfig {
  int steps = 500;
  double learning_rate = 0.5;
  SapoConfig sapo;
  std::uint64_t seed = 0;
};

/// Repeated sapo_step with the step's starting policy as reference. Each
/// step's stats are written as one JSON line when `jsonl` is given.
std::vector<StepStats> run_training(ToyPolicy& policy, const Scenario& scenario, const TrainConfig& cfg,
                                    std::ostream* jsonl = nullptr);

/// sft_step until the sequence NLL drops below `target_nll`; returns the
/// final NLL.
double sft_warm_start(ToyPolicy& policy, const std::vector<int>& gt_tokens, double learning_rate,
                      double target_nll, int max_steps = 10000);

double trailing_mean_reward(const std::vector<StepStats>& curve, std::size_t window);

} // namespace mofasm

#endif

#include "mofasm/policy_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "mofasm/error.hpp"

namespace mofasm {

namespace {
constexpr double kPi = std::numbers::pi;
}

// ---------------------------------------------------------------- vocab

std::vector<int> TokenVocab::slot_sizes(std::size_t n_blocks) const {
  std::vector<int> s;
  for (int k = 0; k < 3; ++k)
    s.push_back(static_cast<int>(lengths.size()));
  for (int k = 0; k < 3; ++k)
    s.push_back(static_cast<int>(angles.size()));
  for (std::size_t m = 0; m < n_blocks; ++m) {
    for (int k = 0; k < 3; ++k)
      s.push_back(translation_bins);
    for (int k = 0; k < 3; ++k)
      s.push_back(euler_bins);
  }
  s.push_back(1);
  return s;
}

double TokenVocab::translation_center(int k) const { return (k + 0.5) / translation_bins; }

double TokenVocab::euler_center(int component, int k) const {
  double lo = component == 1 ? -kPi / 2 : -kPi;
  double width = (component == 1 ? kPi : 2 * kPi) / euler_bins;
  return lo + (k + 0.5) * width;
}

int TokenVocab::encode_translation(double t) const {
  int k = static_cast<int>(std::floor(wrap_unit(t) * translation_bins));
  return std::clamp(k, 0, translation_bins - 1);
}

int TokenVocab::encode_euler(int component, double v) const {
  double lo = component == 1 ? -kPi / 2 : -kPi;
  double width = (component == 1 ? kPi : 2 * kPi) / euler_bins;
  int k = static_cast<int>(std::floor((v - lo) / width));
  return std::clamp(k, 0, euler_bins - 1);
}

int TokenVocab::nearest(const std::vector<double>& grid, double v) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(grid.size()); ++k)
    if (std::abs(grid[k] - v) < std::abs(grid[best] - v))
      best = k;
  return best;
}

std::vector<int> TokenVocab::encode(const LatticeParams& lattice, const std::vector<BlockPose>& poses) const {
  std::vector<int> t;
  for (double v : {lattice.a, lattice.b, lattice.c})
    t.push_back(nearest(lengths, v));
  for (double v : {lattice.alpha, lattice.beta, lattice.gamma})
    t.push_back(nearest(angles, v));
  for (const BlockPose& p : poses) {
    for (int k = 0; k < 3; ++k)
      t.push_back(encode_translation(p.translation[k]));
    t.push_back(encode_euler(0, p.euler.roll));
    t.push_back(encode_euler(1, p.euler.pitch));
    t.push_back(encode_euler(2, p.euler.yaw));
  }
  t.push_back(0);
  return t;
}

ParsedPrediction TokenVocab::decode(const std::vector<int>& tokens) const {
  if (tokens.size() < 7 || (tokens.size() - 7) % 6 != 0)
    throw std::invalid_argument("token sequence has the wrong length");
  ParsedPrediction p;
  p.lattice = {lengths.at(tokens[0]), lengths.at(tokens[1]), lengths.at(tokens[2]),
               angles.at(tokens[3]), angles.at(tokens[4]), angles.at(tokens[5])};
  for (std::size_t m = 0; m < (tokens.size() - 7) / 6; ++m) {
    const int* t = tokens.data() + 6 + 6 * m;
    BlockPose pose;
    pose.translation = Vec3(translation_center(t[0]), translation_center(t[1]), translation_center(t[2]));
    pose.euler = {euler_center(0, t[3]), euler_center(1, t[4]), euler_center(2, t[5])};
    p.poses.push_back(pose);
  }
  return p;
}

// ---------------------------------------------------------------- scenario

AtomStructure Scenario::gt_structure() const { return assemble({gt_lattice, blocks, gt_poses}); }

std::vector<int> Scenario::gt_tokens() const { return vocab.encode(gt_lattice, gt_poses); }

Scenario two_block_scenario() {
  Scenario s;
  s.name = "two_block";
  s.blocks = {make_block({29}, {Vec3::Zero()}, "[Cu]"), make_block({30}, {Vec3::Zero()}, "[Zn]")};
  s.gt_lattice = {10, 10, 10, 90, 90, 90};
  const TokenVocab& v = s.vocab;
  auto pose = [&](int tx, int ty, int tz, int r, int p, int y) {
    BlockPose b;
    b.translation = Vec3(v.translation_center(tx), v.translation_center(ty), v.translation_center(tz));
    b.euler = {v.euler_center(0, r), v.euler_center(1, p), v.euler_center(2, y)};
    return b;
  };
  s.gt_poses = {pose(2, 2, 2, 8, 8, 8), pose(10, 8, 6, 3, 10, 12)};
  return s;
}

// ---------------------------------------------------------------- policy

ToyPolicy ToyPolicy::uniform(std::vector<int> slot_sizes, bool conditioned, double temperature) {
  ToyPolicy p;
  p.slot_sizes = std::move(slot_sizes);
  p.conditioned = conditioned;
  p.temperature = temperature;
  for (std::size_t s = 0; s < p.slot_sizes.size(); ++s) {
    int rows = conditioned && s > 0 ? p.slot_sizes[s - 1] : 1;
    p.logits.push_back(Eigen::MatrixXd::Zero(rows, p.slot_sizes[s]));
  }
  return p;
}

int ToyPolicy::context(std::size_t slot, const std::vector<int>& tokens) const {
  return conditioned && slot > 0 ? tokens[slot - 1] : 0;
}

Eigen::VectorXd ToyPolicy::probs(std::size_t slot, int ctx) const {
  Eigen::VectorXd z = logits[slot].row(ctx).transpose() / temperature;
  z.array() -= z.maxCoeff();
  // scalar exp so that a hopeless token gets exactly zero; the packet
  // version clamps its input and leaves a subnormal
  Eigen::VectorXd e = z.unaryExpr([](double x) { return std::exp(x); });
  return e / e.sum();
}

std::vector<double> ToyPolicy::token_logprobs(const std::vector<int>& tokens) const {
  if (tokens.size() != num_slots())
    throw std::invalid_argument("token sequence does not fit the policy");
  std::vector<double> lp(tokens.size());
  for (std::size_t s = 0; s < tokens.size(); ++s) {
    Eigen::VectorXd z = logits[s].row(context(s, tokens)).transpose() / temperature;
    double m = z.maxCoeff();
    double lse = m + std::log((z.array() - m).exp().sum());
    lp[s] = z[tokens[s]] - lse;
  }
  return lp;
}

std::vector<int> ToyPolicy::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<int> tokens(num_slots(), 0);
  for (std::size_t s = 0; s < num_slots(); ++s) {
    Eigen::VectorXd p = probs(s, context(s, tokens));
    double x = u(rng), acc = 0;
    int k = static_cast<int>(p.size()) - 1;
    for (int j = 0; j < p.size(); ++j) {
      acc += p[j];
      if (x < acc) {
        k = j;
        break;
      }
    }
    tokens[s] = k;
  }
  return tokens;
}

std::size_t ToyPolicy::num_params() const {
  std::size_t n = 0;
  for (const auto& m : logits)
    n += static_cast<std::size_t>(m.size());
  return n;
}

double& ToyPolicy::param(std::size_t k) {
  for (auto& m : logits) {
    if (k < static_cast<std::size_t>(m.size()))
      return m.data()[k];
    k -= static_cast<std::size_t>(m.size());
  }
  throw std::out_of_range("parameter index");
}

namespace {

PolicyGradient zero_gradient(const ToyPolicy& p) {
  PolicyGradient g;
  for (const auto& m : p.logits)
    g.push_back(Eigen::MatrixXd::Zero(m.rows(), m.cols()));
  return g;
}

void add_scaled(ToyPolicy& p, const PolicyGradient& g, double scale) {
  for (std::size_t s = 0; s < g.size(); ++s)
    p.logits[s] += scale * g[s];
}

} // namespace

void accumulate_logp_gradient(const ToyPolicy& policy, const std::vector<int>& tokens,
                              const std::vector<double>& weights, PolicyGradient& g) {
  for (std::size_t s = 0; s < tokens.size(); ++s) {
    if (weights[s] == 0)
      continue;
    int ctx = policy.context(s, tokens);
    Eigen::VectorXd d = -policy.probs(s, ctx);
    d[tokens[s]] += 1.0;
    g[s].row(ctx) += (weights[s] / policy.temperature) * d.transpose();
  }
}

SftStep sft_step(const ToyPolicy& policy, const std::vector<int>& gt_tokens, double learning_rate) {
  SftStep out{policy, sft_nll(policy.token_logprobs(gt_tokens))};
  PolicyGradient g = zero_gradient(policy);
  accumulate_logp_gradient(policy, gt_tokens, std::vector<double>(gt_tokens.size(), 1.0), g);
  // g is d(sum logp); descending the NLL ascends it
  add_scaled(out.policy, g, learning_rate);
  return out;
}

double sft_warm_start(ToyPolicy& policy, const std::vector<int>& gt_tokens, double learning_rate,
                      double target_nll, int max_steps) {
  double nll = sft_nll(policy.token_logprobs(gt_tokens));
  for (int k = 0; k < max_steps && nll >= target_nll; ++k) {
    policy = sft_step(policy, gt_tokens, learning_rate).policy;
    nll = sft_nll(policy.token_logprobs(gt_tokens));
  }
  return nll;
}

// ---------------------------------------------------------------- rollouts

Rollout sample_group(const ToyPolicy& sampler, const ToyPolicy& policy, const ToyPolicy& ref,
                     const TokenVocab& vocab, int G, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Rollout r;
  for (int i = 0; i < G; ++i) {
    std::vector<int> t = sampler.sample(rng);
    r.samples.push_back({policy.token_logprobs(t), ref.token_logprobs(t), 0.0});
    r.decoded.push_back(vocab.decode(t));
    r.tokens.push_back(std::move(t));
  }
  return r;
}

void score_rollout(Rollout& rollout, const Scenario& scenario, const AtomStructure& gt) {
  rollout.outcomes.clear();
  for (std::size_t i = 0; i < rollout.decoded.size(); ++i) {
    const ParsedPrediction& p = rollout.decoded[i];
    std::string text = render_sft_response(p.lattice, p.poses);
    RewardOutcome o = compute_reward(parse_response(text, scenario.blocks.size()), scenario.blocks, gt);
    rollout.samples[i].reward = o.reward;
    rollout.outcomes.push_back(o);
  }
}

SapoGradient sapo_gradient(const ToyPolicy& policy, const Rollout& rollout, const SapoConfig& cfg) {
  std::vector<GroupSample> group = rollout.samples;
  for (std::size_t i = 0; i < group.size(); ++i)
    group[i].logp_policy = policy.token_logprobs(rollout.tokens[i]);
  SapoGradient out{sapo_objective(group, cfg), zero_gradient(policy)};
  for (std::size_t i = 0; i < group.size(); ++i)
    accumulate_logp_gradient(policy, rollout.tokens[i], out.result.samples[i].grad_logp, out.grad);
  return out;
}

SapoStep sapo_step(const ToyPolicy& policy, const ToyPolicy& ref, const Scenario& scenario,
                   const AtomStructure& gt, const SapoConfig& cfg, double learning_rate, std::uint64_t seed) {
  Rollout r = sample_group(ref, policy, ref, scenario.vocab, cfg.group_size, seed);
  score_rollout(r, scenario, gt);
  SapoGradient sg = sapo_gradient(policy, r, cfg);

  SapoStep out{policy, {}};
  add_scaled(out.policy, sg.grad, learning_rate);

  StepStats& st = out.stats;
  st.objective = sg.result.objective;
  std::size_t tokens = 0;
  double saturated = 0;
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    const SampleDiagnostics& d = sg.result.samples[i];
    st.mean_reward += r.samples[i].reward;
    st.mean_abs_advantage += std::abs(d.advantage);
    saturated += d.saturated_fraction * static_cast<double>(d.grad_logp.size());
    tokens += d.grad_logp.size();
    const RewardOutcome& o = r.outcomes[i];
    st.tiers[o.parsed ? static_cast<int>(o.tier) : 4] += 1;
  }
  const double G = static_cast<double>(r.samples.size());
  st.mean_reward /= G;
  st.mean_abs_advantage /= G;
  st.gate_saturation = tokens ? saturated / static_cast<double>(tokens) : 0.0;
  return out;
}

std::vector<StepStats> run_training(ToyPolicy& policy, const Scenario& scenario, const TrainConfig& cfg,
                                    std::ostream* jsonl) {
  const AtomStructure gt = scenario.gt_structure();
  std::vector<StepStats> curve;
  for (int step = 0; step < cfg.steps; ++step) {
    std::uint64_t seed = cfg.seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(step) + 1;
    ToyPolicy ref = policy;
    SapoStep s = sapo_step(policy, ref, scenario, gt, cfg.sapo, cfg.learning_rate, seed);
    policy = std::move(s.policy);
    s.stats.step = step;
    if (jsonl) {
      nlohmann::json j{{"step", step},
                       {"mean_reward", s.stats.mean_reward},
                       {"mean_abs_advantage", s.stats.mean_abs_advantage},
                       {"gate_saturation", s.stats.gate_saturation},
                       {"objective", s.stats.objective},
                       {"tiers",
                        {{"0.5", s.stats.tiers[0]},
                         {"0.75", s.stats.tiers[1]},
                         {"1.0", s.stats.tiers[2]},
                         {"none", s.stats.tiers[3]},
                         {"parse_fail", s.stats.tiers[4]}}}};
      *jsonl << j.dump() << '\n';
    }
    curve.push_back(s.stats);
  }
  return curve;
}

double trailing_mean_reward(const std::vector<StepStats>& curve, std::size_t window) {
  if (curve.empty())
    return 0.0;
  std::size_t n = std::min(window, curve.size());
  double s = 0;
  for (std::size_t k = curve.size() - n; k < curve.size(); ++k)
    s += curve[k].mean_reward;
  return s / static_cast<double>(n);
}

} // namespace mofasm

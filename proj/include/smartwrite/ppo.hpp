#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "smartwrite/rl.hpp"
#include "smartwrite/rng.hpp"

namespace smartwrite {

// Clipped-objective policy-gradient training over a multi-discrete action
// space. Single environment, hand-rolled actor-critic MLP.

struct PpoConfig {
    double learning_rate = 3e-4;
    int minibatch_size = 64;
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double entropy_coeff = 0.0;
    double value_coeff = 0.5;
    int rollout_len = 2048;
    int update_epochs = 10;
    double clip_range = 0.2;
    double max_grad_norm = 0.5;
    long total_steps = 300000;
    uint64_t seed = 0;

    void validate() const;
};

struct Linear {
    int in = 0, out = 0;
    std::vector<double> w;  // row-major, out x in
    std::vector<double> b;
};

// Shared torso (two tanh layers of 64), one categorical logit head per action
// dimension, and a scalar value head off the torso.
class PolicyNet {
  public:
    PolicyNet() = default;
    PolicyNet(int obs_dim, const std::vector<int>& action_sizes, uint64_t seed);

    int obs_dim() const { return obs_dim_; }
    const std::vector<int>& action_sizes() const { return action_sizes_; }

    struct Forward {
        std::vector<std::vector<double>> logits;  // one vector per head
        double value = 0.0;
    };
    Forward forward(const std::vector<double>& obs) const;

    std::vector<Linear> torso;       // tanh activations
    std::vector<Linear> heads;       // linear logits
    Linear value_head;

    size_t param_count() const;

  private:
    int obs_dim_ = 0;
    std::vector<int> action_sizes_;
};

// Softmax probabilities of one head's logits; throws on non-finite logits.
std::vector<double> softmax(const std::vector<double>& logits);

struct ActionSample {
    std::vector<int> action;
    double joint_logprob = 0.0;
    double value = 0.0;
};

// Heads sample independently; the joint log-probability is the sum of the
// per-head log-probabilities.
ActionSample sample_action(const PolicyNet& policy, const std::vector<double>& obs, Rng& rng);
std::vector<int> greedy_action(const PolicyNet& policy, const std::vector<double>& obs);

// delta_t = r_t + gamma*V_{t+1}*(1-done_t) - V_t;
// A_t = delta_t + gamma*lambda*(1-done_t)*A_{t+1}; returns = A + V.
std::pair<std::vector<double>, std::vector<double>> compute_gae(
    const std::vector<double>& rewards, const std::vector<double>& values,
    const std::vector<uint8_t>& dones, double bootstrap_value, double gamma, double lambda);

// min(ratio*A, clip(ratio, 1-eps, 1+eps)*A) — the pessimistic surrogate term.
double clipped_surrogate(double ratio, double advantage, double clip_range);

struct RolloutBuffer {
    std::vector<std::vector<double>> obs;
    std::vector<std::vector<int>> actions;
    std::vector<double> logprobs;
    std::vector<double> rewards;
    std::vector<double> values;
    std::vector<uint8_t> dones;
    // Filled by finalize().
    std::vector<double> advantages;
    std::vector<double> returns;

    size_t size() const { return obs.size(); }
    void clear();
    void finalize(double bootstrap_value, double gamma, double lambda);
};

struct UpdateStats {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
};

struct CurvePoint {
    long step = 0;                     // env steps consumed so far
    double mean_episode_reward = 0.0;  // over the last (up to) 10 completed episodes
};

class PpoTrainer {
  public:
    PpoTrainer(rl::Env& env, const PpoConfig& cfg);

    // Collects up to max_steps transitions (episodes auto-reset) and
    // finalizes advantages with a bootstrapped tail value.
    RolloutBuffer collect_rollout(int max_steps);
    UpdateStats update(const RolloutBuffer& buffer);

    // Alternates rollout collection and updates until total_steps env steps
    // are consumed (never more). Returns the reward curve, one point per
    // rollout.
    std::vector<CurvePoint> train();

    PolicyNet& policy() { return policy_; }
    const PolicyNet& policy() const { return policy_; }
    long steps_done() const { return steps_done_; }

  private:
    struct AdamState;
    void adam_step(std::vector<Linear*>& params, std::vector<Linear>& grads, double lr);

    rl::Env* env_;
    PpoConfig cfg_;
    PolicyNet policy_;
    Rng rng_;
    std::vector<double> cur_obs_;
    bool need_reset_ = true;
    long steps_done_ = 0;
    double episode_reward_acc_ = 0.0;
    std::vector<double> completed_episode_rewards_;

    // Flat Adam moments aligned with [torso..., heads..., value_head].
    std::vector<Linear> m_, v_;
    long adam_t_ = 0;
};

struct PpoTrainResult {
    PolicyNet policy;
    std::vector<CurvePoint> curve;
};

PpoTrainResult train_ppo(rl::Env& env, const PpoConfig& cfg);

// Greedy episodes; returns (sample mean, sample standard deviation) of total
// episode reward. Requires n_episodes >= 2.
std::pair<double, double> evaluate_policy(const PolicyNet& policy, rl::Env& env, int n_episodes);

void write_reward_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path);

void save_policy(const PolicyNet& policy, const PpoConfig& cfg, const std::string& path);
PolicyNet load_policy(const std::string& path);

}  // namespace smartwrite

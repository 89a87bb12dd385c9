#include "smartwrite/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "smartwrite/text_io.hpp"

namespace smartwrite {

void PpoConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate: must be > 0");
    if (minibatch_size <= 0) throw std::invalid_argument("minibatch_size: must be > 0");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma: must lie in (0,1]");
    if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
        throw std::invalid_argument("gae_lambda: must lie in [0,1]");
    if (entropy_coeff < 0.0) throw std::invalid_argument("entropy_coeff: must be >= 0");
    if (value_coeff < 0.0) throw std::invalid_argument("value_coeff: must be >= 0");
    if (rollout_len <= 0) throw std::invalid_argument("rollout_len: must be > 0");
    if (update_epochs <= 0) throw std::invalid_argument("update_epochs: must be > 0");
    if (!(clip_range > 0.0)) throw std::invalid_argument("clip_range: must be > 0");
    if (!(max_grad_norm > 0.0)) throw std::invalid_argument("max_grad_norm: must be > 0");
    if (total_steps < 0) throw std::invalid_argument("total_steps: must be >= 0");
}

namespace {

constexpr int kTorsoWidth = 64;

Linear make_linear(int in, int out, double scale, Rng& rng) {
    Linear l;
    l.in = in;
    l.out = out;
    l.w.resize(static_cast<size_t>(in) * out);
    l.b.assign(out, 0.0);
    double limit = scale * std::sqrt(6.0 / (in + out));
    for (double& w : l.w) w = rng.uniform(-limit, limit);
    return l;
}

void linear_forward(const Linear& l, const double* x, double* out) {
    for (int o = 0; o < l.out; ++o) {
        const double* wr = l.w.data() + static_cast<size_t>(o) * l.in;
        double z = l.b[o];
        for (int i = 0; i < l.in; ++i) z += wr[i] * x[i];
        out[o] = z;
    }
}

Linear zero_like(const Linear& l) {
    Linear g;
    g.in = l.in;
    g.out = l.out;
    g.w.assign(l.w.size(), 0.0);
    g.b.assign(l.b.size(), 0.0);
    return g;
}

}  // namespace

PolicyNet::PolicyNet(int obs_dim, const std::vector<int>& action_sizes, uint64_t seed)
    : obs_dim_(obs_dim), action_sizes_(action_sizes) {
    if (obs_dim <= 0) throw std::invalid_argument("policy: obs_dim must be > 0");
    if (action_sizes.empty()) throw std::invalid_argument("policy: empty action space");
    for (int n : action_sizes)
        if (n <= 0) throw std::invalid_argument("policy: action sizes must be > 0");
    Rng rng(seed);
    torso.push_back(make_linear(obs_dim, kTorsoWidth, 1.0, rng));
    torso.push_back(make_linear(kTorsoWidth, kTorsoWidth, 1.0, rng));
    // Near-zero logits keep the initial policy close to uniform.
    for (int n : action_sizes) heads.push_back(make_linear(kTorsoWidth, n, 0.01, rng));
    value_head = make_linear(kTorsoWidth, 1, 1.0, rng);
}

PolicyNet::Forward PolicyNet::forward(const std::vector<double>& obs) const {
    if (static_cast<int>(obs.size()) != obs_dim_)
        throw std::invalid_argument("policy: observation width mismatch");
    std::vector<double> h1(kTorsoWidth), h2(kTorsoWidth);
    linear_forward(torso[0], obs.data(), h1.data());
    for (double& v : h1) v = std::tanh(v);
    linear_forward(torso[1], h1.data(), h2.data());
    for (double& v : h2) v = std::tanh(v);

    Forward f;
    f.logits.resize(heads.size());
    for (size_t h = 0; h < heads.size(); ++h) {
        f.logits[h].resize(heads[h].out);
        linear_forward(heads[h], h2.data(), f.logits[h].data());
    }
    double v;
    linear_forward(value_head, h2.data(), &v);
    f.value = v;
    return f;
}

size_t PolicyNet::param_count() const {
    size_t n = 0;
    for (const Linear& l : torso) n += l.w.size() + l.b.size();
    for (const Linear& l : heads) n += l.w.size() + l.b.size();
    n += value_head.w.size() + value_head.b.size();
    return n;
}

std::vector<double> softmax(const std::vector<double>& logits) {
    if (logits.empty()) throw std::invalid_argument("softmax: empty logits");
    double mx = logits[0];
    for (double l : logits) {
        if (!std::isfinite(l)) throw std::invalid_argument("softmax: non-finite logit");
        mx = std::max(mx, l);
    }
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (double& x : p) x /= sum;
    return p;
}

ActionSample sample_action(const PolicyNet& policy, const std::vector<double>& obs, Rng& rng) {
    PolicyNet::Forward f = policy.forward(obs);
    ActionSample s;
    s.value = f.value;
    for (const auto& logits : f.logits) {
        std::vector<double> p = softmax(logits);
        int a = static_cast<int>(rng.categorical(p));
        s.action.push_back(a);
        s.joint_logprob += std::log(p[a]);
    }
    return s;
}

std::vector<int> greedy_action(const PolicyNet& policy, const std::vector<double>& obs) {
    PolicyNet::Forward f = policy.forward(obs);
    std::vector<int> a;
    for (const auto& logits : f.logits) {
        int best = 0;
        for (size_t i = 1; i < logits.size(); ++i)
            if (logits[i] > logits[best]) best = static_cast<int>(i);
        a.push_back(best);
    }
    return a;
}

std::pair<std::vector<double>, std::vector<double>> compute_gae(
    const std::vector<double>& rewards, const std::vector<double>& values,
    const std::vector<uint8_t>& dones, double bootstrap_value, double gamma, double lambda) {
    size_t n = rewards.size();
    if (values.size() != n || dones.size() != n)
        throw std::invalid_argument("compute_gae: sequence length mismatch");
    std::vector<double> adv(n, 0.0), ret(n, 0.0);
    double next_adv = 0.0;
    for (size_t t = n; t-- > 0;) {
        double next_value = (t + 1 < n) ? values[t + 1] : bootstrap_value;
        double not_done = dones[t] ? 0.0 : 1.0;
        double delta = rewards[t] + gamma * next_value * not_done - values[t];
        next_adv = delta + gamma * lambda * not_done * next_adv;
        adv[t] = next_adv;
        ret[t] = adv[t] + values[t];
    }
    return {std::move(adv), std::move(ret)};
}

double clipped_surrogate(double ratio, double advantage, double clip_range) {
    double clipped = std::clamp(ratio, 1.0 - clip_range, 1.0 + clip_range);
    return std::min(ratio * advantage, clipped * advantage);
}

void RolloutBuffer::clear() {
    obs.clear();
    actions.clear();
    logprobs.clear();
    rewards.clear();
    values.clear();
    dones.clear();
    advantages.clear();
    returns.clear();
}

void RolloutBuffer::finalize(double bootstrap_value, double gamma, double lambda) {
    std::tie(advantages, returns) =
        compute_gae(rewards, values, dones, bootstrap_value, gamma, lambda);
}

PpoTrainer::PpoTrainer(rl::Env& env, const PpoConfig& cfg)
    : env_(&env),
      cfg_(cfg),
      policy_(env.obs_size(), env.action_sizes(), derive_seed(cfg.seed, "policy-init")),
      rng_(derive_seed(cfg.seed, "ppo")) {
    cfg_.validate();
    auto zero_all = [this](std::vector<Linear>& dst) {
        for (const Linear& l : policy_.torso) dst.push_back(zero_like(l));
        for (const Linear& l : policy_.heads) dst.push_back(zero_like(l));
        dst.push_back(zero_like(policy_.value_head));
    };
    zero_all(m_);
    zero_all(v_);
}

RolloutBuffer PpoTrainer::collect_rollout(int max_steps) {
    if (max_steps <= 0) throw std::invalid_argument("collect_rollout: max_steps must be > 0");
    if (need_reset_) {
        cur_obs_ = env_->reset();
        need_reset_ = false;
        episode_reward_acc_ = 0.0;
    }
    RolloutBuffer buf;
    for (int k = 0; k < max_steps; ++k) {
        ActionSample s = sample_action(policy_, cur_obs_, rng_);
        rl::Step st = env_->step(s.action);
        buf.obs.push_back(cur_obs_);
        buf.actions.push_back(s.action);
        buf.logprobs.push_back(s.joint_logprob);
        buf.rewards.push_back(st.reward);
        buf.values.push_back(s.value);
        buf.dones.push_back(st.done ? 1 : 0);
        episode_reward_acc_ += st.reward;
        if (st.done) {
            completed_episode_rewards_.push_back(episode_reward_acc_);
            episode_reward_acc_ = 0.0;
            cur_obs_ = env_->reset();
        } else {
            cur_obs_ = st.observation;
        }
        ++steps_done_;
    }
    // When the rollout ended mid-episode this bootstraps the tail; after a
    // terminal step GAE zeroes it via the done flag.
    double bootstrap = policy_.forward(cur_obs_).value;
    buf.finalize(bootstrap, cfg_.gamma, cfg_.gae_lambda);
    return buf;
}

UpdateStats PpoTrainer::update(const RolloutBuffer& buffer) {
    size_t n = buffer.size();
    if (n == 0) throw std::invalid_argument("update: empty rollout buffer");
    if (buffer.advantages.size() != n)
        throw std::invalid_argument("update: buffer not finalized");

    UpdateStats stats;
    long stat_samples = 0;

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    const size_t n_heads = policy_.heads.size();
    std::vector<double> h1(kTorsoWidth), h2(kTorsoWidth), dh1(kTorsoWidth), dh2(kTorsoWidth),
        dz(kTorsoWidth);

    for (int epoch = 0; epoch < cfg_.update_epochs; ++epoch) {
        rng_.shuffle(order);
        for (size_t begin = 0; begin < n; begin += cfg_.minibatch_size) {
            size_t end = std::min(n, begin + static_cast<size_t>(cfg_.minibatch_size));
            size_t bn = end - begin;

            // Normalize advantages within the minibatch (zero mean, unit
            // sample spread).
            double mean = 0.0;
            for (size_t k = begin; k < end; ++k) mean += buffer.advantages[order[k]];
            mean /= static_cast<double>(bn);
            double var = 0.0;
            if (bn > 1) {
                for (size_t k = begin; k < end; ++k) {
                    double d = buffer.advantages[order[k]] - mean;
                    var += d * d;
                }
                var /= static_cast<double>(bn - 1);
            }
            double inv_spread = 1.0 / (std::sqrt(var) + 1e-8);

            std::vector<Linear> grads;
            for (const Linear& l : policy_.torso) grads.push_back(zero_like(l));
            for (const Linear& l : policy_.heads) grads.push_back(zero_like(l));
            grads.push_back(zero_like(policy_.value_head));
            Linear& g_t0 = grads[0];
            Linear& g_t1 = grads[1];
            Linear& g_v = grads[2 + n_heads];

            double inv_bn = 1.0 / static_cast<double>(bn);
            for (size_t k = begin; k < end; ++k) {
                size_t i = order[k];
                const std::vector<double>& x = buffer.obs[i];
                double adv = (buffer.advantages[i] - mean) * inv_spread;

                // Forward with caches.
                linear_forward(policy_.torso[0], x.data(), h1.data());
                for (double& t : h1) t = std::tanh(t);
                linear_forward(policy_.torso[1], h1.data(), h2.data());
                for (double& t : h2) t = std::tanh(t);

                double logp_new = 0.0;
                std::vector<std::vector<double>> probs(n_heads);
                for (size_t h = 0; h < n_heads; ++h) {
                    std::vector<double> logits(policy_.heads[h].out);
                    linear_forward(policy_.heads[h], h2.data(), logits.data());
                    probs[h] = softmax(logits);
                    logp_new += std::log(probs[h][buffer.actions[i][h]]);
                }
                double value;
                linear_forward(policy_.value_head, h2.data(), &value);

                double ratio = std::exp(logp_new - buffer.logprobs[i]);
                double u1 = ratio * adv;
                double u2 = std::clamp(ratio, 1.0 - cfg_.clip_range, 1.0 + cfg_.clip_range) * adv;
                stats.policy_loss += -std::min(u1, u2);
                if (std::abs(ratio - 1.0) > cfg_.clip_range) stats.clip_fraction += 1.0;
                double verr = value - buffer.returns[i];
                stats.value_loss += verr * verr;

                // d(policy term)/d logp; zero when the clipped branch is the
                // active minimum.
                double dlogp = (u1 <= u2) ? -adv * ratio * inv_bn : 0.0;
                double dvalue = cfg_.value_coeff * 2.0 * verr * inv_bn;

                std::fill(dh2.begin(), dh2.end(), 0.0);
                for (size_t h = 0; h < n_heads; ++h) {
                    const Linear& head = policy_.heads[h];
                    Linear& ghead = grads[2 + h];
                    const std::vector<double>& p = probs[h];
                    double entropy = 0.0;
                    for (double q : p)
                        if (q > 0.0) entropy -= q * std::log(q);
                    stats.entropy += entropy;  // joint entropy = sum over heads
                    for (int j = 0; j < head.out; ++j) {
                        double dlogit =
                            dlogp * ((j == buffer.actions[i][h] ? 1.0 : 0.0) - p[j]);
                        if (cfg_.entropy_coeff != 0.0 && p[j] > 0.0)
                            dlogit += cfg_.entropy_coeff * p[j] * (std::log(p[j]) + entropy) *
                                      inv_bn;
                        if (dlogit == 0.0) continue;
                        ghead.b[j] += dlogit;
                        double* gw = ghead.w.data() + static_cast<size_t>(j) * head.in;
                        const double* wr = head.w.data() + static_cast<size_t>(j) * head.in;
                        for (int t = 0; t < head.in; ++t) {
                            gw[t] += dlogit * h2[t];
                            dh2[t] += wr[t] * dlogit;
                        }
                    }
                }
                g_v.b[0] += dvalue;
                for (int t = 0; t < kTorsoWidth; ++t) {
                    g_v.w[t] += dvalue * h2[t];
                    dh2[t] += policy_.value_head.w[t] * dvalue;
                }

                // Torso backward.
                for (int t = 0; t < kTorsoWidth; ++t) dz[t] = dh2[t] * (1.0 - h2[t] * h2[t]);
                std::fill(dh1.begin(), dh1.end(), 0.0);
                for (int o = 0; o < kTorsoWidth; ++o) {
                    if (dz[o] == 0.0) continue;
                    g_t1.b[o] += dz[o];
                    double* gw = g_t1.w.data() + static_cast<size_t>(o) * kTorsoWidth;
                    const double* wr = policy_.torso[1].w.data() + static_cast<size_t>(o) * kTorsoWidth;
                    for (int t = 0; t < kTorsoWidth; ++t) {
                        gw[t] += dz[o] * h1[t];
                        dh1[t] += wr[t] * dz[o];
                    }
                }
                for (int o = 0; o < kTorsoWidth; ++o) dz[o] = dh1[o] * (1.0 - h1[o] * h1[o]);
                int in0 = policy_.torso[0].in;
                for (int o = 0; o < kTorsoWidth; ++o) {
                    if (dz[o] == 0.0) continue;
                    g_t0.b[o] += dz[o];
                    double* gw = g_t0.w.data() + static_cast<size_t>(o) * in0;
                    for (int t = 0; t < in0; ++t) gw[t] += dz[o] * x[t];
                }
                ++stat_samples;
            }

            // Global gradient-norm clip, then one optimizer step.
            double sq = 0.0;
            for (const Linear& g : grads) {
                for (double w : g.w) sq += w * w;
                for (double b : g.b) sq += b * b;
            }
            double norm = std::sqrt(sq);
            if (norm > cfg_.max_grad_norm) {
                double scale = cfg_.max_grad_norm / norm;
                for (Linear& g : grads) {
                    for (double& w : g.w) w *= scale;
                    for (double& b : g.b) b *= scale;
                }
            }
            std::vector<Linear*> params;
            for (Linear& l : policy_.torso) params.push_back(&l);
            for (Linear& l : policy_.heads) params.push_back(&l);
            params.push_back(&policy_.value_head);
            adam_step(params, grads, cfg_.learning_rate);
        }
    }
    if (stat_samples > 0) {
        stats.policy_loss /= static_cast<double>(stat_samples);
        stats.value_loss /= static_cast<double>(stat_samples);
        stats.entropy /= static_cast<double>(stat_samples);
        stats.clip_fraction /= static_cast<double>(stat_samples);
    }
    if (!std::isfinite(stats.policy_loss) || !std::isfinite(stats.value_loss))
        throw std::runtime_error("update: non-finite loss");
    return stats;
}

void PpoTrainer::adam_step(std::vector<Linear*>& params, std::vector<Linear>& grads, double lr) {
    ++adam_t_;
    double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    double bc1 = 1.0 - std::pow(b1, adam_t_);
    double bc2 = 1.0 - std::pow(b2, adam_t_);
    for (size_t li = 0; li < params.size(); ++li) {
        auto apply = [&](std::vector<double>& w, std::vector<double>& gm, std::vector<double>& gv,
                         const std::vector<double>& g) {
            for (size_t i = 0; i < w.size(); ++i) {
                gm[i] = b1 * gm[i] + (1.0 - b1) * g[i];
                gv[i] = b2 * gv[i] + (1.0 - b2) * g[i] * g[i];
                w[i] -= lr * (gm[i] / bc1) / (std::sqrt(gv[i] / bc2) + eps);
            }
        };
        apply(params[li]->w, m_[li].w, v_[li].w, grads[li].w);
        apply(params[li]->b, m_[li].b, v_[li].b, grads[li].b);
    }
}

std::vector<CurvePoint> PpoTrainer::train() {
    std::vector<CurvePoint> curve;
    while (steps_done_ < cfg_.total_steps) {
        long remaining = cfg_.total_steps - steps_done_;
        int chunk = static_cast<int>(std::min<long>(cfg_.rollout_len, remaining));
        RolloutBuffer buf = collect_rollout(chunk);
        update(buf);
        size_t tail = std::min<size_t>(10, completed_episode_rewards_.size());
        double mean = 0.0;
        for (size_t k = completed_episode_rewards_.size() - tail;
             k < completed_episode_rewards_.size(); ++k)
            mean += completed_episode_rewards_[k];
        if (tail > 0) mean /= static_cast<double>(tail);
        curve.push_back({steps_done_, mean});
    }
    return curve;
}

PpoTrainResult train_ppo(rl::Env& env, const PpoConfig& cfg) {
    PpoTrainer trainer(env, cfg);
    PpoTrainResult out;
    out.curve = trainer.train();
    out.policy = trainer.policy();
    return out;
}

std::pair<double, double> evaluate_policy(const PolicyNet& policy, rl::Env& env, int n_episodes) {
    if (n_episodes < 2) throw std::invalid_argument("evaluate_policy: need at least 2 episodes");
    std::vector<double> totals;
    for (int e = 0; e < n_episodes; ++e) {
        std::vector<double> obs = env.reset();
        double total = 0.0;
        while (true) {
            rl::Step st = env.step(greedy_action(policy, obs));
            total += st.reward;
            if (st.done) break;
            obs = st.observation;
        }
        totals.push_back(total);
    }
    double mean = std::accumulate(totals.begin(), totals.end(), 0.0) / totals.size();
    double var = 0.0;
    for (double t : totals) var += (t - mean) * (t - mean);
    var /= static_cast<double>(totals.size() - 1);
    return {mean, std::sqrt(var)};
}

void write_reward_curve_csv(const std::vector<CurvePoint>& curve, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    os << "step,mean_episode_reward\n";
    for (const CurvePoint& p : curve)
        os << p.step << ',' << fmt_double(p.mean_episode_reward) << '\n';
}

namespace {

nlohmann::json linear_to_json(const Linear& l) {
    return {{"in", l.in}, {"out", l.out}, {"w", l.w}, {"b", l.b}};
}

Linear linear_from_json(const nlohmann::json& j) {
    Linear l;
    l.in = j.at("in").get<int>();
    l.out = j.at("out").get<int>();
    l.w = j.at("w").get<std::vector<double>>();
    l.b = j.at("b").get<std::vector<double>>();
    if (l.in <= 0 || l.out <= 0 || l.w.size() != static_cast<size_t>(l.in) * l.out ||
        l.b.size() != static_cast<size_t>(l.out))
        throw std::runtime_error("policy checkpoint: inconsistent layer shape");
    return l;
}

}  // namespace

void save_policy(const PolicyNet& policy, const PpoConfig& cfg, const std::string& path) {
    nlohmann::json j;
    j["obs_dim"] = policy.obs_dim();
    j["action_sizes"] = policy.action_sizes();
    j["config"] = {{"learning_rate", cfg.learning_rate},
                   {"minibatch_size", cfg.minibatch_size},
                   {"gamma", cfg.gamma},
                   {"gae_lambda", cfg.gae_lambda},
                   {"entropy_coeff", cfg.entropy_coeff},
                   {"value_coeff", cfg.value_coeff},
                   {"rollout_len", cfg.rollout_len},
                   {"update_epochs", cfg.update_epochs},
                   {"clip_range", cfg.clip_range},
                   {"max_grad_norm", cfg.max_grad_norm},
                   {"total_steps", cfg.total_steps},
                   {"seed", cfg.seed}};
    j["torso"] = nlohmann::json::array();
    for (const Linear& l : policy.torso) j["torso"].push_back(linear_to_json(l));
    j["heads"] = nlohmann::json::array();
    for (const Linear& l : policy.heads) j["heads"].push_back(linear_to_json(l));
    j["value_head"] = linear_to_json(policy.value_head);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    os << j.dump() << '\n';
}

PolicyNet load_policy(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open policy checkpoint: " + path);
    nlohmann::json j = nlohmann::json::parse(is);
    int obs_dim = j.at("obs_dim").get<int>();
    std::vector<int> action_sizes = j.at("action_sizes").get<std::vector<int>>();
    PolicyNet p(obs_dim, action_sizes, 0);
    p.torso.clear();
    for (const auto& lj : j.at("torso")) p.torso.push_back(linear_from_json(lj));
    p.heads.clear();
    for (const auto& lj : j.at("heads")) p.heads.push_back(linear_from_json(lj));
    p.value_head = linear_from_json(j.at("value_head"));
    if (p.torso.size() != 2 || p.heads.size() != action_sizes.size())
        throw std::runtime_error("policy checkpoint: layer counts do not match action space");
    if (p.torso[0].in != obs_dim)
        throw std::runtime_error("policy checkpoint: torso width does not match obs_dim");
    for (size_t h = 0; h < p.heads.size(); ++h)
        if (p.heads[h].out != action_sizes[h])
            throw std::runtime_error("policy checkpoint: head width does not match action space");
    return p;
}

}  // namespace smartwrite

#include "smartwrite/rl_env.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace smartwrite {

namespace {

void check_param_idx(int idx, const char* field) {
    if (idx < 0 || idx > 2)
        throw std::invalid_argument(std::string(field) + ": index out of range [0,2]");
}

bool finite(const PredTriple& p) {
    return std::isfinite(p.write_energy_pj) && std::isfinite(p.write_latency_ns) &&
           std::isfinite(p.endurance);
}

size_t weighted_pick(Rng& rng, const std::vector<double>& weights, double total) {
    double u = rng.next_double() * total;
    double acc = 0.0;
    for (size_t i = 0; i + 1 < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return i;
    }
    return weights.size() - 1;
}

double inverse_write_fraction(const Ratio& r) {
    return static_cast<double>(r.reads + r.writes) / static_cast<double>(r.writes);
}

}  // namespace

void EnvConfig::validate(const DeviceConfig& device) const {
    device.validate();
    if (episode_len == 0) throw std::invalid_argument("episode_len: must be > 0");
    if (address_lines == 0) throw std::invalid_argument("address_lines: must be > 0");
    check_param_idx(baseline_params.set_voltage_idx, "baseline_params.set_voltage_idx");
    check_param_idx(baseline_params.set_pulse_idx, "baseline_params.set_pulse_idx");
    check_param_idx(baseline_params.reset_voltage_idx, "baseline_params.reset_voltage_idx");
    check_param_idx(baseline_params.reset_pulse_idx, "baseline_params.reset_pulse_idx");
    if (temperature) {
        bool on_grid = false;
        for (double t : device.temperature_grid) on_grid = on_grid || t == *temperature;
        if (!on_grid)
            throw std::invalid_argument("temperature: " + std::to_string(*temperature) +
                                        " is not a grid value");
    }
}

double reward(const PredTriple& prev, const PredTriple& cur, const PredTriple& baseline) {
    if (!finite(prev) || !finite(cur) || !finite(baseline))
        throw std::invalid_argument("reward: non-finite prediction");
    double r = 0.0;
    if (cur.write_energy_pj < prev.write_energy_pj &&
        cur.write_latency_ns < prev.write_latency_ns && cur.endurance >= prev.endurance)
        r += 0.25;
    else if (cur.write_energy_pj > prev.write_energy_pj &&
             cur.write_latency_ns > prev.write_latency_ns && cur.endurance <= prev.endurance)
        r -= 0.25;
    if (cur.write_energy_pj < baseline.write_energy_pj &&
        cur.write_latency_ns < baseline.write_latency_ns &&
        cur.endurance >= baseline.endurance)
        r += 10.0;
    return r;
}

WriteTuningEnv::WriteTuningEnv(const EnvConfig& cfg, const DeviceConfig& device,
                               const Predictor& predictor, std::vector<double> ratio_weights)
    : cfg_(cfg),
      device_(device),
      predictor_(&predictor),
      ratio_weights_(std::move(ratio_weights)),
      store_(device_, 1) {
    cfg_.validate(device_);
    if (!ratio_weights_.empty()) {
        if (ratio_weights_.size() != scenario_pool(cfg_.scenario).size())
            throw std::invalid_argument("ratio_weights: size must match the scenario pool");
        for (double w : ratio_weights_) {
            if (!(w > 0.0) || !std::isfinite(w))
                throw std::invalid_argument("ratio_weights: entries must be positive");
            ratio_weight_total_ += w;
        }
    }
}

std::vector<double> WriteTuningEnv::reset() {
    return start_episode(derive_seed(cfg_.seed, "episode", episode_counter_++));
}

std::vector<double> WriteTuningEnv::reset_seeded(uint64_t seed) { return start_episode(seed); }

std::vector<double> WriteTuningEnv::start_episode(uint64_t seed) {
    // Setup draws (ratio, temperature) come from their own stream so the op
    // stream below is identical for every episode sharing this seed.
    Rng setup(derive_seed(seed, "setup"));
    const std::vector<Ratio>& pool = scenario_pool(cfg_.scenario);
    if (ratio_weights_.empty())
        ratio_ = pool[setup.next_below(pool.size())];
    else
        ratio_ = pool[weighted_pick(setup, ratio_weights_, ratio_weight_total_)];
    if (cfg_.temperature)
        temperature_ = *cfg_.temperature;
    else
        temperature_ = device_.temperature_grid[setup.next_below(device_.temperature_grid.size())];

    op_rng_ = Rng(derive_seed(seed, "ops"));
    params_ = cfg_.baseline_params;
    store_ = LineStoreSim(device_, cfg_.address_lines);
    steps_ = reads_ = writes_ = 0;
    done_ = false;
    recorded_.clear();
    last_info_ = StepInfo{};

    auto [pr, pw] = project_counts();
    baseline_pred_ = predictor_->predict(cfg_.baseline_params, temperature_,
                                         static_cast<double>(pr), static_cast<double>(pw));
    if (!finite(baseline_pred_))
        throw std::runtime_error("reset: non-finite baseline prediction");
    prev_pred_ = baseline_pred_;
    return observation();
}

std::pair<uint64_t, uint64_t> WriteTuningEnv::project_counts() const {
    uint64_t total = static_cast<uint64_t>(ratio_.reads) + static_cast<uint64_t>(ratio_.writes);
    uint64_t reads = cfg_.episode_len * static_cast<uint64_t>(ratio_.reads) / total;
    return {reads, cfg_.episode_len - reads};
}

rl::Step WriteTuningEnv::step(const std::vector<int>& action) {
    if (done_) throw std::logic_error("step: episode already finished");
    if (action.size() != 4) throw std::invalid_argument("step: action must have 4 indices");
    check_param_idx(action[0], "action[0]");
    check_param_idx(action[1], "action[1]");
    check_param_idx(action[2], "action[2]");
    check_param_idx(action[3], "action[3]");
    params_ = WriteParams{action[0], action[1], action[2], action[3]};

    // Op draws never depend on the action, so paired episodes stay aligned.
    uint64_t denom = static_cast<uint64_t>(ratio_.reads) + static_cast<uint64_t>(ratio_.writes);
    bool is_read = op_rng_.next_below(denom) < static_cast<uint64_t>(ratio_.reads);
    uint64_t address =
        op_rng_.next_below(cfg_.address_lines) * static_cast<uint64_t>(device_.line_bytes);

    double energy_before = store_.total_energy_pj();
    double latency_before = store_.total_latency_ns();
    TraceRecord rec;
    rec.cycle = steps_;
    rec.address = address;
    if (is_read) {
        rec.op = Op::READ;
        store_.read(temperature_);
        ++reads_;
    } else {
        rec.op = Op::WRITE;
        rec.data.resize(static_cast<size_t>(device_.line_bytes));
        for (auto& b : rec.data) b = op_rng_.next_byte();
        store_.write(address, rec.data.data(), rec.data.size(), params_, temperature_);
        ++writes_;
    }
    if (record_ops_) recorded_.push_back(rec);
    ++steps_;
    done_ = steps_ == cfg_.episode_len;

    auto [pr, pw] = project_counts();
    PredTriple cur = predictor_->predict(params_, temperature_, static_cast<double>(pr),
                                         static_cast<double>(pw));
    // Rewards are paid only when an operation actually wrote: reads cost the
    // same under any parameter choice, so scoring them would just repeat the
    // last write's signal.
    double r = is_read ? 0.0 : reward(prev_pred_, cur, baseline_pred_);
    prev_pred_ = cur;

    last_info_.pred = cur;
    last_info_.was_write = !is_read;
    last_info_.step_energy_pj = store_.total_energy_pj() - energy_before;
    last_info_.step_latency_ns = store_.total_latency_ns() - latency_before;
    last_info_.endurance = store_.endurance(temperature_);

    rl::Step out;
    out.observation = observation();
    out.reward = r;
    out.done = done_;
    return out;
}

std::vector<double> WriteTuningEnv::observation() const {
    std::vector<double> obs;
    obs.reserve(15);
    auto push_one_hot = [&obs](int idx) {
        for (int i = 0; i < 3; ++i) obs.push_back(i == idx ? 1.0 : 0.0);
    };
    push_one_hot(params_.set_voltage_idx);
    push_one_hot(params_.set_pulse_idx);
    push_one_hot(params_.reset_voltage_idx);
    push_one_hot(params_.reset_pulse_idx);
    double lo = device_.temperature_grid.front();
    double hi = device_.temperature_grid.back();
    obs.push_back((temperature_ - lo) / (hi - lo));
    obs.push_back(static_cast<double>(reads_) / static_cast<double>(cfg_.episode_len));
    obs.push_back(static_cast<double>(writes_) / static_cast<double>(cfg_.episode_len));
    return obs;
}

Trace WriteTuningEnv::recorded_trace() const {
    Trace t;
    t.records = recorded_;
    t.n_reads = reads_;
    t.n_writes = writes_;
    return t;
}

MixedScenarioEnv::MixedScenarioEnv(const EnvConfig& cfg, const DeviceConfig& device,
                                   const Predictor& predictor)
    : pick_(derive_seed(cfg.seed, "scenario-pick")) {
    for (Scenario s : {Scenario::READ_HEAVY, Scenario::BALANCED, Scenario::WRITE_HEAVY}) {
        EnvConfig sub = cfg;
        sub.scenario = s;
        sub.seed = derive_seed(cfg.seed, scenario_slug(s));
        std::vector<double> weights;
        double sum = 0.0;
        for (const Ratio& r : scenario_pool(s)) {
            weights.push_back(inverse_write_fraction(r));
            sum += weights.back();
        }
        envs_.emplace_back(new WriteTuningEnv(sub, device, predictor, std::move(weights)));
        scenario_weights_.push_back(sum);
        scenario_weight_total_ += sum;
    }
}

std::vector<double> MixedScenarioEnv::reset() {
    cur_ = weighted_pick(pick_, scenario_weights_, scenario_weight_total_);
    return envs_[cur_]->reset();
}

rl::Step MixedScenarioEnv::step(const std::vector<int>& action) {
    return envs_[cur_]->step(action);
}

}  // namespace smartwrite

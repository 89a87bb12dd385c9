#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "smartwrite/device_model.hpp"
#include "smartwrite/line_store.hpp"
#include "smartwrite/predictor.hpp"
#include "smartwrite/rl.hpp"
#include "smartwrite/rng.hpp"
#include "smartwrite/trace.hpp"

namespace smartwrite {

// Environment for learning write parameters online: each step the agent
// re-picks the four grid indices, the environment replays one memory
// operation against the device model, and the reward compares cost-model
// predictions for the chosen parameters against the previous step's and a
// fixed mid-grid baseline.

struct EnvConfig {
    Scenario scenario = Scenario::BALANCED;
    uint64_t episode_len = 100000;
    // Fixed per episode. When unset, each reset draws a grid temperature;
    // when set, it must be a grid value.
    std::optional<double> temperature;
    WriteParams baseline_params{};  // mid-grid by default
    uint64_t address_lines = 4096;
    uint64_t seed = 0;

    void validate(const DeviceConfig& device) const;
};

// What the last step actually did, alongside the model predictions that
// produced its reward.
struct StepInfo {
    PredTriple pred{};             // predicted full-episode (energy, latency, endurance)
    bool was_write = false;
    double step_energy_pj = 0.0;   // device-model energy of this operation
    double step_latency_ns = 0.0;
    double endurance = 1.0;        // device-model endurance estimate so far
};

// Pure reward rule. Minor: +0.25 when cur improves on prev in energy and
// latency without losing endurance; -0.25 for the mirrored regression; ties
// give 0. Major: +10 when cur beats the baseline the same way. Components
// add. Throws on non-finite inputs.
double reward(const PredTriple& prev, const PredTriple& cur, const PredTriple& baseline);

class WriteTuningEnv final : public rl::Env {
  public:
    // ratio_weights, when non-empty, must align with the scenario's pool and
    // biases the per-episode ratio draw (entries are relative odds). Empty
    // means a uniform draw.
    WriteTuningEnv(const EnvConfig& cfg, const DeviceConfig& device, const Predictor& predictor,
                   std::vector<double> ratio_weights = {});

    int obs_size() const override { return 15; }
    std::vector<int> action_sizes() const override { return {3, 3, 3, 3}; }

    // Starts episode i with seed derived from (cfg.seed, i).
    std::vector<double> reset() override;
    // Starts an episode with an explicit seed; paired runs that share a seed
    // see identical op sequences (kind, address, payload) whatever actions
    // they take, plus the same drawn ratio and temperature.
    std::vector<double> reset_seeded(uint64_t seed);

    rl::Step step(const std::vector<int>& action) override;

    const StepInfo& last_info() const { return last_info_; }

    // Full-episode read/write totals implied by the episode ratio — the
    // horizon every prediction is made over. Constant within an episode.
    std::pair<uint64_t, uint64_t> project_counts() const;

    double temperature() const { return temperature_; }
    const Ratio& ratio() const { return ratio_; }
    const PredTriple& baseline_prediction() const { return baseline_pred_; }
    uint64_t steps_done() const { return steps_; }
    bool done() const { return done_; }
    const LineStoreSim& store() const { return store_; }

    // When enabled before stepping, every operation is recorded so the
    // episode can be replayed through the sweep simulator.
    void set_record_ops(bool on) { record_ops_ = on; }
    Trace recorded_trace() const;

  private:
    std::vector<double> observation() const;
    std::vector<double> start_episode(uint64_t seed);

    EnvConfig cfg_;
    DeviceConfig device_;
    const Predictor* predictor_;
    std::vector<double> ratio_weights_;
    double ratio_weight_total_ = 0.0;

    uint64_t episode_counter_ = 0;
    Rng op_rng_{0};
    Ratio ratio_{1, 1};
    double temperature_ = 0.0;
    WriteParams params_{};
    PredTriple baseline_pred_{};
    PredTriple prev_pred_{};
    LineStoreSim store_;
    uint64_t steps_ = 0;
    uint64_t reads_ = 0;
    uint64_t writes_ = 0;
    bool done_ = true;
    bool record_ops_ = false;
    std::vector<TraceRecord> recorded_;
    StepInfo last_info_{};
};

// Training environment that exposes all three traffic mixes to one agent:
// each reset picks a scenario, whose sub-environment then draws a ratio and
// temperature as usual. Rewards are only paid on write steps, so both the
// scenario pick and the ratio draw are weighted by inverse write fraction —
// every read:write mix then contributes the same expected number of
// reward-bearing steps, instead of write-heavy episodes dominating learning.
class MixedScenarioEnv final : public rl::Env {
  public:
    // cfg.scenario is ignored; cfg.seed drives the scenario picks and, via
    // per-scenario derived seeds, each sub-environment's episode draws.
    MixedScenarioEnv(const EnvConfig& cfg, const DeviceConfig& device,
                     const Predictor& predictor);

    int obs_size() const override { return 15; }
    std::vector<int> action_sizes() const override { return {3, 3, 3, 3}; }
    std::vector<double> reset() override;
    rl::Step step(const std::vector<int>& action) override;

    // The sub-environment serving the current episode.
    const WriteTuningEnv& current() const { return *envs_[cur_]; }

  private:
    std::vector<std::unique_ptr<WriteTuningEnv>> envs_;
    std::vector<double> scenario_weights_;
    double scenario_weight_total_ = 0.0;
    Rng pick_{0};
    size_t cur_ = 0;
};

}  // namespace smartwrite

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "smartwrite/device_model.hpp"
#include "smartwrite/ppo.hpp"
#include "smartwrite/predictor.hpp"
#include "smartwrite/rl_env.hpp"

namespace smartwrite {

// Ground-truth comparison of the trained policy against the fixed mid-grid
// baseline and a brute-force oracle, per (temperature, scenario) cell, plus
// reward statistics per scenario. All device-model numbers here come from
// replaying episodes, never from the cost models.

struct EvalConfig {
    std::vector<double> temperatures{25.0, 50.0, 75.0};
    std::vector<Scenario> scenarios{Scenario::READ_HEAVY, Scenario::BALANCED,
                                    Scenario::WRITE_HEAVY};
    int episodes_per_cell = 5;
    uint64_t seed = 0;

    void validate(const DeviceConfig& device) const;
};

struct EpisodeTotals {
    double write_energy_pj = 0.0;
    double total_energy_pj = 0.0;
    double write_latency_ns = 0.0;
    double total_latency_ns = 0.0;
    double endurance = 1.0;
    double reward = 0.0;
    uint64_t n_reads = 0;
    uint64_t n_writes = 0;
};

// Replays one full episode from an explicit seed. Exactly one of
// policy/fixed must be non-null: greedy policy actions, or the same fixed
// params every step.
EpisodeTotals run_policy_episode(WriteTuningEnv& env, uint64_t seed, const PolicyNet* policy,
                                 const WriteParams* fixed);

// Predicted-optimal action: minimizes predicted write energy over all 81
// actions subject to predicted latency <= baseline's and predicted endurance
// >= baseline's (the baseline itself always qualifies). Ties break toward
// the lexicographically first action.
struct OracleChoice {
    WriteParams action{};
    PredTriple pred{};
    PredTriple baseline_pred{};
    int feasible_count = 0;
};
OracleChoice brute_force_oracle(const Predictor& predictor, const WriteParams& baseline,
                                double temperature, double n_reads, double n_writes);

// Ground-truth optimal fixed action: replays all 81 fixed-action episodes on
// the same op stream (same seed) and picks the lowest device-model write
// energy subject to latency <= the baseline episode's and endurance >= the
// baseline episode's.
struct GroundTruthOracle {
    WriteParams action{};
    EpisodeTotals totals{};
};
GroundTruthOracle oracle_fixed_action_optimum(WriteTuningEnv& env, uint64_t seed);

struct MetricMeans {
    double write_energy_pj = 0.0;
    double total_energy_pj = 0.0;
    double write_latency_ns = 0.0;
    double endurance = 0.0;
};

struct CellResult {
    double temperature = 0.0;
    Scenario scenario = Scenario::BALANCED;
    MetricMeans smart, baseline, oracle;  // means over paired episodes
    std::array<int, 4> oracle_action{};        // ground-truth optimum (first seed)
    std::array<int, 4> oracle_pred_action{};   // predicted optimum
    double oracle_pred_write_energy = 0.0;
    std::array<int, 4> smart_first_action{};   // greedy action at episode start
    double smart_pred_write_energy = 0.0;      // predicted energy of that action
    double reduction_write_energy_pct = 0.0;   // baseline vs smart
    double reduction_total_energy_pct = 0.0;
    double reduction_write_latency_pct = 0.0;
    double oracle_gap_write_energy = 0.0;      // smart / oracle, ground truth
};

struct TempReduction {
    double temperature = 0.0;
    double write_energy_pct = 0.0;
    double total_energy_pct = 0.0;
    double write_latency_pct = 0.0;
    double oracle_write_energy_pct = 0.0;  // best attainable, for audit
};

struct RewardStats {
    Scenario scenario = Scenario::BALANCED;
    double mean = 0.0;
    double sd = 0.0;
};

struct EvalReport {
    std::vector<CellResult> cells;
    std::vector<TempReduction> reductions;  // aggregated across scenarios
    std::vector<RewardStats> reward_stats;
};

// Paired-seed evaluation of one policy across every (temperature, scenario)
// cell.
EvalReport run_comparison(const PolicyNet& policy, const Predictor& predictor,
                          const DeviceConfig& device, const EnvConfig& env_template,
                          const EvalConfig& cfg);

// report.json plus the plot-ready CSV tables (write_energy.csv,
// total_energy.csv, write_latency.csv: one row per temperature x policy;
// reward_stats.csv: one row per scenario). Byte-deterministic.
void emit_report(const EvalReport& report, const std::string& out_dir);

void save_eval_report(const EvalReport& report, const std::string& path);
EvalReport load_eval_report(const std::string& path);

}  // namespace smartwrite

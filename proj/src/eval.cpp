#include "smartwrite/eval.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "smartwrite/text_io.hpp"

namespace smartwrite {

namespace {

std::array<int, 4> to_indices(const WriteParams& p) {
    return {p.set_voltage_idx, p.set_pulse_idx, p.reset_voltage_idx, p.reset_pulse_idx};
}

WriteParams from_indices(const std::array<int, 4>& a) { return WriteParams{a[0], a[1], a[2], a[3]}; }

double pct_reduction(double baseline, double smart) {
    return baseline > 0.0 ? (baseline - smart) / baseline * 100.0 : 0.0;
}

}  // namespace

void EvalConfig::validate(const DeviceConfig& device) const {
    if (temperatures.empty()) throw std::invalid_argument("temperatures: must not be empty");
    for (double t : temperatures) {
        bool on_grid = false;
        for (double g : device.temperature_grid) on_grid = on_grid || g == t;
        if (!on_grid)
            throw std::invalid_argument("temperatures: " + std::to_string(t) +
                                        " is not a grid value");
    }
    if (scenarios.empty()) throw std::invalid_argument("scenarios: must not be empty");
    if (episodes_per_cell <= 0) throw std::invalid_argument("episodes_per_cell: must be > 0");
}

EpisodeTotals run_policy_episode(WriteTuningEnv& env, uint64_t seed, const PolicyNet* policy,
                                 const WriteParams* fixed) {
    if ((policy == nullptr) == (fixed == nullptr))
        throw std::invalid_argument("run_policy_episode: pass exactly one of policy/fixed");
    std::vector<double> obs = env.reset_seeded(seed);
    std::vector<int> fixed_action;
    if (fixed) {
        fixed_action = {fixed->set_voltage_idx, fixed->set_pulse_idx, fixed->reset_voltage_idx,
                        fixed->reset_pulse_idx};
    }
    EpisodeTotals tot;
    while (true) {
        rl::Step st = env.step(policy ? greedy_action(*policy, obs) : fixed_action);
        tot.reward += st.reward;
        if (st.done) break;
        obs = st.observation;
    }
    const LineStoreSim& s = env.store();
    tot.write_energy_pj = s.write_energy_pj();
    tot.total_energy_pj = s.total_energy_pj();
    tot.write_latency_ns = s.write_latency_ns();
    tot.total_latency_ns = s.total_latency_ns();
    tot.endurance = s.endurance(env.temperature());
    tot.n_reads = s.n_reads();
    tot.n_writes = s.n_writes();
    return tot;
}

OracleChoice brute_force_oracle(const Predictor& predictor, const WriteParams& baseline,
                                double temperature, double n_reads, double n_writes) {
    OracleChoice best;
    best.baseline_pred = predictor.predict(baseline, temperature, n_reads, n_writes);
    bool have = false;
    for (int sv = 0; sv < 3; ++sv)
        for (int sp = 0; sp < 3; ++sp)
            for (int rv = 0; rv < 3; ++rv)
                for (int rp = 0; rp < 3; ++rp) {
                    WriteParams p{sv, sp, rv, rp};
                    PredTriple pred = predictor.predict(p, temperature, n_reads, n_writes);
                    if (pred.write_latency_ns > best.baseline_pred.write_latency_ns ||
                        pred.endurance < best.baseline_pred.endurance)
                        continue;
                    ++best.feasible_count;
                    if (!have || pred.write_energy_pj < best.pred.write_energy_pj) {
                        have = true;
                        best.action = p;
                        best.pred = pred;
                    }
                }
    if (!have) throw std::runtime_error("oracle: no feasible action (baseline should qualify)");
    return best;
}

GroundTruthOracle oracle_fixed_action_optimum(WriteTuningEnv& env, uint64_t seed) {
    // The baseline fixes the latency/endurance budget; every candidate replays
    // the identical op stream.
    WriteParams baseline;  // mid-grid defaults
    EpisodeTotals base = run_policy_episode(env, seed, nullptr, &baseline);
    GroundTruthOracle best;
    bool have = false;
    for (int sv = 0; sv < 3; ++sv)
        for (int sp = 0; sp < 3; ++sp)
            for (int rv = 0; rv < 3; ++rv)
                for (int rp = 0; rp < 3; ++rp) {
                    WriteParams p{sv, sp, rv, rp};
                    EpisodeTotals t = run_policy_episode(env, seed, nullptr, &p);
                    if (t.write_latency_ns > base.write_latency_ns ||
                        t.endurance < base.endurance)
                        continue;
                    if (!have || t.write_energy_pj < best.totals.write_energy_pj) {
                        have = true;
                        best.action = p;
                        best.totals = t;
                    }
                }
    if (!have) throw std::runtime_error("oracle: no feasible fixed action");
    return best;
}

namespace {

void accumulate(MetricMeans& m, const EpisodeTotals& t) {
    m.write_energy_pj += t.write_energy_pj;
    m.total_energy_pj += t.total_energy_pj;
    m.write_latency_ns += t.write_latency_ns;
    m.endurance += t.endurance;
}

void divide(MetricMeans& m, double n) {
    m.write_energy_pj /= n;
    m.total_energy_pj /= n;
    m.write_latency_ns /= n;
    m.endurance /= n;
}

}  // namespace

EvalReport run_comparison(const PolicyNet& policy, const Predictor& predictor,
                          const DeviceConfig& device, const EnvConfig& env_template,
                          const EvalConfig& cfg) {
    cfg.validate(device);
    EvalReport report;

    for (double temp : cfg.temperatures) {
        MetricMeans agg_smart, agg_base, agg_oracle;
        int agg_cells = 0;
        for (Scenario sc : cfg.scenarios) {
            EnvConfig env_cfg = env_template;
            env_cfg.scenario = sc;
            env_cfg.temperature = temp;
            WriteTuningEnv env(env_cfg, device, predictor);
            std::string tag =
                std::string("eval/") + scenario_slug(sc) + "/t" + fmt_double(temp);

            CellResult cell;
            cell.temperature = temp;
            cell.scenario = sc;
            MetricMeans smart{}, base{}, oracle{};

            uint64_t seed0 = derive_seed(cfg.seed, tag, 0);
            GroundTruthOracle gt = oracle_fixed_action_optimum(env, seed0);
            cell.oracle_action = to_indices(gt.action);

            for (int e = 0; e < cfg.episodes_per_cell; ++e) {
                uint64_t seed = derive_seed(cfg.seed, tag, static_cast<uint64_t>(e));
                accumulate(smart, run_policy_episode(env, seed, &policy, nullptr));
                accumulate(base, run_policy_episode(env, seed, nullptr,
                                                    &env_cfg.baseline_params));
                accumulate(oracle, run_policy_episode(env, seed, nullptr, &gt.action));
            }
            double n = cfg.episodes_per_cell;
            divide(smart, n);
            divide(base, n);
            divide(oracle, n);
            cell.smart = smart;
            cell.baseline = base;
            cell.oracle = oracle;

            // Predicted-side audit at this cell's first-episode horizon.
            std::vector<double> obs0 = env.reset_seeded(seed0);
            auto [pr, pw] = env.project_counts();
            OracleChoice oc = brute_force_oracle(predictor, env_cfg.baseline_params, temp,
                                                 static_cast<double>(pr),
                                                 static_cast<double>(pw));
            cell.oracle_pred_action = to_indices(oc.action);
            cell.oracle_pred_write_energy = oc.pred.write_energy_pj;
            std::vector<int> first = greedy_action(policy, obs0);
            cell.smart_first_action = {first[0], first[1], first[2], first[3]};
            cell.smart_pred_write_energy =
                predictor
                    .predict(from_indices(cell.smart_first_action), temp,
                             static_cast<double>(pr), static_cast<double>(pw))
                    .write_energy_pj;

            cell.reduction_write_energy_pct =
                pct_reduction(base.write_energy_pj, smart.write_energy_pj);
            cell.reduction_total_energy_pct =
                pct_reduction(base.total_energy_pj, smart.total_energy_pj);
            cell.reduction_write_latency_pct =
                pct_reduction(base.write_latency_ns, smart.write_latency_ns);
            cell.oracle_gap_write_energy = oracle.write_energy_pj > 0.0
                                               ? smart.write_energy_pj / oracle.write_energy_pj
                                               : 0.0;
            report.cells.push_back(cell);

            accumulate(agg_smart, EpisodeTotals{smart.write_energy_pj, smart.total_energy_pj,
                                                smart.write_latency_ns, 0.0, smart.endurance,
                                                0.0, 0, 0});
            accumulate(agg_base, EpisodeTotals{base.write_energy_pj, base.total_energy_pj,
                                               base.write_latency_ns, 0.0, base.endurance, 0.0,
                                               0, 0});
            accumulate(agg_oracle, EpisodeTotals{oracle.write_energy_pj, oracle.total_energy_pj,
                                                 oracle.write_latency_ns, 0.0, oracle.endurance,
                                                 0.0, 0, 0});
            ++agg_cells;
        }
        double n = agg_cells;
        divide(agg_smart, n);
        divide(agg_base, n);
        divide(agg_oracle, n);
        TempReduction red;
        red.temperature = temp;
        red.write_energy_pct = pct_reduction(agg_base.write_energy_pj, agg_smart.write_energy_pj);
        red.total_energy_pct = pct_reduction(agg_base.total_energy_pj, agg_smart.total_energy_pj);
        red.write_latency_pct =
            pct_reduction(agg_base.write_latency_ns, agg_smart.write_latency_ns);
        red.oracle_write_energy_pct =
            pct_reduction(agg_base.write_energy_pj, agg_oracle.write_energy_pj);
        report.reductions.push_back(red);
    }

    for (Scenario sc : cfg.scenarios) {
        EnvConfig env_cfg = env_template;
        env_cfg.scenario = sc;
        env_cfg.temperature.reset();  // reward stats span the temperature grid
        env_cfg.seed = derive_seed(cfg.seed, std::string("reward/") + scenario_slug(sc));
        WriteTuningEnv env(env_cfg, device, predictor);
        auto [mean, sd] = evaluate_policy(policy, env, std::max(2, cfg.episodes_per_cell));
        report.reward_stats.push_back({sc, mean, sd});
    }
    return report;
}

namespace {

nlohmann::json means_to_json(const MetricMeans& m) {
    return {{"write_energy_pj", m.write_energy_pj},
            {"total_energy_pj", m.total_energy_pj},
            {"write_latency_ns", m.write_latency_ns},
            {"endurance", m.endurance}};
}

MetricMeans means_from_json(const nlohmann::json& j) {
    MetricMeans m;
    m.write_energy_pj = j.at("write_energy_pj").get<double>();
    m.total_energy_pj = j.at("total_energy_pj").get<double>();
    m.write_latency_ns = j.at("write_latency_ns").get<double>();
    m.endurance = j.at("endurance").get<double>();
    return m;
}

}  // namespace

void save_eval_report(const EvalReport& report, const std::string& path) {
    nlohmann::json j;
    j["cells"] = nlohmann::json::array();
    for (const CellResult& c : report.cells) {
        j["cells"].push_back({{"temperature", c.temperature},
                              {"scenario", scenario_name(c.scenario)},
                              {"smart", means_to_json(c.smart)},
                              {"baseline", means_to_json(c.baseline)},
                              {"oracle", means_to_json(c.oracle)},
                              {"oracle_action", c.oracle_action},
                              {"oracle_pred_action", c.oracle_pred_action},
                              {"oracle_pred_write_energy", c.oracle_pred_write_energy},
                              {"smart_first_action", c.smart_first_action},
                              {"smart_pred_write_energy", c.smart_pred_write_energy},
                              {"reduction_write_energy_pct", c.reduction_write_energy_pct},
                              {"reduction_total_energy_pct", c.reduction_total_energy_pct},
                              {"reduction_write_latency_pct", c.reduction_write_latency_pct},
                              {"oracle_gap_write_energy", c.oracle_gap_write_energy}});
    }
    j["reductions"] = nlohmann::json::array();
    for (const TempReduction& r : report.reductions) {
        j["reductions"].push_back({{"temperature", r.temperature},
                                   {"write_energy_pct", r.write_energy_pct},
                                   {"total_energy_pct", r.total_energy_pct},
                                   {"write_latency_pct", r.write_latency_pct},
                                   {"oracle_write_energy_pct", r.oracle_write_energy_pct}});
    }
    j["reward_stats"] = nlohmann::json::array();
    for (const RewardStats& s : report.reward_stats) {
        j["reward_stats"].push_back(
            {{"scenario", scenario_name(s.scenario)}, {"mean", s.mean}, {"sd", s.sd}});
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    os << j.dump(2) << '\n';
}

EvalReport load_eval_report(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open report: " + path);
    nlohmann::json j = nlohmann::json::parse(is);
    EvalReport report;
    for (const auto& cj : j.at("cells")) {
        CellResult c;
        c.temperature = cj.at("temperature").get<double>();
        c.scenario = scenario_from_name(cj.at("scenario").get<std::string>());
        c.smart = means_from_json(cj.at("smart"));
        c.baseline = means_from_json(cj.at("baseline"));
        c.oracle = means_from_json(cj.at("oracle"));
        c.oracle_action = cj.at("oracle_action").get<std::array<int, 4>>();
        c.oracle_pred_action = cj.at("oracle_pred_action").get<std::array<int, 4>>();
        c.oracle_pred_write_energy = cj.at("oracle_pred_write_energy").get<double>();
        c.smart_first_action = cj.at("smart_first_action").get<std::array<int, 4>>();
        c.smart_pred_write_energy = cj.at("smart_pred_write_energy").get<double>();
        c.reduction_write_energy_pct = cj.at("reduction_write_energy_pct").get<double>();
        c.reduction_total_energy_pct = cj.at("reduction_total_energy_pct").get<double>();
        c.reduction_write_latency_pct = cj.at("reduction_write_latency_pct").get<double>();
        c.oracle_gap_write_energy = cj.at("oracle_gap_write_energy").get<double>();
        report.cells.push_back(c);
    }
    for (const auto& rj : j.at("reductions")) {
        TempReduction r;
        r.temperature = rj.at("temperature").get<double>();
        r.write_energy_pct = rj.at("write_energy_pct").get<double>();
        r.total_energy_pct = rj.at("total_energy_pct").get<double>();
        r.write_latency_pct = rj.at("write_latency_pct").get<double>();
        r.oracle_write_energy_pct = rj.at("oracle_write_energy_pct").get<double>();
        report.reductions.push_back(r);
    }
    for (const auto& sj : j.at("reward_stats")) {
        RewardStats s;
        s.scenario = scenario_from_name(sj.at("scenario").get<std::string>());
        s.mean = sj.at("mean").get<double>();
        s.sd = sj.at("sd").get<double>();
        report.reward_stats.push_back(s);
    }
    return report;
}

namespace {

// One metric table: mean across scenarios, one row per temperature x policy.
void write_metric_csv(const EvalReport& report, const std::string& path, const char* column,
                      double MetricMeans::*field) {
    std::vector<double> temps;
    for (const CellResult& c : report.cells)
        if (std::find(temps.begin(), temps.end(), c.temperature) == temps.end())
            temps.push_back(c.temperature);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    os << "temperature,policy," << column << '\n';
    for (double t : temps) {
        double smart = 0.0, base = 0.0, oracle = 0.0;
        int n = 0;
        for (const CellResult& c : report.cells) {
            if (c.temperature != t) continue;
            smart += c.smart.*field;
            base += c.baseline.*field;
            oracle += c.oracle.*field;
            ++n;
        }
        smart /= n;
        base /= n;
        oracle /= n;
        os << fmt_double(t) << ",smart-write," << fmt_double(smart) << '\n';
        os << fmt_double(t) << ",baseline," << fmt_double(base) << '\n';
        os << fmt_double(t) << ",oracle," << fmt_double(oracle) << '\n';
    }
}

}  // namespace

void emit_report(const EvalReport& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto in_dir = [&](const char* name) {
        return (std::filesystem::path(out_dir) / name).string();
    };
    save_eval_report(report, in_dir("report.json"));
    write_metric_csv(report, in_dir("write_energy.csv"), "write_energy_pj",
                     &MetricMeans::write_energy_pj);
    write_metric_csv(report, in_dir("total_energy.csv"), "total_energy_pj",
                     &MetricMeans::total_energy_pj);
    write_metric_csv(report, in_dir("write_latency.csv"), "write_latency_ns",
                     &MetricMeans::write_latency_ns);
    std::ofstream os(in_dir("reward_stats.csv"), std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + in_dir("reward_stats.csv"));
    os << "scenario,mean_reward,std_reward\n";
    for (const RewardStats& s : report.reward_stats)
        os << scenario_name(s.scenario) << ',' << fmt_double(s.mean) << ',' << fmt_double(s.sd)
           << '\n';
}

}  // namespace smartwrite

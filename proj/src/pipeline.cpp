#include "smartwrite/pipeline.hpp"

#include <array>
#include <filesystem>
#include <fstream>

#include "smartwrite/text_io.hpp"

namespace smartwrite {

namespace fs = std::filesystem;

OutputPaths::OutputPaths(const std::string& out_dir)
    : root(out_dir),
      traces_dir(out_dir + "/traces"),
      dataset_csv(out_dir + "/dataset.csv"),
      encoded_json(out_dir + "/encoded.json"),
      surrogate_json(out_dir + "/surrogate.json"),
      surrogate_train_csv(out_dir + "/surrogate_train.csv"),
      mape_csv(out_dir + "/mape.csv"),
      config_echo_json(out_dir + "/config.json"),
      policy_json(out_dir + "/policy.json"),
      reward_curve_csv(out_dir + "/reward_curve.csv") {}

namespace {

void require_file(const std::string& stage, const std::string& path) {
    if (!fs::exists(path)) throw MissingInputError(stage + ": missing input: " + path);
}

}  // namespace

void stage_gen_traces(const MasterConfig& cfg) {
    cfg.validate();
    OutputPaths paths(cfg.out_dir);
    auto corpus = generate_corpus(cfg.corpus, derive_seed(cfg.master_seed, "corpus"));
    save_corpus(corpus, cfg.corpus, paths.traces_dir);
}

void stage_sweep(const MasterConfig& cfg) {
    cfg.validate();
    OutputPaths paths(cfg.out_dir);
    require_file("sweep", paths.traces_dir + "/corpus.json");
    CorpusConfig on_disk;
    auto corpus = load_corpus(paths.traces_dir, &on_disk);
    auto grid = build_grid(corpus.size());
    auto rows = run_sweep(grid, corpus, cfg.device, cfg.sweep, on_disk.address_lines);
    write_dataset_csv(rows, paths.dataset_csv);
    SplitIndices split = split_dataset(rows.size(), cfg.sweep.split_fractions,
                                       derive_seed(cfg.master_seed, "split"));
    EncodedDataset encoded = encode_dataset(rows, cfg.device, split);
    write_encoded_json(encoded, paths.encoded_json);
}

void stage_train_surrogate(const MasterConfig& cfg) {
    cfg.validate();
    OutputPaths paths(cfg.out_dir);
    require_file("train-surrogate", paths.encoded_json);
    EncodedDataset ds = read_encoded_json(paths.encoded_json);
    TrainReport report;
    MlpSurrogate s = train_surrogate(ds, cfg.device, cfg.surrogate,
                                     derive_seed(cfg.master_seed, "surrogate"), &report);
    save_surrogate(s, paths.surrogate_json);
    write_train_report_csv(report, paths.surrogate_train_csv);
}

void stage_eval_surrogate(const MasterConfig& cfg) {
    cfg.validate();
    OutputPaths paths(cfg.out_dir);
    require_file("eval-surrogate", paths.surrogate_json);
    require_file("eval-surrogate", paths.dataset_csv);
    require_file("eval-surrogate", paths.encoded_json);
    MlpSurrogate s = load_surrogate(paths.surrogate_json);
    auto rows = read_dataset_csv(paths.dataset_csv);
    EncodedDataset ds = read_encoded_json(paths.encoded_json);
    auto mape = evaluate_mape(s, rows, ds.split.test);
    std::ofstream os(paths.mape_csv, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + paths.mape_csv);
    os << "head,mape_pct\n";
    const char* names[3] = {"energy", "latency", "endurance"};
    for (int k = 0; k < 3; ++k) os << names[k] << ',' << fmt_double(mape[k]) << '\n';
}

void stage_train_agent(const MasterConfig& cfg) {
    cfg.validate();
    OutputPaths paths(cfg.out_dir);
    require_file("train-agent", paths.surrogate_json);
    MlpSurrogate s = load_surrogate(paths.surrogate_json);
    EnvConfig env_cfg = cfg.env;
    env_cfg.temperature.reset();  // episodes span the temperature grid
    env_cfg.seed = derive_seed(cfg.master_seed, "env");
    MixedScenarioEnv env(env_cfg, cfg.device, s);
    PpoConfig ppo_cfg = cfg.ppo;
    ppo_cfg.seed = derive_seed(cfg.master_seed, "ppo");
    PpoTrainResult result = train_ppo(env, ppo_cfg);
    save_policy(result.policy, ppo_cfg, paths.policy_json);
    write_reward_curve_csv(result.curve, paths.reward_curve_csv);
}

void stage_evaluate(const MasterConfig& cfg) {
    cfg.validate();
    OutputPaths paths(cfg.out_dir);
    require_file("evaluate", paths.surrogate_json);
    require_file("evaluate", paths.policy_json);
    MlpSurrogate s = load_surrogate(paths.surrogate_json);
    PolicyNet policy = load_policy(paths.policy_json);
    EvalConfig eval_cfg = cfg.eval;
    eval_cfg.seed = derive_seed(cfg.master_seed, "eval");
    EvalReport report = run_comparison(policy, s, cfg.device, cfg.env, eval_cfg);
    emit_report(report, cfg.out_dir);
}

void run_pipeline(const MasterConfig& cfg) {
    cfg.validate();
    OutputPaths paths(cfg.out_dir);
    fs::create_directories(paths.root);
    std::ofstream echo(paths.config_echo_json, std::ios::binary);
    if (!echo) throw std::runtime_error("cannot open for write: " + paths.config_echo_json);
    echo << cfg.to_json_text();
    echo.close();
    stage_gen_traces(cfg);
    stage_sweep(cfg);
    stage_train_surrogate(cfg);
    stage_eval_surrogate(cfg);
    stage_train_agent(cfg);
    stage_evaluate(cfg);
}

}  // namespace smartwrite

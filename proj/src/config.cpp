#include "smartwrite/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "smartwrite/json_io.hpp"

namespace smartwrite {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> known) {
    if (!j.is_object()) throw std::invalid_argument(path + ": expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw std::invalid_argument(path + "." + it.key() + ": unknown key");
    }
}

template <typename T>
void get_if(const json& j, const char* key, const std::string& path, T& dst) {
    if (!j.contains(key)) return;
    try {
        dst = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument(path + "." + std::string(key) + ": wrong type");
    }
}

void apply_corpus(CorpusConfig& c, const json& j, const std::string& path) {
    check_keys(j, path, {"traces_per_scenario", "n_ops", "address_lines", "line_bytes",
                         "cycle_stride"});
    get_if(j, "traces_per_scenario", path, c.traces_per_scenario);
    get_if(j, "n_ops", path, c.n_ops);
    get_if(j, "address_lines", path, c.address_lines);
    get_if(j, "line_bytes", path, c.line_bytes);
    get_if(j, "cycle_stride", path, c.cycle_stride);
}

void apply_sweep(SweepConfig& c, const json& j, const std::string& path) {
    check_keys(j, path, {"op_cap", "split_fractions"});
    get_if(j, "op_cap", path, c.op_cap);
    if (j.contains("split_fractions")) {
        auto v = j.at("split_fractions");
        if (!v.is_array() || v.size() != 3)
            throw std::invalid_argument(path + ".split_fractions: expected 3 numbers");
        for (int i = 0; i < 3; ++i) c.split_fractions[i] = v[i].get<double>();
    }
}

void apply_train(TrainConfig& c, const json& j, const std::string& path) {
    check_keys(j, path, {"initial_lr", "lr_reduce_factor", "plateau_patience",
                         "early_stop_patience", "huber_delta", "max_epochs"});
    get_if(j, "initial_lr", path, c.initial_lr);
    get_if(j, "lr_reduce_factor", path, c.lr_reduce_factor);
    get_if(j, "plateau_patience", path, c.plateau_patience);
    get_if(j, "early_stop_patience", path, c.early_stop_patience);
    get_if(j, "huber_delta", path, c.huber_delta);
    get_if(j, "max_epochs", path, c.max_epochs);
}

void apply_env(EnvConfig& c, const json& j, const std::string& path) {
    check_keys(j, path, {"episode_len", "address_lines", "baseline_params"});
    get_if(j, "episode_len", path, c.episode_len);
    get_if(j, "address_lines", path, c.address_lines);
    if (j.contains("baseline_params")) {
        auto v = j.at("baseline_params");
        if (!v.is_array() || v.size() != 4)
            throw std::invalid_argument(path + ".baseline_params: expected 4 grid indices");
        c.baseline_params.set_voltage_idx = v[0].get<int>();
        c.baseline_params.set_pulse_idx = v[1].get<int>();
        c.baseline_params.reset_voltage_idx = v[2].get<int>();
        c.baseline_params.reset_pulse_idx = v[3].get<int>();
    }
}

void apply_ppo(PpoConfig& c, const json& j, const std::string& path) {
    check_keys(j, path,
               {"learning_rate", "minibatch_size", "gamma", "gae_lambda", "entropy_coeff",
                "value_coeff", "rollout_len", "update_epochs", "clip_range", "max_grad_norm",
                "total_steps"});
    get_if(j, "learning_rate", path, c.learning_rate);
    get_if(j, "minibatch_size", path, c.minibatch_size);
    get_if(j, "gamma", path, c.gamma);
    get_if(j, "gae_lambda", path, c.gae_lambda);
    get_if(j, "entropy_coeff", path, c.entropy_coeff);
    get_if(j, "value_coeff", path, c.value_coeff);
    get_if(j, "rollout_len", path, c.rollout_len);
    get_if(j, "update_epochs", path, c.update_epochs);
    get_if(j, "clip_range", path, c.clip_range);
    get_if(j, "max_grad_norm", path, c.max_grad_norm);
    get_if(j, "total_steps", path, c.total_steps);
}

void apply_eval(EvalConfig& c, const json& j, const std::string& path) {
    check_keys(j, path, {"temperatures", "scenarios", "episodes_per_cell"});
    if (j.contains("temperatures"))
        c.temperatures = j.at("temperatures").get<std::vector<double>>();
    if (j.contains("scenarios")) {
        c.scenarios.clear();
        for (const auto& s : j.at("scenarios"))
            c.scenarios.push_back(scenario_from_name(s.get<std::string>()));
    }
    get_if(j, "episodes_per_cell", path, c.episodes_per_cell);
}

}  // namespace

void MasterConfig::apply_profile(const std::string& name) {
    if (name == "paper") {
        corpus.traces_per_scenario = 20;
        corpus.n_ops = 100000;
        corpus.address_lines = 4096;
        env.episode_len = 100000;
        env.address_lines = 4096;
        ppo.total_steps = 300000;
        eval.episodes_per_cell = 5;
    } else if (name == "test") {
        corpus.traces_per_scenario = 2;
        corpus.n_ops = 1000;
        corpus.address_lines = 16;
        env.episode_len = 1000;
        env.address_lines = 16;
        ppo.total_steps = 120000;
        eval.episodes_per_cell = 3;
        // At this scale an epoch is ~3 optimizer updates versus ~23 at full
        // scale, so epoch-denominated patience must stretch to grant the
        // optimizer a comparable update budget before the schedule reacts.
        surrogate.max_epochs = 4000;
        surrogate.plateau_patience = 23;
        surrogate.early_stop_patience = 30;
    } else {
        throw std::invalid_argument("profile: unknown name '" + name + "' (use paper or test)");
    }
}

void MasterConfig::apply_overrides_text(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    check_keys(j, "config",
               {"device", "corpus", "sweep", "surrogate", "env", "ppo", "eval", "out_dir",
                "master_seed"});
    if (j.contains("device")) device = device_config_from_json(j.at("device"), "device");
    if (j.contains("corpus")) apply_corpus(corpus, j.at("corpus"), "corpus");
    if (j.contains("sweep")) apply_sweep(sweep, j.at("sweep"), "sweep");
    if (j.contains("surrogate")) apply_train(surrogate, j.at("surrogate"), "surrogate");
    if (j.contains("env")) apply_env(env, j.at("env"), "env");
    if (j.contains("ppo")) apply_ppo(ppo, j.at("ppo"), "ppo");
    if (j.contains("eval")) apply_eval(eval, j.at("eval"), "eval");
    get_if(j, "out_dir", "config", out_dir);
    get_if(j, "master_seed", "config", master_seed);
}

void MasterConfig::apply_overrides_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::invalid_argument("config: cannot open " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    apply_overrides_text(ss.str());
}

std::string MasterConfig::to_json_text() const {
    json j;
    j["device"] = device_config_to_json(device);
    j["corpus"] = {{"traces_per_scenario", corpus.traces_per_scenario},
                   {"n_ops", corpus.n_ops},
                   {"address_lines", corpus.address_lines},
                   {"line_bytes", corpus.line_bytes},
                   {"cycle_stride", corpus.cycle_stride}};
    j["sweep"] = {{"op_cap", sweep.op_cap}, {"split_fractions", sweep.split_fractions}};
    j["surrogate"] = {{"initial_lr", surrogate.initial_lr},
                      {"lr_reduce_factor", surrogate.lr_reduce_factor},
                      {"plateau_patience", surrogate.plateau_patience},
                      {"early_stop_patience", surrogate.early_stop_patience},
                      {"huber_delta", surrogate.huber_delta},
                      {"max_epochs", surrogate.max_epochs}};
    j["env"] = {{"episode_len", env.episode_len},
                {"address_lines", env.address_lines},
                {"baseline_params",
                 {env.baseline_params.set_voltage_idx, env.baseline_params.set_pulse_idx,
                  env.baseline_params.reset_voltage_idx, env.baseline_params.reset_pulse_idx}}};
    j["ppo"] = {{"learning_rate", ppo.learning_rate},
                {"minibatch_size", ppo.minibatch_size},
                {"gamma", ppo.gamma},
                {"gae_lambda", ppo.gae_lambda},
                {"entropy_coeff", ppo.entropy_coeff},
                {"value_coeff", ppo.value_coeff},
                {"rollout_len", ppo.rollout_len},
                {"update_epochs", ppo.update_epochs},
                {"clip_range", ppo.clip_range},
                {"max_grad_norm", ppo.max_grad_norm},
                {"total_steps", ppo.total_steps}};
    json scen = json::array();
    for (Scenario s : eval.scenarios) scen.push_back(scenario_name(s));
    j["eval"] = {{"temperatures", eval.temperatures},
                 {"scenarios", scen},
                 {"episodes_per_cell", eval.episodes_per_cell}};
    j["out_dir"] = out_dir;
    j["master_seed"] = master_seed;
    return j.dump(2) + "\n";
}

void MasterConfig::validate() const {
    device.validate();
    corpus.validate();
    sweep.validate();
    surrogate.validate();
    env.validate(device);
    ppo.validate();
    eval.validate(device);
    if (out_dir.empty()) throw std::invalid_argument("out_dir: must not be empty");
    if (corpus.line_bytes != device.line_bytes)
        throw std::invalid_argument("corpus.line_bytes: must equal device.line_bytes");
    if (env.address_lines != corpus.address_lines)
        throw std::invalid_argument(
            "env.address_lines: must equal corpus.address_lines (the cost models are trained "
            "on that address space)");
    if (env.episode_len != corpus.n_ops)
        throw std::invalid_argument(
            "env.episode_len: must equal corpus.n_ops (the prediction horizon must match the "
            "training traces)");
    if (corpus.n_ops > sweep.op_cap)
        throw std::invalid_argument("sweep.op_cap: smaller than corpus.n_ops");
}

}  // namespace smartwrite

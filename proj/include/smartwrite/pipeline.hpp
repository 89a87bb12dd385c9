#pragma once

#include <stdexcept>
#include <string>

#include "smartwrite/config.hpp"

namespace smartwrite {

// A stage's required input artifact is absent (CLI maps this to exit code 2).
class MissingInputError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Everything lands under out_dir; reruns with identical config and seed are
// byte-identical.
struct OutputPaths {
    explicit OutputPaths(const std::string& out_dir);

    std::string root;
    std::string traces_dir;
    std::string dataset_csv;
    std::string encoded_json;
    std::string surrogate_json;
    std::string surrogate_train_csv;
    std::string mape_csv;
    std::string config_echo_json;
    std::string policy_json;
    std::string reward_curve_csv;
};

void stage_gen_traces(const MasterConfig& cfg);
void stage_sweep(const MasterConfig& cfg);
void stage_train_surrogate(const MasterConfig& cfg);
void stage_eval_surrogate(const MasterConfig& cfg);
void stage_train_agent(const MasterConfig& cfg);
void stage_evaluate(const MasterConfig& cfg);

// All stages in dependency order, plus a config echo for provenance.
void run_pipeline(const MasterConfig& cfg);

}  // namespace smartwrite

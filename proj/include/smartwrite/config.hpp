#pragma once

#include <cstdint>
#include <string>

#include "smartwrite/device_model.hpp"
#include "smartwrite/eval.hpp"
#include "smartwrite/ppo.hpp"
#include "smartwrite/rl_env.hpp"
#include "smartwrite/surrogate.hpp"
#include "smartwrite/sweep.hpp"
#include "smartwrite/trace.hpp"

namespace smartwrite {

// One JSON config drives every stage. Defaults are the full-scale run; the
// "test" profile shrinks sizes for CI. A config file overrides individual
// keys on top of whichever profile is active; unknown keys are rejected with
// their full path.

struct MasterConfig {
    DeviceConfig device;
    CorpusConfig corpus;
    SweepConfig sweep;
    TrainConfig surrogate;
    EnvConfig env;  // scenario/temperature/seed are filled per stage
    PpoConfig ppo;
    EvalConfig eval;
    std::string out_dir = "out";
    uint64_t master_seed = 3;

    // "paper" keeps the full-scale defaults; "test" shrinks trace length,
    // corpus size, address space, training steps and episode counts.
    void apply_profile(const std::string& name);

    void apply_overrides_text(const std::string& json_text);
    void apply_overrides_file(const std::string& path);

    // Full echo of the effective settings; stable key order.
    std::string to_json_text() const;

    // Sub-config rules plus cross-stage consistency (the environment must
    // match the corpus the cost models were trained on).
    void validate() const;
};

}  // namespace smartwrite

#include <omp.h>

#include <cstdio>
#include <exception>
#include <functional>
#include <string>

#include "CLI11.hpp"
#include "smartwrite/pipeline.hpp"

namespace {

// 0 success, 1 config/validation problem, 2 missing stage input.
int run_stage(const char* name, const smartwrite::MasterConfig& cfg,
              const std::function<void(const smartwrite::MasterConfig&)>& fn) {
    try {
        fn(cfg);
        return 0;
    } catch (const smartwrite::MissingInputError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "%s: config error: %s\n", name, e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s: %s\n", name, e.what());
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive write-parameter tuning pipeline for a phase-change memory model"};
    app.require_subcommand(1);

    std::string config_path, out_dir, profile;
    uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;

    app.add_option("--config", config_path, "JSON config overriding profile defaults");
    app.add_option("--out-dir", out_dir, "output directory (overrides config)");
    app.add_option("--seed", seed, "master seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_option("--profile", profile, "size profile: paper (default) or test")
        ->check(CLI::IsMember({"paper", "test"}));
    app.add_option("--jobs", jobs, "worker threads for parallel stages (default: all cores)")
        ->check(CLI::PositiveNumber);

    struct Stage {
        const char* name;
        const char* help;
        void (*fn)(const smartwrite::MasterConfig&);
    };
    const Stage stages[] = {
        {"gen-traces", "generate the synthetic trace corpus", smartwrite::stage_gen_traces},
        {"sweep", "replay the corpus over the parameter grid into a dataset",
         smartwrite::stage_sweep},
        {"train-surrogate", "fit the per-target cost models", smartwrite::stage_train_surrogate},
        {"eval-surrogate", "held-out error table for the cost models",
         smartwrite::stage_eval_surrogate},
        {"train-agent", "train the write-parameter policy across traffic mixes",
         smartwrite::stage_train_agent},
        {"evaluate", "paired comparison against baseline and oracle",
         smartwrite::stage_evaluate},
        {"pipeline", "run every stage in order", smartwrite::run_pipeline},
    };
    const Stage* chosen = nullptr;
    for (const Stage& s : stages) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->fallthrough();  // global flags may follow the subcommand
        sub->callback([&chosen, &s]() { chosen = &s; });
    }

    CLI11_PARSE(app, argc, argv);

    if (jobs > 0) omp_set_num_threads(jobs);

    smartwrite::MasterConfig cfg;
    try {
        if (!profile.empty()) cfg.apply_profile(profile);
        if (!config_path.empty()) cfg.apply_overrides_file(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (seed_set) cfg.master_seed = seed;
        cfg.validate();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    }

    return run_stage(chosen->name, cfg, chosen->fn);
}

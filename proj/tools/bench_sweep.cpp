// Times the parallel parameter sweep against its serial reference on the same
// corpus and verifies the outputs match bit for bit.

#include <omp.h>

#include <cstdio>
#include <cstring>

#include "smartwrite/sweep.hpp"

using namespace smartwrite;

int main(int argc, char** argv) {
    CorpusConfig corpus_cfg;
    corpus_cfg.traces_per_scenario = 4;
    corpus_cfg.n_ops = 2000;
    corpus_cfg.address_lines = 64;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--ops") == 0 && i + 1 < argc)
            corpus_cfg.n_ops = std::strtoull(argv[++i], nullptr, 10);
        else if (std::strcmp(argv[i], "--traces") == 0 && i + 1 < argc)
            corpus_cfg.traces_per_scenario = std::atoi(argv[++i]);
        else {
            std::fprintf(stderr, "usage: %s [--ops N] [--traces PER_SCENARIO]\n", argv[0]);
            return 1;
        }
    }

    DeviceConfig device;
    SweepConfig sweep_cfg;
    sweep_cfg.op_cap = corpus_cfg.n_ops;

    std::printf("corpus: %d traces x %llu ops, %d threads available\n",
                3 * corpus_cfg.traces_per_scenario,
                static_cast<unsigned long long>(corpus_cfg.n_ops), omp_get_max_threads());

    double t0 = omp_get_wtime();
    auto corpus = generate_corpus(corpus_cfg, 42);
    double t1 = omp_get_wtime();
    std::printf("trace generation: %.3f s\n", t1 - t0);

    auto grid = build_grid(corpus.size());
    std::printf("grid points: %zu\n", grid.size());

    t0 = omp_get_wtime();
    auto serial = run_sweep_serial(grid, corpus, device, sweep_cfg, corpus_cfg.address_lines);
    t1 = omp_get_wtime();
    double serial_s = t1 - t0;
    std::printf("serial sweep:   %.3f s\n", serial_s);

    t0 = omp_get_wtime();
    auto parallel = run_sweep(grid, corpus, device, sweep_cfg, corpus_cfg.address_lines);
    t1 = omp_get_wtime();
    double parallel_s = t1 - t0;
    std::printf("parallel sweep: %.3f s (speedup %.2fx)\n", parallel_s,
                parallel_s > 0.0 ? serial_s / parallel_s : 0.0);

    if (serial.size() != parallel.size() ||
        std::memcmp(serial.data(), parallel.data(), serial.size() * sizeof(DatasetRow)) != 0) {
        std::printf("MISMATCH: parallel sweep differs from serial reference\n");
        return 1;
    }
    std::printf("parallel output matches serial reference bit-for-bit\n");
    return 0;
}

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "smartwrite/device_model.hpp"
#include "smartwrite/trace.hpp"

namespace smartwrite {

// Exhaustive replay of every trace under every write-parameter/temperature
// combination, producing the training dataset for the cost models.

struct GridPoint {
    WriteParams params;
    int temperature_idx = 0;
    int trace_idx = 0;
};

// Cartesian product in fixed lexicographic order: set voltage, set pulse,
// reset voltage, reset pulse, temperature, trace. 3^5 * n_traces points.
std::vector<GridPoint> build_grid(size_t n_traces);

struct DatasetRow {
    // Raw features (grid values, not indices).
    double set_voltage = 0.0;
    double set_pulse = 0.0;
    double reset_voltage = 0.0;
    double reset_pulse = 0.0;
    double temperature = 0.0;
    uint64_t n_reads = 0;
    uint64_t n_writes = 0;
    // Targets.
    double total_write_energy = 0.0;   // pJ
    double total_write_latency = 0.0;  // ns
    double endurance = 0.0;            // remaining-lifetime fraction
    double total_energy = 0.0;         // pJ, writes + reads
    double total_latency = 0.0;        // ns
};

struct SweepConfig {
    uint64_t op_cap = 100000;  // traces longer than this are rejected
    std::array<double, 3> split_fractions{0.6, 0.2, 0.2};  // train/test/validation

    void validate() const;
};

// Replays one trace at one grid point. Pure; throws if the trace exceeds
// op_cap or touches an address outside address_lines.
DatasetRow simulate(const GridPoint& point, const Trace& trace, const DeviceConfig& cfg,
                    uint64_t op_cap, uint64_t address_lines);

// Rows come back in grid order. The parallel version is bit-identical to the
// serial reference (independent points, no shared accumulation).
std::vector<DatasetRow> run_sweep(const std::vector<GridPoint>& grid,
                                  const std::vector<CorpusEntry>& corpus,
                                  const DeviceConfig& cfg, const SweepConfig& sweep_cfg,
                                  uint64_t address_lines);
std::vector<DatasetRow> run_sweep_serial(const std::vector<GridPoint>& grid,
                                         const std::vector<CorpusEntry>& corpus,
                                         const DeviceConfig& cfg, const SweepConfig& sweep_cfg,
                                         uint64_t address_lines);

struct SplitIndices {
    std::vector<size_t> train, test, validation;
};

// Seeded shuffle then contiguous cut. Test/validation sizes use the floor
// rule; the remainder lands in train.
SplitIndices split_dataset(size_t n_rows, const std::array<double, 3>& fractions, uint64_t seed);

// Exact-membership one-hot; throws if value is not a grid entry.
std::array<double, 3> one_hot(double value, const std::array<double, 3>& grid);

// Standardization statistics for the three modeled targets, fitted on the
// training split only. Write energy spans an order of magnitude across the
// grid, so it is standardized in log space — absolute error in log space is
// relative error in physical units, which is what the percentage-error metric
// scores. The other two targets are standardized as-is.
struct TargetScaler {
    std::array<bool, 3> log_space{true, false, false};  // write energy, write latency, endurance
    std::array<double, 3> mean{0, 0, 0};
    std::array<double, 3> stddev{1, 1, 1};

    std::array<double, 3> standardize(double we, double wl, double en) const;
    double invert(int target_idx, double standardized) const;
};

// Per-head feature vectors. Layouts (documented in docs/formats.md):
//   energy   (17): set_v(3) set_pulse(3) reset_v(3) reset_pulse(3) temp(3) reads_frac writes_frac
//   latency  (11): set_pulse(3) reset_pulse(3) temp(3) reads_frac writes_frac
//   endurance (5): temp(3) reads_frac writes_frac
struct EncodedRow {
    std::vector<double> energy;
    std::vector<double> latency;
    std::vector<double> endurance;
    std::array<double, 3> targets_std{0, 0, 0};
    std::array<double, 3> targets_raw{0, 0, 0};
};

struct EncodedDataset {
    std::vector<EncodedRow> rows;
    SplitIndices split;
    TargetScaler scaler;
};

std::vector<double> encode_energy_features(const DatasetRow& row, const DeviceConfig& cfg);
std::vector<double> encode_latency_features(const DatasetRow& row, const DeviceConfig& cfg);
std::vector<double> encode_endurance_features(const DatasetRow& row, const DeviceConfig& cfg);

// Fits the scaler on `split.train` and encodes every row. Throws if any
// target has (near-)zero spread on the training split.
EncodedDataset encode_dataset(const std::vector<DatasetRow>& rows, const DeviceConfig& cfg,
                              const SplitIndices& split);

// dataset.csv: fixed header, raw features then the five targets.
void write_dataset_csv(const std::vector<DatasetRow>& rows, const std::string& path);
std::vector<DatasetRow> read_dataset_csv(const std::string& path);

void write_encoded_json(const EncodedDataset& ds, const std::string& path);
EncodedDataset read_encoded_json(const std::string& path);

}  // namespace smartwrite

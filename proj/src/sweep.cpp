#include "smartwrite/sweep.hpp"

#include <omp.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "smartwrite/line_store.hpp"
#include "smartwrite/rng.hpp"
#include "smartwrite/text_io.hpp"

namespace smartwrite {

std::vector<GridPoint> build_grid(size_t n_traces) {
    std::vector<GridPoint> grid;
    grid.reserve(3 * 3 * 3 * 3 * 3 * n_traces);
    for (int sv = 0; sv < 3; ++sv)
        for (int sp = 0; sp < 3; ++sp)
            for (int rv = 0; rv < 3; ++rv)
                for (int rp = 0; rp < 3; ++rp)
                    for (int t = 0; t < 3; ++t)
                        for (size_t tr = 0; tr < n_traces; ++tr) {
                            GridPoint p;
                            p.params = {sv, sp, rv, rp};
                            p.temperature_idx = t;
                            p.trace_idx = static_cast<int>(tr);
                            grid.push_back(p);
                        }
    return grid;
}

void SweepConfig::validate() const {
    if (op_cap == 0) throw std::invalid_argument("op_cap: must be > 0");
    double sum = 0.0;
    for (double f : split_fractions) {
        if (f < 0.0 || f > 1.0)
            throw std::invalid_argument("split_fractions: entries must lie in [0,1]");
        sum += f;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("split_fractions: must sum to 1");
}

DatasetRow simulate(const GridPoint& point, const Trace& trace, const DeviceConfig& cfg,
                    uint64_t op_cap, uint64_t address_lines) {
    if (trace.records.size() > op_cap)
        throw std::invalid_argument("trace length exceeds op cap");
    if (point.temperature_idx < 0 || point.temperature_idx > 2)
        throw std::invalid_argument("temperature_idx: index out of range [0,2]");
    double t = cfg.temperature_grid[point.temperature_idx];

    LineStoreSim sim(cfg, address_lines);
    for (const TraceRecord& r : trace.records) {
        if (r.op == Op::READ)
            sim.read(t);
        else
            sim.write(r.address, r.data.data(), r.data.size(), point.params, t);
    }

    DatasetRow row;
    row.set_voltage = cfg.set_voltage_grid[point.params.set_voltage_idx];
    row.set_pulse = cfg.set_pulse_grid[point.params.set_pulse_idx];
    row.reset_voltage = cfg.reset_voltage_grid[point.params.reset_voltage_idx];
    row.reset_pulse = cfg.reset_pulse_grid[point.params.reset_pulse_idx];
    row.temperature = t;
    row.n_reads = sim.n_reads();
    row.n_writes = sim.n_writes();
    row.total_write_energy = sim.write_energy_pj();
    row.total_write_latency = sim.write_latency_ns();
    row.endurance = sim.endurance(t);
    row.total_energy = sim.total_energy_pj();
    row.total_latency = sim.total_latency_ns();
    return row;
}

std::vector<DatasetRow> run_sweep_serial(const std::vector<GridPoint>& grid,
                                         const std::vector<CorpusEntry>& corpus,
                                         const DeviceConfig& cfg, const SweepConfig& sweep_cfg,
                                         uint64_t address_lines) {
    sweep_cfg.validate();
    std::vector<DatasetRow> rows(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
        const GridPoint& p = grid[i];
        if (p.trace_idx < 0 || static_cast<size_t>(p.trace_idx) >= corpus.size())
            throw std::invalid_argument("grid point references a trace outside the corpus");
        rows[i] = simulate(p, corpus[p.trace_idx].trace, cfg, sweep_cfg.op_cap, address_lines);
    }
    return rows;
}

std::vector<DatasetRow> run_sweep(const std::vector<GridPoint>& grid,
                                  const std::vector<CorpusEntry>& corpus,
                                  const DeviceConfig& cfg, const SweepConfig& sweep_cfg,
                                  uint64_t address_lines) {
    sweep_cfg.validate();
    for (const GridPoint& p : grid)
        if (p.trace_idx < 0 || static_cast<size_t>(p.trace_idx) >= corpus.size())
            throw std::invalid_argument("grid point references a trace outside the corpus");

    // Each point writes its own slot, so thread count cannot change the output.
    std::vector<DatasetRow> rows(grid.size());
    int64_t n = static_cast<int64_t>(grid.size());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) {
        const GridPoint& p = grid[i];
        rows[i] = simulate(p, corpus[p.trace_idx].trace, cfg, sweep_cfg.op_cap, address_lines);
    }
    return rows;
}

SplitIndices split_dataset(size_t n_rows, const std::array<double, 3>& fractions, uint64_t seed) {
    double sum = fractions[0] + fractions[1] + fractions[2];
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("split_fractions: must sum to 1");
    std::vector<size_t> idx(n_rows);
    for (size_t i = 0; i < n_rows; ++i) idx[i] = i;
    Rng rng(seed);
    rng.shuffle(idx);

    size_t n_test = static_cast<size_t>(std::floor(static_cast<double>(n_rows) * fractions[1]));
    size_t n_val = static_cast<size_t>(std::floor(static_cast<double>(n_rows) * fractions[2]));
    size_t n_train = n_rows - n_test - n_val;

    SplitIndices s;
    s.train.assign(idx.begin(), idx.begin() + n_train);
    s.test.assign(idx.begin() + n_train, idx.begin() + n_train + n_test);
    s.validation.assign(idx.begin() + n_train + n_test, idx.end());
    return s;
}

std::array<double, 3> one_hot(double value, const std::array<double, 3>& grid) {
    for (int i = 0; i < 3; ++i) {
        if (value == grid[i]) {
            std::array<double, 3> v{0.0, 0.0, 0.0};
            v[i] = 1.0;
            return v;
        }
    }
    throw std::invalid_argument("one_hot: value " + fmt_double(value) + " is not a grid entry");
}

std::array<double, 3> TargetScaler::standardize(double we, double wl, double en) const {
    std::array<double, 3> raw{we, wl, en};
    std::array<double, 3> out{};
    for (int k = 0; k < 3; ++k) {
        double v = raw[k];
        if (log_space[k]) {
            if (!(v > 0.0))
                throw std::invalid_argument("standardize: target " + std::to_string(k) +
                                            " must be positive for log scaling, got " +
                                            fmt_double(v));
            v = std::log(v);
        }
        out[k] = (v - mean[k]) / stddev[k];
    }
    return out;
}

double TargetScaler::invert(int target_idx, double standardized) const {
    double v = standardized * stddev.at(target_idx) + mean.at(target_idx);
    return log_space.at(target_idx) ? std::exp(v) : v;
}

namespace {

void append(std::vector<double>& v, const std::array<double, 3>& h) {
    v.insert(v.end(), h.begin(), h.end());
}

void append_counts(std::vector<double>& v, const DatasetRow& row) {
    double n_ops = static_cast<double>(row.n_reads + row.n_writes);
    if (n_ops <= 0.0) throw std::invalid_argument("row has zero ops");
    v.push_back(static_cast<double>(row.n_reads) / n_ops);
    v.push_back(static_cast<double>(row.n_writes) / n_ops);
}

}  // namespace

std::vector<double> encode_energy_features(const DatasetRow& row, const DeviceConfig& cfg) {
    std::vector<double> f;
    f.reserve(17);
    append(f, one_hot(row.set_voltage, cfg.set_voltage_grid));
    append(f, one_hot(row.set_pulse, cfg.set_pulse_grid));
    append(f, one_hot(row.reset_voltage, cfg.reset_voltage_grid));
    append(f, one_hot(row.reset_pulse, cfg.reset_pulse_grid));
    append(f, one_hot(row.temperature, cfg.temperature_grid));
    append_counts(f, row);
    return f;
}

std::vector<double> encode_latency_features(const DatasetRow& row, const DeviceConfig& cfg) {
    std::vector<double> f;
    f.reserve(11);
    append(f, one_hot(row.set_pulse, cfg.set_pulse_grid));
    append(f, one_hot(row.reset_pulse, cfg.reset_pulse_grid));
    append(f, one_hot(row.temperature, cfg.temperature_grid));
    append_counts(f, row);
    return f;
}

std::vector<double> encode_endurance_features(const DatasetRow& row, const DeviceConfig& cfg) {
    std::vector<double> f;
    f.reserve(5);
    append(f, one_hot(row.temperature, cfg.temperature_grid));
    append_counts(f, row);
    return f;
}

EncodedDataset encode_dataset(const std::vector<DatasetRow>& rows, const DeviceConfig& cfg,
                              const SplitIndices& split) {
    if (split.train.empty()) throw std::invalid_argument("encode_dataset: empty training split");
    static const char* target_names[3] = {"total_write_energy", "total_write_latency", "endurance"};

    EncodedDataset ds;
    ds.split = split;

    auto target = [&](const DatasetRow& r, int k) {
        double v = k == 0 ? r.total_write_energy : k == 1 ? r.total_write_latency : r.endurance;
        if (!ds.scaler.log_space[k]) return v;
        if (!(v > 0.0))
            throw std::invalid_argument(std::string("encode_dataset: target '") + target_names[k] +
                                        "' must be positive for log scaling, got " + fmt_double(v));
        return std::log(v);
    };
    for (int k = 0; k < 3; ++k) {
        double sum = 0.0;
        for (size_t i : split.train) sum += target(rows.at(i), k);
        double mean = sum / static_cast<double>(split.train.size());
        double sq = 0.0;
        for (size_t i : split.train) {
            double d = target(rows.at(i), k) - mean;
            sq += d * d;
        }
        double sd = std::sqrt(sq / static_cast<double>(split.train.size()));
        if (!(sd > 1e-15 * std::max(1.0, std::abs(mean))))
            throw std::invalid_argument(std::string("encode_dataset: target '") + target_names[k] +
                                        "' has degenerate spread on the training split");
        ds.scaler.mean[k] = mean;
        ds.scaler.stddev[k] = sd;
    }

    ds.rows.reserve(rows.size());
    for (const DatasetRow& r : rows) {
        EncodedRow er;
        er.energy = encode_energy_features(r, cfg);
        er.latency = encode_latency_features(r, cfg);
        er.endurance = encode_endurance_features(r, cfg);
        er.targets_raw = {r.total_write_energy, r.total_write_latency, r.endurance};
        er.targets_std = ds.scaler.standardize(r.total_write_energy, r.total_write_latency, r.endurance);
        ds.rows.push_back(std::move(er));
    }
    return ds;
}

static const char kDatasetHeader[] =
    "set_voltage,set_pulse,reset_voltage,reset_pulse,temperature,n_reads,n_writes,"
    "total_write_energy,total_write_latency,endurance,total_energy,total_latency";

void write_dataset_csv(const std::vector<DatasetRow>& rows, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    os << kDatasetHeader << '\n';
    for (const DatasetRow& r : rows) {
        os << fmt_double(r.set_voltage) << ',' << fmt_double(r.set_pulse) << ','
           << fmt_double(r.reset_voltage) << ',' << fmt_double(r.reset_pulse) << ','
           << fmt_double(r.temperature) << ',' << r.n_reads << ',' << r.n_writes << ','
           << fmt_double(r.total_write_energy) << ',' << fmt_double(r.total_write_latency) << ','
           << fmt_double(r.endurance) << ',' << fmt_double(r.total_energy) << ','
           << fmt_double(r.total_latency) << '\n';
    }
}

std::vector<DatasetRow> read_dataset_csv(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open dataset: " + path);
    std::string line;
    if (!std::getline(is, line) || line != kDatasetHeader)
        throw std::runtime_error("dataset csv: bad or missing header in " + path);
    std::vector<DatasetRow> rows;
    size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string tok;
        std::vector<std::string> f;
        while (std::getline(ss, tok, ',')) f.push_back(tok);
        if (f.size() != 12)
            throw std::runtime_error("dataset csv: line " + std::to_string(lineno) +
                                     ": expected 12 fields, got " + std::to_string(f.size()));
        DatasetRow r;
        try {
            r.set_voltage = std::stod(f[0]);
            r.set_pulse = std::stod(f[1]);
            r.reset_voltage = std::stod(f[2]);
            r.reset_pulse = std::stod(f[3]);
            r.temperature = std::stod(f[4]);
            r.n_reads = std::stoull(f[5]);
            r.n_writes = std::stoull(f[6]);
            r.total_write_energy = std::stod(f[7]);
            r.total_write_latency = std::stod(f[8]);
            r.endurance = std::stod(f[9]);
            r.total_energy = std::stod(f[10]);
            r.total_latency = std::stod(f[11]);
        } catch (...) {
            throw std::runtime_error("dataset csv: line " + std::to_string(lineno) + ": bad number");
        }
        rows.push_back(r);
    }
    return rows;
}

namespace {

nlohmann::json indices_json(const std::vector<size_t>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (size_t i : v) a.push_back(i);
    return a;
}

std::vector<size_t> indices_from_json(const nlohmann::json& a) {
    std::vector<size_t> v;
    for (const auto& x : a) v.push_back(x.get<size_t>());
    return v;
}

}  // namespace

void write_encoded_json(const EncodedDataset& ds, const std::string& path) {
    nlohmann::json j;
    j["scaler"] = {{"targets", {"total_write_energy", "total_write_latency", "endurance"}},
                   {"log_space", ds.scaler.log_space},
                   {"mean", ds.scaler.mean},
                   {"stddev", ds.scaler.stddev}};
    j["split"] = {{"train", indices_json(ds.split.train)},
                  {"test", indices_json(ds.split.test)},
                  {"validation", indices_json(ds.split.validation)}};
    auto& rows = j["rows"] = nlohmann::json::array();
    for (const EncodedRow& r : ds.rows) {
        rows.push_back({{"energy", r.energy},
                        {"latency", r.latency},
                        {"endurance", r.endurance},
                        {"targets_std", r.targets_std},
                        {"targets_raw", r.targets_raw}});
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    os << j.dump() << '\n';
}

EncodedDataset read_encoded_json(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open encoded dataset: " + path);
    nlohmann::json j = nlohmann::json::parse(is);
    EncodedDataset ds;
    const auto& sc = j.at("scaler");
    for (int k = 0; k < 3; ++k) {
        ds.scaler.log_space[k] = sc.at("log_space")[k].get<bool>();
        ds.scaler.mean[k] = sc.at("mean")[k].get<double>();
        ds.scaler.stddev[k] = sc.at("stddev")[k].get<double>();
    }
    ds.split.train = indices_from_json(j.at("split").at("train"));
    ds.split.test = indices_from_json(j.at("split").at("test"));
    ds.split.validation = indices_from_json(j.at("split").at("validation"));
    for (const auto& rj : j.at("rows")) {
        EncodedRow r;
        r.energy = rj.at("energy").get<std::vector<double>>();
        r.latency = rj.at("latency").get<std::vector<double>>();
        r.endurance = rj.at("endurance").get<std::vector<double>>();
        for (int k = 0; k < 3; ++k) {
            r.targets_std[k] = rj.at("targets_std")[k].get<double>();
            r.targets_raw[k] = rj.at("targets_raw")[k].get<double>();
        }
        ds.rows.push_back(std::move(r));
    }
    return ds;
}

}  // namespace smartwrite

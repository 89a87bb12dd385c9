#include "smartwrite/device_model.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <stdexcept>

#include "json.hpp"

namespace smartwrite {

namespace {

void check_grid(const std::array<double, 3>& g, const char* name) {
    for (double v : g) {
        if (!(v > 0.0))
            throw std::invalid_argument(std::string(name) + ": entries must be positive");
    }
    if (!(g[0] < g[1] && g[1] < g[2]))
        throw std::invalid_argument(std::string(name) + ": entries must be strictly increasing");
}

int check_idx(int idx, const char* name) {
    if (idx < 0 || idx > 2)
        throw std::invalid_argument(std::string(name) + ": index out of range [0,2]");
    return idx;
}

}  // namespace

void DeviceConfig::validate() const {
    check_grid(set_voltage_grid, "set_voltage_grid");
    check_grid(set_pulse_grid, "set_pulse_grid");
    check_grid(reset_voltage_grid, "reset_voltage_grid");
    check_grid(reset_pulse_grid, "reset_pulse_grid");
    check_grid(temperature_grid, "temperature_grid");
    if (!(alpha_set >= 0.0)) throw std::invalid_argument("alpha_set: must be >= 0");
    if (!(alpha_reset >= 0.0)) throw std::invalid_argument("alpha_reset: must be >= 0");
    if (!(v_min > 0.0)) throw std::invalid_argument("v_min: must be > 0");
    if (!(prog_resistance > 0.0)) throw std::invalid_argument("prog_resistance: must be > 0");
    if (!(controller_overhead >= 0.0)) throw std::invalid_argument("controller_overhead: must be >= 0");
    if (!(read_energy >= 0.0)) throw std::invalid_argument("read_energy: must be >= 0");
    if (!(read_latency >= 0.0)) throw std::invalid_argument("read_latency: must be >= 0");
    if (!(latency_temp_coeff >= 0.0)) throw std::invalid_argument("latency_temp_coeff: must be >= 0");
    if (!(wear_temp_coeff >= 0.0)) throw std::invalid_argument("wear_temp_coeff: must be >= 0");
    if (!(endurance_mean > 0.0)) throw std::invalid_argument("endurance_mean: must be > 0");
    if (!(endurance_spread >= 0.0)) throw std::invalid_argument("endurance_spread: must be >= 0");
    if (line_bytes <= 0) throw std::invalid_argument("line_bytes: must be > 0");
}

DeviceConfig device_config_from_json(const nlohmann::json& j, const std::string& path) {
    static const char* known[] = {
        "set_voltage_grid", "set_pulse_grid", "reset_voltage_grid", "reset_pulse_grid",
        "temperature_grid", "alpha_set", "alpha_reset", "t0", "v_min",
        "prog_resistance", "controller_overhead", "read_energy", "read_latency",
        "latency_temp_coeff", "wear_temp_coeff", "endurance_mean", "endurance_spread",
        "line_bytes"};
    if (!j.is_object())
        throw std::invalid_argument(path + ": expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* k) { return it.key() == k; }) == std::end(known))
            throw std::invalid_argument(path + "." + it.key() + ": unknown key");
    }

    DeviceConfig c;
    auto grid = [&](const char* key, std::array<double, 3>& out) {
        if (!j.contains(key)) return;
        const auto& a = j.at(key);
        if (!a.is_array() || a.size() != 3)
            throw std::invalid_argument(path + "." + key + ": expected an array of 3 numbers");
        for (int i = 0; i < 3; ++i) out[i] = a[i].get<double>();
    };
    auto num = [&](const char* key, double& out) {
        if (j.contains(key)) out = j.at(key).get<double>();
    };
    grid("set_voltage_grid", c.set_voltage_grid);
    grid("set_pulse_grid", c.set_pulse_grid);
    grid("reset_voltage_grid", c.reset_voltage_grid);
    grid("reset_pulse_grid", c.reset_pulse_grid);
    grid("temperature_grid", c.temperature_grid);
    num("alpha_set", c.alpha_set);
    num("alpha_reset", c.alpha_reset);
    num("t0", c.t0);
    num("v_min", c.v_min);
    num("prog_resistance", c.prog_resistance);
    num("controller_overhead", c.controller_overhead);
    num("read_energy", c.read_energy);
    num("read_latency", c.read_latency);
    num("latency_temp_coeff", c.latency_temp_coeff);
    num("wear_temp_coeff", c.wear_temp_coeff);
    num("endurance_mean", c.endurance_mean);
    num("endurance_spread", c.endurance_spread);
    if (j.contains("line_bytes")) c.line_bytes = j.at("line_bytes").get<int>();

    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + "." + e.what());
    }
    return c;
}

DeviceConfig DeviceConfig::from_json_text(const std::string& text) {
    return device_config_from_json(nlohmann::json::parse(text), "device");
}

nlohmann::json device_config_to_json(const DeviceConfig& c) {
    return {{"set_voltage_grid", c.set_voltage_grid},
            {"set_pulse_grid", c.set_pulse_grid},
            {"reset_voltage_grid", c.reset_voltage_grid},
            {"reset_pulse_grid", c.reset_pulse_grid},
            {"temperature_grid", c.temperature_grid},
            {"alpha_set", c.alpha_set},
            {"alpha_reset", c.alpha_reset},
            {"t0", c.t0},
            {"v_min", c.v_min},
            {"prog_resistance", c.prog_resistance},
            {"controller_overhead", c.controller_overhead},
            {"read_energy", c.read_energy},
            {"read_latency", c.read_latency},
            {"latency_temp_coeff", c.latency_temp_coeff},
            {"wear_temp_coeff", c.wear_temp_coeff},
            {"endurance_mean", c.endurance_mean},
            {"endurance_spread", c.endurance_spread},
            {"line_bytes", c.line_bytes}};
}

namespace {

void check_temperature(double t, const DeviceConfig& cfg) {
    if (t < cfg.temperature_grid.front() || t > cfg.temperature_grid.back())
        throw std::invalid_argument("temperature out of configured range");
}

}  // namespace

double adjusted_voltage(double v0, double alpha, double t, const DeviceConfig& cfg) {
    check_temperature(t, cfg);
    return std::max(cfg.v_min, v0 - alpha * (t - cfg.t0));
}

double pulse_energy(PulseKind kind, const WriteParams& p, double t, const DeviceConfig& cfg) {
    double v0, alpha, dur;
    if (kind == PulseKind::SET) {
        v0 = cfg.set_voltage_grid[check_idx(p.set_voltage_idx, "set_voltage_idx")];
        dur = cfg.set_pulse_grid[check_idx(p.set_pulse_idx, "set_pulse_idx")];
        alpha = cfg.alpha_set;
    } else {
        v0 = cfg.reset_voltage_grid[check_idx(p.reset_voltage_idx, "reset_voltage_idx")];
        dur = cfg.reset_pulse_grid[check_idx(p.reset_pulse_idx, "reset_pulse_idx")];
        alpha = cfg.alpha_reset;
    }
    double v = adjusted_voltage(v0, alpha, t, cfg);
    // V^2 * t / R with t in ns and output in pJ: the 1e-9 * 1e12 nets to 1e3.
    return v * v * dur * 1000.0 / cfg.prog_resistance;
}

WriteOutcome write_line(const uint8_t* old_data, const uint8_t* new_data,
                        const WriteParams& p, double t, const DeviceConfig& cfg) {
    check_temperature(t, cfg);
    WriteOutcome out;
    int n = cfg.line_bytes;
    int i = 0;
    // Count transitions one machine word at a time; tail bytes individually.
    for (; i + 8 <= n; i += 8) {
        uint64_t o, w;
        std::memcpy(&o, old_data + i, 8);
        std::memcpy(&w, new_data + i, 8);
        out.bits_set += std::popcount(~o & w);
        out.bits_reset += std::popcount(o & ~w);
    }
    for (; i < n; ++i) {
        out.bits_set += std::popcount(static_cast<unsigned>(~old_data[i] & new_data[i]) & 0xffu);
        out.bits_reset += std::popcount(static_cast<unsigned>(old_data[i] & ~new_data[i]) & 0xffu);
    }

    double e_set = out.bits_set > 0 ? pulse_energy(PulseKind::SET, p, t, cfg) : 0.0;
    double e_reset = out.bits_reset > 0 ? pulse_energy(PulseKind::RESET, p, t, cfg) : 0.0;
    out.energy_pj = out.bits_set * e_set + out.bits_reset * e_reset;

    // Pulses for all changed bits fire in parallel; the write is done when the
    // longest pulse actually used finishes. Heat shortens pulses slightly.
    double shorten = 1.0 - cfg.latency_temp_coeff * (t - cfg.t0);
    double pulse = 0.0;
    if (out.bits_set > 0)
        pulse = std::max(pulse, cfg.set_pulse_grid[check_idx(p.set_pulse_idx, "set_pulse_idx")] * shorten);
    if (out.bits_reset > 0)
        pulse = std::max(pulse, cfg.reset_pulse_grid[check_idx(p.reset_pulse_idx, "reset_pulse_idx")] * shorten);
    out.latency_ns = cfg.controller_overhead + pulse;
    return out;
}

ReadOutcome read_line(double t, const DeviceConfig& cfg) {
    check_temperature(t, cfg);
    return {cfg.read_energy, cfg.read_latency};
}

double endurance_metric(double bit_programs, uint64_t distinct_lines, double t,
                        const DeviceConfig& cfg) {
    check_temperature(t, cfg);
    if (distinct_lines == 0) return 1.0;
    double wear = bit_programs * (1.0 + cfg.wear_temp_coeff * (t - cfg.t0));
    double capacity = static_cast<double>(distinct_lines) * cfg.line_bytes * 8.0 * cfg.endurance_mean;
    double remaining = 1.0 - wear / capacity;
    return std::clamp(remaining, 0.0, 1.0);
}

}  // namespace smartwrite

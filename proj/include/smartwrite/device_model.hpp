#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace smartwrite {

// Physical write model for a phase-change memory line. Energies are picojoules,
// latencies nanoseconds, temperatures degrees Celsius. Every operation here is
// a pure function of its arguments plus the config.

enum class PulseKind { SET, RESET };

struct WriteParams {
    // Indices into the corresponding config grids.
    int set_voltage_idx = 1;
    int set_pulse_idx = 1;
    int reset_voltage_idx = 1;
    int reset_pulse_idx = 1;
};

struct DeviceConfig {
    std::array<double, 3> set_voltage_grid{1.5, 2.0, 2.5};     // V
    std::array<double, 3> set_pulse_grid{150.0, 155.0, 160.0}; // ns
    std::array<double, 3> reset_voltage_grid{2.5, 3.0, 3.5};   // V
    std::array<double, 3> reset_pulse_grid{100.0, 105.0, 110.0};
    std::array<double, 3> temperature_grid{25.0, 50.0, 75.0};  // degC

    double alpha_set = 0.025;   // V per degC of drive-voltage derating
    double alpha_reset = 0.015;
    double t0 = 25.0;           // reference temperature
    double v_min = 0.1;         // derating floor, V

    double prog_resistance = 1000.0;  // ohm, effective programming resistance
    double controller_overhead = 60.0;  // ns added to every write
    double read_energy = 50.0;   // pJ per line read
    double read_latency = 50.0;  // ns per line read

    double latency_temp_coeff = 0.001;  // per degC, pulse shortening when hot
    double wear_temp_coeff = 0.004;     // per degC, extra wear when hot

    double endurance_mean = 1e6;    // rated programs per cell
    double endurance_spread = 1e5;  // rated spread (kept for reporting)

    int line_bytes = 64;

    void validate() const;  // throws std::invalid_argument naming the field

    // Parses a JSON object; missing fields keep defaults, unknown keys are
    // rejected. `path` prefixes error messages (e.g. "device").
    static DeviceConfig from_json_text(const std::string& text);
};

struct WriteOutcome {
    double energy_pj = 0.0;
    double latency_ns = 0.0;
    int bits_set = 0;    // 0 -> 1 transitions programmed
    int bits_reset = 0;  // 1 -> 0 transitions programmed
};

// Drive voltage after linear thermal derating, clamped below at v_min.
// Throws if t lies outside [grid front, grid back].
double adjusted_voltage(double v0, double alpha, double t, const DeviceConfig& cfg);

// Energy of one pulse at temperature t: V(t)^2 * duration / prog_resistance.
double pulse_energy(PulseKind kind, const WriteParams& p, double t, const DeviceConfig& cfg);

// Differential write: only flipped bits are pulsed. Latency is controller
// overhead plus the longest pulse actually fired (temperature-shortened).
WriteOutcome write_line(const uint8_t* old_data, const uint8_t* new_data,
                        const WriteParams& p, double t, const DeviceConfig& cfg);

// Line read cost; constant in this model.
struct ReadOutcome {
    double energy_pj;
    double latency_ns;
};
ReadOutcome read_line(double t, const DeviceConfig& cfg);

// Remaining-lifetime fraction in [0,1] after bit_programs total bit writes
// spread over distinct_lines lines. 1.0 when nothing was written.
double endurance_metric(double bit_programs, uint64_t distinct_lines, double t,
                        const DeviceConfig& cfg);

}  // namespace smartwrite

#pragma once

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "smartwrite/device_model.hpp"

namespace smartwrite {

// Replays line reads/writes against an initially all-zero store, accumulating
// device-model costs. Shared by the parameter sweep and the RL environment so
// both report identical totals for identical op streams.
class LineStoreSim {
  public:
    LineStoreSim(const DeviceConfig& cfg, uint64_t address_lines)
        : cfg_(&cfg),
          line_bytes_(static_cast<uint64_t>(cfg.line_bytes)),
          store_(address_lines * static_cast<uint64_t>(cfg.line_bytes), 0),
          written_(address_lines, 0) {}

    void read(double t) {
        ReadOutcome rc = read_line(t, *cfg_);
        read_energy_pj_ += rc.energy_pj;
        read_latency_ns_ += rc.latency_ns;
        ++n_reads_;
    }

    WriteOutcome write(uint64_t address, const uint8_t* data, size_t len,
                       const WriteParams& p, double t) {
        if (address % line_bytes_ != 0)
            throw std::runtime_error("write address not line-aligned");
        uint64_t line = address / line_bytes_;
        if (line >= written_.size())
            throw std::runtime_error("write address outside configured space");
        if (len != line_bytes_)
            throw std::runtime_error("payload size does not match line_bytes");
        uint8_t* old = store_.data() + line * line_bytes_;
        WriteOutcome o = write_line(old, data, p, t, *cfg_);
        std::memcpy(old, data, len);
        if (!written_[line]) {
            written_[line] = 1;
            ++distinct_lines_;
        }
        write_energy_pj_ += o.energy_pj;
        write_latency_ns_ += o.latency_ns;
        bit_programs_ += static_cast<uint64_t>(o.bits_set) + static_cast<uint64_t>(o.bits_reset);
        ++n_writes_;
        return o;
    }

    double endurance(double t) const {
        return endurance_metric(static_cast<double>(bit_programs_), distinct_lines_, t, *cfg_);
    }

    double write_energy_pj() const { return write_energy_pj_; }
    double write_latency_ns() const { return write_latency_ns_; }
    double read_energy_pj() const { return read_energy_pj_; }
    double read_latency_ns() const { return read_latency_ns_; }
    double total_energy_pj() const { return write_energy_pj_ + read_energy_pj_; }
    double total_latency_ns() const { return write_latency_ns_ + read_latency_ns_; }
    uint64_t n_reads() const { return n_reads_; }
    uint64_t n_writes() const { return n_writes_; }
    uint64_t bit_programs() const { return bit_programs_; }
    uint64_t distinct_lines() const { return distinct_lines_; }
    const uint8_t* line_data(uint64_t line) const { return store_.data() + line * line_bytes_; }

  private:
    const DeviceConfig* cfg_;
    uint64_t line_bytes_;
    std::vector<uint8_t> store_;
    std::vector<uint8_t> written_;
    double write_energy_pj_ = 0.0;
    double write_latency_ns_ = 0.0;
    double read_energy_pj_ = 0.0;
    double read_latency_ns_ = 0.0;
    uint64_t n_reads_ = 0;
    uint64_t n_writes_ = 0;
    uint64_t bit_programs_ = 0;
    uint64_t distinct_lines_ = 0;
};

}  // namespace smartwrite

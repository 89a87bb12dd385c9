#pragma once

#include "smartwrite/device_model.hpp"

namespace smartwrite {

struct PredTriple {
    double write_energy_pj = 0.0;
    double write_latency_ns = 0.0;
    double endurance = 0.0;
};

// What the RL side needs from a cost model: predicted whole-episode write
// energy/latency/endurance for a parameter choice at a temperature and an
// expected op mix. Kept abstract so tests can substitute analytic stubs.
class Predictor {
  public:
    virtual ~Predictor() = default;
    virtual PredTriple predict(const WriteParams& params, double temperature_c,
                               double n_reads, double n_writes) const = 0;
};

}  // namespace smartwrite

#pragma once

#include <vector>

namespace smartwrite::rl {

struct Step {
    std::vector<double> observation;
    double reward = 0.0;
    bool done = false;
};

// Minimal episodic environment with a multi-discrete action space. The
// training loop only sees this interface, so tests can plug in toy
// environments with known optima.
class Env {
  public:
    virtual ~Env() = default;

    virtual int obs_size() const = 0;
    virtual std::vector<int> action_sizes() const = 0;

    // Starts a new episode (implementations pick the next episode seed).
    virtual std::vector<double> reset() = 0;
    virtual Step step(const std::vector<int>& action) = 0;
};

}  // namespace smartwrite::rl

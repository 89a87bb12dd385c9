#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "smartwrite/predictor.hpp"
#include "smartwrite/sweep.hpp"

namespace smartwrite {

// Per-target MLP cost models trained on the sweep dataset. Scalar-output
// feed-forward nets, ReLU hidden layers, linear output, trained with Huber
// loss plus L1/L2 penalties on the hidden-layer weight kernels.

enum class OptimizerKind { ADAM, NADAM };

struct HeadSpec {
    std::string name;
    int input_dim = 0;
    std::vector<int> hidden;
    double l1 = 0.0;
    double l2 = 0.0;
    OptimizerKind optimizer = OptimizerKind::ADAM;
    int batch_size = 32;
    int target_idx = 0;  // 0 write energy, 1 write latency, 2 endurance

    void validate() const;
};

// The three production heads, in target order. Training refuses any other
// configuration; tests may still build ad-hoc heads directly.
std::vector<HeadSpec> default_head_specs();
void enforce_default_specs(const std::vector<HeadSpec>& specs);

struct TrainConfig {
    double initial_lr = 1e-3;
    double lr_reduce_factor = 0.1;
    int plateau_patience = 3;    // epochs without val improvement before lr cut
    int early_stop_patience = 4; // epochs without val improvement before stop
    double huber_delta = 1.0;
    int max_epochs = 500;

    void validate() const;
};

struct DenseLayer {
    int in = 0, out = 0;
    std::vector<double> w;  // row-major, out x in
    std::vector<double> b;
};

class MlpHead {
  public:
    MlpHead() = default;
    // Fan-based (Glorot) uniform weights, zero biases; deterministic per seed.
    MlpHead(const HeadSpec& spec, uint64_t seed);

    double forward(const double* x) const;
    double forward(const std::vector<double>& x) const;

    const HeadSpec& spec() const { return spec_; }
    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }

    // L1/L2 penalty over hidden-layer kernels (output layer and biases exempt).
    double regularization_penalty() const;

    size_t param_count() const;

  private:
    HeadSpec spec_;
    std::vector<DenseLayer> layers_;

    friend class HeadTrainer;
};

double huber(double residual, double delta);
double huber_grad(double residual, double delta);

// Mean |actual-pred|/|actual| * 100; throws if any actual is zero.
double mape(const std::vector<double>& predictions, const std::vector<double>& actuals);

// Analytic backprop vs central finite differences on the full regularized
// loss at (x, y); returns the max relative error across all parameters.
double gradient_check(const MlpHead& head, const std::vector<double>& x, double y,
                      double huber_delta, double fd_eps = 1e-5);

struct EpochRow {
    std::string head;
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double lr = 0.0;
};

struct TrainReport {
    std::vector<EpochRow> rows;
};

void write_train_report_csv(const TrainReport& report, const std::string& path);

class MlpSurrogate : public Predictor {
  public:
    std::vector<MlpHead> heads;  // energy, latency, endurance
    TargetScaler scaler;
    DeviceConfig device;
    uint64_t seed = 0;

    // Raw-feature prediction: encodes per-head inputs and destandardizes.
    PredTriple predict(const WriteParams& params, double temperature_c,
                       double n_reads, double n_writes) const override;
    std::array<double, 3> predict_row(const DatasetRow& row) const;
};

// Trains the three default heads on the encoded dataset (standardized
// targets; validation split drives the lr schedule and early stopping; the
// weights kept are the best-validation ones). Heads are independent and run
// in parallel; each head's arithmetic is sequential, so results are
// seed-deterministic regardless of thread count.
MlpSurrogate train_surrogate(const EncodedDataset& ds, const DeviceConfig& device,
                             const TrainConfig& cfg, uint64_t seed, TrainReport* report);

// Single-head training entry used by tests and by train_surrogate itself.
MlpHead train_head(const HeadSpec& spec, const std::vector<std::vector<double>>& features,
                   const std::vector<double>& targets_std, const std::vector<size_t>& train_idx,
                   const std::vector<size_t>& val_idx, const TrainConfig& cfg, uint64_t seed,
                   TrainReport* report);

// Held-out MAPE per head (physical units), rows indexed by `idx`.
std::array<double, 3> evaluate_mape(const MlpSurrogate& s, const std::vector<DatasetRow>& rows,
                                    const std::vector<size_t>& idx);

void save_surrogate(const MlpSurrogate& s, const std::string& path);
MlpSurrogate load_surrogate(const std::string& path);

}  // namespace smartwrite

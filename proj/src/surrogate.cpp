#include "smartwrite/surrogate.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "smartwrite/json_io.hpp"
#include "smartwrite/rng.hpp"
#include "smartwrite/text_io.hpp"

namespace smartwrite {

void HeadSpec::validate() const {
    if (name.empty()) throw std::invalid_argument("head spec: empty name");
    if (input_dim <= 0) throw std::invalid_argument(name + ": input_dim must be > 0");
    if (hidden.empty()) throw std::invalid_argument(name + ": needs at least one hidden layer");
    for (int h : hidden)
        if (h <= 0) throw std::invalid_argument(name + ": hidden widths must be > 0");
    if (l1 < 0.0 || l2 < 0.0) throw std::invalid_argument(name + ": l1/l2 must be >= 0");
    if (batch_size <= 0) throw std::invalid_argument(name + ": batch_size must be > 0");
    if (target_idx < 0 || target_idx > 2) throw std::invalid_argument(name + ": target_idx out of range");
}

std::vector<HeadSpec> default_head_specs() {
    // All heads share one light ridge penalty. On standardized targets the
    // Huber data term is O(1), so any noticeably heavier penalty (and any l1
    // sparsifier strong enough to matter) drags a head toward predicting the
    // target mean on a meaningful fraction of seeds.
    HeadSpec energy{"energy", 17, {8, 20, 8, 12, 32, 32, 40}, 0.0, 0.001,
                    OptimizerKind::NADAM, 384, 0};
    HeadSpec latency{"latency", 11, {30, 14, 24, 16, 12}, 0.0, 0.001,
                     OptimizerKind::ADAM, 160, 1};
    HeadSpec endurance{"endurance", 5, {30, 14, 24, 16, 8}, 0.0, 0.001,
                       OptimizerKind::ADAM, 160, 2};
    return {energy, latency, endurance};
}

void enforce_default_specs(const std::vector<HeadSpec>& specs) {
    auto canon = default_head_specs();
    if (specs.size() != canon.size())
        throw std::invalid_argument("surrogate: expected exactly 3 heads");
    for (size_t k = 0; k < canon.size(); ++k) {
        const HeadSpec& a = specs[k];
        const HeadSpec& c = canon[k];
        if (a.name != c.name || a.input_dim != c.input_dim || a.hidden != c.hidden ||
            a.l1 != c.l1 || a.l2 != c.l2 || a.optimizer != c.optimizer ||
            a.batch_size != c.batch_size || a.target_idx != c.target_idx)
            throw std::invalid_argument("surrogate: head '" + a.name +
                                        "' deviates from the fixed architecture");
    }
}

void TrainConfig::validate() const {
    if (!(initial_lr > 0.0)) throw std::invalid_argument("initial_lr: must be > 0");
    if (!(lr_reduce_factor > 0.0 && lr_reduce_factor < 1.0))
        throw std::invalid_argument("lr_reduce_factor: must lie in (0,1)");
    if (plateau_patience <= 0) throw std::invalid_argument("plateau_patience: must be > 0");
    if (early_stop_patience <= 0) throw std::invalid_argument("early_stop_patience: must be > 0");
    if (!(huber_delta > 0.0)) throw std::invalid_argument("huber_delta: must be > 0");
    if (max_epochs <= 0) throw std::invalid_argument("max_epochs: must be > 0");
}

MlpHead::MlpHead(const HeadSpec& spec, uint64_t seed) : spec_(spec) {
    spec.validate();
    Rng rng(seed);
    int in = spec.input_dim;
    std::vector<int> widths = spec.hidden;
    widths.push_back(1);  // linear scalar output
    layers_.reserve(widths.size());
    for (int out : widths) {
        DenseLayer l;
        l.in = in;
        l.out = out;
        l.w.resize(static_cast<size_t>(in) * out);
        l.b.assign(out, 0.0);
        double limit = std::sqrt(6.0 / (in + out));
        for (double& w : l.w) w = rng.uniform(-limit, limit);
        layers_.push_back(std::move(l));
        in = out;
    }
}

double MlpHead::forward(const double* x) const {
    std::vector<double> cur(x, x + spec_.input_dim), next;
    for (size_t li = 0; li < layers_.size(); ++li) {
        const DenseLayer& l = layers_[li];
        next.assign(l.out, 0.0);
        for (int o = 0; o < l.out; ++o) {
            const double* wr = l.w.data() + static_cast<size_t>(o) * l.in;
            double z = l.b[o];
            for (int i = 0; i < l.in; ++i) z += wr[i] * cur[i];
            next[o] = (li + 1 == layers_.size()) ? z : (z > 0.0 ? z : 0.0);
        }
        cur.swap(next);
    }
    return cur[0];
}

double MlpHead::forward(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != spec_.input_dim)
        throw std::invalid_argument(spec_.name + ": feature width " + std::to_string(x.size()) +
                                    " does not match input_dim " + std::to_string(spec_.input_dim));
    return forward(x.data());
}

double MlpHead::regularization_penalty() const {
    double p = 0.0;
    for (size_t li = 0; li + 1 < layers_.size(); ++li) {
        for (double w : layers_[li].w) p += spec_.l1 * std::abs(w) + spec_.l2 * w * w;
    }
    return p;
}

size_t MlpHead::param_count() const {
    size_t n = 0;
    for (const DenseLayer& l : layers_) n += l.w.size() + l.b.size();
    return n;
}

double huber(double r, double delta) {
    double a = std::abs(r);
    if (a <= delta) return 0.5 * r * r;
    return delta * (a - 0.5 * delta);
}

double huber_grad(double r, double delta) {
    if (r > delta) return delta;
    if (r < -delta) return -delta;
    return r;
}

double mape(const std::vector<double>& predictions, const std::vector<double>& actuals) {
    if (predictions.size() != actuals.size() || predictions.empty())
        throw std::invalid_argument("mape: size mismatch or empty input");
    double sum = 0.0;
    for (size_t i = 0; i < actuals.size(); ++i) {
        if (actuals[i] == 0.0) throw std::invalid_argument("mape: actual value is zero");
        sum += std::abs(actuals[i] - predictions[i]) / std::abs(actuals[i]);
    }
    return sum / static_cast<double>(actuals.size()) * 100.0;
}

namespace {

std::vector<DenseLayer> zero_like(const std::vector<DenseLayer>& layers) {
    std::vector<DenseLayer> g = layers;
    for (DenseLayer& l : g) {
        std::fill(l.w.begin(), l.w.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
    return g;
}

}  // namespace

// Batch SGD machinery for one head: cached forward, backprop, Adam/Nadam.
class HeadTrainer {
  public:
    HeadTrainer(MlpHead& head, const TrainConfig& cfg) : head_(head), cfg_(cfg) {
        grads_ = zero_like(head.layers_);
        m_ = zero_like(head.layers_);
        v_ = zero_like(head.layers_);
        z_.resize(head.layers_.size());
        a_.resize(head.layers_.size());
        delta_.resize(head.layers_.size());
        for (size_t li = 0; li < head.layers_.size(); ++li) {
            z_[li].assign(head.layers_[li].out, 0.0);
            a_[li].assign(head.layers_[li].out, 0.0);
            delta_[li].assign(head.layers_[li].out, 0.0);
        }
    }

    double forward_cached(const double* x) {
        const auto& layers = head_.layers_;
        const double* cur = x;
        for (size_t li = 0; li < layers.size(); ++li) {
            const DenseLayer& l = layers[li];
            for (int o = 0; o < l.out; ++o) {
                const double* wr = l.w.data() + static_cast<size_t>(o) * l.in;
                double z = l.b[o];
                for (int i = 0; i < l.in; ++i) z += wr[i] * cur[i];
                z_[li][o] = z;
                a_[li][o] = (li + 1 == layers.size()) ? z : (z > 0.0 ? z : 0.0);
            }
            cur = a_[li].data();
        }
        return a_.back()[0];
    }

    // dout = dLoss/d(output); accumulates into grads_.
    void backward(const double* x, double dout) {
        const auto& layers = head_.layers_;
        delta_.back()[0] = dout;
        for (size_t li = layers.size(); li-- > 0;) {
            const DenseLayer& l = layers[li];
            const double* prev = li == 0 ? x : a_[li - 1].data();
            DenseLayer& g = grads_[li];
            for (int o = 0; o < l.out; ++o) {
                double d = delta_[li][o];
                if (d == 0.0) continue;
                g.b[o] += d;
                double* gw = g.w.data() + static_cast<size_t>(o) * l.in;
                for (int i = 0; i < l.in; ++i) gw[i] += d * prev[i];
            }
            if (li == 0) break;
            std::vector<double>& dprev = delta_[li - 1];
            std::fill(dprev.begin(), dprev.end(), 0.0);
            for (int o = 0; o < l.out; ++o) {
                double d = delta_[li][o];
                if (d == 0.0) continue;
                const double* wr = l.w.data() + static_cast<size_t>(o) * l.in;
                for (int i = 0; i < l.in; ++i) dprev[i] += wr[i] * d;
            }
            for (int i = 0; i < l.in; ++i)
                if (z_[li - 1][i] <= 0.0) dprev[i] = 0.0;
        }
    }

    void add_regularization_grads() {
        const auto& layers = head_.layers_;
        for (size_t li = 0; li + 1 < layers.size(); ++li) {
            const std::vector<double>& w = layers[li].w;
            std::vector<double>& gw = grads_[li].w;
            for (size_t i = 0; i < w.size(); ++i) {
                double s = w[i] > 0.0 ? 1.0 : (w[i] < 0.0 ? -1.0 : 0.0);
                gw[i] += head_.spec_.l1 * s + 2.0 * head_.spec_.l2 * w[i];
            }
        }
    }

    void zero_grads() {
        for (DenseLayer& g : grads_) {
            std::fill(g.w.begin(), g.w.end(), 0.0);
            std::fill(g.b.begin(), g.b.end(), 0.0);
        }
    }

    // One minibatch: forward/backward over the samples, regularization, then
    // an optimizer step. Returns the batch objective (mean Huber + penalty)
    // evaluated at the pre-step weights.
    double batch_step(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                      const std::vector<size_t>& order, size_t begin, size_t end, double lr) {
        zero_grads();
        double loss = 0.0;
        double inv_n = 1.0 / static_cast<double>(end - begin);
        for (size_t k = begin; k < end; ++k) {
            size_t i = order[k];
            double pred = forward_cached(X[i].data());
            double r = pred - y[i];
            loss += huber(r, cfg_.huber_delta);
            backward(X[i].data(), huber_grad(r, cfg_.huber_delta) * inv_n);
        }
        loss = loss * inv_n + head_.regularization_penalty();
        add_regularization_grads();
        optimizer_step(lr);
        return loss;
    }

    double eval_loss(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                     const std::vector<size_t>& idx) const {
        double loss = 0.0;
        for (size_t i : idx) loss += huber(head_.forward(X[i].data()) - y[i], cfg_.huber_delta);
        return loss / static_cast<double>(idx.size()) + head_.regularization_penalty();
    }

    // Exposed for gradient checking: full-batch gradient without a step.
    std::vector<DenseLayer> loss_gradient(const double* x, double y) {
        zero_grads();
        double pred = forward_cached(x);
        backward(x, huber_grad(pred - y, cfg_.huber_delta));
        add_regularization_grads();
        return grads_;
    }

  private:
    void optimizer_step(double lr) {
        ++t_;
        double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        double bc1 = 1.0 - std::pow(b1, t_);
        double bc2 = 1.0 - std::pow(b2, t_);
        double bc1_next = 1.0 - std::pow(b1, t_ + 1);
        bool nesterov = head_.spec_.optimizer == OptimizerKind::NADAM;
        for (size_t li = 0; li < grads_.size(); ++li) {
            auto apply = [&](std::vector<double>& w, std::vector<double>& gm,
                             std::vector<double>& gv, const std::vector<double>& g) {
                for (size_t i = 0; i < w.size(); ++i) {
                    gm[i] = b1 * gm[i] + (1.0 - b1) * g[i];
                    gv[i] = b2 * gv[i] + (1.0 - b2) * g[i] * g[i];
                    double mhat;
                    if (nesterov)
                        mhat = b1 * gm[i] / bc1_next + (1.0 - b1) * g[i] / bc1;
                    else
                        mhat = gm[i] / bc1;
                    double vhat = gv[i] / bc2;
                    w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
                }
            };
            apply(head_.layers_[li].w, m_[li].w, v_[li].w, grads_[li].w);
            apply(head_.layers_[li].b, m_[li].b, v_[li].b, grads_[li].b);
        }
    }

    MlpHead& head_;
    const TrainConfig& cfg_;
    std::vector<DenseLayer> grads_, m_, v_;
    std::vector<std::vector<double>> z_, a_, delta_;
    long t_ = 0;
};

double gradient_check(const MlpHead& head, const std::vector<double>& x, double y,
                      double huber_delta, double fd_eps) {
    if (static_cast<int>(x.size()) != head.spec().input_dim)
        throw std::invalid_argument("gradient_check: feature width mismatch");
    MlpHead work = head;
    TrainConfig cfg;
    cfg.huber_delta = huber_delta;
    HeadTrainer tr(work, cfg);
    std::vector<DenseLayer> analytic = tr.loss_gradient(x.data(), y);

    auto loss_at = [&](MlpHead& h) {
        return huber(h.forward(x.data()) - y, huber_delta) + h.regularization_penalty();
    };

    double max_rel = 0.0;
    for (size_t li = 0; li < work.layers().size(); ++li) {
        auto probe = [&](std::vector<double>& params, const std::vector<double>& grad) {
            for (size_t i = 0; i < params.size(); ++i) {
                double save = params[i];
                params[i] = save + fd_eps;
                double up = loss_at(work);
                params[i] = save - fd_eps;
                double dn = loss_at(work);
                params[i] = save;
                double numeric = (up - dn) / (2.0 * fd_eps);
                double denom = std::max({1e-6, std::abs(numeric), std::abs(grad[i])});
                max_rel = std::max(max_rel, std::abs(numeric - grad[i]) / denom);
            }
        };
        probe(work.layers()[li].w, analytic[li].w);
        probe(work.layers()[li].b, analytic[li].b);
    }
    return max_rel;
}

MlpHead train_head(const HeadSpec& spec, const std::vector<std::vector<double>>& features,
                   const std::vector<double>& targets_std, const std::vector<size_t>& train_idx,
                   const std::vector<size_t>& val_idx, const TrainConfig& cfg, uint64_t seed,
                   TrainReport* report) {
    spec.validate();
    cfg.validate();
    if (features.size() != targets_std.size())
        throw std::invalid_argument(spec.name + ": features/targets size mismatch");
    if (train_idx.empty() || val_idx.empty())
        throw std::invalid_argument(spec.name + ": empty train or validation split");
    for (size_t i : train_idx)
        if (static_cast<int>(features.at(i).size()) != spec.input_dim)
            throw std::invalid_argument(spec.name + ": feature width does not match input_dim");

    MlpHead head(spec, derive_seed(seed, "init/" + spec.name));
    HeadTrainer trainer(head, cfg);
    Rng shuffle_rng(derive_seed(seed, "shuffle/" + spec.name));

    std::vector<size_t> order = train_idx;
    double lr = cfg.initial_lr;
    double best_val = std::numeric_limits<double>::infinity();
    double plateau_best = best_val;
    int plateau_wait = 0, stop_wait = 0;
    std::vector<DenseLayer> best_weights = head.layers();

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        int batches = 0;
        for (size_t begin = 0; begin < order.size(); begin += spec.batch_size) {
            size_t end = std::min(order.size(), begin + static_cast<size_t>(spec.batch_size));
            loss_sum += trainer.batch_step(features, targets_std, order, begin, end, lr);
            ++batches;
        }
        double train_loss = loss_sum / batches;
        double val_loss = trainer.eval_loss(features, targets_std, val_idx);
        if (report) report->rows.push_back({spec.name, epoch, train_loss, val_loss, lr});

        if (val_loss < best_val) {
            best_val = val_loss;
            best_weights = head.layers();
            stop_wait = 0;
        } else {
            ++stop_wait;
        }
        if (val_loss < plateau_best) {
            plateau_best = val_loss;
            plateau_wait = 0;
        } else if (++plateau_wait >= cfg.plateau_patience) {
            lr *= cfg.lr_reduce_factor;
            plateau_wait = 0;
        }
        if (stop_wait >= cfg.early_stop_patience) break;
    }
    head.layers() = best_weights;
    return head;
}

MlpSurrogate train_surrogate(const EncodedDataset& ds, const DeviceConfig& device,
                             const TrainConfig& cfg, uint64_t seed, TrainReport* report) {
    auto specs = default_head_specs();
    enforce_default_specs(specs);
    if (ds.rows.empty()) throw std::invalid_argument("train_surrogate: empty dataset");

    MlpSurrogate s;
    s.scaler = ds.scaler;
    s.device = device;
    s.seed = seed;
    s.heads.resize(3);

    std::array<TrainReport, 3> local_reports;
    // Heads are independent models over disjoint state; each trains
    // sequentially inside its own thread, so the result is thread-count
    // invariant.
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < 3; ++k) {
        const HeadSpec& spec = specs[k];
        std::vector<std::vector<double>> X;
        X.reserve(ds.rows.size());
        std::vector<double> y;
        y.reserve(ds.rows.size());
        for (const EncodedRow& r : ds.rows) {
            const std::vector<double>& f =
                k == 0 ? r.energy : k == 1 ? r.latency : r.endurance;
            X.push_back(f);
            y.push_back(r.targets_std[spec.target_idx]);
        }
        s.heads[k] = train_head(spec, X, y, ds.split.train, ds.split.validation, cfg, seed,
                                &local_reports[k]);
    }
    if (report)
        for (auto& r : local_reports)
            report->rows.insert(report->rows.end(), r.rows.begin(), r.rows.end());
    return s;
}

PredTriple MlpSurrogate::predict(const WriteParams& params, double temperature_c,
                                 double n_reads, double n_writes) const {
    auto idx = [&](int i, const char* what) {
        if (i < 0 || i > 2) throw std::invalid_argument(std::string(what) + ": index out of range [0,2]");
        return i;
    };
    DatasetRow row;
    row.set_voltage = device.set_voltage_grid[idx(params.set_voltage_idx, "set_voltage_idx")];
    row.set_pulse = device.set_pulse_grid[idx(params.set_pulse_idx, "set_pulse_idx")];
    row.reset_voltage = device.reset_voltage_grid[idx(params.reset_voltage_idx, "reset_voltage_idx")];
    row.reset_pulse = device.reset_pulse_grid[idx(params.reset_pulse_idx, "reset_pulse_idx")];
    row.temperature = temperature_c;
    if (n_reads < 0 || n_writes < 0 || n_reads + n_writes <= 0)
        throw std::invalid_argument("predict: counts must be non-negative and not both zero");
    row.n_reads = static_cast<uint64_t>(std::llround(n_reads));
    row.n_writes = static_cast<uint64_t>(std::llround(n_writes));
    auto out = predict_row(row);
    return {out[0], out[1], out[2]};
}

std::array<double, 3> MlpSurrogate::predict_row(const DatasetRow& row) const {
    if (heads.size() != 3) throw std::logic_error("surrogate has no trained heads");
    std::array<double, 3> out{};
    out[0] = scaler.invert(0, heads[0].forward(encode_energy_features(row, device)));
    out[1] = scaler.invert(1, heads[1].forward(encode_latency_features(row, device)));
    out[2] = scaler.invert(2, heads[2].forward(encode_endurance_features(row, device)));
    return out;
}

std::array<double, 3> evaluate_mape(const MlpSurrogate& s, const std::vector<DatasetRow>& rows,
                                    const std::vector<size_t>& idx) {
    std::array<std::vector<double>, 3> pred, actual;
    for (size_t i : idx) {
        const DatasetRow& r = rows.at(i);
        auto p = s.predict_row(r);
        double a[3] = {r.total_write_energy, r.total_write_latency, r.endurance};
        for (int k = 0; k < 3; ++k) {
            pred[k].push_back(p[k]);
            actual[k].push_back(a[k]);
        }
    }
    return {mape(pred[0], actual[0]), mape(pred[1], actual[1]), mape(pred[2], actual[2])};
}

void write_train_report_csv(const TrainReport& report, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    os << "epoch,head,train_loss,val_loss,lr\n";
    for (const EpochRow& r : report.rows) {
        os << r.epoch << ',' << r.head << ',' << fmt_double(r.train_loss) << ','
           << fmt_double(r.val_loss) << ',' << fmt_double(r.lr) << '\n';
    }
}

void save_surrogate(const MlpSurrogate& s, const std::string& path) {
    nlohmann::json j;
    j["seed"] = s.seed;
    j["scaler"] = {{"log_space", s.scaler.log_space},
                   {"mean", s.scaler.mean},
                   {"stddev", s.scaler.stddev}};
    j["device"] = device_config_to_json(s.device);
    auto& heads = j["heads"] = nlohmann::json::array();
    for (const MlpHead& h : s.heads) {
        nlohmann::json hj;
        const HeadSpec& sp = h.spec();
        hj["name"] = sp.name;
        hj["input_dim"] = sp.input_dim;
        hj["hidden"] = sp.hidden;
        hj["l1"] = sp.l1;
        hj["l2"] = sp.l2;
        hj["optimizer"] = sp.optimizer == OptimizerKind::NADAM ? "nadam" : "adam";
        hj["batch_size"] = sp.batch_size;
        hj["target_idx"] = sp.target_idx;
        auto& layers = hj["layers"] = nlohmann::json::array();
        for (const DenseLayer& l : h.layers())
            layers.push_back({{"in", l.in}, {"out", l.out}, {"w", l.w}, {"b", l.b}});
        heads.push_back(std::move(hj));
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for write: " + path);
    os << j.dump() << '\n';
}

MlpSurrogate load_surrogate(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open surrogate checkpoint: " + path);
    nlohmann::json j = nlohmann::json::parse(is);
    MlpSurrogate s;
    s.seed = j.at("seed").get<uint64_t>();
    for (int k = 0; k < 3; ++k) {
        s.scaler.log_space[k] = j.at("scaler").at("log_space")[k].get<bool>();
        s.scaler.mean[k] = j.at("scaler").at("mean")[k].get<double>();
        s.scaler.stddev[k] = j.at("scaler").at("stddev")[k].get<double>();
    }
    s.device = device_config_from_json(j.at("device"), "device");
    for (const auto& hj : j.at("heads")) {
        HeadSpec sp;
        sp.name = hj.at("name").get<std::string>();
        sp.input_dim = hj.at("input_dim").get<int>();
        sp.hidden = hj.at("hidden").get<std::vector<int>>();
        sp.l1 = hj.at("l1").get<double>();
        sp.l2 = hj.at("l2").get<double>();
        sp.optimizer = hj.at("optimizer").get<std::string>() == "nadam" ? OptimizerKind::NADAM
                                                                        : OptimizerKind::ADAM;
        sp.batch_size = hj.at("batch_size").get<int>();
        sp.target_idx = hj.at("target_idx").get<int>();
        MlpHead h(sp, 0);
        auto& layers = h.layers();
        const auto& lj = hj.at("layers");
        if (lj.size() != layers.size())
            throw std::runtime_error("surrogate checkpoint: layer count mismatch for " + sp.name);
        for (size_t li = 0; li < layers.size(); ++li) {
            DenseLayer& l = layers[li];
            if (lj[li].at("in").get<int>() != l.in || lj[li].at("out").get<int>() != l.out)
                throw std::runtime_error("surrogate checkpoint: layer shape mismatch for " + sp.name);
            l.w = lj[li].at("w").get<std::vector<double>>();
            l.b = lj[li].at("b").get<std::vector<double>>();
            if (l.w.size() != static_cast<size_t>(l.in) * l.out || l.b.size() != static_cast<size_t>(l.out))
                throw std::runtime_error("surrogate checkpoint: weight size mismatch for " + sp.name);
        }
        s.heads.push_back(std::move(h));
    }
    if (s.heads.size() != 3) throw std::runtime_error("surrogate checkpoint: expected 3 heads");
    return s;
}

}  // namespace smartwrite

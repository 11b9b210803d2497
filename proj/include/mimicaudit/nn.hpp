#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "mimicaudit/dataset.hpp"
#include "mimicaudit/errors.hpp"
#include "mimicaudit/file_io.hpp"
#include "mimicaudit/json_io.hpp"
#include "mimicaudit/rng.hpp"

namespace mimicaudit {

inline constexpr int kModelSchemaVersion = 1;
inline const std::vector<std::size_t> kDefaultLayerDims = {26, 256, 128, 64, 2};
inline constexpr double kDefaultDropoutRate = 0.5;

enum class RunMode { kTrain, kInfer };

struct TrainConfig {
    int epochs = 140;
    int batch_size = 128;
    double learning_rate = 0.0003;
    double validation_fraction = 0.2;
    std::uint64_t seed = 0;
};

struct DenseLayer {
    std::size_t in = 0, out = 0;
    std::vector<double> w;  // row-major: w[o * in + i]
    std::vector<double> b;  // one per output unit
};

struct MlpModel {
    std::vector<std::size_t> layer_dims;
    std::vector<DenseLayer> layers;
    double dropout_rate = kDefaultDropoutRate;
    Scaler scaler;
    TrainConfig train_config;
    std::uint64_t seed = 0;
    int schema_version = kModelSchemaVersion;
};

// ------------------------------------------------------------ activations ---

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

inline double sigmoid(double x) {
    // Split on sign so exp() never overflows.
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

struct SoftmaxResult {
    double loss = 0.0;
    std::array<double, 2> probs{};
};

// Two-class softmax + cross-entropy against an integer label, with the usual
// max subtraction so large logits stay finite.
inline SoftmaxResult softmax_xent(const std::array<double, 2>& logits, int label) {
    if (label != 0 && label != 1) throw ParamError("softmax_xent: label must be 0 or 1");
    const double m = std::max(logits[0], logits[1]);
    const double e0 = std::exp(logits[0] - m), e1 = std::exp(logits[1] - m);
    const double sum = e0 + e1;
    SoftmaxResult r;
    r.probs = {e0 / sum, e1 / sum};
    r.loss = std::log(sum) - (logits[static_cast<std::size_t>(label)] - m);
    return r;
}

// Inverted dropout: in training, each unit is zeroed with probability p and
// survivors are scaled by 1/(1-p), so the expected activation is unchanged and
// inference is a plain pass-through.
inline std::vector<double> dropout(std::span<const double> x, double p, RunMode mode, Rng* rng) {
    if (!(p >= 0.0) || p >= 1.0) throw ParamError("dropout: p must be in [0, 1)");
    std::vector<double> out(x.begin(), x.end());
    if (mode == RunMode::kInfer || p == 0.0) return out;
    if (rng == nullptr) throw ParamError("dropout: training mode needs an rng");
    const double scale = 1.0 / (1.0 - p);
    for (double& v : out) v = rng->next_double() < p ? 0.0 : v * scale;
    return out;
}

// ------------------------------------------------------------------ model ---

// He-normal initialization: weights ~ N(0, 2 / fan_in), biases zero. Draws
// happen in row-major layer order so a seed pins every parameter.
inline MlpModel make_model(const std::vector<std::size_t>& layer_dims, double dropout_rate,
                           Rng& rng) {
    if (layer_dims.size() < 2) throw ParamError("model: need at least input and output dims");
    for (const std::size_t d : layer_dims)
        if (d == 0) throw ParamError("model: zero-width layer");
    if (!(dropout_rate >= 0.0) || dropout_rate >= 1.0)
        throw ParamError("model: dropout rate must be in [0, 1)");

    MlpModel m;
    m.layer_dims = layer_dims;
    m.dropout_rate = dropout_rate;
    m.layers.resize(layer_dims.size() - 1);
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        DenseLayer& layer = m.layers[l];
        layer.in = layer_dims[l];
        layer.out = layer_dims[l + 1];
        layer.w.resize(layer.in * layer.out);
        layer.b.assign(layer.out, 0.0);
        const double stddev = std::sqrt(2.0 / static_cast<double>(layer.in));
        for (double& w : layer.w) w = stddev * rng.next_normal();
    }
    return m;
}

inline MlpModel make_model(const std::vector<std::size_t>& layer_dims, double dropout_rate,
                           std::uint64_t seed) {
    Rng rng(seed);
    MlpModel m = make_model(layer_dims, dropout_rate, rng);
    m.seed = seed;
    return m;
}

namespace detail {

// Per-sample forward state kept for backprop.
struct ForwardCache {
    std::vector<std::vector<double>> inputs;  // input to dense layer l
    std::vector<std::vector<double>> preact;  // z of dense layer l
    std::vector<std::vector<double>> mask;    // dropout scale after hidden layer l (0 or 1/(1-p))
};

// Runs the net on an already-standardized input. Hidden layers are
// relu -> dropout; the final layer emits raw logits. In training mode the rng
// is consumed one uniform per hidden unit, in layer-then-unit order.
inline std::array<double, 2> forward_impl(const MlpModel& model, std::span<const double> x,
                                          RunMode mode, Rng* rng, ForwardCache* cache) {
    if (model.layers.empty()) throw ParamError("forward: uninitialized model");
    if (x.size() != model.layers.front().in)
        throw ParamError("forward: input has " + std::to_string(x.size()) +
                         " features, model expects " + std::to_string(model.layers.front().in));
    if (mode == RunMode::kTrain && model.dropout_rate > 0.0 && rng == nullptr)
        throw ParamError("forward: training mode needs an rng");
    if (model.layers.back().out != 2) throw ParamError("forward: model head must have 2 units");

    if (cache) {
        cache->inputs.assign(model.layers.size(), {});
        cache->preact.assign(model.layers.size(), {});
        cache->mask.assign(model.layers.size() - 1, {});
    }

    std::vector<double> a(x.begin(), x.end());
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const DenseLayer& layer = model.layers[l];
        if (a.size() != layer.in) throw ParamError("forward: layer dimension mismatch");
        if (cache) cache->inputs[l] = a;

        std::vector<double> z(layer.out);
        for (std::size_t o = 0; o < layer.out; ++o) {
            double acc = layer.b[o];
            const double* row = layer.w.data() + o * layer.in;
            for (std::size_t i = 0; i < layer.in; ++i) acc += row[i] * a[i];
            z[o] = acc;
        }
        if (cache) cache->preact[l] = z;

        if (l + 1 < model.layers.size()) {
            for (double& v : z) v = relu(v);
            if (mode == RunMode::kTrain && model.dropout_rate > 0.0) {
                const double scale = 1.0 / (1.0 - model.dropout_rate);
                std::vector<double> mask(layer.out);
                for (std::size_t o = 0; o < layer.out; ++o) {
                    mask[o] = rng->next_double() < model.dropout_rate ? 0.0 : scale;
                    z[o] *= mask[o];
                }
                if (cache) cache->mask[l] = std::move(mask);
            } else if (cache) {
                cache->mask[l].assign(layer.out, 1.0);
            }
        }
        a = std::move(z);
    }
    return {a[0], a[1]};
}

}  // namespace detail

inline std::array<double, 2> forward(const MlpModel& model, std::span<const double> x,
                                     RunMode mode = RunMode::kInfer, Rng* rng = nullptr) {
    return detail::forward_impl(model, x, mode, rng, nullptr);
}

// -------------------------------------------------------------- gradients ---

struct Gradients {
    std::vector<std::vector<double>> w, b;  // parallel to model.layers

    static Gradients zeros_like(const MlpModel& m) {
        Gradients g;
        g.w.resize(m.layers.size());
        g.b.resize(m.layers.size());
        for (std::size_t l = 0; l < m.layers.size(); ++l) {
            g.w[l].assign(m.layers[l].w.size(), 0.0);
            g.b[l].assign(m.layers[l].b.size(), 0.0);
        }
        return g;
    }

    void reset() {
        for (auto& v : w) std::fill(v.begin(), v.end(), 0.0);
        for (auto& v : b) std::fill(v.begin(), v.end(), 0.0);
    }
};

struct BatchResult {
    double mean_loss = 0.0;
    std::size_t correct = 0;
};

// Mean cross-entropy gradient over a batch of standardized rows. Training-mode
// forwards (fresh dropout masks per sample) feed the backward pass; the
// returned loss/accuracy come from those same passes.
inline BatchResult backward(const MlpModel& model, Gradients& grads,
                            const std::vector<std::span<const double>>& batch,
                            std::span<const int> labels, RunMode mode = RunMode::kTrain,
                            Rng* rng = nullptr) {
    if (batch.size() != labels.size()) throw ParamError("backward: batch/label size mismatch");
    if (batch.empty()) throw EmptyInputError("backward: empty batch");
    grads.reset();

    BatchResult result;
    detail::ForwardCache cache;
    const std::size_t n_layers = model.layers.size();
    std::vector<double> delta, prev_delta;
    for (std::size_t s = 0; s < batch.size(); ++s) {
        const auto logits = detail::forward_impl(model, batch[s], mode, rng, &cache);
        const auto sm = softmax_xent(logits, labels[s]);
        result.mean_loss += sm.loss;
        const int predicted = sm.probs[1] > sm.probs[0] ? 1 : 0;
        if (predicted == labels[s]) ++result.correct;

        delta.assign(sm.probs.begin(), sm.probs.end());
        delta[static_cast<std::size_t>(labels[s])] -= 1.0;

        for (std::size_t l = n_layers; l-- > 0;) {
            const DenseLayer& layer = model.layers[l];
            const std::vector<double>& input = cache.inputs[l];
            for (std::size_t o = 0; o < layer.out; ++o) {
                const double d = delta[o];
                if (d == 0.0) continue;
                double* wrow = grads.w[l].data() + o * layer.in;
                for (std::size_t i = 0; i < layer.in; ++i) wrow[i] += d * input[i];
                grads.b[l][o] += d;
            }
            if (l == 0) break;
            prev_delta.assign(layer.in, 0.0);
            for (std::size_t o = 0; o < layer.out; ++o) {
                const double d = delta[o];
                if (d == 0.0) continue;
                const double* row = layer.w.data() + o * layer.in;
                for (std::size_t i = 0; i < layer.in; ++i) prev_delta[i] += row[i] * d;
            }
            // back through dropout, then relu (slope 0 at z <= 0)
            for (std::size_t i = 0; i < layer.in; ++i) {
                prev_delta[i] *= cache.mask[l - 1][i];
                if (cache.preact[l - 1][i] <= 0.0) prev_delta[i] = 0.0;
            }
            delta = prev_delta;
        }
    }

    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (auto& v : grads.w)
        for (double& g : v) g *= inv_n;
    for (auto& v : grads.b)
        for (double& g : v) g *= inv_n;
    result.mean_loss *= inv_n;
    return result;
}

// ------------------------------------------------------------------- adam ---

struct AdamState {
    double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
    long long step = 0;  // shared across all parameters
    std::vector<std::vector<double>> mw, vw, mb, vb;

    static AdamState zeros_like(const MlpModel& m) {
        AdamState s;
        s.mw.resize(m.layers.size());
        s.vw.resize(m.layers.size());
        s.mb.resize(m.layers.size());
        s.vb.resize(m.layers.size());
        for (std::size_t l = 0; l < m.layers.size(); ++l) {
            s.mw[l].assign(m.layers[l].w.size(), 0.0);
            s.vw[l].assign(m.layers[l].w.size(), 0.0);
            s.mb[l].assign(m.layers[l].b.size(), 0.0);
            s.vb[l].assign(m.layers[l].b.size(), 0.0);
        }
        return s;
    }
};

namespace detail {

inline void adam_update(std::span<double> param, std::span<const double> grad,
                        std::span<double> m, std::span<double> v, const AdamState& s, double lr) {
    const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
    const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
    for (std::size_t i = 0; i < param.size(); ++i) {
        m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * grad[i];
        v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        param[i] -= lr * mhat / (std::sqrt(vhat) + s.epsilon);
    }
}

}  // namespace detail

inline void adam_step(MlpModel& model, const Gradients& grads, AdamState& state,
                      double learning_rate) {
    if (!(learning_rate > 0.0)) throw ParamError("adam: learning rate must be positive");
    if (grads.w.size() != model.layers.size()) throw ParamError("adam: gradient shape mismatch");
    ++state.step;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        detail::adam_update(model.layers[l].w, grads.w[l], state.mw[l], state.vw[l], state,
                            learning_rate);
        detail::adam_update(model.layers[l].b, grads.b[l], state.mb[l], state.vb[l], state,
                            learning_rate);
    }
}

// --------------------------------------------------------------- training ---

struct TrainHistory {
    std::vector<double> train_loss, val_loss, train_acc, val_acc;
};

struct TrainResult {
    MlpModel model;
    TrainHistory history;
};

// Full training run. One seed drives, in order: the validation carve-out
// shuffle, weight init, then per-epoch shuffles and dropout masks — so the
// whole run is reproducible from (data, config).
inline TrainResult train(const std::vector<FeatureVector>& features,
                         const std::vector<Label>& labels, const TrainConfig& cfg) {
    if (features.size() != labels.size()) throw ParamError("train: feature/label size mismatch");
    if (cfg.epochs < 1) throw ParamError("train: epochs must be >= 1");
    if (cfg.batch_size < 1) throw ParamError("train: batch size must be >= 1");
    if (!(cfg.learning_rate > 0.0)) throw ParamError("train: learning rate must be positive");
    if (!(cfg.validation_fraction > 0.0) || !(cfg.validation_fraction < 1.0))
        throw ParamError("train: validation fraction must be in (0, 1)");
    const std::size_t n = features.size();
    if (n < 2) throw DataError("train: need at least two samples");
    {
        std::size_t pos = 0;
        for (const Label l : labels)
            if (l == Label::kFaked) ++pos;
        if (pos == 0 || pos == n) throw DataError("train: both classes must be present");
    }

    Rng rng(cfg.seed);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    const auto n_val = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(cfg.validation_fraction * static_cast<double>(n))),
        1, n - 1);
    std::vector<std::size_t> train_idx(order.begin(), order.end() - static_cast<long>(n_val));
    const std::vector<std::size_t> val_idx(order.end() - static_cast<long>(n_val), order.end());

    const Scaler scaler = fit_scaler(features);
    std::vector<std::array<double, kFeatureCount>> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = apply_scaler(scaler, features[i]);

    MlpModel model = make_model(kDefaultLayerDims, kDefaultDropoutRate, rng);
    model.seed = cfg.seed;
    model.train_config = cfg;
    model.scaler = scaler;

    Gradients grads = Gradients::zeros_like(model);
    AdamState adam = AdamState::zeros_like(model);
    TrainHistory history;

    const auto batch_size = static_cast<std::size_t>(cfg.batch_size);
    std::vector<std::span<const double>> batch;
    std::vector<int> batch_labels;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(train_idx);
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < train_idx.size(); start += batch_size) {
            const std::size_t end = std::min(start + batch_size, train_idx.size());
            batch.clear();
            batch_labels.clear();
            for (std::size_t i = start; i < end; ++i) {
                batch.emplace_back(x[train_idx[i]]);
                batch_labels.push_back(static_cast<int>(labels[train_idx[i]]));
            }
            const BatchResult r =
                backward(model, grads, batch, batch_labels, RunMode::kTrain, &rng);
            loss_sum += r.mean_loss * static_cast<double>(batch.size());
            correct += r.correct;
            adam_step(model, grads, adam, cfg.learning_rate);
        }

        double val_loss = 0.0;
        std::size_t val_correct = 0;
        for (const std::size_t i : val_idx) {
            const auto logits = forward(model, x[i], RunMode::kInfer);
            const auto sm = softmax_xent(logits, static_cast<int>(labels[i]));
            val_loss += sm.loss;
            const int predicted = sm.probs[1] > sm.probs[0] ? 1 : 0;
            if (predicted == static_cast<int>(labels[i])) ++val_correct;
        }

        history.train_loss.push_back(loss_sum / static_cast<double>(train_idx.size()));
        history.train_acc.push_back(static_cast<double>(correct) /
                                    static_cast<double>(train_idx.size()));
        history.val_loss.push_back(val_loss / static_cast<double>(val_idx.size()));
        history.val_acc.push_back(static_cast<double>(val_correct) /
                                  static_cast<double>(val_idx.size()));
    }

    return {std::move(model), std::move(history)};
}

// -------------------------------------------------------------- inference ---

struct Prediction {
    Label label = Label::kReal;
    double confidence = 0.0;  // probability of the predicted class
};

// Class probabilities [P(real), P(faked)] for a raw (unstandardized) feature
// vector; the model applies its own scaler.
inline std::array<double, 2> predict_proba(const MlpModel& model, const FeatureVector& fv) {
    const auto x = apply_scaler(model.scaler, fv);
    const auto logits = forward(model, x, RunMode::kInfer);
    return softmax_xent(logits, 0).probs;
}

inline Prediction predict(const MlpModel& model, const FeatureVector& fv) {
    const auto probs = predict_proba(model, fv);
    Prediction p;
    p.label = probs[1] > probs[0] ? Label::kFaked : Label::kReal;  // tie goes to real
    p.confidence = std::max(probs[0], probs[1]);
    return p;
}

// ---------------------------------------------------------- serialization ---

inline std::string model_to_json(const MlpModel& m) {
    JsonWriter w;
    w.begin_object();
    w.key("schema_version").value(m.schema_version);
    w.key("layer_dims").begin_array();
    for (const std::size_t d : m.layer_dims) w.value(d);
    w.end_array();
    w.key("dropout_rate").value(m.dropout_rate);
    w.key("scaler").begin_object();
    w.key("mean").begin_array();
    for (const double v : m.scaler.mean) w.value(v);
    w.end_array();
    w.key("std").begin_array();
    for (const double v : m.scaler.std_dev) w.value(v);
    w.end_array();
    w.end_object();
    w.key("layers").begin_array();
    for (const DenseLayer& layer : m.layers) {
        w.begin_object();
        w.key("in").value(layer.in);
        w.key("out").value(layer.out);
        w.key("weights").begin_array();
        for (const double v : layer.w) w.value(v);
        w.end_array();
        w.key("bias").begin_array();
        for (const double v : layer.b) w.value(v);
        w.end_array();
        w.end_object();
    }
    w.end_array();
    w.key("train_config").begin_object();
    w.key("epochs").value(m.train_config.epochs);
    w.key("batch_size").value(m.train_config.batch_size);
    w.key("learning_rate").value(m.train_config.learning_rate);
    w.key("validation_fraction").value(m.train_config.validation_fraction);
    w.end_object();
    w.key("seed").value(static_cast<long long>(m.seed));
    w.end_object();
    std::string out = w.take();
    out += '\n';
    return out;
}

inline void save_model(const MlpModel& m, const std::filesystem::path& path) {
    atomic_write_file(path, model_to_json(m));
}

inline MlpModel load_model(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("model file " + path.string() + ": " + e.what());
    }
    try {
        const int version = j.at("schema_version").get<int>();
        if (version != kModelSchemaVersion)
            throw SchemaError("model file " + path.string() + ": schema version " +
                              std::to_string(version) + ", this build reads version " +
                              std::to_string(kModelSchemaVersion));

        MlpModel m;
        m.schema_version = version;
        m.layer_dims = j.at("layer_dims").get<std::vector<std::size_t>>();
        m.dropout_rate = j.at("dropout_rate").get<double>();
        const auto mean = j.at("scaler").at("mean").get<std::vector<double>>();
        const auto std_dev = j.at("scaler").at("std").get<std::vector<double>>();
        if (mean.size() != kFeatureCount || std_dev.size() != kFeatureCount)
            throw FormatError("model file: scaler must have " + std::to_string(kFeatureCount) +
                              " entries");
        std::copy(mean.begin(), mean.end(), m.scaler.mean.begin());
        std::copy(std_dev.begin(), std_dev.end(), m.scaler.std_dev.begin());
        for (const auto& jl : j.at("layers")) {
            DenseLayer layer;
            layer.in = jl.at("in").get<std::size_t>();
            layer.out = jl.at("out").get<std::size_t>();
            layer.w = jl.at("weights").get<std::vector<double>>();
            layer.b = jl.at("bias").get<std::vector<double>>();
            if (layer.w.size() != layer.in * layer.out || layer.b.size() != layer.out)
                throw FormatError("model file: layer parameter count mismatch");
            m.layers.push_back(std::move(layer));
        }
        if (m.layer_dims.size() != m.layers.size() + 1)
            throw FormatError("model file: layer_dims inconsistent with layers");
        for (std::size_t l = 0; l < m.layers.size(); ++l)
            if (m.layers[l].in != m.layer_dims[l] || m.layers[l].out != m.layer_dims[l + 1])
                throw FormatError("model file: layer_dims inconsistent with layers");
        const auto& tc = j.at("train_config");
        m.train_config.epochs = tc.at("epochs").get<int>();
        m.train_config.batch_size = tc.at("batch_size").get<int>();
        m.train_config.learning_rate = tc.at("learning_rate").get<double>();
        m.train_config.validation_fraction = tc.at("validation_fraction").get<double>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.train_config.seed = m.seed;
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("model file " + path.string() + ": " + e.what());
    }
}

inline std::string history_to_csv(const TrainHistory& h) {
    std::string out = "epoch,train_loss,val_loss,train_acc,val_acc\n";
    for (std::size_t e = 0; e < h.train_loss.size(); ++e) {
        out += std::to_string(e + 1);
        out += ',';
        out += format_g17(h.train_loss[e]);
        out += ',';
        out += format_g17(h.val_loss[e]);
        out += ',';
        out += format_g17(h.train_acc[e]);
        out += ',';
        out += format_g17(h.val_acc[e]);
        out += '\n';
    }
    return out;
}

inline void write_history_csv(const TrainHistory& h, const std::filesystem::path& path) {
    atomic_write_file(path, history_to_csv(h));
}

}  // namespace mimicaudit

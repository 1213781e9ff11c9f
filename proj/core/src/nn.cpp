// Copyright 2026 The quanvnet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "quanv/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <set>
#include <string>

#include "quanv/bytes.hpp"
#include "quanv/crc32.hpp"
#include "quanv/error.hpp"
#include "quanv/parallel.hpp"
#include "quanv/split.hpp"

namespace quanv {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) {
        throw SizeError("softmax needs at least one logit");
    }
    const double shift = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - shift);
        sum += out[i];
    }
    for (double& v : out) {
        v /= sum;
    }
    return out;
}

double cross_entropy(std::span<const double> probs, int true_class) {
    if (true_class < 0 || static_cast<std::size_t>(true_class) >= probs.size()) {
        throw ArgumentError("true class " + std::to_string(true_class) + " out of range");
    }
    return -std::log(probs[true_class] + 1e-12);
}

void ModelShape::validate() const {
    if (input_channels < 1 || input_h < 1 || input_w < 1 || conv1_filters < 1 ||
        conv2_filters < 1 || conv1_kernel < 1 || conv2_kernel < 1 || dense1_units < 1 ||
        num_classes < 2) {
        throw ShapeError("model shape fields must be positive (and num_classes >= 2)");
    }
    if (conv1_out_h() < 1 || conv1_out_w() < 1) {
        throw ShapeError("input " + std::to_string(input_h) + "x" + std::to_string(input_w) +
                         " too small for the first convolution");
    }
    if (pool1_h() < 1 || pool1_w() < 1) {
        throw ShapeError("first pooling stage would be empty");
    }
    if (conv2_out_h() < 1 || conv2_out_w() < 1) {
        throw ShapeError("feature map too small for the second convolution");
    }
    if (pool2_h() < 1 || pool2_w() < 1) {
        throw ShapeError("second pooling stage would be empty");
    }
}

std::vector<std::vector<double>*> ModelParams::param_arrays() {
    return {&conv1.weights, &conv1.bias, &conv2.weights, &conv2.bias,
            &dense1.weights, &dense1.bias, &dense2.weights, &dense2.bias};
}

std::vector<const std::vector<double>*> ModelParams::param_arrays() const {
    return {&conv1.weights, &conv1.bias, &conv2.weights, &conv2.bias,
            &dense1.weights, &dense1.bias, &dense2.weights, &dense2.bias};
}

namespace {

ModelParams make_shaped(const ModelShape& shape) {
    shape.validate();
    ModelParams p;
    p.shape = shape;
    p.conv1.out_ch = shape.conv1_filters;
    p.conv1.in_ch = shape.input_channels;
    p.conv1.kernel = shape.conv1_kernel;
    p.conv1.weights.assign(static_cast<std::size_t>(shape.conv1_filters) *
                               shape.input_channels * shape.conv1_kernel * shape.conv1_kernel,
                           0.0);
    p.conv1.bias.assign(shape.conv1_filters, 0.0);

    p.conv2.out_ch = shape.conv2_filters;
    p.conv2.in_ch = shape.conv1_filters;
    p.conv2.kernel = shape.conv2_kernel;
    p.conv2.weights.assign(static_cast<std::size_t>(shape.conv2_filters) * shape.conv1_filters *
                               shape.conv2_kernel * shape.conv2_kernel,
                           0.0);
    p.conv2.bias.assign(shape.conv2_filters, 0.0);

    p.dense1.out_dim = shape.dense1_units;
    p.dense1.in_dim = shape.flatten_size();
    p.dense1.weights.assign(static_cast<std::size_t>(shape.dense1_units) * shape.flatten_size(),
                            0.0);
    p.dense1.bias.assign(shape.dense1_units, 0.0);

    p.dense2.out_dim = shape.num_classes;
    p.dense2.in_dim = shape.dense1_units;
    p.dense2.weights.assign(static_cast<std::size_t>(shape.num_classes) * shape.dense1_units,
                            0.0);
    p.dense2.bias.assign(shape.num_classes, 0.0);

    p.label_codes.resize(shape.num_classes);
    for (int c = 0; c < shape.num_classes; ++c) {
        p.label_codes[c] = static_cast<std::uint32_t>(c + 1);
    }
    return p;
}

void fill_glorot(std::vector<double>& weights, int fan_in, int fan_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / (static_cast<double>(fan_in) + fan_out));
    for (double& w : weights) {
        w = rng.uniform(-bound, bound);
    }
}

}  // namespace

ModelParams zeros_like(const ModelParams& params) {
    ModelParams z = make_shaped(params.shape);
    z.label_codes = params.label_codes;
    return z;
}

ModelParams weight_init(const ModelShape& shape, std::uint64_t seed) {
    ModelParams p = make_shaped(shape);
    Rng rng(seed);
    fill_glorot(p.conv1.weights, shape.input_channels * shape.conv1_kernel * shape.conv1_kernel,
                shape.conv1_filters * shape.conv1_kernel * shape.conv1_kernel, rng);
    fill_glorot(p.conv2.weights, shape.conv1_filters * shape.conv2_kernel * shape.conv2_kernel,
                shape.conv2_filters * shape.conv2_kernel * shape.conv2_kernel, rng);
    fill_glorot(p.dense1.weights, p.dense1.in_dim, p.dense1.out_dim, rng);
    fill_glorot(p.dense2.weights, p.dense2.in_dim, p.dense2.out_dim, rng);
    return p;
}

std::vector<double> make_dropout_mask(Rng& rng, int size, double rate) {
    if (!(rate >= 0.0 && rate < 1.0)) {
        throw ArgumentError("dropout rate must lie in [0, 1)");
    }
    std::vector<double> mask(size, 1.0);
    if (rate == 0.0) {
        return mask;
    }
    const double keep_scale = 1.0 / (1.0 - rate);
    for (double& m : mask) {
        m = rng.uniform() < rate ? 0.0 : keep_scale;
    }
    return mask;
}

namespace {

// conv -> ReLU -> maxpool(2x2/2), recording pre-activations and argmax
// positions (flat indices into the conv output) for the backward pass.
void conv_relu_pool(const ConvParams& conv, const Tensor3& in, Tensor3& pre, Tensor3& pooled,
                    std::vector<int>& argmax) {
    const int out_h = in.height - conv.kernel + 1;
    const int out_w = in.width - conv.kernel + 1;
    pre = Tensor3(conv.out_ch, out_h, out_w);
    for (int f = 0; f < conv.out_ch; ++f) {
        for (int i = 0; i < out_h; ++i) {
            for (int j = 0; j < out_w; ++j) {
                double acc = conv.bias[f];
                for (int c = 0; c < conv.in_ch; ++c) {
                    for (int m = 0; m < conv.kernel; ++m) {
                        for (int n = 0; n < conv.kernel; ++n) {
                            acc += in.at(c, i + m, j + n) * conv.w(f, c, m, n);
                        }
                    }
                }
                pre.at(f, i, j) = acc;
            }
        }
    }

    const int p_h = out_h / 2;
    const int p_w = out_w / 2;
    pooled = Tensor3(conv.out_ch, p_h, p_w);
    argmax.assign(pooled.size(), 0);
    std::size_t k = 0;
    for (int f = 0; f < conv.out_ch; ++f) {
        for (int i = 0; i < p_h; ++i) {
            for (int j = 0; j < p_w; ++j, ++k) {
                double best = -1.0;  // ReLU output is never negative
                int best_idx = -1;
                for (int m = 0; m < 2; ++m) {
                    for (int n = 0; n < 2; ++n) {
                        const int r = 2 * i + m;
                        const int c = 2 * j + n;
                        const double v = relu(pre.at(f, r, c));
                        const int flat = (f * out_h + r) * out_w + c;
                        if (v > best) {
                            best = v;
                            best_idx = flat;
                        }
                    }
                }
                pooled.values[k] = best;
                argmax[k] = best_idx;
            }
        }
    }
}

}  // namespace

Activations forward(const ModelParams& params, const Tensor3& input,
                    const std::vector<double>* dropout_mask) {
    const ModelShape& shape = params.shape;
    if (input.channels != shape.input_channels || input.height != shape.input_h ||
        input.width != shape.input_w) {
        throw ShapeError("input " + std::to_string(input.channels) + "x" +
                         std::to_string(input.height) + "x" + std::to_string(input.width) +
                         " does not match model input " + std::to_string(shape.input_channels) +
                         "x" + std::to_string(shape.input_h) + "x" + std::to_string(shape.input_w));
    }
    if (dropout_mask != nullptr &&
        dropout_mask->size() != static_cast<std::size_t>(shape.dense1_units)) {
        throw ShapeError("dropout mask size does not match the dense layer");
    }

    Activations acts;
    acts.input = input;
    conv_relu_pool(params.conv1, input, acts.conv1_pre, acts.pool1, acts.pool1_argmax);
    conv_relu_pool(params.conv2, acts.pool1, acts.conv2_pre, acts.pool2, acts.pool2_argmax);

    acts.flat = acts.pool2.values;
    acts.dense1_pre.resize(params.dense1.out_dim);
    acts.dense1_post.resize(params.dense1.out_dim);
    for (int u = 0; u < params.dense1.out_dim; ++u) {
        double acc = params.dense1.bias[u];
        for (int i = 0; i < params.dense1.in_dim; ++i) {
            acc += params.dense1.w(u, i) * acts.flat[i];
        }
        acts.dense1_pre[u] = acc;
        acts.dense1_post[u] = relu(acc);
    }

    if (dropout_mask != nullptr) {
        acts.dropout_mask = *dropout_mask;
        acts.dropped.resize(acts.dense1_post.size());
        for (std::size_t u = 0; u < acts.dropped.size(); ++u) {
            acts.dropped[u] = acts.dense1_post[u] * acts.dropout_mask[u];
        }
    } else {
        acts.dropped = acts.dense1_post;
    }

    acts.logits.resize(params.dense2.out_dim);
    for (int o = 0; o < params.dense2.out_dim; ++o) {
        double acc = params.dense2.bias[o];
        for (int i = 0; i < params.dense2.in_dim; ++i) {
            acc += params.dense2.w(o, i) * acts.dropped[i];
        }
        acts.logits[o] = acc;
    }
    acts.probs = softmax(acts.logits);
    return acts;
}

ModelParams backward(const ModelParams& params, const Activations& acts, int true_class) {
    const ModelShape& shape = params.shape;
    if (true_class < 0 || true_class >= shape.num_classes) {
        throw ArgumentError("true class out of range");
    }
    ModelParams grads = zeros_like(params);

    // softmax + cross-entropy: dL/dlogits = probs - onehot
    std::vector<double> dlogits = acts.probs;
    dlogits[true_class] -= 1.0;

    std::vector<double> ddropped(params.dense2.in_dim, 0.0);
    for (int o = 0; o < params.dense2.out_dim; ++o) {
        grads.dense2.bias[o] = dlogits[o];
        for (int i = 0; i < params.dense2.in_dim; ++i) {
            grads.dense2.w(o, i) = dlogits[o] * acts.dropped[i];
            ddropped[i] += params.dense2.w(o, i) * dlogits[o];
        }
    }

    std::vector<double> ddense1_pre(params.dense1.out_dim, 0.0);
    for (int u = 0; u < params.dense1.out_dim; ++u) {
        double g = ddropped[u];
        if (!acts.dropout_mask.empty()) {
            g *= acts.dropout_mask[u];
        }
        ddense1_pre[u] = acts.dense1_pre[u] > 0.0 ? g : 0.0;
    }

    std::vector<double> dflat(params.dense1.in_dim, 0.0);
    for (int u = 0; u < params.dense1.out_dim; ++u) {
        const double g = ddense1_pre[u];
        grads.dense1.bias[u] = g;
        if (g == 0.0) {
            continue;
        }
        for (int i = 0; i < params.dense1.in_dim; ++i) {
            grads.dense1.w(u, i) = g * acts.flat[i];
            dflat[i] += params.dense1.w(u, i) * g;
        }
    }

    // pool2 -> ReLU -> conv2
    Tensor3 dconv2_pre(shape.conv2_filters, shape.conv2_out_h(), shape.conv2_out_w());
    for (std::size_t k = 0; k < acts.pool2_argmax.size(); ++k) {
        const int idx = acts.pool2_argmax[k];
        if (acts.conv2_pre.values[idx] > 0.0) {
            dconv2_pre.values[idx] += dflat[k];
        }
    }

    Tensor3 dpool1(shape.conv1_filters, shape.pool1_h(), shape.pool1_w());
    for (int f = 0; f < params.conv2.out_ch; ++f) {
        for (int i = 0; i < dconv2_pre.height; ++i) {
            for (int j = 0; j < dconv2_pre.width; ++j) {
                const double g = dconv2_pre.at(f, i, j);
                if (g == 0.0) {
                    continue;
                }
                grads.conv2.bias[f] += g;
                for (int c = 0; c < params.conv2.in_ch; ++c) {
                    for (int m = 0; m < params.conv2.kernel; ++m) {
                        for (int n = 0; n < params.conv2.kernel; ++n) {
                            grads.conv2.w(f, c, m, n) += g * acts.pool1.at(c, i + m, j + n);
                            dpool1.at(c, i + m, j + n) += g * params.conv2.w(f, c, m, n);
                        }
                    }
                }
            }
        }
    }

    // pool1 -> ReLU -> conv1
    Tensor3 dconv1_pre(shape.conv1_filters, shape.conv1_out_h(), shape.conv1_out_w());
    for (std::size_t k = 0; k < acts.pool1_argmax.size(); ++k) {
        const int idx = acts.pool1_argmax[k];
        if (acts.conv1_pre.values[idx] > 0.0) {
            dconv1_pre.values[idx] += dpool1.values[k];
        }
    }

    for (int f = 0; f < params.conv1.out_ch; ++f) {
        for (int i = 0; i < dconv1_pre.height; ++i) {
            for (int j = 0; j < dconv1_pre.width; ++j) {
                const double g = dconv1_pre.at(f, i, j);
                if (g == 0.0) {
                    continue;
                }
                grads.conv1.bias[f] += g;
                for (int c = 0; c < params.conv1.in_ch; ++c) {
                    for (int m = 0; m < params.conv1.kernel; ++m) {
                        for (int n = 0; n < params.conv1.kernel; ++n) {
                            grads.conv1.w(f, c, m, n) += g * acts.input.at(c, i + m, j + n);
                        }
                    }
                }
            }
        }
    }

    return grads;
}

void TrainConfig::validate() const {
    if (epochs < 0) {
        throw ArgumentError("epochs must be >= 0");
    }
    if (batch_size < 1) {
        throw ArgumentError("batch_size must be >= 1");
    }
    if (!(learning_rate > 0.0)) {
        throw ArgumentError("learning_rate must be positive");
    }
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
        throw ArgumentError("dropout_rate must lie in [0, 1)");
    }
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
        throw ArgumentError("val_fraction must lie in (0, 1)");
    }
    if (num_classes < 0) {
        throw ArgumentError("num_classes must be >= 0 (0 = auto)");
    }
}

namespace {

Tensor3 map_to_tensor(const ImageTensor& map) {
    Tensor3 t(1, map.height, map.width);
    t.values = map.values;
    return t;
}

int argmax_lowest(std::span<const double> v) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i) {
        if (v[i] > v[best]) {
            best = i;
        }
    }
    return best;
}

struct AdamState {
    ModelParams m;
    ModelParams v;
    long long t = 0;
};

void optimizer_step(ModelParams& params, const ModelParams& grads, const TrainConfig& config,
                    AdamState& adam) {
    auto ps = params.param_arrays();
    auto gs = grads.param_arrays();
    if (config.optimizer == TrainConfig::Optimizer::Sgd) {
        for (std::size_t a = 0; a < ps.size(); ++a) {
            for (std::size_t k = 0; k < ps[a]->size(); ++k) {
                (*ps[a])[k] -= config.learning_rate * (*gs[a])[k];
            }
        }
        return;
    }

    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    ++adam.t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam.t));
    auto ms = adam.m.param_arrays();
    auto vs = adam.v.param_arrays();
    for (std::size_t a = 0; a < ps.size(); ++a) {
        for (std::size_t k = 0; k < ps[a]->size(); ++k) {
            const double g = (*gs[a])[k];
            double& m = (*ms[a])[k];
            double& v = (*vs[a])[k];
            m = beta1 * m + (1.0 - beta1) * g;
            v = beta2 * v + (1.0 - beta2) * g * g;
            (*ps[a])[k] -= config.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + eps);
        }
    }
}

void accumulate(ModelParams& total, const ModelParams& part) {
    auto ts = total.param_arrays();
    auto psrc = part.param_arrays();
    for (std::size_t a = 0; a < ts.size(); ++a) {
        for (std::size_t k = 0; k < ts[a]->size(); ++k) {
            (*ts[a])[k] += (*psrc[a])[k];
        }
    }
}

void scale(ModelParams& total, double factor) {
    for (auto* arr : total.param_arrays()) {
        for (double& v : *arr) {
            v *= factor;
        }
    }
}

struct IndexedEval {
    double loss = 0.0;
    int predicted = 0;
};

// Eval-mode pass over a set of samples; per-sample results land by index
// so reductions stay deterministic under any thread count.
std::vector<IndexedEval> eval_pass(const ModelParams& params, std::span<const Tensor3> inputs,
                                   std::span<const int> classes, std::size_t threads) {
    std::vector<IndexedEval> results(inputs.size());
    parallel_for(
        inputs.size(),
        [&](std::size_t i) {
            const Activations acts = forward(params, inputs[i], nullptr);
            results[i].loss = cross_entropy(acts.probs, classes[i]);
            results[i].predicted = argmax_lowest(acts.probs);
        },
        threads);
    return results;
}

}  // namespace

std::pair<ModelParams, Metrics> train(std::span<const LabeledMap> records,
                                      const TrainConfig& config) {
    config.validate();
    if (records.empty()) {
        throw ConfigError("cannot train on an empty record set");
    }

    // Map dataset label codes onto dense class indices (sorted code order).
    std::set<int> code_set;
    for (const LabeledMap& r : records) {
        code_set.insert(r.label);
    }
    if (code_set.size() < 2) {
        throw ConfigError("training needs at least 2 distinct classes, got " +
                          std::to_string(code_set.size()));
    }
    const int distinct = static_cast<int>(code_set.size());
    const int num_classes = config.num_classes == 0 ? distinct : config.num_classes;
    if (num_classes < distinct) {
        throw ConfigError("num_classes=" + std::to_string(num_classes) + " but data has " +
                          std::to_string(distinct) + " distinct labels");
    }
    std::map<int, int> code_to_class;
    std::vector<std::uint32_t> label_codes(num_classes, 0);
    int rank = 0;
    for (int code : code_set) {
        code_to_class[code] = rank;
        label_codes[rank] = static_cast<std::uint32_t>(code);
        ++rank;
    }

    const int h = records[0].map.height;
    const int w = records[0].map.width;
    std::vector<Tensor3> inputs;
    std::vector<int> classes;
    inputs.reserve(records.size());
    classes.reserve(records.size());
    for (const LabeledMap& r : records) {
        if (r.map.height != h || r.map.width != w) {
            throw ShapeError("all feature maps must share dimensions");
        }
        inputs.push_back(map_to_tensor(r.map));
        classes.push_back(code_to_class.at(r.label));
    }

    ModelShape shape;
    shape.input_h = h;
    shape.input_w = w;
    shape.num_classes = num_classes;
    shape.validate();

    const auto [train_idx, val_idx] =
        stratified_split_indices(classes, config.val_fraction, derive_seed(config.seed, 0));

    ModelParams params = weight_init(shape, derive_seed(config.seed, 1));
    params.label_codes = label_codes;

    Rng shuffle_rng(derive_seed(config.seed, 2));
    Rng dropout_rng(derive_seed(config.seed, 3));

    AdamState adam;
    if (config.optimizer == TrainConfig::Optimizer::Adam) {
        adam.m = zeros_like(params);
        adam.v = zeros_like(params);
    }

    Metrics metrics;
    metrics.train_samples = train_idx.size();
    metrics.val_samples = val_idx.size();

    std::vector<std::size_t> order = train_idx;
    const bool use_dropout = config.dropout_rate > 0.0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);

        double train_loss_sum = 0.0;
        std::size_t train_correct = 0;

        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t count =
                std::min<std::size_t>(config.batch_size, order.size() - start);

            // Masks are drawn serially, in batch order, before the
            // parallel section, so the dropout stream never depends on
            // scheduling.
            std::vector<std::vector<double>> masks(count);
            if (use_dropout) {
                for (std::size_t b = 0; b < count; ++b) {
                    masks[b] =
                        make_dropout_mask(dropout_rng, shape.dense1_units, config.dropout_rate);
                }
            }

            std::vector<ModelParams> sample_grads(count);
            std::vector<double> sample_loss(count, 0.0);
            std::vector<char> sample_correct(count, 0);
            parallel_for(
                count,
                [&](std::size_t b) {
                    const std::size_t rec = order[start + b];
                    const Activations acts =
                        forward(params, inputs[rec], use_dropout ? &masks[b] : nullptr);
                    sample_loss[b] = cross_entropy(acts.probs, classes[rec]);
                    sample_correct[b] = argmax_lowest(acts.probs) == classes[rec] ? 1 : 0;
                    sample_grads[b] = backward(params, acts, classes[rec]);
                },
                config.threads);

            ModelParams grad_total = zeros_like(params);
            for (std::size_t b = 0; b < count; ++b) {
                accumulate(grad_total, sample_grads[b]);
                train_loss_sum += sample_loss[b];
                train_correct += sample_correct[b];
            }
            scale(grad_total, 1.0 / static_cast<double>(count));
            optimizer_step(params, grad_total, config, adam);
        }

        EpochStats stats;
        stats.train_loss = train_loss_sum / static_cast<double>(order.size());
        stats.train_accuracy =
            static_cast<double>(train_correct) / static_cast<double>(order.size());

        std::vector<Tensor3> val_inputs;
        std::vector<int> val_classes;
        val_inputs.reserve(val_idx.size());
        val_classes.reserve(val_idx.size());
        for (std::size_t i : val_idx) {
            val_inputs.push_back(inputs[i]);
            val_classes.push_back(classes[i]);
        }
        const auto results = eval_pass(params, val_inputs, val_classes, config.threads);
        double val_loss_sum = 0.0;
        std::size_t val_correct = 0;
        for (std::size_t i = 0; i < results.size(); ++i) {
            val_loss_sum += results[i].loss;
            val_correct += results[i].predicted == val_classes[i] ? 1 : 0;
        }
        stats.val_loss = val_loss_sum / static_cast<double>(results.size());
        stats.val_accuracy = static_cast<double>(val_correct) / static_cast<double>(results.size());
        metrics.epochs.push_back(stats);
    }

    // Final validation confusion matrix (also covers the epochs == 0
    // evaluate-at-init case).
    std::vector<Tensor3> val_inputs;
    std::vector<int> val_classes;
    for (std::size_t i : val_idx) {
        val_inputs.push_back(inputs[i]);
        val_classes.push_back(classes[i]);
    }
    const auto results = eval_pass(params, val_inputs, val_classes, config.threads);
    metrics.confusion.assign(num_classes, std::vector<long long>(num_classes, 0));
    double val_loss_sum = 0.0;
    long long correct = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        metrics.confusion[val_classes[i]][results[i].predicted] += 1;
        val_loss_sum += results[i].loss;
        correct += results[i].predicted == val_classes[i] ? 1 : 0;
    }
    metrics.val_loss = val_loss_sum / static_cast<double>(results.size());
    metrics.val_accuracy = static_cast<double>(correct) / static_cast<double>(results.size());

    return {std::move(params), std::move(metrics)};
}

EvalResult evaluate(const ModelParams& params, std::span<const LabeledMap> records,
                    std::size_t threads) {
    if (records.empty()) {
        throw ArgumentError("cannot evaluate an empty record set");
    }
    std::map<std::uint32_t, int> code_to_class;
    for (std::size_t c = 0; c < params.label_codes.size(); ++c) {
        if (params.label_codes[c] != 0) {
            code_to_class[params.label_codes[c]] = static_cast<int>(c);
        }
    }

    std::vector<Tensor3> inputs;
    std::vector<int> classes;
    inputs.reserve(records.size());
    classes.reserve(records.size());
    for (const LabeledMap& r : records) {
        const auto it = code_to_class.find(static_cast<std::uint32_t>(r.label));
        if (it == code_to_class.end()) {
            throw ConfigError("label code " + std::to_string(r.label) +
                              " unknown to this model");
        }
        inputs.push_back(map_to_tensor(r.map));
        classes.push_back(it->second);
    }

    const auto results = eval_pass(params, inputs, classes, threads);

    EvalResult out;
    const int C = params.shape.num_classes;
    out.confusion.assign(C, std::vector<long long>(C, 0));
    out.total = records.size();
    double loss_sum = 0.0;
    long long correct = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        out.confusion[classes[i]][results[i].predicted] += 1;
        loss_sum += results[i].loss;
        correct += results[i].predicted == classes[i] ? 1 : 0;
    }
    out.mean_loss = loss_sum / static_cast<double>(records.size());
    out.accuracy = static_cast<double>(correct) / static_cast<double>(records.size());
    return out;
}

std::vector<double> predict(const ModelParams& params, const ImageTensor& map) {
    return forward(params, map_to_tensor(map), nullptr).probs;
}

namespace {

constexpr char kModelMagic[4] = {'Q', 'N', 'N', 'W'};
constexpr std::uint16_t kModelVersion = 1;

}  // namespace

void save_model(const std::string& path, const ModelParams& params) {
    params.shape.validate();
    if (params.label_codes.size() != static_cast<std::size_t>(params.shape.num_classes)) {
        throw ShapeError("label code table size must equal num_classes");
    }
    std::vector<unsigned char> out;
    out.insert(out.end(), kModelMagic, kModelMagic + 4);
    put_u16_le(out, kModelVersion);
    const ModelShape& s = params.shape;
    for (int v : {s.num_classes, s.input_channels, s.input_h, s.input_w, s.conv1_filters,
                  s.conv1_kernel, s.conv2_filters, s.conv2_kernel, s.dense1_units}) {
        put_u32_le(out, static_cast<std::uint32_t>(v));
    }
    for (std::uint32_t code : params.label_codes) {
        put_u32_le(out, code);
    }
    for (const auto* arr : params.param_arrays()) {
        for (double v : *arr) {
            put_f64_le(out, v);
        }
    }
    put_u32_le(out, crc32(out.data(), out.size()));
    write_file_atomic(path, out);
}

ModelParams load_model(const std::string& path) {
    const std::vector<unsigned char> bytes = read_file_bytes(path);
    constexpr std::size_t kFixedHeader = 4 + 2 + 9 * 4;
    if (bytes.size() < kFixedHeader + 4) {
        throw CorruptionError("truncated", "model file shorter than header");
    }
    if (std::memcmp(bytes.data(), kModelMagic, 4) != 0) {
        throw CorruptionError("magic", "bad model magic, expected QNNW");
    }
    const std::uint16_t version = get_u16_le(bytes.data() + 4);
    if (version != kModelVersion) {
        throw CorruptionError("version", "unsupported model version " + std::to_string(version));
    }

    std::uint32_t fields[9];
    for (int i = 0; i < 9; ++i) {
        fields[i] = get_u32_le(bytes.data() + 6 + 4 * i);
    }
    ModelShape shape;
    shape.num_classes = static_cast<int>(fields[0]);
    shape.input_channels = static_cast<int>(fields[1]);
    shape.input_h = static_cast<int>(fields[2]);
    shape.input_w = static_cast<int>(fields[3]);
    shape.conv1_filters = static_cast<int>(fields[4]);
    shape.conv1_kernel = static_cast<int>(fields[5]);
    shape.conv2_filters = static_cast<int>(fields[6]);
    shape.conv2_kernel = static_cast<int>(fields[7]);
    shape.dense1_units = static_cast<int>(fields[8]);
    for (std::uint32_t f : fields) {
        if (f == 0 || f > (1u << 16)) {
            throw CorruptionError("shape", "implausible model shape field " + std::to_string(f));
        }
    }
    try {
        shape.validate();
    } catch (const Error& e) {
        throw CorruptionError("shape", e.what());
    }

    ModelParams params = make_shaped(shape);
    std::size_t payload = 0;
    for (const auto* arr : params.param_arrays()) {
        payload += arr->size();
    }
    const std::size_t expected =
        kFixedHeader + 4 * static_cast<std::size_t>(shape.num_classes) + payload * 8 + 4;
    if (bytes.size() != expected) {
        throw CorruptionError("truncated", "model file has " + std::to_string(bytes.size()) +
                                               " bytes, expected " + std::to_string(expected));
    }
    const std::uint32_t stored_crc = get_u32_le(bytes.data() + bytes.size() - 4);
    if (stored_crc != crc32(bytes.data(), bytes.size() - 4)) {
        throw CorruptionError("crc", "model checksum mismatch");
    }

    std::size_t pos = kFixedHeader;
    for (int c = 0; c < shape.num_classes; ++c) {
        params.label_codes[c] = get_u32_le(bytes.data() + pos);
        pos += 4;
    }
    for (auto* arr : params.param_arrays()) {
        for (double& v : *arr) {
            v = get_f64_le(bytes.data() + pos);
            pos += 8;
        }
    }
    return params;
}

}  // namespace quanv

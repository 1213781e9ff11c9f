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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "quanv/imageops.hpp"
#include "quanv/rng.hpp"

namespace quanv {

/// Channels-first 3-D tensor (feature-map stack between layers).
struct Tensor3 {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> values;

    Tensor3() = default;
    Tensor3(int c, int h, int w)
        : channels(c), height(h), width(w),
          values(static_cast<std::size_t>(c) * h * w, 0.0) {}

    double& at(int c, int h, int w) {
        return values[(static_cast<std::size_t>(c) * height + h) * width + w];
    }
    double at(int c, int h, int w) const {
        return values[(static_cast<std::size_t>(c) * height + h) * width + w];
    }
    std::size_t size() const { return values.size(); }
};

// Scalar activations and the loss.

inline double relu(double x) { return x > 0.0 ? x : 0.0; }
double sigmoid(double x);
/// Max-shifted stable softmax; entries positive and summing to 1.
std::vector<double> softmax(std::span<const double> logits);
/// -log(probs[true_class] + 1e-12).
double cross_entropy(std::span<const double> probs, int true_class);

/**
 * Architecture descriptor for the fixed stack
 *   conv(3x3) -> ReLU -> maxpool(2x2/2) -> conv(3x3) -> ReLU ->
 *   maxpool(2x2/2) -> flatten -> dense(128) -> ReLU -> dropout ->
 *   dense(C) -> softmax
 * with the filter counts stored here. validate() checks the whole shape
 * chain fits the input dims.
 */
struct ModelShape {
    int input_channels = 1;
    int input_h = 14;
    int input_w = 14;
    int conv1_filters = 32;
    int conv1_kernel = 3;
    int conv2_filters = 64;
    int conv2_kernel = 3;
    int dense1_units = 128;
    int num_classes = 3;

    void validate() const;
    int conv1_out_h() const { return input_h - conv1_kernel + 1; }
    int conv1_out_w() const { return input_w - conv1_kernel + 1; }
    int pool1_h() const { return conv1_out_h() / 2; }
    int pool1_w() const { return conv1_out_w() / 2; }
    int conv2_out_h() const { return pool1_h() - conv2_kernel + 1; }
    int conv2_out_w() const { return pool1_w() - conv2_kernel + 1; }
    int pool2_h() const { return conv2_out_h() / 2; }
    int pool2_w() const { return conv2_out_w() / 2; }
    int flatten_size() const { return conv2_filters * pool2_h() * pool2_w(); }
};

struct ConvParams {
    int out_ch = 0, in_ch = 0, kernel = 0;
    std::vector<double> weights;  // [out][in][kh][kw]
    std::vector<double> bias;     // [out]

    double& w(int f, int c, int m, int n) {
        return weights[((static_cast<std::size_t>(f) * in_ch + c) * kernel + m) * kernel + n];
    }
    double w(int f, int c, int m, int n) const {
        return weights[((static_cast<std::size_t>(f) * in_ch + c) * kernel + m) * kernel + n];
    }
};

struct DenseParams {
    int out_dim = 0, in_dim = 0;
    std::vector<double> weights;  // [out][in]
    std::vector<double> bias;     // [out]

    double& w(int o, int i) { return weights[static_cast<std::size_t>(o) * in_dim + i]; }
    double w(int o, int i) const { return weights[static_cast<std::size_t>(o) * in_dim + i]; }
};

/// All trainable state plus the class-index -> dataset-label-code table
/// (code 0 = unused slot, for padded class counts).
struct ModelParams {
    ModelShape shape;
    ConvParams conv1, conv2;
    DenseParams dense1, dense2;
    std::vector<std::uint32_t> label_codes;

    /// Fixed-order view over the 8 parameter arrays (conv1 w/b, conv2
    /// w/b, dense1 w/b, dense2 w/b); gradient and optimizer state use the
    /// same ordering.
    std::vector<std::vector<double>*> param_arrays();
    std::vector<const std::vector<double>*> param_arrays() const;
};

/// Zero-valued gradients (or momentum slots) shaped like `params`.
ModelParams zeros_like(const ModelParams& params);

/// Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases,
/// drawn from the portable RNG in a fixed order.
ModelParams weight_init(const ModelShape& shape, std::uint64_t seed);

/// Everything the backward pass needs from one forward evaluation.
struct Activations {
    Tensor3 input;
    Tensor3 conv1_pre;            // pre-ReLU
    Tensor3 pool1;                // post-ReLU + pool
    std::vector<int> pool1_argmax;
    Tensor3 conv2_pre;
    Tensor3 pool2;
    std::vector<int> pool2_argmax;
    std::vector<double> flat;
    std::vector<double> dense1_pre;
    std::vector<double> dense1_post;    // post-ReLU
    std::vector<double> dropout_mask;   // scale factors; empty in eval mode
    std::vector<double> dropped;        // post-dropout (== dense1_post in eval)
    std::vector<double> logits;
    std::vector<double> probs;
};

/// Per-unit inverted-dropout scale factors: 0 with probability `rate`,
/// 1/(1-rate) otherwise.
std::vector<double> make_dropout_mask(Rng& rng, int size, double rate);

/// Forward pass. Pass a mask for train mode; nullptr = eval mode (no
/// dropout), which is fully deterministic.
Activations forward(const ModelParams& params, const Tensor3& input,
                    const std::vector<double>* dropout_mask);

/// Analytic gradients of cross_entropy(forward(input), true_class) with
/// respect to every parameter, using the activations (and dropout mask
/// effect) recorded by the paired forward call.
ModelParams backward(const ModelParams& params, const Activations& acts, int true_class);

/// One labeled feature map ([-1,1] values); `label` is the dataset code.
struct LabeledMap {
    ImageTensor map;
    int label = 0;
};

struct TrainConfig {
    int epochs = 20;
    int batch_size = 32;
    double learning_rate = 1e-3;
    enum class Optimizer { Sgd, Adam };
    Optimizer optimizer = Optimizer::Adam;
    double dropout_rate = 0.5;
    std::uint64_t seed = 0;
    double val_fraction = 0.2;
    int num_classes = 0;  // 0 = number of distinct labels in the data
    std::size_t threads = 0;

    void validate() const;
};

struct EpochStats {
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

struct Metrics {
    std::vector<EpochStats> epochs;
    std::vector<std::vector<long long>> confusion;  // rows = true class
    double val_loss = 0.0;
    double val_accuracy = 0.0;
    std::size_t train_samples = 0;
    std::size_t val_samples = 0;
};

/**
 * Full training run: stratified seeded split, seeded init, minibatch
 * optimization, per-epoch train/validation stats, and a final confusion
 * matrix on the validation split. Bit-deterministic for a given
 * (records, config) regardless of thread count: per-sample gradients are
 * reduced in sample order.
 */
std::pair<ModelParams, Metrics> train(std::span<const LabeledMap> records,
                                      const TrainConfig& config);

struct EvalResult {
    double accuracy = 0.0;
    double mean_loss = 0.0;
    std::vector<std::vector<long long>> confusion;
    std::size_t total = 0;
};

/// Accuracy + confusion matrix under the argmax rule (lowest class index
/// wins exact ties). Labels are dataset codes, mapped through
/// params.label_codes.
EvalResult evaluate(const ModelParams& params, std::span<const LabeledMap> records,
                    std::size_t threads = 0);

/// Class probabilities for one map (eval mode).
std::vector<double> predict(const ModelParams& params, const ImageTensor& map);

// Checkpoint IO. Layout (QNNW, little-endian):
//   magic "QNNW" | u16 version=1 | u32 num_classes | u32 input_channels |
//   u32 input_h | u32 input_w | u32 conv1_filters | u32 conv1_kernel |
//   u32 conv2_filters | u32 conv2_kernel | u32 dense1_units |
//   u32 label_code x num_classes | f64 params in param_arrays() order |
//   u32 CRC32 of all preceding bytes.

void save_model(const std::string& path, const ModelParams& params);
ModelParams load_model(const std::string& path);

}  // namespace quanv

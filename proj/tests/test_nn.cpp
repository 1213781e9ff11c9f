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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "helpers.hpp"
#include "quanv/bytes.hpp"
#include "quanv/error.hpp"
#include "quanv/nn.hpp"
#include "quanv/split.hpp"

using namespace quanv;
using test_helpers::random_image;

namespace fs = std::filesystem;

namespace {

ModelShape small_shape(int input_side = 14, int classes = 3) {
    ModelShape shape;
    shape.input_h = input_side;
    shape.input_w = input_side;
    shape.num_classes = classes;
    return shape;
}

Tensor3 random_input(Rng& rng, const ModelShape& shape) {
    Tensor3 t(shape.input_channels, shape.input_h, shape.input_w);
    for (double& v : t.values) {
        v = rng.uniform(-1.0, 1.0);
    }
    return t;
}

// Mean cross-entropy over a small batch; the quantity the analytic
// gradients are checked against.
double batch_loss(const ModelParams& params, const std::vector<Tensor3>& inputs,
                  const std::vector<int>& classes) {
    double acc = 0.0;
    for (std::size_t s = 0; s < inputs.size(); ++s) {
        acc += cross_entropy(forward(params, inputs[s], nullptr).probs, classes[s]);
    }
    return acc / static_cast<double>(inputs.size());
}

std::vector<LabeledMap> synthetic_maps(int per_class, int side, std::uint64_t seed) {
    // Class-dependent blob patterns in [-1, 1], a stand-in for quanvolved
    // maps when the test only exercises the CNN.
    Rng rng(seed);
    std::vector<LabeledMap> maps;
    for (int cls = 1; cls <= 3; ++cls) {
        for (int i = 0; i < per_class; ++i) {
            ImageTensor map(side, side);
            const double cx = side / 2.0 + rng.uniform(-2.0, 2.0);
            const double cy = side / 2.0 + rng.uniform(-2.0, 2.0);
            for (int r = 0; r < side; ++r) {
                for (int c = 0; c < side; ++c) {
                    const double dx = c - cx;
                    const double dy = r - cy;
                    double v = 0.0;
                    if (cls == 1) {
                        v = dx * dx + dy * dy <= side ? 0.8 : -0.8;
                    } else if (cls == 2) {
                        v = std::abs(dx) + std::abs(dy) <= side / 2.5 ? -0.8 : 0.8;
                    } else {
                        v = std::abs(dx - dy) <= 2.0 ? 0.8 : -0.8;
                    }
                    map.at(r, c) = std::clamp(v + rng.uniform(-0.2, 0.2), -1.0, 1.0);
                }
            }
            maps.push_back({std::move(map), cls});
        }
    }
    return maps;
}

}  // namespace

TEST_CASE("scalar activations") {
    CHECK(relu(-1.0) == 0.0);
    CHECK(relu(0.0) == 0.0);
    CHECK(relu(2.5) == 2.5);

    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(40.0) == doctest::Approx(1.0).epsilon(1e-12));
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        const double x = rng.uniform(-10.0, 10.0);
        CHECK(std::abs(sigmoid(x) + sigmoid(-x) - 1.0) < 1e-12);
    }
}

TEST_CASE("softmax properties") {
    const double flat[] = {0.0, 0.0, 0.0, 0.0};
    for (double p : softmax(flat)) {
        CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
    }

    const double extreme[] = {1000.0, 0.0};
    const auto probs = softmax(extreme);
    CHECK(probs[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(probs[1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(std::isfinite(probs[0]));

    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> logits(5);
        for (double& v : logits) {
            v = rng.uniform(-4.0, 4.0);
        }
        const double shift = rng.uniform(-100.0, 100.0);
        std::vector<double> shifted = logits;
        for (double& v : shifted) {
            v += shift;
        }
        const auto a = softmax(logits);
        const auto b = softmax(shifted);
        double sum = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(std::abs(a[i] - b[i]) < 1e-12);
            CHECK(a[i] > 0.0);
            CHECK(a[i] < 1.0);
            sum += a[i];
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }

    CHECK_THROWS_AS(softmax({}), SizeError);
}

TEST_CASE("cross_entropy") {
    const double uniform[] = {0.25, 0.25, 0.25, 0.25};
    CHECK(cross_entropy(uniform, 2) == doctest::Approx(std::log(4.0)).epsilon(1e-9));
    const double sure[] = {0.0, 1.0, 0.0};
    CHECK(cross_entropy(sure, 1) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK_THROWS_AS(cross_entropy(uniform, 4), ArgumentError);

    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
        const double p = rng.uniform(0.1, 0.9);
        const double q = rng.uniform(0.1, 0.9);
        if (p < q) {
            const double a[] = {p, 1 - p};
            const double b[] = {q, 1 - q};
            CHECK(cross_entropy(a, 0) > cross_entropy(b, 0));
        }
    }
}

TEST_CASE("shape chain for the 14x14 default") {
    const ModelShape shape = small_shape();
    shape.validate();
    CHECK(shape.conv1_out_h() == 12);
    CHECK(shape.pool1_h() == 6);
    CHECK(shape.conv2_out_h() == 4);
    CHECK(shape.pool2_h() == 2);
    CHECK(shape.flatten_size() == 256);

    ModelShape tiny = small_shape(5);
    CHECK_THROWS_AS(tiny.validate(), ShapeError);
}

TEST_CASE("forward layer dims and zero-params uniformity") {
    const ModelShape shape = small_shape();
    ModelParams params = weight_init(shape, 4);
    Rng rng(5);
    const Tensor3 input = random_input(rng, shape);

    const Activations acts = forward(params, input, nullptr);
    CHECK(acts.conv1_pre.channels == 32);
    CHECK(acts.conv1_pre.height == 12);
    CHECK(acts.pool1.height == 6);
    CHECK(acts.conv2_pre.channels == 64);
    CHECK(acts.conv2_pre.height == 4);
    CHECK(acts.pool2.height == 2);
    CHECK(acts.flat.size() == 256);
    CHECK(acts.probs.size() == 3);

    // All-zero parameters: exactly uniform class probabilities.
    ModelParams zeros = zeros_like(params);
    const Activations zacts = forward(zeros, input, nullptr);
    for (double p : zacts.probs) {
        CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }

    // Eval mode is dropout-free and deterministic.
    const Activations again = forward(params, input, nullptr);
    CHECK(again.probs == acts.probs);

    Tensor3 wrong(1, 13, 13);
    CHECK_THROWS_AS(forward(params, wrong, nullptr), ShapeError);
}

TEST_CASE("analytic gradients match central finite differences") {
    const ModelShape shape = small_shape();
    ModelParams params = weight_init(shape, 6);
    Rng rng(7);

    std::vector<Tensor3> inputs;
    std::vector<int> classes;
    for (int s = 0; s < 4; ++s) {
        inputs.push_back(random_input(rng, shape));
        classes.push_back(static_cast<int>(rng.below(3)));
    }

    // Analytic batch gradient (dropout off).
    ModelParams analytic = zeros_like(params);
    for (std::size_t s = 0; s < inputs.size(); ++s) {
        const Activations acts = forward(params, inputs[s], nullptr);
        const ModelParams g = backward(params, acts, classes[s]);
        auto acc = analytic.param_arrays();
        auto src = g.param_arrays();
        for (std::size_t a = 0; a < acc.size(); ++a) {
            for (std::size_t k = 0; k < acc[a]->size(); ++k) {
                (*acc[a])[k] += (*src[a])[k] / static_cast<double>(inputs.size());
            }
        }
    }

    const double h = 1e-5;
    auto param_ptrs = params.param_arrays();
    auto grad_ptrs = analytic.param_arrays();
    double worst = 0.0;
    for (std::size_t a = 0; a < param_ptrs.size(); ++a) {
        std::vector<double>& block = *param_ptrs[a];
        // Probe a sample of coordinates in every parameter block.
        const std::size_t probes = std::min<std::size_t>(block.size(), 24);
        for (std::size_t p = 0; p < probes; ++p) {
            const std::size_t k =
                probes == block.size() ? p : rng.below(block.size());
            const double original = block[k];
            block[k] = original + h;
            const double up = batch_loss(params, inputs, classes);
            block[k] = original - h;
            const double down = batch_loss(params, inputs, classes);
            block[k] = original;
            const double numeric = (up - down) / (2.0 * h);
            const double ana = (*grad_ptrs[a])[k];
            const double rel =
                std::abs(numeric - ana) / std::max({1.0, std::abs(numeric), std::abs(ana)});
            worst = std::max(worst, rel);
        }
    }
    INFO("worst relative gradient error: ", worst);
    CHECK(worst < 1e-4);
}

TEST_CASE("gradient identities") {
    const ModelShape shape = small_shape();
    ModelParams params = weight_init(shape, 8);
    Rng rng(9);

    // logits-layer gradient = probs - onehot(y)
    const Tensor3 input = random_input(rng, shape);
    const Activations acts = forward(params, input, nullptr);
    const ModelParams g = backward(params, acts, 1);
    for (int o = 0; o < 3; ++o) {
        const double expected = acts.probs[o] - (o == 1 ? 1.0 : 0.0);
        CHECK(g.dense2.bias[o] == doctest::Approx(expected).epsilon(1e-12));
    }

    // zero input: conv1 weight gradients vanish exactly (dW = g * input),
    // while bias gradients survive once the biases keep ReLU paths alive.
    ModelParams active = params;
    for (auto* bias : {&active.conv1.bias, &active.conv2.bias, &active.dense1.bias}) {
        for (double& b : *bias) {
            b = 0.05;
        }
    }
    const Tensor3 zero_input(1, 14, 14);
    const Activations zacts = forward(active, zero_input, nullptr);
    const ModelParams zg = backward(active, zacts, 0);
    for (double w : zg.conv1.weights) {
        CHECK(w == 0.0);
    }
    double bias_mag = 0.0;
    for (double b : zg.conv1.bias) {
        bias_mag += std::abs(b);
    }
    CHECK(bias_mag > 0.0);
}

TEST_CASE("dropout mask expectation matches the undropped activations") {
    Rng mask_rng(10);
    Rng act_rng(11);
    const int n = 128;
    std::vector<double> activation(n);
    for (double& v : activation) {
        v = act_rng.uniform(0.1, 2.0);
    }

    std::vector<double> mean(n, 0.0);
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        const auto mask = make_dropout_mask(mask_rng, n, 0.5);
        for (int i = 0; i < n; ++i) {
            mean[i] += activation[i] * mask[i] / trials;
        }
    }
    double num = 0.0;
    double den = 0.0;
    for (int i = 0; i < n; ++i) {
        num += (mean[i] - activation[i]) * (mean[i] - activation[i]);
        den += activation[i] * activation[i];
    }
    CHECK(std::sqrt(num / den) < 0.02);

    // rate 0 means pass-through
    Rng r2(1);
    for (double m : make_dropout_mask(r2, 16, 0.0)) {
        CHECK(m == 1.0);
    }
    CHECK_THROWS_AS(make_dropout_mask(r2, 16, 1.0), ArgumentError);
}

TEST_CASE("weight_init: determinism, zero biases, moment check") {
    const ModelShape shape = small_shape();
    const ModelParams a = weight_init(shape, 12);
    const ModelParams b = weight_init(shape, 12);
    const ModelParams c = weight_init(shape, 13);
    CHECK(a.dense1.weights == b.dense1.weights);
    CHECK(a.conv1.weights == b.conv1.weights);
    CHECK(a.dense1.weights != c.dense1.weights);

    for (const auto* bias : {&a.conv1.bias, &a.conv2.bias, &a.dense1.bias, &a.dense2.bias}) {
        for (double v : *bias) {
            CHECK(v == 0.0);
        }
    }

    // dense1 holds 128*256 = 32768 draws from U[-bound, bound]; the
    // sample std must sit within 20% of bound/sqrt(3).
    const double bound = std::sqrt(6.0 / (256.0 + 128.0));
    double mean = 0.0;
    for (double w : a.dense1.weights) {
        mean += w;
    }
    mean /= static_cast<double>(a.dense1.weights.size());
    double var = 0.0;
    for (double w : a.dense1.weights) {
        var += (w - mean) * (w - mean);
    }
    var /= static_cast<double>(a.dense1.weights.size());
    const double expected_std = bound / std::sqrt(3.0);
    CHECK(std::abs(std::sqrt(var) - expected_std) < 0.2 * expected_std);
    for (double w : a.dense1.weights) {
        CHECK(std::abs(w) <= bound);
    }
}

TEST_CASE("training is deterministic and learns the synthetic maps") {
    const auto maps = synthetic_maps(20, 14, 101);
    TrainConfig config;
    config.epochs = 10;
    config.batch_size = 16;
    config.seed = 5;

    const auto [params1, metrics1] = train(maps, config);
    const auto [params2, metrics2] = train(maps, config);

    CHECK(params1.dense1.weights == params2.dense1.weights);
    CHECK(params1.conv2.weights == params2.conv2.weights);
    REQUIRE(metrics1.epochs.size() == 10);
    for (std::size_t e = 0; e < 10; ++e) {
        CHECK(metrics1.epochs[e].train_loss == metrics2.epochs[e].train_loss);
        CHECK(metrics1.epochs[e].val_accuracy == metrics2.epochs[e].val_accuracy);
    }

    CHECK(metrics1.val_accuracy >= 0.9);
    CHECK(metrics1.train_samples == 48);
    CHECK(metrics1.val_samples == 12);

    // Confusion identities: totals and trace/total == accuracy.
    long long total = 0;
    long long trace = 0;
    for (std::size_t i = 0; i < metrics1.confusion.size(); ++i) {
        for (std::size_t j = 0; j < metrics1.confusion[i].size(); ++j) {
            total += metrics1.confusion[i][j];
        }
        trace += metrics1.confusion[i][i];
    }
    CHECK(total == static_cast<long long>(metrics1.val_samples));
    CHECK(metrics1.val_accuracy == static_cast<double>(trace) / static_cast<double>(total));

    // Thread count must not change the result.
    TrainConfig threaded = config;
    threaded.threads = 3;
    const auto [params3, metrics3] = train(maps, threaded);
    CHECK(params3.dense1.weights == params1.dense1.weights);
}

TEST_CASE("sgd optimizer also trains, differently from adam") {
    const auto maps = synthetic_maps(15, 14, 500);
    TrainConfig config;
    config.epochs = 6;
    config.seed = 4;
    config.optimizer = TrainConfig::Optimizer::Sgd;
    config.learning_rate = 0.05;

    const auto [params, metrics] = train(maps, config);
    REQUIRE(metrics.epochs.size() == 6);
    CHECK(metrics.epochs.back().train_loss < metrics.epochs.front().train_loss);

    TrainConfig adam = config;
    adam.optimizer = TrainConfig::Optimizer::Adam;
    adam.learning_rate = 1e-3;
    const auto [adam_params, adam_metrics] = train(maps, adam);
    CHECK(params.dense1.weights != adam_params.dense1.weights);
}

TEST_CASE("train rejects degenerate inputs") {
    TrainConfig config;
    CHECK_THROWS_AS(train({}, config), ConfigError);

    auto maps = synthetic_maps(4, 14, 50);
    for (auto& m : maps) {
        m.label = 1;
    }
    CHECK_THROWS_AS(train(maps, config), ConfigError);

    auto two_class = synthetic_maps(4, 14, 51);
    TrainConfig fewer = config;
    fewer.num_classes = 2;
    CHECK_THROWS_AS(train(two_class, fewer), ConfigError);
}

TEST_CASE("epochs=0 evaluates the initial model at chance level") {
    const auto maps = synthetic_maps(20, 14, 200);
    TrainConfig config;
    config.epochs = 0;
    config.seed = 9;
    const auto [params, metrics] = train(maps, config);
    CHECK(metrics.epochs.empty());
    CHECK(metrics.val_samples == 12);
    CHECK(metrics.val_accuracy >= 0.0);
    CHECK(metrics.val_accuracy <= 0.67);  // generous band around 1/3 chance
    long long total = 0;
    for (const auto& row : metrics.confusion) {
        total += std::accumulate(row.begin(), row.end(), 0LL);
    }
    CHECK(total == 12);
}

TEST_CASE("loss trend and train-vs-val sanity across 10 seeds") {
    const auto maps = synthetic_maps(15, 12, 300);
    int monotone_ok = 0;
    int train_ge_val = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        TrainConfig config;
        config.epochs = 6;
        config.batch_size = 16;
        config.seed = seed;
        const auto [params, metrics] = train(maps, config);

        bool monotone = true;
        for (std::size_t e = 2; e < metrics.epochs.size(); ++e) {
            monotone = monotone &&
                       metrics.epochs[e].train_loss <= metrics.epochs[e - 1].train_loss + 1e-9;
        }
        monotone_ok += monotone ? 1 : 0;

        // eval-mode accuracy on the training split vs the validation split
        std::vector<int> classes;
        for (const auto& m : maps) {
            classes.push_back(m.label);
        }
        const auto [train_idx, val_idx] =
            stratified_split_indices(classes, config.val_fraction, derive_seed(seed, 0));
        std::vector<LabeledMap> train_subset;
        std::vector<LabeledMap> val_subset;
        for (auto i : train_idx) {
            train_subset.push_back(maps[i]);
        }
        for (auto i : val_idx) {
            val_subset.push_back(maps[i]);
        }
        const double acc_train = evaluate(params, train_subset).accuracy;
        const double acc_val = evaluate(params, val_subset).accuracy;
        train_ge_val += acc_train >= acc_val - 1e-12 ? 1 : 0;
    }
    CHECK(monotone_ok >= 9);
    CHECK(train_ge_val >= 9);
}

TEST_CASE("evaluate: perfect and constant predictors") {
    const ModelShape shape = small_shape();
    const auto maps = synthetic_maps(10, 14, 400);

    // constant predictor: zero conv/dense weights, biased logits
    ModelParams constant = zeros_like(weight_init(shape, 1));
    constant.dense2.bias[2] = 5.0;
    const EvalResult result = evaluate(constant, maps);
    CHECK(result.total == 30);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(result.confusion[i][2] == 10);  // everything lands in class 2
        CHECK(result.confusion[i][0] == 0);
    }
    CHECK(result.accuracy == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    // row sums = per-class counts
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::accumulate(result.confusion[i].begin(), result.confusion[i].end(), 0LL) == 10);
    }

    // a well-trained model is (near-)perfect on its training data
    TrainConfig config;
    config.epochs = 12;
    config.seed = 3;
    const auto [params, metrics] = train(maps, config);
    const EvalResult on_train = evaluate(params, maps);
    CHECK(on_train.accuracy >= 0.95);

    CHECK_THROWS_AS(evaluate(params, {}), ArgumentError);
    auto alien = maps;
    alien[0].label = 42;
    CHECK_THROWS_AS(evaluate(params, alien), ConfigError);
}

TEST_CASE("argmax tie-break picks the lowest class index") {
    const ModelShape shape = small_shape();
    ModelParams zeros = zeros_like(weight_init(shape, 1));
    std::vector<LabeledMap> one_map;
    ImageTensor m(14, 14, 0.25);
    one_map.push_back({m, 2});
    // all logits equal -> argmax must be class 0 -> confusion[1][0]
    const EvalResult result = evaluate(zeros, one_map);
    CHECK(result.confusion[1][0] == 1);
    CHECK(result.accuracy == 0.0);
}

TEST_CASE("padded classifier head: 4 output units over 3-class data") {
    const auto maps = synthetic_maps(12, 14, 600);
    TrainConfig config;
    config.epochs = 6;
    config.seed = 2;
    config.num_classes = 4;
    const auto [params, metrics] = train(maps, config);

    CHECK(params.shape.num_classes == 4);
    CHECK(params.label_codes == std::vector<std::uint32_t>{1, 2, 3, 0});
    REQUIRE(metrics.confusion.size() == 4);
    // no sample carries the padded class, so its true-class row is empty
    CHECK(std::accumulate(metrics.confusion[3].begin(), metrics.confusion[3].end(), 0LL) == 0);
    CHECK(metrics.val_accuracy >= 0.9);

    const fs::path dir = fs::temp_directory_path() / "quanv_nn_pad";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string path = (dir / "m.qnnw").string();
    save_model(path, params);
    const ModelParams back = load_model(path);
    CHECK(back.label_codes == params.label_codes);
    CHECK(evaluate(back, maps).accuracy == evaluate(params, maps).accuracy);
}

TEST_CASE("checkpoint round trip and corruption") {
    const ModelShape shape = small_shape();
    ModelParams params = weight_init(shape, 21);
    params.label_codes = {1, 2, 3};

    const fs::path dir = fs::temp_directory_path() / "quanv_nn_ckpt";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string path = (dir / "model.qnnw").string();
    save_model(path, params);

    const ModelParams back = load_model(path);
    CHECK(back.shape.num_classes == 3);
    CHECK(back.shape.input_h == 14);
    CHECK(back.label_codes == params.label_codes);
    CHECK(back.conv1.weights == params.conv1.weights);
    CHECK(back.dense2.bias == params.dense2.bias);

    auto bytes = quanv::read_file_bytes(path);
    auto flipped = bytes;
    flipped[100] ^= 0x01;
    quanv::write_file_atomic((dir / "bad_crc.qnnw").string(), flipped);
    try {
        load_model((dir / "bad_crc.qnnw").string());
        FAIL("expected CorruptionError");
    } catch (const CorruptionError& e) {
        CHECK(e.field() == "crc");
    }

    auto wrong_magic = bytes;
    wrong_magic[0] = 'Z';
    quanv::write_file_atomic((dir / "bad_magic.qnnw").string(), wrong_magic);
    try {
        load_model((dir / "bad_magic.qnnw").string());
        FAIL("expected CorruptionError");
    } catch (const CorruptionError& e) {
        CHECK(e.field() == "magic");
    }

    auto truncated = bytes;
    truncated.resize(truncated.size() / 2);
    quanv::write_file_atomic((dir / "short.qnnw").string(), truncated);
    try {
        load_model((dir / "short.qnnw").string());
        FAIL("expected CorruptionError");
    } catch (const CorruptionError& e) {
        CHECK(e.field() == "truncated");
    }
}

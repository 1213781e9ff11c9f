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

// quanv: synthesize data, quanvolve it into a feature cache, train and
// evaluate the CNN head, and inspect the patch circuit.
//
// Exit codes: 0 success, 1 partial data failure, 2 usage/config/corruption.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "quanv/bytes.hpp"
#include "quanv/cache.hpp"
#include "quanv/circuit.hpp"
#include "quanv/dataset.hpp"
#include "quanv/error.hpp"
#include "quanv/imageops.hpp"
#include "quanv/nn.hpp"
#include "quanv/pgm.hpp"
#include "quanv/quanvolution.hpp"
#include "quanv/rng.hpp"
#include "quanv/split.hpp"
#include "quanv/statevector.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double kPiOver2 = std::numbers::pi / 2.0;

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

// Shared quanvolution options (preprocess, predict, circuit).
struct QuanvFlags {
    int step = 2;
    double theta = kPiOver2;
    int depth_q = 1;
    bool no_cr_ring = false;
    std::uint64_t shots = 0;  // 0 = exact readout
    std::uint64_t shot_seed = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--step", step, "Patch step size")->capture_default_str();
        cmd->add_option("--theta", theta, "Controlled-rotation angle (radians)")
            ->capture_default_str();
        cmd->add_option("--q", depth_q, "Quanvolution depth (stacked layers)")
            ->capture_default_str();
        cmd->add_flag("--no-cr-ring", no_cr_ring,
                      "Drop the (last,first) controlled-rotation pair");
        cmd->add_option("--shots", shots, "Sample the readout with this many shots (0 = exact)")
            ->capture_default_str();
        cmd->add_option("--shot-seed", shot_seed, "Seed for sampled readout")
            ->capture_default_str();
    }

    quanv::QuanvConfig to_config(std::size_t threads) const {
        quanv::QuanvConfig config;
        config.step = step;
        config.depth_q = depth_q;
        config.threads = threads;
        config.circuit.theta = theta;
        config.circuit.cr_ring_closure = !no_cr_ring;
        config.circuit.readout = shots == 0 ? quanv::Readout::exact()
                                            : quanv::Readout::sampled(shots, shot_seed);
        return config;
    }

    void echo(json& out) const {
        out["step"] = step;
        out["theta"] = theta;
        out["q"] = depth_q;
        out["cr_ring"] = !no_cr_ring;
        out["shots"] = shots;
        out["shot_seed"] = shot_seed;
    }
};

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

// `key=value` lines with '#' comments. Values fill only options not given
// on the command line, so flags always win. Unknown keys are usage errors.
void apply_config_file(CLI::App* cmd, const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw quanv::ConfigError("cannot open config file: " + path);
    }
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.resize(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw quanv::ConfigError(path + ":" + std::to_string(lineno) +
                                     ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt == nullptr || key == "config") {
            throw quanv::ConfigError(path + ":" + std::to_string(lineno) +
                                     ": unknown config key '" + key + "'");
        }
        if (opt->count() > 0) {
            continue;
        }
        opt->add_result(value);
        opt->run_callback();
    }
}

void attach_config(CLI::App* cmd, std::string& holder) {
    cmd->add_option("--config", holder,
                    "key=value config file (# comments); command-line flags win");
}

std::vector<double> parse_pixels(const std::string& csv) {
    std::vector<double> pixels;
    std::stringstream in(csv);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        std::size_t used = 0;
        pixels.push_back(std::stod(tok, &used));
        if (used != tok.size()) {
            throw quanv::ArgumentError("unparseable pixel value '" + tok + "'");
        }
    }
    if (pixels.size() != 4) {
        throw quanv::ArgumentError("--pixels needs exactly 4 comma-separated values");
    }
    return pixels;
}

void write_text_atomic(const std::string& path, const std::string& text) {
    quanv::write_file_atomic(path, std::vector<unsigned char>(text.begin(), text.end()));
}

quanv::LabelMap lookup_names() { return quanv::LabelMap::defaults(4); }

std::string class_name(const quanv::LabelMap& names, std::uint32_t code) {
    return code == 0 ? "unused" : names.name_of(static_cast<int>(code));
}

// ---- synth ----------------------------------------------------------

struct SynthArgs {
    std::string out_dir;
    int per_class = 100;
    int classes = 3;
    int side = 28;
    std::uint64_t seed = 0;
    std::string config_path;
};

int cmd_synth(const SynthArgs& args) {
    const auto records =
        quanv::generate_synthetic(args.per_class, args.side, args.classes, args.seed);
    quanv::write_dataset_dir(args.out_dir, records);
    std::cout << "records=" << records.size() << " dir=" << args.out_dir << "\n";
    return 0;
}

// ---- preprocess ------------------------------------------------------

struct PreprocessArgs {
    std::string data_dir;
    std::string cache_dir;
    int classes = 3;
    int resize = 28;
    double max_raw = 255.0;
    std::size_t threads = 0;
    QuanvFlags quanv;
    std::string config_path;
};

int cmd_preprocess(const PreprocessArgs& args) {
    Timer timer;
    const auto labels = quanv::LabelMap::defaults(args.classes);
    quanv::LoadResult loaded = quanv::load_dataset_dir(args.data_dir, labels);
    for (const auto& issue : loaded.errors) {
        std::cerr << "warning: " << issue.context << ": " << issue.message << "\n";
    }

    std::size_t prep_failures = 0;
    std::vector<quanv::DatasetRecord> prepared;
    prepared.reserve(loaded.records.size());
    for (auto& record : loaded.records) {
        try {
            record.image = quanv::normalize01(
                quanv::resize_bilinear(record.image, args.resize, args.resize), args.max_raw);
            prepared.push_back(std::move(record));
        } catch (const quanv::Error& e) {
            std::cerr << "warning: " << record.id << ": " << e.what() << "\n";
            ++prep_failures;
        }
    }

    const quanv::QuanvConfig config = args.quanv.to_config(args.threads);
    const quanv::CacheManifest manifest = quanv::quanvolve_dataset(prepared, config, args.cache_dir);
    for (const auto& entry : manifest.entries) {
        if (!entry.message.empty()) {
            std::cerr << (entry.status == quanv::CacheEntry::Status::Errored ? "error: "
                                                                             : "warning: ")
                      << entry.id << ": " << entry.message << "\n";
        }
    }

    // Provenance echo next to the cache: the transform parameters are not
    // recoverable from the .qnv files themselves.
    json doc;
    doc["command"] = "preprocess";
    json config_echo;
    config_echo["data"] = args.data_dir;
    config_echo["cache"] = args.cache_dir;
    config_echo["classes"] = args.classes;
    config_echo["resize"] = args.resize;
    config_echo["max_raw"] = args.max_raw;
    config_echo["threads"] = args.threads;
    args.quanv.echo(config_echo);
    doc["config"] = config_echo;
    write_text_atomic((fs::path(args.cache_dir) / "preprocess.json").string(),
                      doc.dump(2) + "\n");

    const std::size_t errored = manifest.errored() + loaded.errors.size() + prep_failures;
    std::cout << "computed=" << manifest.computed() << " skipped=" << manifest.skipped()
              << " errored=" << errored << "\n";
    std::cerr << "preprocess took " << fmt_g17(timer.seconds()) << "s\n";
    return errored == 0 ? 0 : 1;
}

// ---- train -----------------------------------------------------------

struct TrainArgs {
    std::string cache_dir;
    std::string out_dir;
    int epochs = 20;
    int batch = 32;
    double lr = 1e-3;
    std::string optimizer = "adam";
    double dropout = 0.5;
    double val_fraction = 0.2;
    std::uint64_t seed = 0;
    int num_classes = 0;
    std::size_t threads = 0;
    std::string config_path;
};

std::vector<quanv::LabeledMap> cache_to_maps(const std::vector<quanv::NamedCacheRecord>& cached) {
    std::vector<quanv::LabeledMap> maps;
    maps.reserve(cached.size());
    for (const auto& named : cached) {
        maps.push_back({named.record.map, static_cast<int>(named.record.label)});
    }
    return maps;
}

json confusion_to_json(const std::vector<std::vector<long long>>& confusion) {
    json rows = json::array();
    for (const auto& row : confusion) {
        rows.push_back(row);
    }
    return rows;
}

std::string confusion_to_csv(const std::vector<std::vector<long long>>& confusion) {
    std::string csv;
    for (const auto& row : confusion) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            csv += std::to_string(row[j]);
            csv += j + 1 < row.size() ? ',' : '\n';
        }
    }
    return csv;
}

int cmd_train(const TrainArgs& args) {
    Timer timer;
    const auto cached = quanv::load_cache_dir(args.cache_dir);
    if (cached.empty()) {
        throw quanv::ConfigError("cache directory " + args.cache_dir + " holds no .qnv files");
    }
    const auto maps = cache_to_maps(cached);

    quanv::TrainConfig config;
    config.epochs = args.epochs;
    config.batch_size = args.batch;
    config.learning_rate = args.lr;
    if (args.optimizer == "adam") {
        config.optimizer = quanv::TrainConfig::Optimizer::Adam;
    } else if (args.optimizer == "sgd") {
        config.optimizer = quanv::TrainConfig::Optimizer::Sgd;
    } else {
        throw quanv::ConfigError("unknown optimizer '" + args.optimizer + "'");
    }
    config.dropout_rate = args.dropout;
    config.val_fraction = args.val_fraction;
    config.seed = args.seed;
    config.num_classes = args.num_classes;
    config.threads = args.threads;

    auto [params, metrics] = quanv::train(maps, config);

    fs::create_directories(args.out_dir);
    quanv::save_model((fs::path(args.out_dir) / "model.qnnw").string(), params);

    std::string curves = "epoch,train_loss,val_loss,train_acc,val_acc\n";
    for (std::size_t e = 0; e < metrics.epochs.size(); ++e) {
        const auto& s = metrics.epochs[e];
        curves += std::to_string(e + 1) + "," + fmt_g17(s.train_loss) + "," +
                  fmt_g17(s.val_loss) + "," + fmt_g17(s.train_accuracy) + "," +
                  fmt_g17(s.val_accuracy) + "\n";
    }
    write_text_atomic((fs::path(args.out_dir) / "curves.csv").string(), curves);
    write_text_atomic((fs::path(args.out_dir) / "confusion.csv").string(),
                      confusion_to_csv(metrics.confusion));

    const auto names = lookup_names();
    json doc;
    doc["command"] = "train";
    json config_echo;
    config_echo["cache"] = args.cache_dir;
    config_echo["out"] = args.out_dir;
    config_echo["epochs"] = args.epochs;
    config_echo["batch"] = args.batch;
    config_echo["lr"] = args.lr;
    config_echo["optimizer"] = args.optimizer;
    config_echo["dropout"] = args.dropout;
    config_echo["val_fraction"] = args.val_fraction;
    config_echo["seed"] = args.seed;
    config_echo["num_classes"] = args.num_classes;
    config_echo["threads"] = args.threads;
    doc["config"] = config_echo;

    json classes;
    classes["count"] = params.shape.num_classes;
    classes["codes"] = params.label_codes;
    json class_names = json::array();
    for (std::uint32_t code : params.label_codes) {
        class_names.push_back(class_name(names, code));
    }
    classes["names"] = class_names;
    doc["classes"] = classes;

    doc["samples"] = {{"train", metrics.train_samples}, {"val", metrics.val_samples}};
    json epochs = json::array();
    for (std::size_t e = 0; e < metrics.epochs.size(); ++e) {
        const auto& s = metrics.epochs[e];
        epochs.push_back({{"epoch", e + 1},
                          {"train_loss", s.train_loss},
                          {"train_acc", s.train_accuracy},
                          {"val_loss", s.val_loss},
                          {"val_acc", s.val_accuracy}});
    }
    doc["epochs"] = epochs;
    doc["final"] = {{"val_loss", metrics.val_loss}, {"val_accuracy", metrics.val_accuracy}};
    doc["confusion"] = confusion_to_json(metrics.confusion);
    write_text_atomic((fs::path(args.out_dir) / "metrics.json").string(), doc.dump(2) + "\n");

    std::cout << "epochs=" << metrics.epochs.size() << " train_samples=" << metrics.train_samples
              << " val_samples=" << metrics.val_samples
              << " val_accuracy=" << fmt_g17(metrics.val_accuracy) << "\n";
    std::cerr << "train took " << fmt_g17(timer.seconds()) << "s\n";
    return 0;
}

// ---- eval / predict --------------------------------------------------

struct EvalArgs {
    std::string model_path;
    std::string cache_dir;
    std::string subset = "all";
    double val_fraction = 0.2;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    std::string config_path;
};

int cmd_eval(const EvalArgs& args) {
    const quanv::ModelParams params = quanv::load_model(args.model_path);
    const auto cached = quanv::load_cache_dir(args.cache_dir);
    if (cached.empty()) {
        throw quanv::ConfigError("cache directory " + args.cache_dir + " holds no .qnv files");
    }
    auto maps = cache_to_maps(cached);

    if (args.subset != "all") {
        // Reproduce the training partition: class indices via the model's
        // code table, then the same stratified split stream.
        std::map<std::uint32_t, int> code_to_class;
        for (std::size_t c = 0; c < params.label_codes.size(); ++c) {
            code_to_class[params.label_codes[c]] = static_cast<int>(c);
        }
        std::vector<int> classes;
        classes.reserve(maps.size());
        for (const auto& m : maps) {
            const auto it = code_to_class.find(static_cast<std::uint32_t>(m.label));
            if (it == code_to_class.end()) {
                throw quanv::ConfigError("label code " + std::to_string(m.label) +
                                         " unknown to this model");
            }
            classes.push_back(it->second);
        }
        const auto [train_idx, val_idx] = quanv::stratified_split_indices(
            classes, args.val_fraction, quanv::derive_seed(args.seed, 0));
        const auto& keep = args.subset == "train" ? train_idx : val_idx;
        std::vector<quanv::LabeledMap> subset;
        subset.reserve(keep.size());
        for (std::size_t i : keep) {
            subset.push_back(std::move(maps[i]));
        }
        maps = std::move(subset);
    }

    const quanv::EvalResult result = quanv::evaluate(params, maps, args.threads);
    const auto names = lookup_names();
    std::cout << "samples=" << result.total << " accuracy=" << fmt_g17(result.accuracy)
              << " mean_loss=" << fmt_g17(result.mean_loss) << "\n";
    std::cout << "confusion (rows = true class):\n";
    for (std::size_t i = 0; i < result.confusion.size(); ++i) {
        std::cout << class_name(names, params.label_codes[i]) << ":";
        for (long long v : result.confusion[i]) {
            std::cout << " " << v;
        }
        std::cout << "\n";
    }
    return 0;
}

struct PredictArgs {
    std::string model_path;
    std::string image_path;
    double max_raw = 255.0;
    std::size_t threads = 0;
    QuanvFlags quanv;
    std::string config_path;
};

int cmd_predict(const PredictArgs& args) {
    const quanv::ModelParams params = quanv::load_model(args.model_path);
    quanv::ImageTensor image = quanv::read_pgm(args.image_path);

    // Original image side implied by the model input and the transform.
    int resize_h = params.shape.input_h;
    int resize_w = params.shape.input_w;
    for (int layer = 0; layer < args.quanv.depth_q; ++layer) {
        resize_h *= args.quanv.step;
        resize_w *= args.quanv.step;
    }
    image = quanv::normalize01(quanv::resize_bilinear(image, resize_h, resize_w), args.max_raw);

    const quanv::QuanvConfig config = args.quanv.to_config(args.threads);
    const quanv::ImageTensor map = quanv::quanvolve_image(image, config);
    const std::vector<double> probs = quanv::predict(params, map);

    const auto names = lookup_names();
    int best = 0;
    for (std::size_t c = 0; c < probs.size(); ++c) {
        if (probs[c] > probs[best]) {
            best = static_cast<int>(c);
        }
        std::cout << class_name(names, params.label_codes[c]) << " " << fmt_g17(probs[c]) << "\n";
    }
    std::cout << "predicted: " << class_name(names, params.label_codes[best]) << " p="
              << fmt_g17(probs[best]) << "\n";
    return 0;
}

// ---- circuit ---------------------------------------------------------

struct CircuitArgs {
    std::string pixels_csv = "0,0,0,0";
    QuanvFlags quanv;
    std::string config_path;
};

quanv::QuanvCircuitConfig circuit_config(const CircuitArgs& args) {
    return args.quanv.to_config(1).circuit;
}

int cmd_circuit_dump(const CircuitArgs& args) {
    const auto pixels = parse_pixels(args.pixels_csv);
    const auto spec = quanv::build_quanv_circuit(pixels, circuit_config(args));
    std::cout << quanv::circuit_to_text(spec);
    return 0;
}

int cmd_circuit_unitary(const CircuitArgs& args) {
    const auto pixels = parse_pixels(args.pixels_csv);
    const auto spec = quanv::build_quanv_circuit(pixels, circuit_config(args));
    const quanv::GateMatrix u = quanv::circuit_unitary(spec, 4);
    char buf[64];
    for (int r = 0; r < u.dim; ++r) {
        for (int c = 0; c < u.dim; ++c) {
            const quanv::cplx v = u.at(r, c);
            std::snprintf(buf, sizeof(buf), "%+.10f%+.10fi", v.real(), v.imag());
            std::cout << buf << (c + 1 < u.dim ? " " : "\n");
        }
    }
    const double defect = quanv::unitarity_defect(u);
    std::cout << "unitarity_defect=" << fmt_g17(defect)
              << (defect < 1e-10 ? " status=OK" : " status=FAIL") << "\n";
    return defect < 1e-10 ? 0 : 2;
}

int cmd_circuit_run(const CircuitArgs& args) {
    const auto pixels = parse_pixels(args.pixels_csv);
    std::cout << fmt_g17(quanv::run_quanv_circuit(pixels, circuit_config(args))) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quanvolutional preprocessing + CNN training pipeline"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic labeled PGM corpus");
    attach_config(synth_cmd, synth.config_path);
    synth_cmd->add_option("--out", synth.out_dir, "Output dataset directory")->required();
    synth_cmd->add_option("--per-class", synth.per_class, "Images per class")
        ->capture_default_str();
    synth_cmd->add_option("--classes", synth.classes, "Class count (3 or 4)")
        ->capture_default_str();
    synth_cmd->add_option("--side", synth.side, "Image side length")->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();

    PreprocessArgs pre;
    auto* pre_cmd =
        app.add_subcommand("preprocess", "Quanvolve a dataset into a feature cache");
    attach_config(pre_cmd, pre.config_path);
    pre_cmd->add_option("--data", pre.data_dir, "Dataset directory (labels.csv + PGMs)")
        ->required();
    pre_cmd->add_option("--cache", pre.cache_dir, "Cache directory for .qnv files")->required();
    pre_cmd->add_option("--classes", pre.classes, "Label map size (3 or 4)")
        ->capture_default_str();
    pre_cmd->add_option("--resize", pre.resize, "Resize side before the transform")
        ->capture_default_str();
    pre_cmd->add_option("--max-raw", pre.max_raw, "Raw intensity ceiling (normalization divisor)")
        ->capture_default_str();
    pre_cmd->add_option("--threads", pre.threads, "Worker threads (0 = auto)")
        ->capture_default_str();
    pre.quanv.attach(pre_cmd);

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Train the CNN head on cached feature maps");
    attach_config(train_cmd, train.config_path);
    train_cmd->add_option("--cache", train.cache_dir, "Cache directory")->required();
    train_cmd->add_option("--out", train.out_dir, "Artifact output directory")->required();
    train_cmd->add_option("--epochs", train.epochs, "Training epochs")->capture_default_str();
    train_cmd->add_option("--batch", train.batch, "Minibatch size")->capture_default_str();
    train_cmd->add_option("--lr", train.lr, "Learning rate")->capture_default_str();
    train_cmd->add_option("--optimizer", train.optimizer, "adam | sgd")->capture_default_str();
    train_cmd->add_option("--dropout", train.dropout, "Dropout rate in [0,1)")
        ->capture_default_str();
    train_cmd->add_option("--val-fraction", train.val_fraction, "Validation fraction")
        ->capture_default_str();
    train_cmd->add_option("--seed", train.seed, "Training seed")->capture_default_str();
    train_cmd->add_option("--num-classes", train.num_classes,
                          "Output units (0 = distinct labels)")
        ->capture_default_str();
    train_cmd->add_option("--threads", train.threads, "Worker threads (0 = auto)")
        ->capture_default_str();

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on cached feature maps");
    attach_config(eval_cmd, eval.config_path);
    eval_cmd->add_option("--model", eval.model_path, "Checkpoint file")->required();
    eval_cmd->add_option("--cache", eval.cache_dir, "Cache directory")->required();
    eval_cmd->add_option("--split", eval.subset, "all | train | val")
        ->check(CLI::IsMember({"all", "train", "val"}))
        ->capture_default_str();
    eval_cmd->add_option("--val-fraction", eval.val_fraction,
                         "Validation fraction used at training time")
        ->capture_default_str();
    eval_cmd->add_option("--seed", eval.seed, "Seed used at training time")
        ->capture_default_str();
    eval_cmd->add_option("--threads", eval.threads, "Worker threads (0 = auto)")
        ->capture_default_str();

    PredictArgs predict;
    auto* predict_cmd = app.add_subcommand("predict", "Classify one raw PGM image");
    attach_config(predict_cmd, predict.config_path);
    predict_cmd->add_option("--model", predict.model_path, "Checkpoint file")->required();
    predict_cmd->add_option("--image", predict.image_path, "PGM image")->required();
    predict_cmd->add_option("--max-raw", predict.max_raw, "Raw intensity ceiling")
        ->capture_default_str();
    predict_cmd->add_option("--threads", predict.threads, "Worker threads (0 = auto)")
        ->capture_default_str();
    predict.quanv.attach(predict_cmd);

    CircuitArgs circuit;
    auto* circuit_cmd = app.add_subcommand("circuit", "Inspect the patch circuit");
    circuit_cmd->require_subcommand(1);
    auto* dump_cmd = circuit_cmd->add_subcommand("dump", "Print the gate program");
    auto* unitary_cmd = circuit_cmd->add_subcommand("unitary", "Print the dense 16x16 unitary");
    auto* run_cmd = circuit_cmd->add_subcommand("run", "Print the Z readout for one patch");
    for (auto* sub : {dump_cmd, unitary_cmd, run_cmd}) {
        attach_config(sub, circuit.config_path);
        sub->add_option("--pixels", circuit.pixels_csv, "4 comma-separated values in [0,1]")
            ->capture_default_str();
        circuit.quanv.attach(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // stable exit-code contract: usage errors are 2
    }

    try {
        if (*synth_cmd) {
            if (!synth.config_path.empty()) {
                apply_config_file(synth_cmd, synth.config_path);
            }
            return cmd_synth(synth);
        }
        if (*pre_cmd) {
            if (!pre.config_path.empty()) {
                apply_config_file(pre_cmd, pre.config_path);
            }
            return cmd_preprocess(pre);
        }
        if (*train_cmd) {
            if (!train.config_path.empty()) {
                apply_config_file(train_cmd, train.config_path);
            }
            return cmd_train(train);
        }
        if (*eval_cmd) {
            if (!eval.config_path.empty()) {
                apply_config_file(eval_cmd, eval.config_path);
            }
            return cmd_eval(eval);
        }
        if (*predict_cmd) {
            if (!predict.config_path.empty()) {
                apply_config_file(predict_cmd, predict.config_path);
            }
            return cmd_predict(predict);
        }
        if (*circuit_cmd) {
            CLI::App* active = *dump_cmd ? dump_cmd : *unitary_cmd ? unitary_cmd : run_cmd;
            if (!circuit.config_path.empty()) {
                apply_config_file(active, circuit.config_path);
            }
            if (*dump_cmd) {
                return cmd_circuit_dump(circuit);
            }
            if (*unitary_cmd) {
                return cmd_circuit_unitary(circuit);
            }
            return cmd_circuit_run(circuit);
        }
    } catch (const quanv::CorruptionError& e) {
        std::cerr << "error: " << e.field() << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

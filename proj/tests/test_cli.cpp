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

// Exercises the installed command-line surface end to end: exit codes,
// printed contracts, artifact determinism, and the key=value config file.

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "quanv/bytes.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout only
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(QUANV_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult result;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) {
        result.output.append(buf, n);
    }
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

int line_count(const std::string& text) {
    int lines = 0;
    for (char c : text) {
        lines += c == '\n' ? 1 : 0;
    }
    return lines;
}

fs::path workspace() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "quanv_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("circuit run prints the exact readout") {
    const RunResult zero = run_cli("circuit run --pixels 0,0,0,0");
    CHECK(zero.exit_code == 0);
    CHECK(std::stod(zero.output) == 1.0);

    const RunResult ones = run_cli("circuit run --pixels 1,1,1,1");
    CHECK(ones.exit_code == 0);
    CHECK(std::stod(ones.output) == doctest::Approx(-0.375).epsilon(1e-10));

    CHECK(run_cli("circuit run --pixels 0,0,2,0").exit_code == 2);
    CHECK(run_cli("circuit run --pixels 0,0,0").exit_code == 2);
}

TEST_CASE("circuit dump emits one line per gate") {
    const RunResult ring = run_cli("circuit dump");
    CHECK(ring.exit_code == 0);
    CHECK(line_count(ring.output) == 16);

    const RunResult open = run_cli("circuit dump --no-cr-ring");
    CHECK(line_count(open.output) == 14);
}

TEST_CASE("circuit unitary passes its own unitarity self-check") {
    const RunResult result = run_cli("circuit unitary --pixels 0.3,0.6,0.2,0.9");
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("status=OK") != std::string::npos);
    CHECK(line_count(result.output) == 17);  // 16 matrix rows + self-check line
}

TEST_CASE("config file feeds flags, command line wins") {
    const fs::path cfg = workspace() / "circuit.cfg";
    {
        std::ofstream out(cfg);
        out << "# patch pixels\n";
        out << "pixels=1,1,1,1\n";
    }
    const RunResult from_cfg = run_cli("circuit run --config " + cfg.string());
    CHECK(from_cfg.exit_code == 0);
    CHECK(std::stod(from_cfg.output) == doctest::Approx(-0.375).epsilon(1e-10));

    const RunResult overridden =
        run_cli("circuit run --config " + cfg.string() + " --pixels 0,0,0,0");
    CHECK(std::stod(overridden.output) == 1.0);
}

TEST_CASE("synth: counts, determinism, size validation") {
    const fs::path data = workspace() / "data";
    const RunResult result =
        run_cli("synth --out " + data.string() + " --per-class 8 --classes 3 --side 24 --seed 5");
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("records=24") != std::string::npos);
    CHECK(fs::exists(data / "labels.csv"));
    int pgm_count = 0;
    for (const auto& e : fs::directory_iterator(data)) {
        pgm_count += e.path().extension() == ".pgm" ? 1 : 0;
    }
    CHECK(pgm_count == 24);

    const std::string before = slurp(data / "c1_00003.pgm");
    const RunResult rerun =
        run_cli("synth --out " + data.string() + " --per-class 8 --classes 3 --side 24 --seed 5");
    CHECK(rerun.exit_code == 0);
    CHECK(slurp(data / "c1_00003.pgm") == before);

    CHECK(run_cli("synth --out " + (workspace() / "tiny").string() + " --per-class 2 --side 4")
              .exit_code == 2);
}

TEST_CASE("preprocess: fresh, idempotent rerun, partial failure") {
    const fs::path data = workspace() / "data";
    const fs::path cache = workspace() / "cache";

    const RunResult fresh =
        run_cli("preprocess --data " + data.string() + " --cache " + cache.string());
    CHECK(fresh.exit_code == 0);
    CHECK(fresh.output.find("computed=24 skipped=0 errored=0") != std::string::npos);

    const RunResult rerun =
        run_cli("preprocess --data " + data.string() + " --cache " + cache.string());
    CHECK(rerun.exit_code == 0);
    CHECK(rerun.output.find("computed=0 skipped=24 errored=0") != std::string::npos);

    // A row pointing at a missing file: partial failure, exit 1.
    const fs::path broken = workspace() / "broken";
    fs::create_directories(broken);
    fs::copy(data, broken, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
    {
        std::ofstream csv(broken / "labels.csv", std::ios::app);
        csv << "missing.pgm,1,missing\n";
    }
    const RunResult partial = run_cli("preprocess --data " + broken.string() + " --cache " +
                                      (workspace() / "broken_cache").string());
    CHECK(partial.exit_code == 1);
    CHECK(partial.output.find("errored=1") != std::string::npos);
}

TEST_CASE("train: artifacts, determinism, empty-cache error") {
    const fs::path cache = workspace() / "cache";
    const fs::path out = workspace() / "run";
    const std::string train_cmd = "train --cache " + cache.string() + " --out " + out.string() +
                                  " --epochs 4 --batch 8 --seed 11";

    const RunResult first = run_cli(train_cmd);
    CHECK(first.exit_code == 0);
    for (const char* artifact : {"model.qnnw", "metrics.json", "curves.csv", "confusion.csv"}) {
        CHECK(fs::exists(out / artifact));
    }
    const std::string metrics = slurp(out / "metrics.json");
    const std::string model = slurp(out / "model.qnnw");
    const std::string curves = slurp(out / "curves.csv");
    CHECK(curves.rfind("epoch,train_loss,val_loss,train_acc,val_acc\n", 0) == 0);
    CHECK(line_count(curves) == 5);  // header + 4 epochs

    const RunResult again = run_cli(train_cmd);
    CHECK(again.exit_code == 0);
    CHECK(slurp(out / "metrics.json") == metrics);
    CHECK(slurp(out / "model.qnnw") == model);
    CHECK(slurp(out / "curves.csv") == curves);

    const fs::path empty = workspace() / "empty_cache";
    fs::create_directories(empty);
    CHECK(run_cli("train --cache " + empty.string() + " --out " + (workspace() / "x").string())
              .exit_code == 2);
}

TEST_CASE("eval prints accuracy consistent with confusion.csv") {
    const fs::path cache = workspace() / "cache";
    const fs::path out = workspace() / "run";

    const RunResult result = run_cli("eval --model " + (out / "model.qnnw").string() +
                                     " --cache " + cache.string() + " --split val --seed 11");
    CHECK(result.exit_code == 0);
    REQUIRE(result.output.find("accuracy=") != std::string::npos);

    const std::string confusion = slurp(out / "confusion.csv");
    long long trace = 0;
    long long total = 0;
    std::istringstream rows(confusion);
    std::string line;
    int r = 0;
    while (std::getline(rows, line)) {
        std::istringstream cells(line);
        std::string cell;
        int c = 0;
        while (std::getline(cells, cell, ',')) {
            const long long v = std::stoll(cell);
            total += v;
            trace += r == c ? v : 0;
            ++c;
        }
        ++r;
    }
    CHECK(r == 3);
    CHECK(total > 0);

    const std::string metrics = slurp(out / "metrics.json");
    const auto pos = metrics.find("\"val_accuracy\": ");
    REQUIRE(pos != std::string::npos);
    const double reported = std::stod(metrics.substr(pos + 16));
    CHECK(reported == static_cast<double>(trace) / static_cast<double>(total));

    // eval accuracy on the val split must reproduce the reported one
    const auto acc_pos = result.output.find("accuracy=");
    const double eval_acc = std::stod(result.output.substr(acc_pos + 9));
    CHECK(eval_acc == reported);

    // the train side of the same split also evaluates cleanly
    const RunResult train_side = run_cli("eval --model " + (out / "model.qnnw").string() +
                                         " --cache " + cache.string() +
                                         " --split train --seed 11");
    CHECK(train_side.exit_code == 0);
    CHECK(train_side.output.find("samples=19 ") != std::string::npos);
}

TEST_CASE("predict prints a normalized distribution and a label") {
    const fs::path data = workspace() / "data";
    const fs::path out = workspace() / "run";
    const RunResult result = run_cli("predict --model " + (out / "model.qnnw").string() +
                                     " --image " + (data / "c2_00001.pgm").string());
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("predicted: ") != std::string::npos);

    double sum = 0.0;
    std::istringstream lines(result.output);
    std::string line;
    int prob_lines = 0;
    while (std::getline(lines, line)) {
        if (line.rfind("predicted:", 0) == 0) {
            continue;
        }
        const auto space = line.rfind(' ');
        REQUIRE(space != std::string::npos);
        sum += std::stod(line.substr(space + 1));
        ++prob_lines;
    }
    CHECK(prob_lines == 3);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

    // a training image of the diagonal-bar class comes back as pituitary
    const RunResult bar = run_cli("predict --model " + (out / "model.qnnw").string() +
                                  " --image " + (data / "c3_00002.pgm").string());
    CHECK(bar.exit_code == 0);
    CHECK(bar.output.find("predicted: pituitary") != std::string::npos);
}

TEST_CASE("corrupt checkpoint is a clean exit 2") {
    const fs::path out = workspace() / "run";
    const fs::path bad = workspace() / "bad.qnnw";
    auto bytes = quanv::read_file_bytes((out / "model.qnnw").string());
    bytes[bytes.size() / 2] ^= 0xFF;
    quanv::write_file_atomic(bad.string(), bytes);

    const fs::path cache = workspace() / "cache";
    CHECK(run_cli("eval --model " + bad.string() + " --cache " + cache.string()).exit_code == 2);
    const fs::path data = workspace() / "data";
    CHECK(run_cli("predict --model " + bad.string() + " --image " +
                  (data / "c1_00000.pgm").string())
              .exit_code == 2);
}

TEST_CASE("usage errors exit with 2") {
    CHECK(run_cli("train").exit_code == 2);           // missing required flags
    CHECK(run_cli("nonsense").exit_code == 2);        // unknown subcommand
    CHECK(run_cli("circuit").exit_code == 2);         // missing sub-subcommand
    CHECK(run_cli("--help").exit_code == 0);
}

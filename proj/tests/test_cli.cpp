// Drives the installed CLI binary end to end through a scratch directory.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "glie/dataset.hpp"

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return GLIE_CLI_PATH; }

struct Scratch {
    fs::path dir;
    Scratch() {
        dir = fs::temp_directory_path() /
              ("glie_cli_" + std::to_string(static_cast<unsigned>(::getpid())) + "_" +
               std::to_string(counter()++));
        fs::create_directories(dir);
    }
    ~Scratch() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

int run(const std::string& args) {
    const std::string cmd = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

long count_lines(const std::string& path) {
    std::ifstream in(path);
    long n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

long count_spans(const std::string& pred_path) {
    std::ifstream in(pred_path);
    std::string line;
    long n = 0;
    while (std::getline(in, line)) {
        std::size_t pos = 0;
        // spans are arrays of arrays; count '[' pairs beyond the outer one
        const std::size_t spans_at = line.find("\"spans\":[");
        if (spans_at == std::string::npos) continue;
        pos = spans_at + 9;
        int depth = 1;
        for (; pos < line.size() && depth > 0; ++pos) {
            if (line[pos] == '[') {
                if (depth == 1) ++n;
                ++depth;
            } else if (line[pos] == ']') {
                --depth;
            }
        }
    }
    return n;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("missing inputs and bad usage produce the documented exit codes") {
    Scratch s;
    CHECK(run("predict --model " + s.path("nope.bin") + " --data " + s.path("nope.jsonl") +
              " --out " + s.path("p.jsonl")) == 3);
    CHECK(run("definitely-not-a-command") == 1);
    CHECK(run("train") == 1);  // missing required options

    // A malformed dataset is a validation failure.
    std::ofstream bad(s.path("bad.jsonl"));
    bad << "{\"oops\": true}\n";
    bad.close();
    CHECK(run("gen-data --tasks ner --n 5 --seed 1 --out " + s.path("d")) == 0);
    CHECK(run("train --data " + s.path("bad.jsonl") + " --out " + s.path("t") +
              " --steps 1 --hidden 8") == 2);
    CHECK(run("predict --model " + s.path("t/model.bin") + " --data " + s.path("bad.jsonl") +
              " --out " + s.path("p.jsonl") + " --task not-a-task") == 3);
}

TEST_CASE("the full train-predict-evaluate loop runs and reports") {
    Scratch s;
    REQUIRE(run("gen-data --tasks ner --n 40 --seed 1 --out " + s.path("train_d")) == 0);
    REQUIRE(run("gen-data --tasks ner --n 15 --seed 2 --out " + s.path("held_d")) == 0);
    REQUIRE(run("train --data " + s.path("train_d/ner.jsonl") + " --out " + s.path("run") +
                " --seed 5 --hidden 16 --steps 120 --lr-encoder 5e-3 --lr-other 5e-3") == 0);
    CHECK(fs::exists(s.path("run/model.bin")));
    CHECK(fs::exists(s.path("run/loss.csv")));
    CHECK(count_lines(s.path("run/loss.csv")) == 121);  // header + one row per step

    REQUIRE(run("predict --model " + s.path("run/model.bin") + " --task ner --data " +
                s.path("held_d/ner.jsonl") + " --out " + s.path("preds.jsonl")) == 0);
    CHECK(count_lines(s.path("preds.jsonl")) == 15);

    REQUIRE(run("evaluate --task ner --pred " + s.path("preds.jsonl") + " --gold " +
                s.path("held_d/ner.jsonl") + " --out " + s.path("report")) == 0);
    const std::string table = slurp(s.path("report/report.txt"));
    CHECK(table.find("Precision") != std::string::npos);
    CHECK(table.find("Average") != std::string::npos);
    const std::string json = slurp(s.path("report/report.json"));
    CHECK(json.find("\"average\"") != std::string::npos);
}

TEST_CASE("a higher threshold never yields more spans") {
    Scratch s;
    REQUIRE(run("gen-data --tasks ner --n 30 --seed 3 --out " + s.path("d")) == 0);
    REQUIRE(run("train --data " + s.path("d/ner.jsonl") + " --out " + s.path("run") +
                " --seed 7 --hidden 16 --steps 150 --lr-encoder 5e-3 --lr-other 5e-3") == 0);
    REQUIRE(run("predict --model " + s.path("run/model.bin") + " --task ner --data " +
                s.path("d/ner.jsonl") + " --out " + s.path("p_default.jsonl")) == 0);
    REQUIRE(run("predict --model " + s.path("run/model.bin") + " --task ner --data " +
                s.path("d/ner.jsonl") + " --out " + s.path("p_high.jsonl") +
                " --threshold 0.9") == 0);
    CHECK(count_spans(s.path("p_high.jsonl")) <= count_spans(s.path("p_default.jsonl")));
}

TEST_CASE("multi-dataset evaluation emits one row per dataset plus the average") {
    Scratch s;
    REQUIRE(run("gen-data --tasks ner --n 10 --seed 4 --out " + s.path("a")) == 0);
    REQUIRE(run("gen-data --tasks ner --n 10 --seed 5 --out " + s.path("b")) == 0);

    // Perfect "predictions" straight from the gold annotations.
    for (const char* which : {"a", "b"}) {
        const auto gold = glie::load_dataset(s.path(std::string(which) + "/ner.jsonl"));
        std::ofstream out(s.path(std::string(which) + "_pred.jsonl"));
        for (const auto& ex : gold) {
            out << "{\"spans\":[";
            for (std::size_t i = 0; i < ex.spans.size(); ++i) {
                if (i) out << ',';
                out << '[' << ex.spans[i].start << ',' << ex.spans[i].end << ",\""
                    << ex.spans[i].label << "\",1.0]";
            }
            out << "]}\n";
        }
    }
    REQUIRE(run("evaluate --task ner --pred " + s.path("a_pred.jsonl") + " " +
                s.path("b_pred.jsonl") + " --gold " + s.path("a/ner.jsonl") + " " +
                s.path("b/ner.jsonl") + " --out " + s.path("rep")) == 0);
    const std::string table = slurp(s.path("rep/report.txt"));
    CHECK(table.find("100.00%") != std::string::npos);
    CHECK(table.find("1.0000") != std::string::npos);
    CHECK(table.find("Average") != std::string::npos);
    const std::string json = slurp(s.path("rep/report.json"));
    CHECK(json.find("\"value\": 1.0") != std::string::npos);
}

TEST_CASE("gen-data rejects non-positive counts") {
    Scratch s;
    CHECK(run("gen-data --tasks ner --n 0 --seed 1 --out " + s.path("d")) == 1);
}

} // TEST_SUITE

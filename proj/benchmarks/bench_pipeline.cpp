#include <benchmark/benchmark.h>

#include "glie/decoder.hpp"
#include "glie/metrics.hpp"
#include "glie/model.hpp"
#include "glie/rng.hpp"
#include "glie/toydata.hpp"
#include "glie/training.hpp"

using namespace glie;

namespace {

Model bench_model(int hidden) {
    HeadHyperparams hp;
    hp.hidden_size = hidden;
    return init_model(12345, hp);
}

std::vector<PackedInput> bench_batch(int batch, int len, int n_labels) {
    std::vector<std::string> labels;
    for (int i = 0; i < n_labels; ++i) labels.push_back("type" + std::to_string(i));
    TokenizedText text;
    Rng rng(7);
    for (int i = 0; i < len; ++i) {
        text.tokens.push_back("word" + std::to_string(rng.uniform_int(0, 99)));
    }
    std::vector<PackedInput> out;
    for (int b = 0; b < batch; ++b) {
        out.push_back(pack_input(labels, "", text));
    }
    return out;
}

void BM_Encode(benchmark::State& state) {
    const Model model = bench_model(64);
    const auto batch = bench_batch(8, 64, 10);
    for (auto _ : state) {
        EncodeResult r = encode(batch, model.seed, model.params.bilstm);
        benchmark::DoNotOptimize(r.tokens.data());
    }
}
BENCHMARK(BM_Encode);

void BM_HeadForward(benchmark::State& state) {
    const Model model = bench_model(64);
    const auto batch = bench_batch(8, 64, 10);
    const EncodeResult enc = encode(batch, model.seed, model.params.bilstm);
    for (auto _ : state) {
        Tensor s = forward_scores(enc.tokens, enc.labels, model.params.head);
        benchmark::DoNotOptimize(s.data());
    }
}
BENCHMARK(BM_HeadForward);

void BM_Decode(benchmark::State& state) {
    const Model model = bench_model(64);
    const auto batch = bench_batch(8, 64, 10);
    const ForwardResult fwd = model_forward(model, batch);
    std::vector<std::string> labels;
    for (int i = 0; i < 10; ++i) labels.push_back("type" + std::to_string(i));
    for (auto _ : state) {
        auto spans = decode(fwd.scores, fwd.enc.mask, labels, TaskKind::ner, {}, model.hp);
        benchmark::DoNotOptimize(spans.size());
    }
}
BENCHMARK(BM_Decode);

void BM_TrainStep(benchmark::State& state) {
    Model model = bench_model(32);
    const auto data = gen_toy_examples(TaskKind::ner, 8, 3);
    AdamState adam = adam_init(model.params);
    for (auto _ : state) {
        ModelParams grads;
        const double loss = batch_loss_and_grads(model, data, 0.75, 0.0, 0.0, &grads);
        adam_step(model.params, grads, adam, {1e-3, 1e-3}, 0.01);
        benchmark::DoNotOptimize(loss);
    }
}
BENCHMARK(BM_TrainStep);

void BM_RougeL(benchmark::State& state) {
    Rng rng(3);
    std::string a, b;
    for (int i = 0; i < 80; ++i) {
        a += "w" + std::to_string(rng.uniform_int(0, 30)) + " ";
        b += "w" + std::to_string(rng.uniform_int(0, 30)) + " ";
    }
    for (auto _ : state) {
        RougeScore r = rouge_l(a, b);
        benchmark::DoNotOptimize(r.f1);
    }
}
BENCHMARK(BM_RougeL);

} // namespace

BENCHMARK_MAIN();

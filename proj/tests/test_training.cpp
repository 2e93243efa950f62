#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "glie/rng.hpp"
#include "glie/toydata.hpp"
#include "glie/training.hpp"
#include "support/oracles.hpp"

using namespace glie;

namespace {

AnnotatedExample tiny_example(std::vector<Span> spans, int len,
                              std::vector<std::string> labels) {
    AnnotatedExample ex;
    for (int i = 0; i < len; ++i) ex.text.tokens.push_back("tok" + std::to_string(i % 7));
    ex.spans = std::move(spans);
    ex.label_set = std::move(labels);
    return ex;
}

Model small_model(int hidden, std::uint64_t seed) {
    HeadHyperparams hp;
    hp.hidden_size = hidden;
    return init_model(seed, hp);
}

bool params_equal(const ModelParams& a, const ModelParams& b) {
    auto va = a.named_tensors();
    auto vb = b.named_tensors();
    for (std::size_t i = 0; i < va.size(); ++i) {
        if (va[i].second->size() != vb[i].second->size()) return false;
        for (std::size_t j = 0; j < va[i].second->size(); ++j) {
            if ((*va[i].second)[j] != (*vb[i].second)[j]) return false;
        }
    }
    return true;
}

} // namespace

TEST_SUITE("training") {

TEST_CASE("build_targets plants start, end, and inside channels") {
    AnnotatedExample ex = tiny_example({{1, 3, "c0", 1.0}}, 5, {"c0", "c1"});
    TargetTensor t = build_targets(ex, ex.label_set);
    CHECK(t.values.shape() == std::vector<int>{5, 2, 3});
    for (int l = 0; l < 5; ++l) {
        CHECK(t.values(l, 0, 0) == (l == 1 ? 1.0 : 0.0));
        CHECK(t.values(l, 0, 1) == (l == 3 ? 1.0 : 0.0));
        CHECK(t.values(l, 0, 2) == ((l >= 1 && l <= 3) ? 1.0 : 0.0));
        for (int ch = 0; ch < 3; ++ch) {
            CHECK(t.values(l, 1, ch) == 0.0);  // other class untouched
        }
    }
}

TEST_CASE("single-token spans set all three channels at one position") {
    AnnotatedExample ex = tiny_example({{2, 2, "c0", 1.0}}, 4, {"c0"});
    TargetTensor t = build_targets(ex, ex.label_set);
    CHECK(t.values(2, 0, 0) == 1.0);
    CHECK(t.values(2, 0, 1) == 1.0);
    CHECK(t.values(2, 0, 2) == 1.0);
    CHECK(t.values(1, 0, 2) == 0.0);
}

TEST_CASE("disjoint spans of one class OR together") {
    AnnotatedExample ex = tiny_example({{0, 1, "c0", 1.0}, {3, 4, "c0", 1.0}}, 6, {"c0"});
    TargetTensor t = build_targets(ex, ex.label_set);
    CHECK(t.values(0, 0, 0) == 1.0);
    CHECK(t.values(3, 0, 0) == 1.0);
    CHECK(t.values(1, 0, 1) == 1.0);
    CHECK(t.values(4, 0, 1) == 1.0);
    for (int l : {0, 1, 3, 4}) CHECK(t.values(l, 0, 2) == 1.0);
    CHECK(t.values(2, 0, 2) == 0.0);
}

TEST_CASE("build_targets rejects labels outside the order") {
    AnnotatedExample ex = tiny_example({{0, 0, "mystery", 1.0}}, 3, {"c0"});
    try {
        build_targets(ex, {"c0"});
        FAIL("expected LabelNotInOrder");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::label_not_in_order);
    }
}

TEST_CASE("stack_targets masks padding and inactive label columns") {
    AnnotatedExample a = tiny_example({{0, 0, "c0", 1.0}}, 2, {"c0"});
    AnnotatedExample b = tiny_example({{1, 2, "c1", 1.0}}, 4, {"c0", "c1"});
    TargetTensor batch = stack_targets({build_targets(a, a.label_set),
                                        build_targets(b, b.label_set)},
                                       4, 2);
    CHECK(batch.values.shape() == std::vector<int>{2, 4, 2, 3});
    CHECK(batch.mask(0, 1, 0, 0) == 1.0);
    CHECK(batch.mask(0, 2, 0, 0) == 0.0);  // padding rows
    CHECK(batch.mask(0, 0, 1, 0) == 0.0);  // inactive label column
    CHECK(batch.mask(1, 3, 1, 2) == 1.0);
}

TEST_CASE("smooth_targets applies the smoothing identity") {
    AnnotatedExample ex = tiny_example({{0, 1, "c0", 1.0}}, 3, {"c0"});
    TargetTensor t = build_targets(ex, ex.label_set);
    TargetTensor s = smooth_targets(t, 0.2);
    CHECK(s.values(0, 0, 0) == doctest::Approx(0.9));
    CHECK(s.values(2, 0, 0) == doctest::Approx(0.1));

    TargetTensor same = smooth_targets(t, 0.0);
    for (std::size_t i = 0; i < t.values.size(); ++i) {
        CHECK(same.values[i] == t.values[i]);
    }
    CHECK_THROWS_AS(smooth_targets(t, 1.0), Error);
    CHECK_THROWS_AS(smooth_targets(t, -0.1), Error);
}

TEST_CASE("smoothing bounds and the composition identity hold") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        TargetTensor t;
        t.values = Tensor({4, 3, 3});
        t.mask = Tensor({4, 3, 3});
        t.mask.fill(1.0);
        for (std::size_t i = 0; i < t.values.size(); ++i) {
            t.values[i] = rng.next_double() < 0.5 ? 0.0 : 1.0;
        }
        const double a = rng.uniform(0.0, 0.9);
        const double b = rng.uniform(0.0, 0.9);
        TargetTensor once = smooth_targets(t, a);
        for (std::size_t i = 0; i < once.values.size(); ++i) {
            CHECK(once.values[i] >= a / 2.0 - 1e-15);
            CHECK(once.values[i] <= 1.0 - a / 2.0 + 1e-15);
        }
        // Smoothing by a then b equals one pass with 1 - (1-a)(1-b).
        TargetTensor twice = smooth_targets(once, b);
        TargetTensor combined = smooth_targets(t, 1.0 - (1.0 - a) * (1.0 - b));
        for (std::size_t i = 0; i < twice.values.size(); ++i) {
            CHECK(std::fabs(twice.values[i] - combined.values[i]) < 1e-12);
        }
    }
}

TEST_CASE("weighted_bce matches the closed-form fixture") {
    Tensor probs({1, 1, 1, 3});
    TargetTensor targets;
    targets.values = Tensor({1, 1, 1, 3});
    targets.mask = Tensor({1, 1, 1, 3});
    probs(0, 0, 0, 0) = 0.5;
    targets.values(0, 0, 0, 0) = 1.0;
    targets.mask(0, 0, 0, 0) = 1.0;
    const BceResult r = weighted_bce(probs, targets, 0.75, 0.0);
    CHECK(r.loss == doctest::Approx(0.75 * std::log(2.0)).epsilon(1e-12));

    // Saturating toward the hard target drives the loss to zero.
    probs(0, 0, 0, 0) = 1.0 - 1e-12;
    CHECK(weighted_bce(probs, targets, 0.75, 0.0).loss < 1e-9);
}

TEST_CASE("alpha 0.5 halves the unweighted BCE") {
    Rng rng(9);
    Tensor probs({2, 3, 2, 3});
    TargetTensor targets;
    targets.values = Tensor(probs.shape());
    targets.mask = Tensor(probs.shape());
    targets.mask.fill(1.0);
    for (std::size_t i = 0; i < probs.size(); ++i) {
        probs[i] = rng.uniform(0.05, 0.95);
        targets.values[i] = rng.next_double() < 0.5 ? 0.0 : 1.0;
    }
    const BceResult weighted = weighted_bce(probs, targets, 0.5, 0.0);
    double plain = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = probs[i];
        const double t = targets.values[i];
        plain += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
    }
    plain /= static_cast<double>(probs.size());
    CHECK(weighted.loss == doctest::Approx(0.5 * plain).epsilon(1e-12));
}

TEST_CASE("bce gradients match finite differences, including focal gamma") {
    Rng rng(13);
    for (double gamma : {0.0, 2.0}) {
        Tensor logits({1, 4, 2, 3});
        TargetTensor targets;
        targets.values = Tensor(logits.shape());
        targets.mask = Tensor(logits.shape());
        for (std::size_t i = 0; i < logits.size(); ++i) {
            logits[i] = rng.uniform(-2.0, 2.0);
            targets.values[i] = rng.next_double() < 0.5 ? 0.1 : 0.9;
            targets.mask[i] = rng.next_double() < 0.8 ? 1.0 : 0.0;
        }
        auto loss_of = [&](const Tensor& z) {
            Tensor p(z.shape());
            for (std::size_t i = 0; i < z.size(); ++i) p[i] = 1.0 / (1.0 + std::exp(-z[i]));
            return weighted_bce(p, targets, 0.75, gamma).loss;
        };
        Tensor probs(logits.shape());
        for (std::size_t i = 0; i < logits.size(); ++i) {
            probs[i] = 1.0 / (1.0 + std::exp(-logits[i]));
        }
        const BceResult r = weighted_bce(probs, targets, 0.75, gamma);
        const double h = 1e-6;
        for (std::size_t i = 0; i < logits.size(); ++i) {
            Tensor up = logits, down = logits;
            up[i] += h;
            down[i] -= h;
            const double numeric = (loss_of(up) - loss_of(down)) / (2.0 * h);
            CHECK(r.grad_logits[i] == doctest::Approx(numeric).epsilon(1e-5));
        }
    }
}

TEST_CASE("masked-out cells contribute neither loss nor gradient") {
    Tensor probs({1, 2, 1, 3});
    TargetTensor targets;
    targets.values = Tensor(probs.shape());
    targets.mask = Tensor(probs.shape());
    probs.fill(0.3);
    targets.values.fill(1.0);
    targets.mask(0, 0, 0, 0) = 1.0;  // only one live cell
    const BceResult r = weighted_bce(probs, targets, 0.75, 0.0);
    CHECK(r.loss == doctest::Approx(-0.75 * std::log(0.3)));
    for (std::size_t i = 1; i < probs.size(); ++i) {
        CHECK(r.grad_logits[i] == 0.0);
    }
}

TEST_CASE("lr_schedule endpoints and midpoints") {
    CHECK(lr_schedule(Schedule::cosine, 0, 100, 3e-4) == doctest::Approx(3e-4));
    CHECK(lr_schedule(Schedule::cosine, 100, 100, 3e-4) == doctest::Approx(0.0));
    CHECK(lr_schedule(Schedule::cosine, 50, 100, 3e-4) == doctest::Approx(1.5e-4));
    CHECK(lr_schedule(Schedule::linear, 50, 100, 2e-4) == doctest::Approx(1e-4));
    CHECK(lr_schedule(Schedule::linear, 0, 100, 2e-4) == doctest::Approx(2e-4));
    CHECK(lr_schedule(Schedule::constant, 99, 100, 5e-5) == doctest::Approx(5e-5));
    CHECK_THROWS_AS(lr_schedule(Schedule::linear, 101, 100, 1.0), Error);
    CHECK_THROWS_AS(lr_schedule(Schedule::linear, -1, 100, 1.0), Error);
}

TEST_CASE("adam leaves parameters alone at zero gradient and no decay") {
    ModelParams params = ModelParams::init(4, 12, Rng(21));
    ModelParams before = params;
    ModelParams grads = ModelParams::zeros(4, 12);
    AdamState state = adam_init(params);
    adam_step(params, grads, state, {1e-3, 1e-3}, 0.0);
    CHECK(params_equal(params, before));
}

TEST_CASE("the first adam step moves a unit-gradient scalar by about lr") {
    ModelParams params = ModelParams::zeros(4, 12);
    ModelParams grads = ModelParams::zeros(4, 12);
    grads.head.b2(0) = 1.0;
    AdamState state = adam_init(params);
    adam_step(params, grads, state, {1e-3, 1e-3}, 0.0);
    CHECK(params.head.b2(0) == doctest::Approx(-1e-3).epsilon(1e-6));
}

TEST_CASE("parameter groups receive their own learning rates") {
    ModelParams params = ModelParams::zeros(4, 12);
    ModelParams grads = ModelParams::zeros(4, 12);
    grads.bilstm.fw.bias(0) = 1.0;
    grads.head.b2(0) = 1.0;
    AdamState state = adam_init(params);
    adam_step(params, grads, state, {1e-4, 1e-2}, 0.0);
    CHECK(params.bilstm.fw.bias(0) == doctest::Approx(-1e-4).epsilon(1e-6));
    CHECK(params.head.b2(0) == doctest::Approx(-1e-2).epsilon(1e-6));
}

TEST_CASE("adam rejects mismatched state") {
    ModelParams params = ModelParams::zeros(4, 12);
    ModelParams grads = ModelParams::zeros(4, 12);
    AdamState state = adam_init(params);
    state.m = ModelParams::zeros(4, 6);
    try {
        adam_step(params, grads, state, {1e-3, 1e-3}, 0.0);
        FAIL("expected StateShapeMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::state_shape_mismatch);
    }
}

TEST_CASE("full-loss gradients match finite differences through the biLSTM") {
    for (std::uint64_t seed : {501u, 502u, 503u}) {
        Model model = small_model(4, seed);
        std::vector<AnnotatedExample> batch = {
            tiny_example({{1, 2, "c0", 1.0}}, 6, {"c0", "c1", "c2"}),
            tiny_example({{0, 0, "c2", 1.0}, {3, 5, "c1", 1.0}}, 6, {"c0", "c1", "c2"}),
        };
        ModelParams analytic;
        batch_loss_and_grads(model, batch, 0.75, 0.0, 0.1, &analytic);
        auto loss = [&]() {
            return batch_loss_and_grads(model, batch, 0.75, 0.0, 0.1, nullptr);
        };
        ModelParams numeric = testing::finite_difference_grads(model.params, loss, 1e-5);
        CHECK(testing::max_relative_grad_error(analytic, numeric) < 1e-4);
    }
}

TEST_CASE("training reduces the loss on the planted toy task") {
    Model model = small_model(16, 7);
    std::vector<AnnotatedExample> data = gen_toy_examples(TaskKind::ner, 50, 11);
    TrainConfig cfg;
    cfg.steps = 200;
    cfg.batch_size = 8;
    cfg.lr_encoder = 2e-3;
    cfg.lr_other = 2e-3;
    cfg.schedule = Schedule::cosine;
    TrainResult result = train(model, data, cfg, 3);
    REQUIRE(result.history.size() == 200);
    CHECK(result.history.back().loss < result.history.front().loss);
    CHECK(result.history.front().lr_encoder == doctest::Approx(2e-3));
}

TEST_CASE("steps = 0 leaves the model untouched") {
    Model model = small_model(8, 15);
    ModelParams before = model.params;
    std::vector<AnnotatedExample> data = gen_toy_examples(TaskKind::ner, 5, 1);
    TrainConfig cfg;
    cfg.steps = 0;
    TrainResult result = train(model, data, cfg, 1);
    CHECK(result.history.empty());
    CHECK(params_equal(model.params, before));
}

TEST_CASE("training twice with one seed gives bit-identical histories") {
    std::vector<AnnotatedExample> data = gen_toy_examples(TaskKind::ner, 20, 5);
    TrainConfig cfg;
    cfg.steps = 30;
    cfg.batch_size = 4;
    Model m1 = small_model(8, 33);
    Model m2 = small_model(8, 33);
    TrainResult r1 = train(m1, data, cfg, 9);
    TrainResult r2 = train(m2, data, cfg, 9);
    REQUIRE(r1.history.size() == r2.history.size());
    for (std::size_t i = 0; i < r1.history.size(); ++i) {
        CHECK(r1.history[i].loss == r2.history[i].loss);
    }
    CHECK(params_equal(m1.params, m2.params));
}

TEST_CASE("zero learning rates leave parameters bit-identical") {
    Model model = small_model(8, 41);
    ModelParams before = model.params;
    std::vector<AnnotatedExample> data = gen_toy_examples(TaskKind::ner, 10, 2);
    TrainConfig cfg;
    cfg.steps = 5;
    cfg.lr_encoder = 0.0;
    cfg.lr_other = 0.0;
    train(model, data, cfg, 1);
    CHECK(params_equal(model.params, before));
}

TEST_CASE("prediction rejects over-long texts and empty label lists") {
    Model model = small_model(8, 2);
    TokenizedText longest;
    longest.tokens.assign(769, "w");
    try {
        predict_spans(model, {"person"}, "", longest, TaskKind::ner);
        FAIL("expected SequenceTooLong");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::sequence_too_long);
    }
    TokenizedText ok;
    ok.tokens = {"w"};
    CHECK_THROWS_AS(predict_spans(model, {}, "", ok, TaskKind::ner), Error);
}

TEST_CASE("training rejects an empty dataset") {
    Model model = small_model(8, 1);
    TrainConfig cfg;
    try {
        train(model, {}, cfg, 1);
        FAIL("expected EmptyDataset");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::empty_dataset);
    }
}

TEST_CASE("loss history lands in a parseable CSV") {
    const auto path = std::filesystem::temp_directory_path() / "glie_loss_test.csv";
    write_loss_csv(path.string(), {{1, 1e-5, 5e-5, 0.75}, {2, 9e-6, 4.5e-5, 0.5}});
    std::ifstream in(path);
    std::string header, row1;
    std::getline(in, header);
    std::getline(in, row1);
    CHECK(header == "step,lr_encoder,lr_other,loss");
    CHECK(row1 == "1,1e-05,5e-05,0.75");
    std::filesystem::remove(path);
}

TEST_CASE("built-in presets carry the documented hyperparameters") {
    const TrainConfig multitask = preset_config("multitask");
    CHECK(multitask.steps == 500);
    CHECK(multitask.alpha_pos == doctest::Approx(0.75));
    CHECK(multitask.gamma == 0.0);
    CHECK(multitask.lr_encoder == doctest::Approx(5e-6));
    CHECK(multitask.lr_other == doctest::Approx(7e-6));
    CHECK(multitask.label_smoothing == doctest::Approx(0.2));

    const TrainConfig large = preset_config("large-v2.1");
    CHECK(large.steps == 1000);
    CHECK(large.lr_other == doctest::Approx(5e-6));
    CHECK(large.label_smoothing == doctest::Approx(0.01));

    const TrainConfig nuner = preset_config("nuner-zero-span");
    CHECK(nuner.steps == 100);
    CHECK(nuner.label_smoothing == doctest::Approx(0.01));

    CHECK_THROWS_AS(preset_config("bogus"), Error);
}

TEST_CASE("train configs load from JSON with preset overlays") {
    TrainConfig cfg = train_config_from_json(
        R"({"preset": "multitask", "steps": 50, "schedule": "constant"})");
    CHECK(cfg.steps == 50);
    CHECK(cfg.schedule == Schedule::constant);
    CHECK(cfg.label_smoothing == doctest::Approx(0.2));

    CHECK_THROWS_AS(train_config_from_json("[1, 2]"), Error);
    CHECK_THROWS_AS(train_config_from_json(R"({"alpha_pos": 1.5})"), Error);
    CHECK_THROWS_AS(train_config_from_json(R"({"label_smoothing": 1.0})"), Error);
}

TEST_CASE("self-learning without confident predictions raises NoPseudoLabels") {
    Model model = small_model(8, 77);
    std::vector<UnlabeledExample> unlabeled;
    for (const AnnotatedExample& ex : gen_toy_examples(TaskKind::ner, 5, 3)) {
        unlabeled.push_back({ex.text, ex.label_set});
    }
    std::vector<AnnotatedExample> heldout = gen_toy_examples(TaskKind::ner, 5, 4);
    TrainConfig cfg = preset_config("multitask");
    cfg.steps = 2;
    try {
        self_learn(model, unlabeled, heldout, cfg, 0.999999, 1);
        FAIL("expected NoPseudoLabels");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::no_pseudo_labels);
    }
}

TEST_CASE("self-learning emits pre and post F1 with their delta") {
    // A briefly trained weak model so some predictions clear the threshold.
    Model model = small_model(16, 19);
    std::vector<AnnotatedExample> seed_data = gen_toy_examples(TaskKind::ner, 30, 21);
    TrainConfig warmup;
    warmup.steps = 150;
    warmup.batch_size = 8;
    warmup.lr_encoder = 5e-3;
    warmup.lr_other = 5e-3;
    train(model, seed_data, warmup, 5);

    std::vector<UnlabeledExample> unlabeled;
    for (const AnnotatedExample& ex : gen_toy_examples(TaskKind::ner, 30, 22)) {
        unlabeled.push_back({ex.text, ex.label_set});
    }
    std::vector<AnnotatedExample> heldout = gen_toy_examples(TaskKind::ner, 20, 23);

    TrainConfig cfg = preset_config("multitask");
    cfg.steps = 25;
    const SelfLearnReport report = self_learn(model, unlabeled, heldout, cfg, 0.5, 7);
    CHECK(report.pseudo_examples > 0);
    CHECK(report.pseudo_spans > 0);
    CHECK(report.delta == doctest::Approx(report.post_f1 - report.pre_f1));
    CHECK(report.history.size() == 25);
    CHECK(report.pre_f1 >= 0.0);
    CHECK(report.pre_f1 <= 1.0);
    CHECK(report.post_f1 >= 0.0);
    CHECK(report.post_f1 <= 1.0);
}

} // TEST_SUITE

#include "glie/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "glie/dataset.hpp"
#include "glie/error.hpp"
#include "glie/logging.hpp"
#include "glie/metrics.hpp"
#include "glie/rng.hpp"

namespace glie {

std::string_view schedule_name(Schedule s) {
    switch (s) {
        case Schedule::cosine: return "cosine";
        case Schedule::linear: return "linear";
        case Schedule::constant: return "constant";
    }
    return "?";
}

Schedule parse_schedule(std::string_view name) {
    std::string v(name);
    for (auto& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (v == "cosine") return Schedule::cosine;
    if (v == "linear") return Schedule::linear;
    if (v == "constant") return Schedule::constant;
    fail(ErrorCode::parse_error, "unknown schedule '" + std::string(name) + "'");
}

// ============================================================================
// Configs and presets
// ============================================================================

namespace {

void validate_config(const TrainConfig& cfg) {
    if (cfg.steps < 0) fail(ErrorCode::parse_error, "steps must be >= 0");
    if (cfg.batch_size <= 0) fail(ErrorCode::parse_error, "batch_size must be positive");
    if (!(cfg.alpha_pos > 0.0 && cfg.alpha_pos < 1.0)) {
        fail(ErrorCode::alpha_out_of_range,
             "alpha_pos must lie in (0, 1), got " + std::to_string(cfg.alpha_pos));
    }
    if (!(cfg.label_smoothing >= 0.0 && cfg.label_smoothing < 1.0)) {
        fail(ErrorCode::alpha_out_of_range,
             "label_smoothing must lie in [0, 1), got " + std::to_string(cfg.label_smoothing));
    }
    if (cfg.gamma < 0.0) fail(ErrorCode::parse_error, "gamma must be >= 0");
    if (cfg.lr_encoder < 0.0 || cfg.lr_other < 0.0) {
        fail(ErrorCode::parse_error, "learning rates must be >= 0");
    }
}

} // namespace

TrainConfig preset_config(const std::string& name) {
    TrainConfig cfg;
    cfg.weight_decay = 0.01;
    cfg.batch_size = 8;
    cfg.schedule = Schedule::linear;
    cfg.alpha_pos = 0.75;
    cfg.gamma = 0.0;
    if (name == "multitask") {
        cfg.steps = 500;
        cfg.lr_encoder = 5e-6;
        cfg.lr_other = 7e-6;
        cfg.label_smoothing = 0.2;
    } else if (name == "large-v2.1") {
        cfg.steps = 1000;
        cfg.lr_encoder = 5e-6;
        cfg.lr_other = 5e-6;
        cfg.label_smoothing = 0.01;
    } else if (name == "nuner-zero-span") {
        cfg.steps = 100;
        cfg.lr_encoder = 5e-6;
        cfg.lr_other = 5e-6;
        cfg.label_smoothing = 0.01;
    } else {
        fail(ErrorCode::parse_error, "unknown preset '" + name + "'");
    }
    return cfg;
}

std::vector<std::string> preset_names() { return {"multitask", "large-v2.1", "nuner-zero-span"}; }

TrainConfig train_config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse_error, std::string("bad config JSON: ") + e.what());
    }
    if (!j.is_object()) fail(ErrorCode::parse_error, "config must be a JSON object");

    TrainConfig cfg;
    if (j.contains("preset")) {
        cfg = preset_config(j["preset"].get<std::string>());
    }
    try {
        if (j.contains("steps")) cfg.steps = j["steps"].get<int>();
        if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<int>();
        if (j.contains("lr_encoder")) cfg.lr_encoder = j["lr_encoder"].get<double>();
        if (j.contains("lr_other")) cfg.lr_other = j["lr_other"].get<double>();
        if (j.contains("weight_decay")) cfg.weight_decay = j["weight_decay"].get<double>();
        if (j.contains("schedule")) cfg.schedule = parse_schedule(j["schedule"].get<std::string>());
        if (j.contains("alpha_pos")) cfg.alpha_pos = j["alpha_pos"].get<double>();
        if (j.contains("label_smoothing")) cfg.label_smoothing = j["label_smoothing"].get<double>();
        if (j.contains("gamma")) cfg.gamma = j["gamma"].get<double>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse_error, std::string("bad config field: ") + e.what());
    }
    validate_config(cfg);
    return cfg;
}

TrainConfig load_train_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io_error, "cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return train_config_from_json(buf.str());
}

// ============================================================================
// Targets
// ============================================================================

TargetTensor build_targets(const AnnotatedExample& ex,
                           const std::vector<std::string>& label_order) {
    const int len = ex.text.length();
    const int n_labels = static_cast<int>(label_order.size());
    TargetTensor out;
    out.values = Tensor({len, n_labels, 3});
    out.mask = Tensor({len, n_labels, 3});
    out.mask.fill(1.0);

    for (const Span& s : ex.spans) {
        const std::string norm = normalize_label(s.label);
        int c = -1;
        for (int i = 0; i < n_labels; ++i) {
            if (normalize_label(label_order[static_cast<std::size_t>(i)]) == norm) {
                c = i;
                break;
            }
        }
        if (c < 0) {
            fail(ErrorCode::label_not_in_order,
                 "span label '" + s.label + "' missing from the label order");
        }
        if (s.start < 0 || s.start > s.end || s.end >= len) {
            fail(ErrorCode::span_out_of_range, "span outside the example text");
        }
        out.values(s.start, c, 0) = 1.0;
        out.values(s.end, c, 1) = 1.0;
        for (int k = s.start; k <= s.end; ++k) {
            out.values(k, c, 2) = 1.0;
        }
    }
    return out;
}

TargetTensor stack_targets(const std::vector<TargetTensor>& per_example, int max_len,
                           int max_labels) {
    const int batch = static_cast<int>(per_example.size());
    TargetTensor out;
    out.values = Tensor({batch, max_len, max_labels, 3});
    out.mask = Tensor({batch, max_len, max_labels, 3});
    for (int b = 0; b < batch; ++b) {
        const Tensor& v = per_example[static_cast<std::size_t>(b)].values;
        const int len = v.dim(0);
        const int n_labels = v.dim(1);
        if (len > max_len || n_labels > max_labels) {
            fail(ErrorCode::shape_mismatch, "example targets exceed the padded extents");
        }
        for (int l = 0; l < len; ++l) {
            for (int c = 0; c < n_labels; ++c) {
                for (int ch = 0; ch < 3; ++ch) {
                    out.values(b, l, c, ch) = v(l, c, ch);
                    out.mask(b, l, c, ch) = 1.0;
                }
            }
        }
    }
    return out;
}

TargetTensor smooth_targets(const TargetTensor& targets, double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0)) {
        fail(ErrorCode::alpha_out_of_range,
             "label smoothing alpha must lie in [0, 1), got " + std::to_string(alpha));
    }
    TargetTensor out;
    out.values = Tensor(targets.values.shape());
    out.mask = targets.mask;
    for (std::size_t i = 0; i < targets.values.size(); ++i) {
        out.values[i] = targets.values[i] * (1.0 - alpha) + 0.5 * alpha;
    }
    return out;
}

// ============================================================================
// Weighted BCE
// ============================================================================

BceResult weighted_bce(const Tensor& probs, const TargetTensor& targets, double alpha_pos,
                       double gamma) {
    if (!probs.same_shape(targets.values) || !probs.same_shape(targets.mask)) {
        fail(ErrorCode::shape_mismatch, "probabilities and targets must share a shape");
    }
    BceResult out;
    out.grad_logits = Tensor(probs.shape());

    long valid = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (targets.mask[i] != 0.0) ++valid;
    }
    if (valid == 0) {
        return out;
    }
    const double inv = 1.0 / static_cast<double>(valid);
    const double neg_w = 1.0 - alpha_pos;

    double loss = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (targets.mask[i] == 0.0) continue;
        const double p = probs[i];
        const double t = targets.values[i];
        // Clamp only protects fully saturated probabilities from -inf.
        const double ln_p = std::log(std::max(p, 1e-300));
        const double ln_1mp = std::log(std::max(1.0 - p, 1e-300));
        double cell_loss;
        double grad;
        if (gamma == 0.0) {
            cell_loss = -(alpha_pos * t * ln_p + neg_w * (1.0 - t) * ln_1mp);
            grad = neg_w * (1.0 - t) * p - alpha_pos * t * (1.0 - p);
        } else {
            const double f_pos = std::pow(1.0 - p, gamma);
            const double f_neg = std::pow(p, gamma);
            cell_loss = -(alpha_pos * t * f_pos * ln_p + neg_w * (1.0 - t) * f_neg * ln_1mp);
            grad = alpha_pos * t * f_pos * (gamma * p * ln_p - (1.0 - p)) +
                   neg_w * (1.0 - t) * f_neg * (p - gamma * (1.0 - p) * ln_1mp);
        }
        loss += cell_loss;
        out.grad_logits[i] = grad * inv;
    }
    out.loss = loss * inv;
    return out;
}

// ============================================================================
// Schedules and Adam
// ============================================================================

double lr_schedule(Schedule kind, long step, long total_steps, double base_lr) {
    if (total_steps <= 0 || step < 0 || step > total_steps) {
        fail(ErrorCode::step_out_of_range,
             "step " + std::to_string(step) + " outside [0, " + std::to_string(total_steps) + "]");
    }
    const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
    switch (kind) {
        case Schedule::cosine: return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
        case Schedule::linear: return base_lr * (1.0 - frac);
        case Schedule::constant: return base_lr;
    }
    return base_lr;
}

AdamState adam_init(const ModelParams& params) {
    AdamState state;
    state.m = ModelParams::zeros(params.hidden, params.mlp_hidden);
    state.v = ModelParams::zeros(params.hidden, params.mlp_hidden);
    return state;
}

namespace {
constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

bool is_encoder_block(const std::string& name) { return name.rfind("bilstm.", 0) == 0; }
} // namespace

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, GroupLr lr,
               double weight_decay) {
    if (!same_shapes(params, grads)) {
        fail(ErrorCode::shape_mismatch, "gradient shapes disagree with parameters");
    }
    if (!same_shapes(params, state.m) || !same_shapes(params, state.v)) {
        fail(ErrorCode::state_shape_mismatch, "optimizer state shapes disagree with parameters");
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));

    auto p_views = params.named_tensors();
    auto g_views = grads.named_tensors();
    auto m_views = state.m.named_tensors();
    auto v_views = state.v.named_tensors();
    for (std::size_t bi = 0; bi < p_views.size(); ++bi) {
        const double rate = is_encoder_block(p_views[bi].first) ? lr.encoder : lr.other;
        Tensor& theta = *p_views[bi].second;
        const Tensor& g = *g_views[bi].second;
        Tensor& m = *m_views[bi].second;
        Tensor& v = *v_views[bi].second;
        const double decay = 1.0 - rate * weight_decay;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            theta[i] *= decay;
            m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
            v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            theta[i] -= rate * m_hat / (std::sqrt(v_hat) + kAdamEps);
        }
    }
}

// ============================================================================
// Batch loss / gradients and the training loop
// ============================================================================

double batch_loss_and_grads(const Model& model, const std::vector<AnnotatedExample>& batch,
                            double alpha_pos, double gamma, double label_smoothing,
                            ModelParams* grads) {
    std::vector<PackedInput> packed;
    packed.reserve(batch.size());
    for (const AnnotatedExample& ex : batch) {
        packed.push_back(pack_input(ex.label_set, "", ex.text, model.hp.max_labels));
    }

    EncoderCache enc_cache;
    HeadCache head_cache;
    const bool need_grads = grads != nullptr;
    ForwardResult fwd = model_forward(model, packed, need_grads ? &enc_cache : nullptr,
                                      need_grads ? &head_cache : nullptr);

    std::vector<TargetTensor> per_example;
    per_example.reserve(batch.size());
    for (const AnnotatedExample& ex : batch) {
        per_example.push_back(build_targets(ex, ex.label_set));
    }
    TargetTensor targets =
        stack_targets(per_example, fwd.enc.mask.max_text, fwd.enc.mask.max_labels);
    targets = smooth_targets(targets, label_smoothing);

    const Tensor probs = probabilities(fwd.scores);
    BceResult bce = weighted_bce(probs, targets, alpha_pos, gamma);

    if (need_grads) {
        HeadGrads head_grads = head_backward(bce.grad_logits, head_cache, model.params.head);
        BiLstmParams lstm_grads = bilstm_zeros_like(model.params.bilstm);
        bilstm_backward(head_grads.d_tokens, enc_cache.lstm, model.params.bilstm, lstm_grads);
        grads->hidden = model.params.hidden;
        grads->mlp_hidden = model.params.mlp_hidden;
        grads->head = std::move(head_grads.params);
        grads->bilstm = std::move(lstm_grads);
    }
    return bce.loss;
}

TrainResult train(Model& model, const std::vector<AnnotatedExample>& dataset,
                  const TrainConfig& cfg, std::uint64_t seed) {
    validate_config(cfg);
    if (dataset.empty()) {
        fail(ErrorCode::empty_dataset, "training needs at least one example");
    }
    for (const AnnotatedExample& ex : dataset) {
        validate_example(ex, model.hp);
    }

    TrainResult result;
    if (cfg.steps == 0) {
        return result;
    }

    AdamState state = adam_init(model.params);
    Rng shuffle_rng = Rng(seed).split("shuffle");
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    std::size_t cursor = order.size();  // forces a shuffle on first use

    for (long step = 0; step < cfg.steps; ++step) {
        std::vector<AnnotatedExample> batch;
        batch.reserve(static_cast<std::size_t>(cfg.batch_size));
        for (int i = 0; i < cfg.batch_size; ++i) {
            if (cursor >= order.size()) {
                for (std::size_t k = order.size(); k > 1; --k) {
                    const int j = shuffle_rng.uniform_int(0, static_cast<int>(k) - 1);
                    std::swap(order[k - 1], order[static_cast<std::size_t>(j)]);
                }
                cursor = 0;
            }
            batch.push_back(dataset[order[cursor++]]);
        }

        const double lr_e = lr_schedule(cfg.schedule, step, cfg.steps, cfg.lr_encoder);
        const double lr_o = lr_schedule(cfg.schedule, step, cfg.steps, cfg.lr_other);

        ModelParams grads;
        const double loss = batch_loss_and_grads(model, batch, cfg.alpha_pos, cfg.gamma,
                                                 cfg.label_smoothing, &grads);
        adam_step(model.params, grads, state, {lr_e, lr_o}, cfg.weight_decay);

        result.history.push_back({step + 1, lr_e, lr_o, loss});
        if ((step + 1) % 100 == 0 || step + 1 == cfg.steps) {
            GLIE_INFO("step ", step + 1, "/", cfg.steps, " loss ", loss);
        }
    }
    return result;
}

void write_loss_csv(const std::string& path, const std::vector<TrainStepRow>& history) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io_error, "cannot write loss history '" + path + "'");
    out << "step,lr_encoder,lr_other,loss\n";
    out.precision(10);
    for (const TrainStepRow& row : history) {
        out << row.step << ',' << row.lr_encoder << ',' << row.lr_other << ',' << row.loss
            << '\n';
    }
}

// ============================================================================
// Self-learning
// ============================================================================

double evaluate_span_f1(const Model& model, const std::vector<AnnotatedExample>& dataset) {
    std::vector<std::vector<Span>> preds;
    preds.reserve(dataset.size());
    for (const AnnotatedExample& ex : dataset) {
        preds.push_back(predict_spans(model, ex.label_set, "", ex.text, TaskKind::ner));
    }
    return span_micro_f1(dataset, preds).f1;
}

SelfLearnReport self_learn(Model& model, const std::vector<UnlabeledExample>& unlabeled,
                           const std::vector<AnnotatedExample>& heldout, const TrainConfig& cfg,
                           double pseudo_threshold, std::uint64_t seed) {
    SelfLearnReport report;
    report.pre_f1 = evaluate_span_f1(model, heldout);

    DecodeConfig decode_cfg;
    decode_cfg.start_threshold = pseudo_threshold;
    decode_cfg.end_threshold = pseudo_threshold;
    decode_cfg.final_threshold = pseudo_threshold;

    std::vector<AnnotatedExample> pseudo;
    for (const UnlabeledExample& u : unlabeled) {
        std::vector<Span> spans =
            predict_spans(model, u.label_set, "", u.text, TaskKind::ner, decode_cfg);
        if (spans.empty()) continue;
        AnnotatedExample ex;
        ex.text = u.text;
        ex.spans = std::move(spans);
        ex.label_set.reserve(u.label_set.size());
        for (const std::string& l : u.label_set) {
            ex.label_set.push_back(normalize_label(l));
        }
        report.pseudo_spans += static_cast<long>(ex.spans.size());
        pseudo.push_back(std::move(ex));
    }
    report.pseudo_examples = static_cast<long>(pseudo.size());
    if (report.pseudo_spans == 0) {
        fail(ErrorCode::no_pseudo_labels,
             "no predictions cleared the pseudo-label threshold " +
                 std::to_string(pseudo_threshold));
    }
    GLIE_INFO("self-learning on ", report.pseudo_examples, " pseudo-labeled examples (",
              report.pseudo_spans, " spans)");

    TrainResult tr = train(model, pseudo, cfg, seed);
    report.history = std::move(tr.history);

    report.post_f1 = evaluate_span_f1(model, heldout);
    report.delta = report.post_f1 - report.pre_f1;
    return report;
}

} // namespace glie

// gliner-ie: toy-data generation, training, prediction, evaluation, and
// self-learning over the line-delimited dataset format. Every command is
// deterministic under a fixed --seed. Exit codes: 0 success, 1 usage error,
// 2 validation error, 3 runtime error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "glie/dataset.hpp"
#include "glie/logging.hpp"
#include "glie/metrics.hpp"
#include "glie/model.hpp"
#include "glie/tasks.hpp"
#include "glie/toydata.hpp"
#include "glie/training.hpp"
#include "glie/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

void ensure_output_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        glie::fail(glie::ErrorCode::io_error,
                   "cannot create output directory '" + dir + "': " + ec.message());
    }
}

void require_file(const std::string& path, const char* what) {
    if (!fs::exists(path)) {
        glie::fail(glie::ErrorCode::io_error,
                   std::string(what) + " file '" + path + "' does not exist");
    }
}

// Labels used to decode one record for a task: fixed single labels for the
// prompt-driven tasks, an explicit --labels list, or the record's own set.
std::vector<std::string> labels_for_record(glie::TaskKind task,
                                           const std::vector<std::string>& cli_labels,
                                           const glie::AnnotatedExample& ex) {
    switch (task) {
        case glie::TaskKind::question_answering: return {glie::kQaLabel};
        case glie::TaskKind::summarization: return {glie::kSummarizationLabel};
        case glie::TaskKind::open_ie: return {glie::kOpenIeLabel};
        default: break;
    }
    if (!cli_labels.empty()) return cli_labels;
    if (!ex.label_set.empty()) return ex.label_set;
    glie::fail(glie::ErrorCode::empty_labels,
               "no labels available; annotate the input or pass --labels");
}

json span_to_json(const glie::Span& s) {
    return json::array({s.start, s.end, s.label, s.score});
}

std::string serialize_answer(const glie::TaskAnswer& ans) {
    json line;
    json spans = json::array();
    for (const glie::Span& s : ans.spans) spans.push_back(span_to_json(s));
    line["spans"] = std::move(spans);
    switch (ans.kind) {
        case glie::TaskKind::question_answering:
            line["answer"] = ans.answer;
            line["score"] = ans.answer_score;
            break;
        case glie::TaskKind::summarization:
            line["summary"] = ans.summary;
            break;
        case glie::TaskKind::relation_extraction:
        case glie::TaskKind::open_ie:
            line["texts"] = ans.texts;
            line["best"] = ans.best;
            break;
        default:
            break;
    }
    return line.dump();
}

struct ParsedAnswer {
    std::vector<glie::Span> spans;
    std::string answer;
    std::string summary;
    std::string best;
};

ParsedAnswer parse_answer_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        glie::fail(glie::ErrorCode::parse_error, std::string("bad prediction line: ") + e.what());
    }
    ParsedAnswer out;
    if (j.contains("spans")) {
        for (const json& s : j["spans"]) {
            if (!s.is_array() || s.size() < 3) {
                glie::fail(glie::ErrorCode::parse_error, "prediction spans must be arrays");
            }
            glie::Span span;
            span.start = s[0].get<int>();
            span.end = s[1].get<int>();
            span.label = s[2].get<std::string>();
            span.score = s.size() > 3 ? s[3].get<double>() : 1.0;
            out.spans.push_back(span);
        }
    }
    if (j.contains("answer")) out.answer = j["answer"].get<std::string>();
    if (j.contains("summary")) out.summary = j["summary"].get<std::string>();
    if (j.contains("best")) out.best = j["best"].get<std::string>();
    return out;
}

std::vector<ParsedAnswer> load_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) glie::fail(glie::ErrorCode::io_error, "cannot open predictions '" + path + "'");
    std::vector<ParsedAnswer> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(parse_answer_line(line));
    }
    return out;
}

// Gold answers for the string-matched tasks: one string per gold span.
std::vector<std::string> gold_span_texts(const glie::AnnotatedExample& ex) {
    std::vector<std::string> out;
    for (const glie::Span& s : ex.spans) {
        out.push_back(glie::span_text(ex.text, s.start, s.end));
    }
    return out;
}

std::string gold_summary(const glie::AnnotatedExample& ex) {
    std::vector<glie::Span> ordered = ex.spans;
    std::sort(ordered.begin(), ordered.end(), [](const glie::Span& a, const glie::Span& b) {
        return a.start != b.start ? a.start < b.start : a.end < b.end;
    });
    std::string acc;
    for (const glie::Span& s : ordered) {
        if (!acc.empty()) acc += ' ';
        acc += glie::span_text(ex.text, s.start, s.end);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Subcommand options
// ---------------------------------------------------------------------------

struct GenDataOpts {
    std::string tasks = "ner";
    int n_examples = 100;
    std::uint64_t seed = 42;
    std::string out_dir;
};

struct TrainOpts {
    std::string data_path;
    std::string out_dir;
    std::string config_path;
    std::string preset;
    std::string labels;
    std::uint64_t seed = 42;
    int hidden = 32;
    // Optional overrides on top of the preset/config.
    std::optional<int> steps;
    std::optional<int> batch_size;
    std::optional<double> lr_encoder;
    std::optional<double> lr_other;
    std::optional<double> smoothing;
    std::optional<std::string> schedule;
};

struct PredictOpts {
    std::string model_path;
    std::string data_path;
    std::string out_path;
    std::string task = "ner";
    std::string labels;
    std::optional<double> threshold;
};

struct EvaluateOpts {
    std::string task = "ner";
    std::vector<std::string> pred_paths;
    std::vector<std::string> gold_paths;
    std::string out_dir;
    std::string model_name = "gliner-ie-toy";
};

struct SelfTrainOpts {
    std::string model_path;
    std::string unlabeled_path;
    std::string heldout_path;
    std::string out_dir;
    std::string config_path;
    std::string preset;
    std::string labels;
    double pseudo_threshold = 0.5;
    std::uint64_t seed = 42;
    std::optional<int> steps;
    std::optional<double> smoothing;
};

glie::TrainConfig resolve_config(const std::string& config_path, const std::string& preset) {
    if (!config_path.empty() && !preset.empty()) {
        glie::fail(glie::ErrorCode::parse_error, "pass either --config or --preset, not both");
    }
    if (!config_path.empty()) {
        require_file(config_path, "config");
        return glie::load_train_config(config_path);
    }
    if (!preset.empty()) {
        return glie::preset_config(preset);
    }
    return glie::TrainConfig{};
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_gen_data(const GenDataOpts& opts) {
    ensure_output_dir(opts.out_dir);
    for (const std::string& name : split_csv(opts.tasks)) {
        const glie::TaskKind task = glie::parse_task_kind(name);
        const std::vector<glie::AnnotatedExample> examples =
            glie::gen_toy_examples(task, opts.n_examples, opts.seed);
        glie::HeadHyperparams hp;
        for (const glie::AnnotatedExample& ex : examples) {
            glie::validate_example(ex, hp);
        }
        const fs::path path =
            fs::path(opts.out_dir) / (std::string(glie::task_kind_name(task)) + ".jsonl");
        glie::save_dataset(path.string(), examples);
        std::cout << "wrote " << examples.size() << " examples to " << path.string() << "\n";
    }
    return 0;
}

int cmd_train(const TrainOpts& opts) {
    require_file(opts.data_path, "dataset");
    ensure_output_dir(opts.out_dir);

    glie::TrainConfig cfg = resolve_config(opts.config_path, opts.preset);
    if (opts.steps) cfg.steps = *opts.steps;
    if (opts.batch_size) cfg.batch_size = *opts.batch_size;
    if (opts.lr_encoder) cfg.lr_encoder = *opts.lr_encoder;
    if (opts.lr_other) cfg.lr_other = *opts.lr_other;
    if (opts.smoothing) cfg.label_smoothing = *opts.smoothing;
    if (opts.schedule) cfg.schedule = glie::parse_schedule(*opts.schedule);

    std::vector<glie::AnnotatedExample> data = glie::load_dataset(opts.data_path);
    if (!opts.labels.empty()) {
        glie::apply_label_set(data, split_csv(opts.labels));
    }

    glie::HeadHyperparams hp;
    hp.hidden_size = opts.hidden;
    glie::Model model = glie::init_model(opts.seed, hp);

    const glie::TrainResult result = glie::train(model, data, cfg, opts.seed);

    const fs::path model_path = fs::path(opts.out_dir) / "model.bin";
    const fs::path csv_path = fs::path(opts.out_dir) / "loss.csv";
    glie::save_model(model_path.string(), model);
    glie::write_loss_csv(csv_path.string(), result.history);

    std::cout << "trained " << cfg.steps << " steps on " << data.size() << " examples\n";
    if (!result.history.empty()) {
        std::cout << "loss " << result.history.front().loss << " -> "
                  << result.history.back().loss << "\n";
    }
    std::cout << "model: " << model_path.string() << "\n";
    return 0;
}

int cmd_predict(const PredictOpts& opts) {
    require_file(opts.model_path, "model");
    require_file(opts.data_path, "dataset");

    const glie::TaskKind task = glie::parse_task_kind(opts.task);
    const glie::Model model = glie::load_model(opts.model_path);
    const std::vector<glie::AnnotatedExample> data = glie::load_dataset(opts.data_path);
    const std::vector<std::string> cli_labels = split_csv(opts.labels);

    glie::DecodeConfig decode_cfg;
    if (opts.threshold) {
        decode_cfg.final_threshold = *opts.threshold;
    }

    std::ofstream out(opts.out_path, std::ios::binary);
    if (!out) {
        glie::fail(glie::ErrorCode::io_error, "cannot write predictions '" + opts.out_path + "'");
    }
    long total_spans = 0;
    for (const glie::AnnotatedExample& ex : data) {
        const std::vector<std::string> labels = labels_for_record(task, cli_labels, ex);
        const std::vector<glie::Span> spans =
            glie::predict_spans(model, labels, "", ex.text, task, decode_cfg);
        total_spans += static_cast<long>(spans.size());
        const glie::TaskAnswer answer = glie::postprocess(task, spans, ex.text);
        out << serialize_answer(answer) << "\n";
    }
    std::cout << "predicted " << total_spans << " spans over " << data.size()
              << " examples -> " << opts.out_path << "\n";
    return 0;
}

int cmd_evaluate(const EvaluateOpts& opts) {
    if (opts.pred_paths.size() != opts.gold_paths.size() || opts.pred_paths.empty()) {
        glie::fail(glie::ErrorCode::length_mismatch,
                   "--pred and --gold need the same nonzero number of files");
    }
    const glie::TaskKind task = glie::parse_task_kind(opts.task);

    glie::EvalReport report;
    report.model = opts.model_name;
    report.task = task;

    for (std::size_t d = 0; d < opts.gold_paths.size(); ++d) {
        require_file(opts.gold_paths[d], "gold");
        require_file(opts.pred_paths[d], "prediction");
        const std::vector<glie::AnnotatedExample> gold = glie::load_dataset(opts.gold_paths[d]);
        const std::vector<ParsedAnswer> preds = load_predictions(opts.pred_paths[d]);
        if (gold.size() != preds.size()) {
            glie::fail(glie::ErrorCode::length_mismatch,
                       opts.pred_paths[d] + " has " + std::to_string(preds.size()) +
                           " lines but gold has " + std::to_string(gold.size()));
        }

        glie::EvalRow row;
        row.dataset = fs::path(opts.gold_paths[d]).stem().string();
        row.examples = static_cast<long>(gold.size());

        switch (task) {
            case glie::TaskKind::ner:
            case glie::TaskKind::open_ner: {
                std::vector<std::vector<glie::Span>> pred_spans;
                pred_spans.reserve(preds.size());
                for (const ParsedAnswer& p : preds) pred_spans.push_back(p.spans);
                const glie::PrfCounts counts = glie::span_micro_counts(gold, pred_spans);
                row.tp = counts.tp;
                row.fp = counts.fp;
                row.fn = counts.fn;
                row.metrics = {{"precision", counts.precision()},
                               {"recall", counts.recall()},
                               {"f1", counts.f1()}};
                break;
            }
            case glie::TaskKind::question_answering:
            case glie::TaskKind::relation_extraction:
            case glie::TaskKind::open_ie: {
                std::vector<std::string> pred_strings;
                std::vector<std::vector<std::string>> gold_strings;
                for (const ParsedAnswer& p : preds) {
                    pred_strings.push_back(task == glie::TaskKind::question_answering ? p.answer
                                                                                      : p.best);
                }
                for (const glie::AnnotatedExample& ex : gold) {
                    gold_strings.push_back(gold_span_texts(ex));
                }
                const glie::EmF1 r = glie::squad_em_f1(pred_strings, gold_strings);
                row.metrics = {{"em", r.em}, {"f1", r.f1}};
                break;
            }
            case glie::TaskKind::summarization: {
                std::vector<double> r1, r2, rl;
                for (std::size_t i = 0; i < gold.size(); ++i) {
                    const std::string ref = gold_summary(gold[i]);
                    const std::string hyp = preds[i].summary;
                    r1.push_back(glie::rouge_n(hyp, ref, 1).f1);
                    r2.push_back(glie::rouge_n(hyp, ref, 2).f1);
                    rl.push_back(glie::rouge_l(hyp, ref).f1);
                }
                const glie::MeanStd m1 = glie::corpus_stats(r1);
                const glie::MeanStd m2 = glie::corpus_stats(r2);
                const glie::MeanStd ml = glie::corpus_stats(rl);
                row.metrics = {{"rouge1", m1.mean}, {"rouge1_std", m1.std},
                               {"rouge2", m2.mean}, {"rouge2_std", m2.std},
                               {"rougeL", ml.mean}, {"rougeL_std", ml.std}};
                break;
            }
        }
        report.rows.push_back(std::move(row));
    }

    const std::string table = glie::render_report_table(report);
    std::cout << table;
    for (const glie::EvalRow& row : report.rows) {
        std::cout << row.dataset << ": " << row.examples << " examples";
        if (row.tp >= 0) {
            std::cout << ", TP=" << row.tp << " FP=" << row.fp << " FN=" << row.fn;
        }
        std::cout << "\n";
    }
    if (!opts.out_dir.empty()) {
        ensure_output_dir(opts.out_dir);
        const fs::path json_path = fs::path(opts.out_dir) / "report.json";
        const fs::path table_path = fs::path(opts.out_dir) / "report.txt";
        glie::write_report_files(report, json_path.string(), table_path.string());
        std::cout << "report: " << json_path.string() << "\n";
    }
    return 0;
}

int cmd_selftrain(const SelfTrainOpts& opts) {
    require_file(opts.model_path, "model");
    require_file(opts.unlabeled_path, "unlabeled dataset");
    require_file(opts.heldout_path, "held-out dataset");
    ensure_output_dir(opts.out_dir);

    glie::TrainConfig cfg =
        resolve_config(opts.config_path, opts.preset.empty() && opts.config_path.empty()
                                             ? "multitask"
                                             : opts.preset);
    if (opts.steps) cfg.steps = *opts.steps;
    if (opts.smoothing) cfg.label_smoothing = *opts.smoothing;

    glie::Model model = glie::load_model(opts.model_path);
    std::vector<glie::AnnotatedExample> heldout = glie::load_dataset(opts.heldout_path);
    std::vector<glie::AnnotatedExample> pool = glie::load_dataset(opts.unlabeled_path);

    std::vector<std::string> labels = split_csv(opts.labels);
    if (labels.empty()) {
        labels = glie::dataset_label_union(heldout);
    }
    if (labels.empty()) {
        glie::fail(glie::ErrorCode::empty_labels,
                   "no labels for pseudo-annotation; pass --labels or an annotated held-out set");
    }
    glie::apply_label_set(heldout, labels);

    std::vector<glie::UnlabeledExample> unlabeled;
    unlabeled.reserve(pool.size());
    for (glie::AnnotatedExample& ex : pool) {
        unlabeled.push_back({std::move(ex.text), labels});
    }

    const glie::SelfLearnReport report =
        glie::self_learn(model, unlabeled, heldout, cfg, opts.pseudo_threshold, opts.seed);

    const fs::path model_path = fs::path(opts.out_dir) / "model.bin";
    const fs::path csv_path = fs::path(opts.out_dir) / "loss.csv";
    const fs::path report_path = fs::path(opts.out_dir) / "selftrain_report.json";
    glie::save_model(model_path.string(), model);
    glie::write_loss_csv(csv_path.string(), report.history);

    json j;
    j["pre_f1"] = report.pre_f1;
    j["post_f1"] = report.post_f1;
    j["delta"] = report.delta;
    j["pseudo_examples"] = report.pseudo_examples;
    j["pseudo_spans"] = report.pseudo_spans;
    j["label_smoothing"] = cfg.label_smoothing;
    j["steps"] = cfg.steps;
    std::ofstream rep(report_path, std::ios::binary);
    if (!rep) glie::fail(glie::ErrorCode::io_error, "cannot write '" + report_path.string() + "'");
    rep << j.dump(2) << "\n";

    std::cout << "pre_f1 " << report.pre_f1 << "\n";
    std::cout << "post_f1 " << report.post_f1 << "\n";
    std::cout << "delta " << report.delta << "\n";
    std::cout << "pseudo examples " << report.pseudo_examples << " spans "
              << report.pseudo_spans << "\n";
    std::cout << "model: " << model_path.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gliner-ie: prompt-conditioned token-classification IE pipeline"};
    app.require_subcommand(1);

    GenDataOpts gen_opts;
    CLI::App* gen = app.add_subcommand("gen-data", "Generate deterministic toy datasets");
    gen->add_option("--tasks", gen_opts.tasks, "Comma-separated task list");
    gen->add_option("--n", gen_opts.n_examples, "Examples per task")->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_opts.seed, "Generator seed");
    gen->add_option("--out", gen_opts.out_dir, "Output directory")->required();

    TrainOpts train_opts;
    CLI::App* train = app.add_subcommand("train", "Train a model from scratch");
    train->add_option("--data", train_opts.data_path, "Training dataset (JSONL)")->required();
    train->add_option("--out", train_opts.out_dir, "Output directory")->required();
    train->add_option("--config", train_opts.config_path, "Training config JSON");
    train->add_option("--preset", train_opts.preset, "Built-in preset name");
    train->add_option("--labels", train_opts.labels, "Comma-separated label set override");
    train->add_option("--seed", train_opts.seed, "Seed for init, shuffling, embeddings");
    train->add_option("--hidden", train_opts.hidden, "Hidden size H (even)");
    train->add_option("--steps", train_opts.steps, "Override step count");
    train->add_option("--batch-size", train_opts.batch_size, "Override batch size");
    train->add_option("--lr-encoder", train_opts.lr_encoder, "Override encoder-group LR");
    train->add_option("--lr-other", train_opts.lr_other, "Override head-group LR");
    train->add_option("--smoothing", train_opts.smoothing, "Override label smoothing");
    train->add_option("--schedule", train_opts.schedule, "cosine | linear | constant");

    PredictOpts predict_opts;
    CLI::App* predict = app.add_subcommand("predict", "Run inference over a dataset");
    predict->add_option("--model", predict_opts.model_path, "Model file")->required();
    predict->add_option("--data", predict_opts.data_path, "Input dataset (JSONL)")->required();
    predict->add_option("--out", predict_opts.out_path, "Predictions file")->required();
    predict->add_option("--task", predict_opts.task, "Task kind");
    predict->add_option("--labels", predict_opts.labels, "Comma-separated zero-shot labels");
    predict->add_option("--threshold", predict_opts.threshold, "Final span threshold override");

    EvaluateOpts eval_opts;
    CLI::App* evaluate = app.add_subcommand("evaluate", "Score predictions against gold data");
    evaluate->add_option("--task", eval_opts.task, "Task kind");
    evaluate->add_option("--pred", eval_opts.pred_paths, "Prediction files")->required();
    evaluate->add_option("--gold", eval_opts.gold_paths, "Gold dataset files")->required();
    evaluate->add_option("--out", eval_opts.out_dir, "Report output directory");
    evaluate->add_option("--model-name", eval_opts.model_name, "Model column in the report");

    SelfTrainOpts self_opts;
    CLI::App* selftrain = app.add_subcommand("selftrain", "One self-learning round");
    selftrain->add_option("--model", self_opts.model_path, "Starting model")->required();
    selftrain->add_option("--unlabeled", self_opts.unlabeled_path, "Unlabeled pool")->required();
    selftrain->add_option("--heldout", self_opts.heldout_path, "Labeled held-out split")
        ->required();
    selftrain->add_option("--out", self_opts.out_dir, "Output directory")->required();
    selftrain->add_option("--config", self_opts.config_path, "Training config JSON");
    selftrain->add_option("--preset", self_opts.preset, "Built-in preset (default multitask)");
    selftrain->add_option("--labels", self_opts.labels, "Labels for pseudo-annotation");
    selftrain->add_option("--pseudo-threshold", self_opts.pseudo_threshold,
                          "Probability bar for keeping pseudo-labels");
    selftrain->add_option("--seed", self_opts.seed, "Seed");
    selftrain->add_option("--steps", self_opts.steps, "Override step count");
    selftrain->add_option("--smoothing", self_opts.smoothing, "Override label smoothing");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (gen->parsed()) return cmd_gen_data(gen_opts);
        if (train->parsed()) return cmd_train(train_opts);
        if (predict->parsed()) return cmd_predict(predict_opts);
        if (evaluate->parsed()) return cmd_evaluate(eval_opts);
        if (selftrain->parsed()) return cmd_selftrain(self_opts);
    } catch (const glie::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return glie::is_validation_error(e.code()) ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

#include "glie/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "glie/error.hpp"

namespace glie {

// ============================================================================
// Span micro-F1
// ============================================================================

PrfCounts span_micro_counts(const std::vector<AnnotatedExample>& gold,
                            const std::vector<std::vector<Span>>& pred) {
    if (gold.size() != pred.size()) {
        fail(ErrorCode::length_mismatch, "gold has " + std::to_string(gold.size()) +
                                             " examples, predictions " +
                                             std::to_string(pred.size()));
    }
    PrfCounts counts;
    using Key = std::tuple<int, int, std::string>;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        std::map<Key, long> gold_multiset;
        for (const Span& s : gold[i].spans) {
            ++gold_multiset[{s.start, s.end, normalize_label(s.label)}];
        }
        long tp_here = 0;
        for (const Span& s : pred[i]) {
            auto it = gold_multiset.find({s.start, s.end, normalize_label(s.label)});
            if (it != gold_multiset.end() && it->second > 0) {
                --it->second;
                ++tp_here;
            } else {
                ++counts.fp;
            }
        }
        counts.tp += tp_here;
        counts.fn += static_cast<long>(gold[i].spans.size()) - tp_here;
    }
    return counts;
}

Prf span_micro_f1(const std::vector<AnnotatedExample>& gold,
                  const std::vector<std::vector<Span>>& pred) {
    const PrfCounts counts = span_micro_counts(gold, pred);
    return {counts.precision(), counts.recall(), counts.f1()};
}

// ============================================================================
// SQuAD normalization and EM / F1
// ============================================================================

std::string squad_normalize(const std::string& s) {
    std::string lowered;
    lowered.reserve(s.size());
    for (unsigned char c : s) {
        if (std::ispunct(c)) continue;
        lowered.push_back(static_cast<char>(std::tolower(c)));
    }
    std::istringstream iss(lowered);
    std::string word;
    std::string out;
    while (iss >> word) {
        if (word == "a" || word == "an" || word == "the") continue;
        if (!out.empty()) out += ' ';
        out += word;
    }
    return out;
}

namespace {

std::vector<std::string> whitespace_tokens(const std::string& s) {
    std::istringstream iss(s);
    std::vector<std::string> out;
    std::string word;
    while (iss >> word) out.push_back(word);
    return out;
}

double token_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
    if (pred.empty() || gold.empty()) {
        // No-answer convention: credit only when both sides are empty.
        return pred.empty() && gold.empty() ? 1.0 : 0.0;
    }
    std::map<std::string, long> gold_counts;
    for (const std::string& w : gold) ++gold_counts[w];
    long overlap = 0;
    for (const std::string& w : pred) {
        auto it = gold_counts.find(w);
        if (it != gold_counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    const double p = static_cast<double>(overlap) / static_cast<double>(pred.size());
    const double r = static_cast<double>(overlap) / static_cast<double>(gold.size());
    return 2.0 * p * r / (p + r);
}

} // namespace

EmF1 squad_em_f1(const std::vector<std::string>& preds,
                 const std::vector<std::vector<std::string>>& golds) {
    if (preds.size() != golds.size()) {
        fail(ErrorCode::length_mismatch, "predictions and gold answers are not aligned");
    }
    if (preds.empty()) {
        fail(ErrorCode::empty_corpus, "no examples to score");
    }
    double em_sum = 0.0;
    double f1_sum = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const std::string np = squad_normalize(preds[i]);
        if (golds[i].empty()) {
            const double credit = np.empty() ? 1.0 : 0.0;
            em_sum += credit;
            f1_sum += credit;
            continue;
        }
        const std::vector<std::string> pred_tokens = whitespace_tokens(np);
        double em = 0.0;
        double f1 = 0.0;
        for (const std::string& g : golds[i]) {
            const std::string ng = squad_normalize(g);
            if (np == ng) em = 1.0;
            f1 = std::max(f1, token_f1(pred_tokens, whitespace_tokens(ng)));
        }
        em_sum += em;
        f1_sum += f1;
    }
    const double n = static_cast<double>(preds.size());
    return {em_sum / n, f1_sum / n};
}

// ============================================================================
// ROUGE
// ============================================================================

namespace {

std::vector<std::string> rouge_tokens(const std::string& s) {
    std::string lowered;
    lowered.reserve(s.size());
    for (unsigned char c : s) {
        lowered.push_back(static_cast<char>(std::tolower(c)));
    }
    return whitespace_tokens(lowered);
}

RougeScore prf_from_overlap(long overlap, long pred_total, long ref_total) {
    RougeScore out;
    out.precision = pred_total > 0 ? static_cast<double>(overlap) / pred_total : 0.0;
    out.recall = ref_total > 0 ? static_cast<double>(overlap) / ref_total : 0.0;
    out.f1 = out.precision + out.recall > 0.0
                 ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                 : 0.0;
    return out;
}

} // namespace

RougeScore rouge_n(const std::string& pred, const std::string& ref, int n) {
    if (n != 1 && n != 2) {
        fail(ErrorCode::index_out_of_range, "rouge_n supports n in {1, 2}");
    }
    const std::vector<std::string> pt = rouge_tokens(pred);
    const std::vector<std::string> rt = rouge_tokens(ref);
    const long n_pred = static_cast<long>(pt.size()) - (n - 1);
    const long n_ref = static_cast<long>(rt.size()) - (n - 1);
    if (n_pred <= 0 || n_ref <= 0) {
        return prf_from_overlap(0, std::max(n_pred, 0L), std::max(n_ref, 0L));
    }
    std::map<std::string, long> ref_counts;
    for (long i = 0; i < n_ref; ++i) {
        std::string key = rt[static_cast<std::size_t>(i)];
        for (int k = 1; k < n; ++k) key += '\x1f' + rt[static_cast<std::size_t>(i + k)];
        ++ref_counts[key];
    }
    long overlap = 0;
    for (long i = 0; i < n_pred; ++i) {
        std::string key = pt[static_cast<std::size_t>(i)];
        for (int k = 1; k < n; ++k) key += '\x1f' + pt[static_cast<std::size_t>(i + k)];
        auto it = ref_counts.find(key);
        if (it != ref_counts.end() && it->second > 0) {
            --it->second;  // clipped counting
            ++overlap;
        }
    }
    return prf_from_overlap(overlap, n_pred, n_ref);
}

RougeScore rouge_l(const std::string& pred, const std::string& ref) {
    const std::vector<std::string> pt = rouge_tokens(pred);
    const std::vector<std::string> rt = rouge_tokens(ref);
    if (pt.empty() || rt.empty()) {
        return prf_from_overlap(0, static_cast<long>(pt.size()), static_cast<long>(rt.size()));
    }
    const std::size_t n = pt.size();
    const std::size_t m = rt.size();
    std::vector<long> prev(m + 1, 0);
    std::vector<long> cur(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            if (pt[i - 1] == rt[j - 1]) {
                cur[j] = prev[j - 1] + 1;
            } else {
                cur[j] = std::max(prev[j], cur[j - 1]);
            }
        }
        std::swap(prev, cur);
    }
    return prf_from_overlap(prev[m], static_cast<long>(n), static_cast<long>(m));
}

MeanStd corpus_stats(const std::vector<double>& per_example_scores) {
    if (per_example_scores.empty()) {
        fail(ErrorCode::empty_corpus, "cannot aggregate an empty score list");
    }
    const double n = static_cast<double>(per_example_scores.size());
    double mean = 0.0;
    for (double v : per_example_scores) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : per_example_scores) var += (v - mean) * (v - mean);
    var /= n;
    return {mean, std::sqrt(var)};
}

// ============================================================================
// Reports
// ============================================================================

double EvalRow::metric_or(const std::string& name, double fallback) const {
    for (const auto& [k, v] : metrics) {
        if (k == name) return v;
    }
    return fallback;
}

std::string EvalReport::headline_metric() const {
    return task == TaskKind::summarization ? "rougeL" : "f1";
}

double EvalReport::average() const {
    if (rows.empty()) return 0.0;
    const std::string key = headline_metric();
    double acc = 0.0;
    for (const EvalRow& row : rows) {
        acc += row.metric_or(key, 0.0);
    }
    return acc / static_cast<double>(rows.size());
}

std::string render_report_json(const EvalReport& report) {
    nlohmann::json j;
    j["model"] = report.model;
    j["task"] = std::string(task_kind_name(report.task));
    nlohmann::json rows = nlohmann::json::array();
    for (const EvalRow& row : report.rows) {
        nlohmann::json r;
        r["name"] = row.dataset;
        nlohmann::json metrics;
        for (const auto& [k, v] : row.metrics) {
            metrics[k] = v;
        }
        r["metrics"] = std::move(metrics);
        r["examples"] = row.examples;
        if (row.tp >= 0) {
            r["tp"] = row.tp;
            r["fp"] = row.fp;
            r["fn"] = row.fn;
        }
        rows.push_back(std::move(r));
    }
    j["datasets"] = std::move(rows);
    j["average"] = {{"metric", report.headline_metric()}, {"value", report.average()}};
    return j.dump(2) + "\n";
}

namespace {

std::string fixed(double v, int decimals) {
    std::ostringstream oss;
    oss.setf(std::ios::fixed);
    oss.precision(decimals);
    oss << v;
    return oss.str();
}

std::size_t display_width(const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s) {
        if ((c & 0xC0) != 0x80) ++n;  // skip UTF-8 continuation bytes
    }
    return n;
}

std::string pad(const std::string& s, std::size_t width) {
    const std::size_t w = display_width(s);
    if (w >= width) return s + " ";
    return s + std::string(width - w, ' ');
}

constexpr std::size_t kModelCol = 26;
constexpr std::size_t kDatasetCol = 26;
constexpr std::size_t kMetricCol = 13;

} // namespace

std::string render_report_table(const EvalReport& report) {
    std::ostringstream out;
    std::vector<std::string> columns;
    switch (report.task) {
        case TaskKind::summarization:
            columns = {"ROUGE-1", "ROUGE-2", "ROUGE-L"};
            break;
        case TaskKind::question_answering:
        case TaskKind::relation_extraction:
        case TaskKind::open_ie:
            columns = {"Exact Match", "F1 Score"};
            break;
        default:
            columns = {"Precision", "Recall", "F1 Score"};
            break;
    }

    const std::size_t metric_col =
        report.task == TaskKind::summarization ? kMetricCol + 2 : kMetricCol;
    std::string header = pad("Model", kModelCol) + pad("Dataset", kDatasetCol);
    for (std::size_t i = 0; i < columns.size(); ++i) {
        header += (i + 1 == columns.size() ? columns[i] : pad(columns[i], metric_col));
    }
    out << header << "\n" << std::string(header.size(), '-') << "\n";

    bool first = true;
    for (const EvalRow& row : report.rows) {
        out << pad(first ? report.model : "", kModelCol) << pad(row.dataset, kDatasetCol);
        first = false;
        switch (report.task) {
            case TaskKind::summarization:
                out << pad(fixed(row.metric_or("rouge1", 0.0), 4) + "\xC2\xB1" +
                               fixed(row.metric_or("rouge1_std", 0.0), 4),
                           metric_col)
                    << pad(fixed(row.metric_or("rouge2", 0.0), 4) + "\xC2\xB1" +
                               fixed(row.metric_or("rouge2_std", 0.0), 4),
                           metric_col)
                    << fixed(row.metric_or("rougeL", 0.0), 4) + "\xC2\xB1" +
                           fixed(row.metric_or("rougeL_std", 0.0), 4);
                break;
            case TaskKind::question_answering:
            case TaskKind::relation_extraction:
            case TaskKind::open_ie:
                out << pad(fixed(100.0 * row.metric_or("em", 0.0), 2), metric_col)
                    << fixed(100.0 * row.metric_or("f1", 0.0), 2);
                break;
            default:
                out << pad(fixed(100.0 * row.metric_or("precision", 0.0), 2) + "%", metric_col)
                    << pad(fixed(100.0 * row.metric_or("recall", 0.0), 2) + "%", metric_col)
                    << fixed(row.metric_or("f1", 0.0), 4);
                break;
        }
        out << "\n";
    }

    // Average row: headline column only.
    out << pad("", kModelCol) << pad("Average", kDatasetCol);
    for (std::size_t i = 0; i + 1 < columns.size(); ++i) out << pad("", metric_col);
    if (report.task == TaskKind::question_answering ||
        report.task == TaskKind::relation_extraction || report.task == TaskKind::open_ie) {
        out << fixed(100.0 * report.average(), 2) << "\n";
    } else {
        out << fixed(report.average(), 4) << "\n";
    }
    return out.str();
}

void write_report_files(const EvalReport& report, const std::string& json_path,
                        const std::string& table_path) {
    std::ofstream js(json_path, std::ios::binary);
    if (!js) fail(ErrorCode::io_error, "cannot write '" + json_path + "'");
    js << render_report_json(report);
    std::ofstream tb(table_path, std::ios::binary);
    if (!tb) fail(ErrorCode::io_error, "cannot write '" + table_path + "'");
    tb << render_report_table(report);
}

} // namespace glie

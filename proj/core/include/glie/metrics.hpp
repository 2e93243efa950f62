#pragma once

#include <string>
#include <vector>

#include "glie/types.hpp"

namespace glie {

// ============================================================================
// Span-level micro precision / recall / F1
// ============================================================================

struct PrfCounts {
    long tp = 0;
    long fp = 0;
    long fn = 0;

    double precision() const { return tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0; }
    double recall() const { return tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0; }
    double f1() const {
        const double p = precision(), r = recall();
        return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    }
};

// Exact (start, end, normalized label) matching, pooled over the dataset.
PrfCounts span_micro_counts(const std::vector<AnnotatedExample>& gold,
                            const std::vector<std::vector<Span>>& pred);

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

Prf span_micro_f1(const std::vector<AnnotatedExample>& gold,
                  const std::vector<std::vector<Span>>& pred);

// ============================================================================
// SQuAD-style exact match and token F1
// ============================================================================

// lowercase, strip punctuation, drop standalone articles a/an/the, collapse
// whitespace. Idempotent.
std::string squad_normalize(const std::string& s);

struct EmF1 {
    double em = 0.0;  // in [0, 1]; reports multiply by 100
    double f1 = 0.0;
};

// golds[i] lists acceptable answers for example i; an empty list means
// no-answer (credited iff the prediction normalizes to the empty string).
EmF1 squad_em_f1(const std::vector<std::string>& preds,
                 const std::vector<std::vector<std::string>>& golds);

// ============================================================================
// ROUGE
// ============================================================================

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Clipped n-gram overlap over lowercased whitespace tokens, n in {1, 2}.
RougeScore rouge_n(const std::string& pred, const std::string& ref, int n);

// Longest common subsequence over the same token streams.
RougeScore rouge_l(const std::string& pred, const std::string& ref);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // population (divisor N)
};

MeanStd corpus_stats(const std::vector<double>& per_example_scores);

// ============================================================================
// Evaluation report
// ============================================================================

struct EvalRow {
    std::string dataset;
    // Ordered metric name -> value pairs; names drive the table columns.
    std::vector<std::pair<std::string, double>> metrics;
    long tp = -1, fp = -1, fn = -1;  // -1 when not applicable
    long examples = 0;

    double metric_or(const std::string& name, double fallback) const;
};

struct EvalReport {
    std::string model;
    TaskKind task = TaskKind::ner;
    std::vector<EvalRow> rows;

    // Arithmetic mean of the headline metric (the last column) across rows.
    double average() const;
    std::string headline_metric() const;
};

std::string render_report_json(const EvalReport& report);
// Fixed-width table with a trailing Average row.
std::string render_report_table(const EvalReport& report);

void write_report_files(const EvalReport& report, const std::string& json_path,
                        const std::string& table_path);

} // namespace glie

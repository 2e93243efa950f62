#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glie/error.hpp"

namespace glie {

// ============================================================================
// Core domain types shared by every module. All are immutable value types,
// safe to copy across threads.
// ============================================================================

struct TokenizedText {
    std::vector<std::string> tokens;
    // Byte offset of each token into the source string, when known.
    std::vector<std::size_t> char_offsets;

    int length() const { return static_cast<int>(tokens.size()); }
    bool empty() const { return tokens.empty(); }
};

// A labeled token span. Both indexes are inclusive: a span covering tokens
// i..j has length j - i + 1, matching the span-score average over k = i..j.
struct Span {
    int start = 0;
    int end = 0;
    std::string label;
    double score = 1.0;

    friend bool operator==(const Span& a, const Span& b) {
        return a.start == b.start && a.end == b.end && a.label == b.label &&
               a.score == b.score;
    }
};

struct AnnotatedExample {
    TokenizedText text;
    std::vector<Span> spans;
    std::vector<std::string> label_set;
};

enum class TaskKind {
    ner,
    open_ner,
    relation_extraction,
    summarization,
    question_answering,
    open_ie,
};

constexpr int kNumTaskKinds = 6;

std::string_view task_kind_name(TaskKind kind);
// Accepts canonical names plus common aliases ("re", "qa", "openie", ...).
TaskKind parse_task_kind(std::string_view name);

struct HeadHyperparams {
    int hidden_size = 64;         // H
    int max_labels = 30;          // C upper bound per example
    int max_seq_len = 768;        // L upper bound, counted in words
    int mlp_hidden = 0;           // 0 means the default of 3 * hidden_size
    std::map<TaskKind, double> thresholds = default_thresholds();

    static std::map<TaskKind, double> default_thresholds();
    int effective_mlp_hidden() const { return mlp_hidden > 0 ? mlp_hidden : 3 * hidden_size; }
    double threshold_for(TaskKind kind) const;
};

// Lowercase ASCII; labels are case-normalized before embedding and comparison.
std::string normalize_label(std::string_view label);

// Splits into words: runs of [alnum_] (with internal - or _ joining), or a
// single non-space character. Char offsets into the source are recorded.
TokenizedText tokenize_words(std::string_view text);

// Joins tokens with single spaces.
std::string detokenize(const std::vector<std::string>& tokens);
std::string span_text(const TokenizedText& text, int start, int end);

// Checks every type invariant and returns the example unchanged on success.
// Throws Error with SpanOutOfRange / LabelNotInSet / TooManyLabels /
// SequenceTooLong, naming the offending field. Idempotent.
AnnotatedExample validate_example(const AnnotatedExample& ex, const HeadHyperparams& hp);

} // namespace glie

#include "glie/types.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace glie {

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// A - or _ glues two word runs into one token ("state-of-the-art").
bool is_word_continuation(std::string_view text, std::size_t pos) {
    if (pos >= text.size()) return false;
    char c = text[pos];
    if (c != '-' && c != '_') return false;
    return pos + 1 < text.size() && is_word_char(text[pos + 1]);
}

} // namespace

std::string_view task_kind_name(TaskKind kind) {
    switch (kind) {
        case TaskKind::ner: return "ner";
        case TaskKind::open_ner: return "open-ner";
        case TaskKind::relation_extraction: return "relation-extraction";
        case TaskKind::summarization: return "summarization";
        case TaskKind::question_answering: return "question-answering";
        case TaskKind::open_ie: return "open-ie";
    }
    return "?";
}

TaskKind parse_task_kind(std::string_view name) {
    std::string v(name);
    for (auto& c : v) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (c == '_') c = '-';
    }
    if (v == "ner") return TaskKind::ner;
    if (v == "open-ner" || v == "openner") return TaskKind::open_ner;
    if (v == "relation-extraction" || v == "re" || v == "relation") return TaskKind::relation_extraction;
    if (v == "summarization" || v == "summary") return TaskKind::summarization;
    if (v == "question-answering" || v == "qa") return TaskKind::question_answering;
    if (v == "open-ie" || v == "openie") return TaskKind::open_ie;
    fail(ErrorCode::unknown_task, "no task named '" + std::string(name) + "'");
}

std::map<TaskKind, double> HeadHyperparams::default_thresholds() {
    return {
        {TaskKind::ner, 0.5},
        {TaskKind::open_ner, 0.5},
        {TaskKind::relation_extraction, 0.5},
        {TaskKind::summarization, 0.1},
        {TaskKind::question_answering, 0.5},
        {TaskKind::open_ie, 0.5},
    };
}

double HeadHyperparams::threshold_for(TaskKind kind) const {
    auto it = thresholds.find(kind);
    if (it == thresholds.end()) {
        fail(ErrorCode::unknown_task, "no threshold configured for task " +
                                          std::string(task_kind_name(kind)));
    }
    return it->second;
}

std::string normalize_label(std::string_view label) {
    std::string out(label);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return out;
}

TokenizedText tokenize_words(std::string_view text) {
    TokenizedText out;
    std::size_t i = 0;
    const std::size_t len = text.size();
    while (i < len) {
        if (std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t begin = i;
        if (is_word_char(text[i])) {
            while (i < len && (is_word_char(text[i]) || is_word_continuation(text, i))) {
                ++i;
            }
        } else {
            ++i; // single punctuation character
        }
        out.tokens.emplace_back(text.substr(begin, i - begin));
        out.char_offsets.push_back(begin);
    }
    return out;
}

std::string detokenize(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out += ' ';
        out += tokens[i];
    }
    return out;
}

std::string span_text(const TokenizedText& text, int start, int end) {
    if (start < 0 || end < start || end >= text.length()) {
        fail(ErrorCode::index_out_of_range,
             "span (" + std::to_string(start) + ", " + std::to_string(end) +
                 ") outside text of " + std::to_string(text.length()) + " tokens");
    }
    std::string out;
    for (int i = start; i <= end; ++i) {
        if (i > start) out += ' ';
        out += text.tokens[static_cast<std::size_t>(i)];
    }
    return out;
}

AnnotatedExample validate_example(const AnnotatedExample& ex, const HeadHyperparams& hp) {
    const int len = ex.text.length();
    if (len == 0) {
        fail(ErrorCode::empty_text, "text: example has no tokens");
    }
    if (len > hp.max_seq_len) {
        fail(ErrorCode::sequence_too_long, "text: " + std::to_string(len) +
                                               " tokens exceeds max_seq_len " +
                                               std::to_string(hp.max_seq_len));
    }
    if (static_cast<int>(ex.label_set.size()) > hp.max_labels) {
        fail(ErrorCode::too_many_labels,
             "label_set: " + std::to_string(ex.label_set.size()) +
                 " labels exceeds max_labels " + std::to_string(hp.max_labels));
    }
    for (const Span& s : ex.spans) {
        if (s.start < 0 || s.start > s.end || s.end >= len) {
            fail(ErrorCode::span_out_of_range,
                 "span: (" + std::to_string(s.start) + ", " + std::to_string(s.end) +
                     ", " + s.label + ") invalid for " + std::to_string(len) + " tokens");
        }
        if (!(s.score >= 0.0 && s.score <= 1.0)) {
            fail(ErrorCode::score_out_of_range,
                 "span.score: " + std::to_string(s.score) + " outside [0, 1]");
        }
        const std::string norm = normalize_label(s.label);
        bool found = false;
        for (const std::string& l : ex.label_set) {
            if (normalize_label(l) == norm) {
                found = true;
                break;
            }
        }
        if (!found) {
            fail(ErrorCode::label_not_in_set, "span.label: '" + s.label + "' not in label_set");
        }
    }
    return ex;
}

} // namespace glie

#pragma once

#include <string>
#include <variant>
#include <vector>

#include "glie/types.hpp"

namespace glie {

// ============================================================================
// Task requests: one payload variant per task kind.
// ============================================================================

struct NerPayload {
    std::vector<std::string> labels;
};

struct OpenNerPayload {
    std::string instruction;
    std::vector<std::string> labels;
};

struct QaPayload {
    std::string question;
    std::string context;
};

struct SummarizationPayload {
    std::string context;
};

struct RelationPayload {
    std::string text;
    std::string head;
    std::string relation;
};

struct OpenIePayload {
    std::string instruction;
    std::string text;
};

struct TaskRequest {
    TaskKind kind = TaskKind::ner;
    std::variant<NerPayload, OpenNerPayload, QaPayload, SummarizationPayload, RelationPayload,
                 OpenIePayload>
        payload;

    static TaskRequest ner(std::vector<std::string> labels);
    static TaskRequest open_ner(std::string instruction, std::vector<std::string> labels);
    static TaskRequest qa(std::string question, std::string context);
    static TaskRequest summarization(std::string context);
    static TaskRequest relation(std::string text, std::string head, std::string relation);
    static TaskRequest open_ie(std::string instruction, std::string text);
};

// The fixed input-format strings.
inline constexpr const char* kSummarizationInstruction =
    "Summarize the given text, highlighting the most important information:";
inline constexpr const char* kRelationInstruction =
    "Identify the relation in the given text, highlighting the relevant entity:";
inline constexpr const char* kQaLabel = "answer";
inline constexpr const char* kSummarizationLabel = "summary";
inline constexpr const char* kOpenIeLabel = "match";

// prompt is the task's full input string ("{question}\n{context}" for QA,
// the summarization instruction plus context, the relation format with the
// text inlined). text is the extraction domain the spans index into; it is
// empty for NER / Open NER, whose text arrives with the dataset.
// prompt_words is the instruction-only prefix, already tokenized, for
// packing ahead of the text words.
struct RenderedTask {
    std::string prompt;
    std::vector<std::string> labels;
    TokenizedText text;
    std::vector<std::string> prompt_words;
};

RenderedTask render(const TaskRequest& req);

// ============================================================================
// Task answers assembled from decoded spans.
// ============================================================================

struct TaskAnswer {
    TaskKind kind = TaskKind::ner;
    std::vector<Span> spans;          // always populated
    std::string answer;               // QA: argmax-score span text, "" if none
    double answer_score = 0.0;        // QA
    std::string summary;              // summarization: spans in document order
    std::vector<std::string> texts;   // RE tails / OpenIE matches, document order
    std::string best;                 // RE / OpenIE: highest-scoring span text
};

TaskAnswer postprocess(TaskKind kind, const std::vector<Span>& spans, const TokenizedText& text);

} // namespace glie

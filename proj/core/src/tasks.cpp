#include "glie/tasks.hpp"

#include <algorithm>
#include <cctype>

#include "glie/error.hpp"

namespace glie {

namespace {

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

std::vector<std::string> normalize_labels(const std::vector<std::string>& labels) {
    if (labels.empty()) {
        fail(ErrorCode::empty_labels, "label list must not be empty");
    }
    std::vector<std::string> out;
    out.reserve(labels.size());
    for (const std::string& l : labels) {
        out.push_back(normalize_label(l));
    }
    return out;
}

} // namespace

TaskRequest TaskRequest::ner(std::vector<std::string> labels) {
    return {TaskKind::ner, NerPayload{std::move(labels)}};
}
TaskRequest TaskRequest::open_ner(std::string instruction, std::vector<std::string> labels) {
    return {TaskKind::open_ner, OpenNerPayload{std::move(instruction), std::move(labels)}};
}
TaskRequest TaskRequest::qa(std::string question, std::string context) {
    return {TaskKind::question_answering, QaPayload{std::move(question), std::move(context)}};
}
TaskRequest TaskRequest::summarization(std::string context) {
    return {TaskKind::summarization, SummarizationPayload{std::move(context)}};
}
TaskRequest TaskRequest::relation(std::string text, std::string head, std::string relation) {
    return {TaskKind::relation_extraction,
            RelationPayload{std::move(text), std::move(head), std::move(relation)}};
}
TaskRequest TaskRequest::open_ie(std::string instruction, std::string text) {
    return {TaskKind::open_ie, OpenIePayload{std::move(instruction), std::move(text)}};
}

RenderedTask render(const TaskRequest& req) {
    RenderedTask out;
    switch (req.kind) {
        case TaskKind::ner: {
            const auto& p = std::get<NerPayload>(req.payload);
            out.prompt = "";
            out.labels = normalize_labels(p.labels);
            break;
        }
        case TaskKind::open_ner: {
            const auto& p = std::get<OpenNerPayload>(req.payload);
            out.prompt = p.instruction;
            out.labels = normalize_labels(p.labels);
            out.prompt_words = tokenize_words(p.instruction).tokens;
            break;
        }
        case TaskKind::question_answering: {
            const auto& p = std::get<QaPayload>(req.payload);
            if (is_blank(p.question)) {
                fail(ErrorCode::empty_question, "question must not be empty");
            }
            out.prompt = p.question + "\n" + p.context;
            out.labels = {kQaLabel};
            out.text = tokenize_words(p.context);
            out.prompt_words = tokenize_words(p.question).tokens;
            break;
        }
        case TaskKind::summarization: {
            const auto& p = std::get<SummarizationPayload>(req.payload);
            out.prompt = std::string(kSummarizationInstruction) + "\n" + p.context;
            out.labels = {kSummarizationLabel};
            out.text = tokenize_words(p.context);
            out.prompt_words = tokenize_words(kSummarizationInstruction).tokens;
            break;
        }
        case TaskKind::relation_extraction: {
            const auto& p = std::get<RelationPayload>(req.payload);
            if (is_blank(p.head) || is_blank(p.relation)) {
                fail(ErrorCode::empty_relation, "head and relation must not be empty");
            }
            out.prompt = std::string(kRelationInstruction) + " " + p.text;
            out.labels = {normalize_label(p.head + " <> " + p.relation)};
            out.text = tokenize_words(p.text);
            out.prompt_words = tokenize_words(kRelationInstruction).tokens;
            break;
        }
        case TaskKind::open_ie: {
            const auto& p = std::get<OpenIePayload>(req.payload);
            out.prompt = p.instruction;
            out.labels = {kOpenIeLabel};
            out.text = tokenize_words(p.text);
            out.prompt_words = tokenize_words(p.instruction).tokens;
            break;
        }
    }
    return out;
}

namespace {

// Highest score wins; ties go to the earlier, then shorter span.
const Span* argmax_span(const std::vector<Span>& spans) {
    const Span* best = nullptr;
    for (const Span& s : spans) {
        if (best == nullptr || s.score > best->score ||
            (s.score == best->score &&
             (s.start < best->start || (s.start == best->start && s.end < best->end)))) {
            best = &s;
        }
    }
    return best;
}

std::vector<const Span*> document_order(const std::vector<Span>& spans) {
    std::vector<const Span*> out;
    out.reserve(spans.size());
    for (const Span& s : spans) out.push_back(&s);
    std::sort(out.begin(), out.end(), [](const Span* a, const Span* b) {
        if (a->start != b->start) return a->start < b->start;
        return a->end < b->end;
    });
    return out;
}

} // namespace

TaskAnswer postprocess(TaskKind kind, const std::vector<Span>& spans, const TokenizedText& text) {
    TaskAnswer out;
    out.kind = kind;
    out.spans = spans;
    switch (kind) {
        case TaskKind::ner:
        case TaskKind::open_ner:
            break;
        case TaskKind::question_answering: {
            const Span* best = argmax_span(spans);
            if (best != nullptr) {
                out.answer = span_text(text, best->start, best->end);
                out.answer_score = best->score;
            }
            break;
        }
        case TaskKind::summarization: {
            std::string acc;
            for (const Span* s : document_order(spans)) {
                if (!acc.empty()) acc += ' ';
                acc += span_text(text, s->start, s->end);
            }
            out.summary = std::move(acc);
            break;
        }
        case TaskKind::relation_extraction:
        case TaskKind::open_ie: {
            for (const Span* s : document_order(spans)) {
                out.texts.push_back(span_text(text, s->start, s->end));
            }
            const Span* best = argmax_span(spans);
            if (best != nullptr) {
                out.best = span_text(text, best->start, best->end);
            }
            break;
        }
    }
    return out;
}

} // namespace glie

#include "glie/toydata.hpp"

#include <algorithm>

#include "glie/error.hpp"
#include "glie/rng.hpp"
#include "glie/tasks.hpp"

namespace glie {

namespace {

const std::vector<std::string>& fillers() {
    static const std::vector<std::string> words = {
        "the",   "quick", "brown",  "fox",   "jumped", "over",  "lazy",  "dog",
        "and",   "then",  "went",   "to",    "market", "while", "rain",  "fell",
        "on",    "green", "hills",  "under", "bright", "sky",   "with",  "soft",
        "wind",  "old",   "river",  "near",  "stone",  "bridge", "before", "noon",
        "after", "dark",  "small",  "bird",  "sang",   "loud",  "song",  "again",
    };
    return words;
}

struct EntityType {
    std::string label;
    std::vector<std::vector<std::string>> surfaces;
};

// Every surface word is unique across the whole vocabulary, so the planted
// task stays separable.
const std::vector<EntityType>& entity_types() {
    static const std::vector<EntityType> types = {
        {"date",
         {{"monday"}, {"tuesday"}, {"january"}, {"february"}, {"march"}, {"april"},
          {"midsummer", "eve"}}},
        {"location",
         {{"paris"}, {"london"}, {"berlin"}, {"tokyo"}, {"madrid"}, {"oslo"},
          {"new", "york"}}},
        {"organization",
         {{"globex"}, {"initech"}, {"umbrella"}, {"hooli"}, {"cyberdyne"}, {"vandelay"},
          {"acme", "corp"}}},
        {"person",
         {{"alice"}, {"bob"}, {"carol"}, {"david"}, {"erika"}, {"frank"},
          {"mary", "jane"}}},
        {"product",
         {{"widget"}, {"gadget"}, {"sprocket"}, {"gizmo"}, {"doohickey"}, {"flux"},
          {"turbo", "encabulator"}}},
    };
    return types;
}

void append_fillers(std::vector<std::string>& tokens, Rng& rng, int count) {
    const auto& pool = fillers();
    for (int i = 0; i < count; ++i) {
        tokens.push_back(pool[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<int>(pool.size()) - 1))]);
    }
}

struct PlantedEntity {
    int start = 0;
    int end = 0;
    int type_index = 0;
    std::vector<std::string> surface;
};

// Fillers interleaved with 1..max_entities planted entities, never adjacent.
std::vector<std::string> build_sentence(Rng& rng, int max_entities,
                                        std::vector<PlantedEntity>& planted) {
    std::vector<std::string> tokens;
    const int n_entities = rng.uniform_int(1, max_entities);
    append_fillers(tokens, rng, rng.uniform_int(0, 3));
    for (int e = 0; e < n_entities; ++e) {
        if (e > 0) {
            append_fillers(tokens, rng, rng.uniform_int(1, 4));
        }
        const int type_index = rng.uniform_int(0, static_cast<int>(entity_types().size()) - 1);
        const EntityType& type = entity_types()[static_cast<std::size_t>(type_index)];
        const auto& surface = type.surfaces[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<int>(type.surfaces.size()) - 1))];
        PlantedEntity ent;
        ent.start = static_cast<int>(tokens.size());
        ent.type_index = type_index;
        ent.surface = surface;
        for (const std::string& w : surface) {
            tokens.push_back(w);
        }
        ent.end = static_cast<int>(tokens.size()) - 1;
        planted.push_back(ent);
    }
    append_fillers(tokens, rng, rng.uniform_int(1, 4));
    return tokens;
}

AnnotatedExample make_ner_example(Rng rng) {
    std::vector<PlantedEntity> planted;
    AnnotatedExample ex;
    ex.text.tokens = build_sentence(rng, 3, planted);
    for (const PlantedEntity& p : planted) {
        ex.spans.push_back({p.start, p.end,
                            entity_types()[static_cast<std::size_t>(p.type_index)].label, 1.0});
    }
    ex.label_set = toy_entity_types();
    return ex;
}

const char* question_for(int type_index) {
    switch (type_index) {
        case 0: return "when does it happen ?";
        case 1: return "where does it happen ?";
        case 2: return "which organization appears ?";
        case 3: return "who is mentioned here ?";
        default: return "which product is named ?";
    }
}

// Builds the record for a rendered request: instruction words, then the
// extraction-domain tokens, with spans shifted past the prompt.
AnnotatedExample assemble_record(const RenderedTask& rendered, const std::vector<Span>& spans,
                                 const std::vector<std::string>& label_set) {
    AnnotatedExample ex;
    ex.text.tokens = rendered.prompt_words;
    ex.text.tokens.insert(ex.text.tokens.end(), rendered.text.tokens.begin(),
                          rendered.text.tokens.end());
    const int offset = static_cast<int>(rendered.prompt_words.size());
    for (const Span& s : spans) {
        ex.spans.push_back({s.start + offset, s.end + offset, s.label, s.score});
    }
    ex.label_set = label_set;
    return ex;
}

AnnotatedExample make_qa_example(Rng rng) {
    std::vector<PlantedEntity> planted;
    const std::vector<std::string> context_tokens = build_sentence(rng, 2, planted);
    const PlantedEntity& answer = planted[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(planted.size()) - 1))];

    const std::string context = detokenize(context_tokens);
    const TaskRequest req = TaskRequest::qa(question_for(answer.type_index), context);
    const RenderedTask rendered = render(req);
    // Word-splitting the detokenized context reproduces the same tokens.
    return assemble_record(rendered, {{answer.start, answer.end, kQaLabel, 1.0}},
                           {kQaLabel});
}

AnnotatedExample make_summarization_example(Rng rng) {
    std::vector<std::string> tokens;
    const int n_sentences = rng.uniform_int(2, 3);
    const int salient = rng.uniform_int(0, n_sentences - 1);
    int start = 0;
    int end = 0;
    for (int s = 0; s < n_sentences; ++s) {
        const int first = static_cast<int>(tokens.size());
        if (s == salient) {
            tokens.push_back("breaking");
            tokens.push_back("update");
            append_fillers(tokens, rng, rng.uniform_int(2, 4));
            start = first;
        } else {
            append_fillers(tokens, rng, rng.uniform_int(3, 5));
        }
        tokens.push_back(".");
        if (s == salient) {
            end = static_cast<int>(tokens.size()) - 1;  // include the period
        }
    }
    const TaskRequest req = TaskRequest::summarization(detokenize(tokens));
    const RenderedTask rendered = render(req);
    return assemble_record(rendered, {{start, end, kSummarizationLabel, 1.0}},
                           {kSummarizationLabel});
}

AnnotatedExample make_relation_example(Rng rng) {
    static const std::vector<std::pair<std::string, std::string>> relations = {
        {"works", "employed by"},
        {"visited", "travelled to"},
        {"founded", "founder of"},
    };
    const auto& people = entity_types()[3];
    const auto& places = entity_types()[1];
    const auto& head_surface = people.surfaces[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(people.surfaces.size()) - 1))];
    const auto& tail_surface = places.surfaces[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(places.surfaces.size()) - 1))];
    const auto& rel = relations[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(relations.size()) - 1))];

    std::vector<std::string> tokens;
    append_fillers(tokens, rng, rng.uniform_int(0, 2));
    for (const std::string& w : head_surface) tokens.push_back(w);
    tokens.push_back(rel.first);
    const int tail_start = static_cast<int>(tokens.size());
    for (const std::string& w : tail_surface) tokens.push_back(w);
    const int tail_end = static_cast<int>(tokens.size()) - 1;
    append_fillers(tokens, rng, rng.uniform_int(1, 3));
    tokens.push_back(".");

    const TaskRequest req =
        TaskRequest::relation(detokenize(tokens), detokenize(head_surface), rel.second);
    const RenderedTask rendered = render(req);
    const std::string label = rendered.labels[0];
    return assemble_record(rendered, {{tail_start, tail_end, label, 1.0}}, {label});
}

AnnotatedExample make_open_ner_example(Rng rng) {
    std::vector<PlantedEntity> planted;
    const std::vector<std::string> context_tokens = build_sentence(rng, 3, planted);
    const int wanted = planted[0].type_index;
    const std::string& label = entity_types()[static_cast<std::size_t>(wanted)].label;

    const TaskRequest req = TaskRequest::open_ner(
        "extract every " + label + " mentioned in the text .", {label});
    RenderedTask rendered = render(req);
    rendered.text.tokens = context_tokens;

    std::vector<Span> spans;
    for (const PlantedEntity& p : planted) {
        if (p.type_index == wanted) {
            spans.push_back({p.start, p.end, label, 1.0});
        }
    }
    return assemble_record(rendered, spans, {label});
}

AnnotatedExample make_open_ie_example(Rng rng) {
    std::vector<std::string> tokens;
    append_fillers(tokens, rng, rng.uniform_int(1, 3));
    tokens.push_back("quote");
    const int seg_start = static_cast<int>(tokens.size());
    append_fillers(tokens, rng, rng.uniform_int(2, 4));
    const int seg_end = static_cast<int>(tokens.size()) - 1;
    tokens.push_back("unquote");
    append_fillers(tokens, rng, rng.uniform_int(1, 3));

    const TaskRequest req = TaskRequest::open_ie(
        "extract the segment between the quote markers .", detokenize(tokens));
    const RenderedTask rendered = render(req);
    return assemble_record(rendered, {{seg_start, seg_end, kOpenIeLabel, 1.0}},
                           {kOpenIeLabel});
}

} // namespace

std::vector<std::string> toy_entity_types() {
    std::vector<std::string> out;
    out.reserve(entity_types().size());
    for (const EntityType& t : entity_types()) {
        out.push_back(t.label);
    }
    return out;
}

std::vector<AnnotatedExample> gen_toy_examples(TaskKind task, int n, std::uint64_t seed) {
    if (n <= 0) {
        fail(ErrorCode::parse_error, "toy generator needs n > 0");
    }
    Rng root = Rng(seed).split(task_kind_name(task));
    std::vector<AnnotatedExample> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Rng rng = root.split(static_cast<std::uint64_t>(i));
        switch (task) {
            case TaskKind::ner: out.push_back(make_ner_example(rng)); break;
            case TaskKind::open_ner: out.push_back(make_open_ner_example(rng)); break;
            case TaskKind::question_answering: out.push_back(make_qa_example(rng)); break;
            case TaskKind::summarization: out.push_back(make_summarization_example(rng)); break;
            case TaskKind::relation_extraction: out.push_back(make_relation_example(rng)); break;
            case TaskKind::open_ie: out.push_back(make_open_ie_example(rng)); break;
        }
    }
    return out;
}

} // namespace glie

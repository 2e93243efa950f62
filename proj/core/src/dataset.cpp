#include "glie/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace glie {

using nlohmann::json;

std::string serialize_record(const AnnotatedExample& ex) {
    json rec;
    json spans = json::array();
    for (const Span& s : ex.spans) {
        spans.push_back(json::array({s.start, s.end, s.label}));
    }
    rec["ner"] = std::move(spans);
    rec["tokenized_text"] = ex.text.tokens;
    return rec.dump();
}

AnnotatedExample deserialize_record(const std::string& line) {
    json rec;
    try {
        rec = json::parse(line);
    } catch (const json::exception& e) {
        fail(ErrorCode::parse_error, std::string("bad JSON record: ") + e.what());
    }
    if (!rec.is_object() || !rec.contains("tokenized_text") || !rec.contains("ner")) {
        fail(ErrorCode::parse_error, "record must carry 'tokenized_text' and 'ner'");
    }

    AnnotatedExample ex;
    const json& toks = rec["tokenized_text"];
    if (!toks.is_array()) {
        fail(ErrorCode::parse_error, "'tokenized_text' must be an array of strings");
    }
    for (const json& t : toks) {
        if (!t.is_string()) {
            fail(ErrorCode::parse_error, "'tokenized_text' must be an array of strings");
        }
        ex.text.tokens.push_back(t.get<std::string>());
    }

    const json& spans = rec["ner"];
    if (!spans.is_array()) {
        fail(ErrorCode::parse_error, "'ner' must be an array of [start, end, label] triplets");
    }
    std::set<std::string> labels;
    for (const json& s : spans) {
        if (!s.is_array() || s.size() != 3 || !s[0].is_number_integer() ||
            !s[1].is_number_integer() || !s[2].is_string()) {
            fail(ErrorCode::parse_error, "'ner' entries must be [start:int, end:int, label:string]");
        }
        Span span;
        span.start = s[0].get<int>();
        span.end = s[1].get<int>();
        span.label = normalize_label(s[2].get<std::string>());
        ex.spans.push_back(span);
        labels.insert(span.label);
    }
    ex.label_set.assign(labels.begin(), labels.end());
    return ex;
}

std::vector<AnnotatedExample> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorCode::io_error, "cannot open dataset file '" + path + "'");
    }
    std::vector<AnnotatedExample> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(deserialize_record(line));
        } catch (const Error& e) {
            fail(ErrorCode::parse_error,
                 path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

void save_dataset(const std::string& path, const std::vector<AnnotatedExample>& examples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail(ErrorCode::io_error, "cannot write dataset file '" + path + "'");
    }
    for (const AnnotatedExample& ex : examples) {
        out << serialize_record(ex) << "\n";
    }
    if (!out) {
        fail(ErrorCode::io_error, "write failed for '" + path + "'");
    }
}

std::vector<std::string> dataset_label_union(const std::vector<AnnotatedExample>& examples) {
    std::set<std::string> labels;
    for (const AnnotatedExample& ex : examples) {
        for (const Span& s : ex.spans) {
            labels.insert(normalize_label(s.label));
        }
        for (const std::string& l : ex.label_set) {
            labels.insert(normalize_label(l));
        }
    }
    return {labels.begin(), labels.end()};
}

void apply_label_set(std::vector<AnnotatedExample>& examples,
                     const std::vector<std::string>& labels) {
    std::vector<std::string> norm;
    norm.reserve(labels.size());
    for (const std::string& l : labels) {
        norm.push_back(normalize_label(l));
    }
    for (AnnotatedExample& ex : examples) {
        for (const Span& s : ex.spans) {
            if (std::find(norm.begin(), norm.end(), normalize_label(s.label)) == norm.end()) {
                fail(ErrorCode::label_not_in_set,
                     "span label '" + s.label + "' missing from imposed label set");
            }
        }
        ex.label_set = norm;
    }
}

} // namespace glie

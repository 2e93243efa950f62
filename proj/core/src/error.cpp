#include "glie/error.hpp"

namespace glie {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::span_out_of_range: return "SpanOutOfRange";
        case ErrorCode::label_not_in_set: return "LabelNotInSet";
        case ErrorCode::too_many_labels: return "TooManyLabels";
        case ErrorCode::sequence_too_long: return "SequenceTooLong";
        case ErrorCode::empty_text: return "EmptyText";
        case ErrorCode::score_out_of_range: return "ScoreOutOfRange";
        case ErrorCode::shape_mismatch: return "ShapeMismatch";
        case ErrorCode::odd_hidden_size: return "OddHiddenSize";
        case ErrorCode::missing_cache: return "MissingCache";
        case ErrorCode::index_out_of_range: return "IndexOutOfRange";
        case ErrorCode::unknown_task: return "UnknownTask";
        case ErrorCode::empty_question: return "EmptyQuestion";
        case ErrorCode::empty_relation: return "EmptyRelation";
        case ErrorCode::empty_labels: return "EmptyLabels";
        case ErrorCode::length_mismatch: return "LengthMismatch";
        case ErrorCode::empty_corpus: return "EmptyCorpus";
        case ErrorCode::label_not_in_order: return "LabelNotInOrder";
        case ErrorCode::alpha_out_of_range: return "AlphaOutOfRange";
        case ErrorCode::step_out_of_range: return "StepOutOfRange";
        case ErrorCode::state_shape_mismatch: return "StateShapeMismatch";
        case ErrorCode::empty_dataset: return "EmptyDataset";
        case ErrorCode::no_pseudo_labels: return "NoPseudoLabels";
        case ErrorCode::parse_error: return "ParseError";
        case ErrorCode::io_error: return "IoError";
    }
    return "UnknownError";
}

bool is_validation_error(ErrorCode code) {
    switch (code) {
        case ErrorCode::span_out_of_range:
        case ErrorCode::label_not_in_set:
        case ErrorCode::too_many_labels:
        case ErrorCode::sequence_too_long:
        case ErrorCode::empty_text:
        case ErrorCode::score_out_of_range:
        case ErrorCode::unknown_task:
        case ErrorCode::empty_question:
        case ErrorCode::empty_relation:
        case ErrorCode::empty_labels:
        case ErrorCode::length_mismatch:
        case ErrorCode::alpha_out_of_range:
        case ErrorCode::empty_dataset:
        case ErrorCode::empty_corpus:
        case ErrorCode::parse_error:
            return true;
        default:
            return false;
    }
}

} // namespace glie

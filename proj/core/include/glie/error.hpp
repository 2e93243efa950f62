#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace glie {

// Every failure the library reports carries one of these codes. The CLI maps
// them onto exit codes (validation vs runtime), tests assert on them.
enum class ErrorCode {
    // core-model validation
    span_out_of_range,
    label_not_in_set,
    too_many_labels,
    sequence_too_long,
    empty_text,
    score_out_of_range,
    // encoder / scoring
    shape_mismatch,
    odd_hidden_size,
    missing_cache,
    // decoder
    index_out_of_range,
    unknown_task,
    // tasks
    empty_question,
    empty_relation,
    empty_labels,
    // metrics
    length_mismatch,
    empty_corpus,
    // training
    label_not_in_order,
    alpha_out_of_range,
    step_out_of_range,
    state_shape_mismatch,
    empty_dataset,
    no_pseudo_labels,
    // config / files
    parse_error,
    io_error,
};

std::string_view error_code_name(ErrorCode code);

// True for codes that indicate bad user input rather than a runtime failure.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace glie

#pragma once

#include <optional>
#include <vector>

#include "glie/encoder.hpp"
#include "glie/tensor.hpp"
#include "glie/types.hpp"

namespace glie {

struct CandidateSpan {
    int start = 0;
    int end = 0;
    int class_index = 0;
    double span_score = 0.0;
};

enum class DecodeMode { flat, nested };

struct DecodeConfig {
    // Unset thresholds fall back to the task's default probability threshold.
    std::optional<double> start_threshold;
    std::optional<double> end_threshold;
    std::optional<double> final_threshold;
    DecodeMode mode = DecodeMode::flat;
    int max_span_width = 0;  // 0 means unlimited

    double start_or(double fallback) const { return start_threshold.value_or(fallback); }
    double end_or(double fallback) const { return end_threshold.value_or(fallback); }
    double final_or(double fallback) const { return final_threshold.value_or(fallback); }
};

// Elementwise logistic over raw logits.
Tensor probabilities(const Tensor& scores);

// Mean of the inside probabilities over tokens i..j for one class column.
// inside_probs is indexed [token]; throws IndexOutOfRange on a bad range.
double span_score(const std::vector<double>& inside_probs, int i, int j);

// All (i, j, c) with gated start/end probabilities, i <= j, and width within
// the cap, scored by the inside average. probs is L x C x 3 for one item.
std::vector<CandidateSpan> candidates(const Tensor& probs, int length,
                                      double start_threshold, double end_threshold,
                                      int max_span_width);

// Score-descending greedy selection; ties break on earlier start, then
// shorter span, then lower class. Flat mode rejects any token overlap,
// nested mode rejects only partial overlap. Output is sorted by position.
std::vector<CandidateSpan> greedy_select(std::vector<CandidateSpan> cands, DecodeMode mode);

// Full decoding of a batched score tensor: probabilities -> candidates ->
// greedy_select -> final threshold filter. labels maps class_index to the
// span label string.
std::vector<std::vector<Span>> decode(const Tensor& scores, const BatchMask& mask,
                                      const std::vector<std::string>& labels, TaskKind task,
                                      const DecodeConfig& cfg, const HeadHyperparams& hp);

} // namespace glie

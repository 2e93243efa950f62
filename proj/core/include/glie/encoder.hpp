#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "glie/params.hpp"
#include "glie/tensor.hpp"
#include "glie/types.hpp"

namespace glie {

// ============================================================================
// Packed encoder input: one marker unit per label, then prompt words, then
// text words. Label markers precede every text word; TextWord(i) maps to
// tokens[i] exactly once, in order.
// ============================================================================

struct PackedUnit {
    enum class Kind { label_marker, prompt_word, text_word };
    Kind kind = Kind::text_word;
    int index = -1;    // label index for markers, token index for text words
    std::string text;  // unit string; labels are stored case-normalized
};

struct PackedInput {
    std::vector<PackedUnit> units;
    int num_labels = 0;
    int num_prompt = 0;
    int num_text = 0;
};

PackedInput pack_input(const std::vector<std::string>& labels, const std::string& prompt,
                       const TokenizedText& text, int max_labels = 30);

// Valid extents of each batch item inside the padded tensors.
struct BatchMask {
    std::vector<int> text_lengths;
    std::vector<int> label_counts;
    int max_text = 0;
    int max_labels = 0;

    int batch() const { return static_cast<int>(text_lengths.size()); }
};

struct EncodeResult {
    Tensor tokens;  // B x L x H, biLSTM applied, padded rows zero
    Tensor labels;  // B x C x H, raw marker embeddings, padded rows zero
    BatchMask mask;
};

// Deterministic embedding for one input unit, keyed by (string, seed).
std::vector<double> unit_embedding(std::string_view unit, std::uint64_t seed, int hidden);

// ============================================================================
// Bidirectional LSTM over text positions. Output row t is the concatenation
// of the forward hidden state at t (H/2) and the backward hidden state at t
// (H/2). Recurrence runs over each item's valid length only; padded rows
// come out zero.
// ============================================================================

struct BiLstmCache {
    Tensor input;  // B x L x H
    std::vector<int> lengths;
    // Per direction, all B x L x Hd: post-activation gates, cell state,
    // tanh(cell), hidden state.
    struct Direction {
        Tensor gate_i, gate_f, gate_g, gate_o;
        Tensor cell, tanh_cell, hidden;
    };
    Direction fw, bw;
    bool valid = false;
};

Tensor bilstm_forward(const Tensor& tokens, const std::vector<int>& lengths,
                      const BiLstmParams& params, BiLstmCache* cache = nullptr);

// Accumulates parameter gradients into `grads` and returns the gradient with
// respect to the LSTM input.
Tensor bilstm_backward(const Tensor& grad_out, const BiLstmCache& cache,
                       const BiLstmParams& params, BiLstmParams& grads);

BiLstmParams bilstm_zeros_like(const BiLstmParams& params);

// ============================================================================
// Toy encoder: seeded embeddings per unit, a window-3 averaging layer over
// the prompt+text word sequence for context mixing (label markers keep their
// raw embeddings, so permuting labels permutes label rows and nothing else),
// then the biLSTM over text positions.
// ============================================================================

struct EncoderCache {
    Tensor lstm_input;  // windowed text embeddings, B x L x H
    BiLstmCache lstm;
};

EncodeResult encode(const std::vector<PackedInput>& batch, std::uint64_t seed,
                    const BiLstmParams& params, EncoderCache* cache = nullptr);

} // namespace glie

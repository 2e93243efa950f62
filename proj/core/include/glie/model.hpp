#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glie/decoder.hpp"
#include "glie/encoder.hpp"
#include "glie/params.hpp"
#include "glie/scoring.hpp"
#include "glie/types.hpp"

namespace glie {

// A complete toy pipeline: the embedding seed, biLSTM and scoring head
// parameters, plus the hyperparameters they were built for.
struct Model {
    HeadHyperparams hp;
    std::uint64_t seed = 0;
    ModelParams params;
};

Model init_model(std::uint64_t seed, const HeadHyperparams& hp);

void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

struct ForwardResult {
    EncodeResult enc;
    Tensor scores;  // B x L x C x 3 logits
};

ForwardResult model_forward(const Model& model, const std::vector<PackedInput>& batch,
                            EncoderCache* enc_cache = nullptr, HeadCache* head_cache = nullptr);

// Single-example convenience path: pack, encode, score, decode.
std::vector<Span> predict_spans(const Model& model, const std::vector<std::string>& labels,
                                const std::string& prompt, const TokenizedText& text,
                                TaskKind task, const DecodeConfig& cfg = {});

} // namespace glie

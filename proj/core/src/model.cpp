#include "glie/model.hpp"

#include "glie/error.hpp"
#include "glie/rng.hpp"

namespace glie {

Model init_model(std::uint64_t seed, const HeadHyperparams& hp) {
    Model m;
    m.hp = hp;
    m.seed = seed;
    m.params = ModelParams::init(hp.hidden_size, hp.effective_mlp_hidden(),
                                 Rng(seed).split("params"));
    return m;
}

void save_model(const std::string& path, const Model& model) {
    save_params_file(path, model.seed, model.params);
}

Model load_model(const std::string& path) {
    LoadedParams loaded = load_params_file(path);
    Model m;
    m.seed = loaded.seed;
    m.hp.hidden_size = loaded.params.hidden;
    m.hp.mlp_hidden = loaded.params.mlp_hidden;
    m.params = std::move(loaded.params);
    return m;
}

ForwardResult model_forward(const Model& model, const std::vector<PackedInput>& batch,
                            EncoderCache* enc_cache, HeadCache* head_cache) {
    ForwardResult out;
    out.enc = encode(batch, model.seed, model.params.bilstm, enc_cache);
    out.scores = forward_scores(out.enc.tokens, out.enc.labels, model.params.head, head_cache);
    return out;
}

std::vector<Span> predict_spans(const Model& model, const std::vector<std::string>& labels,
                                const std::string& prompt, const TokenizedText& text,
                                TaskKind task, const DecodeConfig& cfg) {
    if (labels.empty()) {
        fail(ErrorCode::empty_labels, "prediction needs at least one label");
    }
    if (text.length() > model.hp.max_seq_len) {
        fail(ErrorCode::sequence_too_long, "text: " + std::to_string(text.length()) +
                                               " tokens exceeds max_seq_len " +
                                               std::to_string(model.hp.max_seq_len));
    }
    std::vector<std::string> norm;
    norm.reserve(labels.size());
    for (const std::string& l : labels) {
        norm.push_back(normalize_label(l));
    }
    const PackedInput packed = pack_input(norm, prompt, text, model.hp.max_labels);
    const ForwardResult fwd = model_forward(model, {packed});
    return decode(fwd.scores, fwd.enc.mask, norm, task, cfg, model.hp)[0];
}

} // namespace glie

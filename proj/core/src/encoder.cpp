#include "glie/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "glie/error.hpp"
#include "glie/rng.hpp"

namespace glie {

PackedInput pack_input(const std::vector<std::string>& labels, const std::string& prompt,
                       const TokenizedText& text, int max_labels) {
    if (static_cast<int>(labels.size()) > max_labels) {
        fail(ErrorCode::too_many_labels, std::to_string(labels.size()) +
                                             " labels exceeds the limit of " +
                                             std::to_string(max_labels));
    }
    if (text.empty()) {
        fail(ErrorCode::empty_text, "cannot pack an example with no text tokens");
    }
    PackedInput packed;
    packed.num_labels = static_cast<int>(labels.size());
    for (int c = 0; c < packed.num_labels; ++c) {
        packed.units.push_back({PackedUnit::Kind::label_marker, c,
                                normalize_label(labels[static_cast<std::size_t>(c)])});
    }
    const TokenizedText prompt_words = tokenize_words(prompt);
    packed.num_prompt = prompt_words.length();
    for (const std::string& w : prompt_words.tokens) {
        packed.units.push_back({PackedUnit::Kind::prompt_word, -1, w});
    }
    packed.num_text = text.length();
    for (int i = 0; i < packed.num_text; ++i) {
        packed.units.push_back({PackedUnit::Kind::text_word, i,
                                text.tokens[static_cast<std::size_t>(i)]});
    }
    return packed;
}

std::vector<double> unit_embedding(std::string_view unit, std::uint64_t seed, int hidden) {
    Rng rng = Rng(seed).split(fnv1a64(unit));
    std::vector<double> v(static_cast<std::size_t>(hidden));
    for (double& x : v) {
        x = rng.gaussian();
    }
    return v;
}

// ============================================================================
// biLSTM
// ============================================================================

namespace {

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void check_lstm_shapes(const Tensor& tokens, const std::vector<int>& lengths,
                       const BiLstmParams& params) {
    if (params.hidden <= 0 || params.hidden % 2 != 0) {
        fail(ErrorCode::odd_hidden_size,
             "biLSTM hidden size must be even, got " + std::to_string(params.hidden));
    }
    if (tokens.rank() != 3 || tokens.dim(2) != params.hidden) {
        fail(ErrorCode::shape_mismatch, "biLSTM input must be B x L x H with H = " +
                                            std::to_string(params.hidden));
    }
    const int hd = params.dir_hidden();
    for (const BiLstmDirParams* dir : {&params.fw, &params.bw}) {
        if (dir->w_ih.rank() != 2 || dir->w_ih.dim(0) != params.hidden ||
            dir->w_ih.dim(1) != 4 * hd || dir->w_hh.rank() != 2 ||
            dir->w_hh.dim(0) != hd || dir->w_hh.dim(1) != 4 * hd ||
            dir->bias.rank() != 1 || dir->bias.dim(0) != 4 * hd) {
            fail(ErrorCode::shape_mismatch, "biLSTM parameter shapes disagree with H = " +
                                                std::to_string(params.hidden));
        }
    }
    if (static_cast<int>(lengths.size()) != tokens.dim(0)) {
        fail(ErrorCode::shape_mismatch, "length mask must have one entry per batch item");
    }
    for (int len : lengths) {
        if (len < 0 || len > tokens.dim(1)) {
            fail(ErrorCode::shape_mismatch, "valid length outside padded extent");
        }
    }
}

// One direction over one batch item. `step(t)` visits positions in recurrence
// order; gate order in the 4*Hd axis is [i | f | g | o].
void run_direction(const Tensor& x, int b, int len, bool forward,
                   const BiLstmDirParams& p, int hidden, int hd,
                   BiLstmCache::Direction* cache, Tensor* out, int out_offset) {
    std::vector<double> h(static_cast<std::size_t>(hd), 0.0);
    std::vector<double> c(static_cast<std::size_t>(hd), 0.0);
    std::vector<double> z(static_cast<std::size_t>(4 * hd), 0.0);

    for (int step = 0; step < len; ++step) {
        const int t = forward ? step : len - 1 - step;
        for (int j = 0; j < 4 * hd; ++j) {
            z[static_cast<std::size_t>(j)] = p.bias(j);
        }
        for (int k = 0; k < hidden; ++k) {
            const double xv = x(b, t, k);
            if (xv == 0.0) continue;
            for (int j = 0; j < 4 * hd; ++j) {
                z[static_cast<std::size_t>(j)] += xv * p.w_ih(k, j);
            }
        }
        for (int k = 0; k < hd; ++k) {
            const double hv = h[static_cast<std::size_t>(k)];
            if (hv == 0.0) continue;
            for (int j = 0; j < 4 * hd; ++j) {
                z[static_cast<std::size_t>(j)] += hv * p.w_hh(k, j);
            }
        }
        for (int k = 0; k < hd; ++k) {
            const double gi = sigmoid(z[static_cast<std::size_t>(k)]);
            const double gf = sigmoid(z[static_cast<std::size_t>(hd + k)]);
            const double gg = std::tanh(z[static_cast<std::size_t>(2 * hd + k)]);
            const double go = sigmoid(z[static_cast<std::size_t>(3 * hd + k)]);
            const double cv = gf * c[static_cast<std::size_t>(k)] + gi * gg;
            const double tc = std::tanh(cv);
            const double hv = go * tc;
            c[static_cast<std::size_t>(k)] = cv;
            h[static_cast<std::size_t>(k)] = hv;
            if (cache != nullptr) {
                cache->gate_i(b, t, k) = gi;
                cache->gate_f(b, t, k) = gf;
                cache->gate_g(b, t, k) = gg;
                cache->gate_o(b, t, k) = go;
                cache->cell(b, t, k) = cv;
                cache->tanh_cell(b, t, k) = tc;
                cache->hidden(b, t, k) = hv;
            }
            (*out)(b, t, out_offset + k) = hv;
        }
    }
}

void backward_direction(const Tensor& grad_out, int b, int len, bool forward,
                        const BiLstmDirParams& p, const BiLstmCache& cache,
                        const BiLstmCache::Direction& dir_cache, int hidden, int hd,
                        int out_offset, BiLstmDirParams& grads, Tensor& grad_in) {
    std::vector<double> dh_rec(static_cast<std::size_t>(hd), 0.0);
    std::vector<double> dc(static_cast<std::size_t>(hd), 0.0);
    std::vector<double> dz(static_cast<std::size_t>(4 * hd), 0.0);

    // Walk recurrence order in reverse; "prev" is the neighbor the forward
    // pass read its h/c from.
    for (int step = len - 1; step >= 0; --step) {
        const int t = forward ? step : len - 1 - step;
        const int t_prev = forward ? t - 1 : t + 1;
        const bool has_prev = forward ? (t_prev >= 0) : (t_prev <= len - 1);

        for (int k = 0; k < hd; ++k) {
            const double gi = dir_cache.gate_i(b, t, k);
            const double gf = dir_cache.gate_f(b, t, k);
            const double gg = dir_cache.gate_g(b, t, k);
            const double go = dir_cache.gate_o(b, t, k);
            const double tc = dir_cache.tanh_cell(b, t, k);
            const double c_prev = has_prev ? dir_cache.cell(b, t_prev, k) : 0.0;

            const double dh = grad_out(b, t, out_offset + k) + dh_rec[static_cast<std::size_t>(k)];
            const double dgo = dh * tc;
            double dck = dc[static_cast<std::size_t>(k)] + dh * go * (1.0 - tc * tc);
            const double dgf = dck * c_prev;
            const double dgi = dck * gg;
            const double dgg = dck * gi;

            dz[static_cast<std::size_t>(k)] = dgi * gi * (1.0 - gi);
            dz[static_cast<std::size_t>(hd + k)] = dgf * gf * (1.0 - gf);
            dz[static_cast<std::size_t>(2 * hd + k)] = dgg * (1.0 - gg * gg);
            dz[static_cast<std::size_t>(3 * hd + k)] = dgo * go * (1.0 - go);

            dc[static_cast<std::size_t>(k)] = dck * gf;
        }

        for (int j = 0; j < 4 * hd; ++j) {
            grads.bias(j) += dz[static_cast<std::size_t>(j)];
        }
        for (int k = 0; k < hidden; ++k) {
            const double xv = cache.input(b, t, k);
            double acc = 0.0;
            for (int j = 0; j < 4 * hd; ++j) {
                const double d = dz[static_cast<std::size_t>(j)];
                grads.w_ih(k, j) += xv * d;
                acc += d * p.w_ih(k, j);
            }
            grad_in(b, t, k) += acc;
        }
        for (int k = 0; k < hd; ++k) {
            const double h_prev = has_prev ? dir_cache.hidden(b, t_prev, k) : 0.0;
            double acc = 0.0;
            for (int j = 0; j < 4 * hd; ++j) {
                const double d = dz[static_cast<std::size_t>(j)];
                grads.w_hh(k, j) += h_prev * d;
                acc += d * p.w_hh(k, j);
            }
            dh_rec[static_cast<std::size_t>(k)] = acc;
        }
    }
}

} // namespace

Tensor bilstm_forward(const Tensor& tokens, const std::vector<int>& lengths,
                      const BiLstmParams& params, BiLstmCache* cache) {
    check_lstm_shapes(tokens, lengths, params);
    const int batch = tokens.dim(0);
    const int max_len = tokens.dim(1);
    const int hidden = params.hidden;
    const int hd = params.dir_hidden();

    Tensor out({batch, max_len, hidden});
    if (cache != nullptr) {
        cache->input = tokens;
        cache->lengths = lengths;
        for (BiLstmCache::Direction* dir : {&cache->fw, &cache->bw}) {
            dir->gate_i = Tensor({batch, max_len, hd});
            dir->gate_f = Tensor({batch, max_len, hd});
            dir->gate_g = Tensor({batch, max_len, hd});
            dir->gate_o = Tensor({batch, max_len, hd});
            dir->cell = Tensor({batch, max_len, hd});
            dir->tanh_cell = Tensor({batch, max_len, hd});
            dir->hidden = Tensor({batch, max_len, hd});
        }
        cache->valid = true;
    }

    for (int b = 0; b < batch; ++b) {
        const int len = lengths[static_cast<std::size_t>(b)];
        run_direction(tokens, b, len, true, params.fw, hidden, hd,
                      cache != nullptr ? &cache->fw : nullptr, &out, 0);
        run_direction(tokens, b, len, false, params.bw, hidden, hd,
                      cache != nullptr ? &cache->bw : nullptr, &out, hd);
    }
    return out;
}

Tensor bilstm_backward(const Tensor& grad_out, const BiLstmCache& cache,
                       const BiLstmParams& params, BiLstmParams& grads) {
    if (!cache.valid) {
        fail(ErrorCode::missing_cache, "bilstm_backward needs the cache from the forward pass");
    }
    if (!grad_out.same_shape(cache.input)) {
        fail(ErrorCode::shape_mismatch, "grad_out shape disagrees with the cached forward input");
    }
    const int batch = grad_out.dim(0);
    const int hidden = params.hidden;
    const int hd = params.dir_hidden();

    Tensor grad_in(cache.input.shape());
    for (int b = 0; b < batch; ++b) {
        const int len = cache.lengths[static_cast<std::size_t>(b)];
        backward_direction(grad_out, b, len, true, params.fw, cache, cache.fw, hidden, hd, 0,
                           grads.fw, grad_in);
        backward_direction(grad_out, b, len, false, params.bw, cache, cache.bw, hidden, hd, hd,
                           grads.bw, grad_in);
    }
    return grad_in;
}

BiLstmParams bilstm_zeros_like(const BiLstmParams& params) {
    BiLstmParams z;
    z.hidden = params.hidden;
    for (auto [src, dst] : {std::pair{&params.fw, &z.fw}, std::pair{&params.bw, &z.bw}}) {
        dst->w_ih = Tensor(src->w_ih.shape());
        dst->w_hh = Tensor(src->w_hh.shape());
        dst->bias = Tensor(src->bias.shape());
    }
    return z;
}

// ============================================================================
// Toy encoder
// ============================================================================

EncodeResult encode(const std::vector<PackedInput>& batch, std::uint64_t seed,
                    const BiLstmParams& params, EncoderCache* cache) {
    const int hidden = params.hidden;
    if (hidden <= 0 || hidden % 2 != 0) {
        fail(ErrorCode::odd_hidden_size,
             "encoder hidden size must be even, got " + std::to_string(hidden));
    }

    EncodeResult result;
    BatchMask& mask = result.mask;
    for (const PackedInput& item : batch) {
        mask.text_lengths.push_back(item.num_text);
        mask.label_counts.push_back(item.num_labels);
        mask.max_text = std::max(mask.max_text, item.num_text);
        mask.max_labels = std::max(mask.max_labels, item.num_labels);
    }
    const int nb = mask.batch();

    Tensor lstm_input({nb, mask.max_text, hidden});
    result.labels = Tensor({nb, mask.max_labels, hidden});

    for (int b = 0; b < nb; ++b) {
        const PackedInput& item = batch[static_cast<std::size_t>(b)];
        const int n_words = item.num_prompt + item.num_text;

        // Raw embeddings for the word subsequence (prompt then text).
        std::vector<std::vector<double>> word_embed(static_cast<std::size_t>(n_words));
        int w = 0;
        for (const PackedUnit& unit : item.units) {
            if (unit.kind == PackedUnit::Kind::label_marker) {
                const std::vector<double> e = unit_embedding(unit.text, seed, hidden);
                for (int k = 0; k < hidden; ++k) {
                    result.labels(b, unit.index, k) = e[static_cast<std::size_t>(k)];
                }
            } else {
                word_embed[static_cast<std::size_t>(w++)] = unit_embedding(unit.text, seed, hidden);
            }
        }

        // Window-3 weighted average over prompt+text words; text rows feed
        // the LSTM. The center weight dominates so a word stays separable
        // from its neighbors; missing boundary neighbors contribute zero.
        constexpr double kSide = 0.2;
        constexpr double kCenter = 0.6;
        for (int p = item.num_prompt; p < n_words; ++p) {
            const int t = p - item.num_prompt;
            for (int k = 0; k < hidden; ++k) {
                double acc = kCenter *
                             word_embed[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)];
                if (p > 0) {
                    acc += kSide * word_embed[static_cast<std::size_t>(p) - 1]
                                             [static_cast<std::size_t>(k)];
                }
                if (p + 1 < n_words) {
                    acc += kSide * word_embed[static_cast<std::size_t>(p) + 1]
                                             [static_cast<std::size_t>(k)];
                }
                lstm_input(b, t, k) = acc;
            }
        }
    }

    result.tokens = bilstm_forward(lstm_input, mask.text_lengths, params,
                                   cache != nullptr ? &cache->lstm : nullptr);
    if (cache != nullptr) {
        cache->lstm_input = std::move(lstm_input);
    }
    return result;
}

} // namespace glie

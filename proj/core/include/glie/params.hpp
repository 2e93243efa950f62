#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "glie/rng.hpp"
#include "glie/tensor.hpp"

namespace glie {

// One bidirectional-LSTM direction. Gate order inside the 4*Hd axis is
// [input | forget | cell | output], Hd = hidden/2 per direction.
struct BiLstmDirParams {
    Tensor w_ih;  // (H, 4*Hd) input weights
    Tensor w_hh;  // (Hd, 4*Hd) recurrent weights
    Tensor bias;  // (4*Hd)
};

struct BiLstmParams {
    int hidden = 0;  // H, must be even
    BiLstmDirParams fw;
    BiLstmDirParams bw;

    int dir_hidden() const { return hidden / 2; }
};

// Scoring head: token/label projections H -> 2H and the two-layer MLP
// 3H -> mlp_hidden -> 3. Row-vector convention, out = in * W + b.
struct HeadParams {
    Tensor w_t;  // (H, 2H)
    Tensor b_t;  // (2H)
    Tensor w_l;  // (H, 2H)
    Tensor b_l;  // (2H)
    Tensor w1;   // (3H, mlp_hidden)
    Tensor b1;   // (mlp_hidden)
    Tensor w2;   // (mlp_hidden, 3)
    Tensor b2;   // (3)
};

// Every trainable tensor in the pipeline. Blocks prefixed "bilstm." form the
// encoder learning-rate group; "head." blocks form the other group.
struct ModelParams {
    int hidden = 0;
    int mlp_hidden = 0;
    BiLstmParams bilstm;
    HeadParams head;

    static ModelParams zeros(int hidden, int mlp_hidden);
    // Seeded gaussian init scaled by fan-in; biases start at zero.
    static ModelParams init(int hidden, int mlp_hidden, const Rng& rng);

    // Stable (name, tensor) views in serialization order.
    std::vector<std::pair<std::string, Tensor*>> named_tensors();
    std::vector<std::pair<std::string, const Tensor*>> named_tensors() const;
};

bool same_shapes(const ModelParams& a, const ModelParams& b);

// Flat binary parameter file: magic "GLNR", version u32, hidden u32,
// seed u64, then per block: name length u32 + name bytes + f32 count u32 +
// little-endian f32 data. mlp_hidden is recovered from the block sizes.
void save_params_file(const std::string& path, std::uint64_t seed, const ModelParams& params);

struct LoadedParams {
    std::uint64_t seed = 0;
    ModelParams params;
};

LoadedParams load_params_file(const std::string& path);

} // namespace glie

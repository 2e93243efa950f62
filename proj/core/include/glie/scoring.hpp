#pragma once

#include "glie/params.hpp"
#include "glie/tensor.hpp"

namespace glie {

// The scoring head. Tokens and labels are projected to 2H, fused into a
// B x L x C x 3H tensor as concat(T'0, L'0, T'1 * L'1) where 0/1 are the two
// halves of the 2H axis, then scored by a two-layer ReLU MLP into
// B x L x C x 3 logits in channel order (start, end, inside).

constexpr int kChannelStart = 0;
constexpr int kChannelEnd = 1;
constexpr int kChannelInside = 2;

struct HeadCache {
    Tensor tokens;   // B x L x H forward input
    Tensor labels;   // B x C x H forward input
    Tensor t_proj;   // B x L x 2H
    Tensor l_proj;   // B x C x 2H
    Tensor fused;    // B x L x C x 3H
    Tensor mlp_pre;  // B x L x C x mlp_hidden, pre-ReLU
    bool valid = false;
};

// T' = T * W_T + b_T and L' = L * W_L + b_L, applied per row.
void project(const Tensor& tokens, const Tensor& labels, const HeadParams& p,
             Tensor& t_proj, Tensor& l_proj);

Tensor fuse(const Tensor& t_proj, const Tensor& l_proj);

Tensor mlp_score(const Tensor& fused, const HeadParams& p, Tensor* mlp_pre = nullptr);

// project -> fuse -> mlp_score with all intermediates cached for backward.
Tensor forward_scores(const Tensor& tokens, const Tensor& labels, const HeadParams& p,
                      HeadCache* cache = nullptr);

struct HeadGrads {
    HeadParams params;  // same shapes as the forward parameters, zero-initialized
    Tensor d_tokens;    // B x L x H
    Tensor d_labels;    // B x C x H
};

HeadParams head_zeros_like(const HeadParams& p);

// Exact analytic gradients of the project -> fuse -> mlp_score composition.
HeadGrads head_backward(const Tensor& grad_scores, const HeadCache& cache, const HeadParams& p);

} // namespace glie

#include "glie/scoring.hpp"

#include "glie/error.hpp"

namespace glie {

namespace {

void check_head_shapes(const Tensor& tokens, const Tensor& labels, const HeadParams& p) {
    if (tokens.rank() != 3 || labels.rank() != 3) {
        fail(ErrorCode::shape_mismatch, "token and label representations must be rank 3");
    }
    if (tokens.dim(0) != labels.dim(0)) {
        fail(ErrorCode::shape_mismatch, "token and label batches disagree");
    }
    const int hidden = tokens.dim(2);
    if (labels.dim(2) != hidden) {
        fail(ErrorCode::shape_mismatch, "token and label hidden sizes disagree");
    }
    if (p.w_t.rank() != 2 || p.w_t.dim(0) != hidden || p.w_t.dim(1) != 2 * hidden ||
        p.w_l.dim(0) != hidden || p.w_l.dim(1) != 2 * hidden ||
        p.b_t.dim(0) != 2 * hidden || p.b_l.dim(0) != 2 * hidden) {
        fail(ErrorCode::shape_mismatch, "projection parameters disagree with hidden size " +
                                            std::to_string(hidden));
    }
    if (p.w1.dim(0) != 3 * hidden || p.w1.dim(1) != p.b1.dim(0) ||
        p.w2.dim(0) != p.w1.dim(1) || p.w2.dim(1) != 3 || p.b2.dim(0) != 3) {
        fail(ErrorCode::shape_mismatch, "MLP parameters disagree with hidden size " +
                                            std::to_string(hidden));
    }
}

// rows: (B, N, in) * (in, out) + bias -> (B, N, out)
void affine_rows(const Tensor& in, const Tensor& w, const Tensor& b, Tensor& out) {
    const int batch = in.dim(0);
    const int rows = in.dim(1);
    const int d_in = in.dim(2);
    const int d_out = w.dim(1);
    out = Tensor({batch, rows, d_out});
    for (int bi = 0; bi < batch; ++bi) {
        for (int r = 0; r < rows; ++r) {
            for (int j = 0; j < d_out; ++j) {
                out(bi, r, j) = b(j);
            }
            for (int k = 0; k < d_in; ++k) {
                const double v = in(bi, r, k);
                if (v == 0.0) continue;
                for (int j = 0; j < d_out; ++j) {
                    out(bi, r, j) += v * w(k, j);
                }
            }
        }
    }
}

} // namespace

void project(const Tensor& tokens, const Tensor& labels, const HeadParams& p,
             Tensor& t_proj, Tensor& l_proj) {
    check_head_shapes(tokens, labels, p);
    affine_rows(tokens, p.w_t, p.b_t, t_proj);
    affine_rows(labels, p.w_l, p.b_l, l_proj);
}

Tensor fuse(const Tensor& t_proj, const Tensor& l_proj) {
    if (t_proj.rank() != 3 || l_proj.rank() != 3 || t_proj.dim(0) != l_proj.dim(0) ||
        t_proj.dim(2) != l_proj.dim(2) || t_proj.dim(2) % 2 != 0) {
        fail(ErrorCode::shape_mismatch, "fuse needs projections of matching batch and 2H width");
    }
    const int batch = t_proj.dim(0);
    const int seq = t_proj.dim(1);
    const int n_labels = l_proj.dim(1);
    const int hidden = t_proj.dim(2) / 2;

    Tensor fused({batch, seq, n_labels, 3 * hidden});
    for (int b = 0; b < batch; ++b) {
        for (int l = 0; l < seq; ++l) {
            for (int c = 0; c < n_labels; ++c) {
                for (int k = 0; k < hidden; ++k) {
                    fused(b, l, c, k) = t_proj(b, l, k);
                    fused(b, l, c, hidden + k) = l_proj(b, c, k);
                    fused(b, l, c, 2 * hidden + k) =
                        t_proj(b, l, hidden + k) * l_proj(b, c, hidden + k);
                }
            }
        }
    }
    return fused;
}

Tensor mlp_score(const Tensor& fused, const HeadParams& p, Tensor* mlp_pre) {
    if (fused.rank() != 4 || fused.dim(3) != p.w1.dim(0)) {
        fail(ErrorCode::shape_mismatch, "MLP input width must equal 3H");
    }
    const int batch = fused.dim(0);
    const int seq = fused.dim(1);
    const int n_labels = fused.dim(2);
    const int d_in = fused.dim(3);
    const int d_mid = p.w1.dim(1);

    Tensor scores({batch, seq, n_labels, 3});
    if (mlp_pre != nullptr) {
        *mlp_pre = Tensor({batch, seq, n_labels, d_mid});
    }
    std::vector<double> mid(static_cast<std::size_t>(d_mid));
    for (int b = 0; b < batch; ++b) {
        for (int l = 0; l < seq; ++l) {
            for (int c = 0; c < n_labels; ++c) {
                for (int j = 0; j < d_mid; ++j) {
                    mid[static_cast<std::size_t>(j)] = p.b1(j);
                }
                for (int k = 0; k < d_in; ++k) {
                    const double v = fused(b, l, c, k);
                    if (v == 0.0) continue;
                    for (int j = 0; j < d_mid; ++j) {
                        mid[static_cast<std::size_t>(j)] += v * p.w1(k, j);
                    }
                }
                for (int ch = 0; ch < 3; ++ch) {
                    scores(b, l, c, ch) = p.b2(ch);
                }
                for (int j = 0; j < d_mid; ++j) {
                    const double pre = mid[static_cast<std::size_t>(j)];
                    if (mlp_pre != nullptr) {
                        (*mlp_pre)(b, l, c, j) = pre;
                    }
                    if (pre <= 0.0) continue; // ReLU
                    for (int ch = 0; ch < 3; ++ch) {
                        scores(b, l, c, ch) += pre * p.w2(j, ch);
                    }
                }
            }
        }
    }
    return scores;
}

Tensor forward_scores(const Tensor& tokens, const Tensor& labels, const HeadParams& p,
                      HeadCache* cache) {
    Tensor t_proj, l_proj;
    project(tokens, labels, p, t_proj, l_proj);
    Tensor fused = fuse(t_proj, l_proj);
    Tensor mlp_pre;
    Tensor scores = mlp_score(fused, p, cache != nullptr ? &mlp_pre : nullptr);
    if (cache != nullptr) {
        cache->tokens = tokens;
        cache->labels = labels;
        cache->t_proj = std::move(t_proj);
        cache->l_proj = std::move(l_proj);
        cache->fused = std::move(fused);
        cache->mlp_pre = std::move(mlp_pre);
        cache->valid = true;
    }
    return scores;
}

HeadParams head_zeros_like(const HeadParams& p) {
    HeadParams z;
    z.w_t = Tensor(p.w_t.shape());
    z.b_t = Tensor(p.b_t.shape());
    z.w_l = Tensor(p.w_l.shape());
    z.b_l = Tensor(p.b_l.shape());
    z.w1 = Tensor(p.w1.shape());
    z.b1 = Tensor(p.b1.shape());
    z.w2 = Tensor(p.w2.shape());
    z.b2 = Tensor(p.b2.shape());
    return z;
}

HeadGrads head_backward(const Tensor& grad_scores, const HeadCache& cache, const HeadParams& p) {
    if (!cache.valid) {
        fail(ErrorCode::missing_cache, "head_backward needs the cache from forward_scores");
    }
    const int batch = cache.fused.dim(0);
    const int seq = cache.fused.dim(1);
    const int n_labels = cache.fused.dim(2);
    const int hidden = cache.tokens.dim(2);
    const int d_in = cache.fused.dim(3);
    const int d_mid = p.w1.dim(1);
    if (grad_scores.rank() != 4 || grad_scores.dim(0) != batch || grad_scores.dim(1) != seq ||
        grad_scores.dim(2) != n_labels || grad_scores.dim(3) != 3) {
        fail(ErrorCode::shape_mismatch, "grad_scores must be B x L x C x 3");
    }

    HeadGrads out;
    out.params = head_zeros_like(p);
    out.d_tokens = Tensor(cache.tokens.shape());
    out.d_labels = Tensor(cache.labels.shape());

    Tensor d_tproj(cache.t_proj.shape());
    Tensor d_lproj(cache.l_proj.shape());

    std::vector<double> dz1(static_cast<std::size_t>(d_mid));
    std::vector<double> dx(static_cast<std::size_t>(d_in));

    // MLP and fusion backward, one (b, l, c) cell at a time.
    for (int b = 0; b < batch; ++b) {
        for (int l = 0; l < seq; ++l) {
            for (int c = 0; c < n_labels; ++c) {
                const double g0 = grad_scores(b, l, c, 0);
                const double g1 = grad_scores(b, l, c, 1);
                const double g2 = grad_scores(b, l, c, 2);
                out.params.b2(0) += g0;
                out.params.b2(1) += g1;
                out.params.b2(2) += g2;

                for (int j = 0; j < d_mid; ++j) {
                    const double pre = cache.mlp_pre(b, l, c, j);
                    if (pre > 0.0) {
                        out.params.w2(j, 0) += pre * g0;
                        out.params.w2(j, 1) += pre * g1;
                        out.params.w2(j, 2) += pre * g2;
                        dz1[static_cast<std::size_t>(j)] =
                            g0 * p.w2(j, 0) + g1 * p.w2(j, 1) + g2 * p.w2(j, 2);
                        out.params.b1(j) += dz1[static_cast<std::size_t>(j)];
                    } else {
                        dz1[static_cast<std::size_t>(j)] = 0.0;
                    }
                }

                for (int k = 0; k < d_in; ++k) {
                    dx[static_cast<std::size_t>(k)] = 0.0;
                }
                for (int j = 0; j < d_mid; ++j) {
                    const double d = dz1[static_cast<std::size_t>(j)];
                    if (d == 0.0) continue;
                    for (int k = 0; k < d_in; ++k) {
                        const double x = cache.fused(b, l, c, k);
                        out.params.w1(k, j) += x * d;
                        dx[static_cast<std::size_t>(k)] += d * p.w1(k, j);
                    }
                }

                // Unfuse: route dx back to the projected views.
                for (int k = 0; k < hidden; ++k) {
                    d_tproj(b, l, k) += dx[static_cast<std::size_t>(k)];
                    d_lproj(b, c, k) += dx[static_cast<std::size_t>(hidden + k)];
                    const double dprod = dx[static_cast<std::size_t>(2 * hidden + k)];
                    d_tproj(b, l, hidden + k) += dprod * cache.l_proj(b, c, hidden + k);
                    d_lproj(b, c, hidden + k) += dprod * cache.t_proj(b, l, hidden + k);
                }
            }
        }
    }

    // Projection backward.
    for (int b = 0; b < batch; ++b) {
        for (int l = 0; l < seq; ++l) {
            for (int j = 0; j < 2 * hidden; ++j) {
                const double d = d_tproj(b, l, j);
                if (d == 0.0) continue;
                out.params.b_t(j) += d;
                for (int k = 0; k < hidden; ++k) {
                    out.params.w_t(k, j) += cache.tokens(b, l, k) * d;
                    out.d_tokens(b, l, k) += d * p.w_t(k, j);
                }
            }
        }
        for (int c = 0; c < n_labels; ++c) {
            for (int j = 0; j < 2 * hidden; ++j) {
                const double d = d_lproj(b, c, j);
                if (d == 0.0) continue;
                out.params.b_l(j) += d;
                for (int k = 0; k < hidden; ++k) {
                    out.params.w_l(k, j) += cache.labels(b, c, k) * d;
                    out.d_labels(b, c, k) += d * p.w_l(k, j);
                }
            }
        }
    }

    return out;
}

} // namespace glie

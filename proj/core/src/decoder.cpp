#include "glie/decoder.hpp"

#include <algorithm>
#include <cmath>

#include "glie/error.hpp"

namespace glie {

namespace {

double logistic(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

bool spans_overlap(const CandidateSpan& a, const CandidateSpan& b) {
    return a.start <= b.end && b.start <= a.end;
}

bool contains(const CandidateSpan& outer, const CandidateSpan& inner) {
    return outer.start <= inner.start && inner.end <= outer.end;
}

// score desc, then earlier start, then shorter span, then lower class.
bool selection_order(const CandidateSpan& a, const CandidateSpan& b) {
    if (a.span_score != b.span_score) return a.span_score > b.span_score;
    if (a.start != b.start) return a.start < b.start;
    const int la = a.end - a.start;
    const int lb = b.end - b.start;
    if (la != lb) return la < lb;
    return a.class_index < b.class_index;
}

bool position_order(const CandidateSpan& a, const CandidateSpan& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end < b.end;
    return a.class_index < b.class_index;
}

} // namespace

Tensor probabilities(const Tensor& scores) {
    Tensor out(scores.shape());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = logistic(scores[i]);
    }
    return out;
}

double span_score(const std::vector<double>& inside_probs, int i, int j) {
    if (i < 0 || j < i || j >= static_cast<int>(inside_probs.size())) {
        fail(ErrorCode::index_out_of_range,
             "span (" + std::to_string(i) + ", " + std::to_string(j) + ") outside " +
                 std::to_string(inside_probs.size()) + " tokens");
    }
    double acc = 0.0;
    for (int k = i; k <= j; ++k) {
        acc += inside_probs[static_cast<std::size_t>(k)];
    }
    return acc / static_cast<double>(j - i + 1);
}

std::vector<CandidateSpan> candidates(const Tensor& probs, int length, double start_threshold,
                                      double end_threshold, int max_span_width) {
    if (probs.rank() != 3 || probs.dim(2) != 3) {
        fail(ErrorCode::shape_mismatch, "per-item probabilities must be L x C x 3");
    }
    if (length < 0 || length > probs.dim(0)) {
        fail(ErrorCode::index_out_of_range, "valid length outside tensor extent");
    }
    const int n_classes = probs.dim(1);

    std::vector<CandidateSpan> out;
    std::vector<double> inside(static_cast<std::size_t>(length));
    for (int c = 0; c < n_classes; ++c) {
        for (int k = 0; k < length; ++k) {
            inside[static_cast<std::size_t>(k)] = probs(k, c, 2);
        }
        for (int i = 0; i < length; ++i) {
            if (probs(i, c, 0) < start_threshold) continue;
            for (int j = i; j < length; ++j) {
                if (max_span_width > 0 && j - i + 1 > max_span_width) break;
                if (probs(j, c, 1) < end_threshold) continue;
                out.push_back({i, j, c, span_score(inside, i, j)});
            }
        }
    }
    return out;
}

std::vector<CandidateSpan> greedy_select(std::vector<CandidateSpan> cands, DecodeMode mode) {
    std::sort(cands.begin(), cands.end(), selection_order);
    std::vector<CandidateSpan> accepted;
    for (const CandidateSpan& cand : cands) {
        bool ok = true;
        for (const CandidateSpan& kept : accepted) {
            if (!spans_overlap(cand, kept)) continue;
            if (mode == DecodeMode::flat) {
                ok = false;
                break;
            }
            if (!contains(kept, cand) && !contains(cand, kept)) {
                ok = false;
                break;
            }
        }
        if (ok) {
            accepted.push_back(cand);
        }
    }
    std::sort(accepted.begin(), accepted.end(), position_order);
    return accepted;
}

std::vector<std::vector<Span>> decode(const Tensor& scores, const BatchMask& mask,
                                      const std::vector<std::string>& labels, TaskKind task,
                                      const DecodeConfig& cfg, const HeadHyperparams& hp) {
    if (scores.rank() != 4 || scores.dim(3) != 3) {
        fail(ErrorCode::shape_mismatch, "score tensor must be B x L x C x 3");
    }
    if (scores.dim(0) != mask.batch()) {
        fail(ErrorCode::shape_mismatch, "mask batch disagrees with score tensor");
    }

    const double task_threshold = hp.threshold_for(task);
    const double start_thr = cfg.start_or(task_threshold);
    const double end_thr = cfg.end_or(task_threshold);
    const double final_thr = cfg.final_or(task_threshold);
    for (double thr : {start_thr, end_thr, final_thr}) {
        if (!(thr >= 0.0 && thr <= 1.0)) {
            fail(ErrorCode::index_out_of_range,
                 "decode threshold " + std::to_string(thr) + " outside [0, 1]");
        }
    }

    const Tensor probs = probabilities(scores);
    const int batch = scores.dim(0);
    const int n_classes = scores.dim(2);

    std::vector<std::vector<Span>> out(static_cast<std::size_t>(batch));
    Tensor item({scores.dim(1), n_classes, 3});
    for (int b = 0; b < batch; ++b) {
        const int length = mask.text_lengths[static_cast<std::size_t>(b)];
        const int n_item_labels = mask.label_counts[static_cast<std::size_t>(b)];
        for (int l = 0; l < scores.dim(1); ++l) {
            for (int c = 0; c < n_classes; ++c) {
                for (int ch = 0; ch < 3; ++ch) {
                    item(l, c, ch) = probs(b, l, c, ch);
                }
            }
        }
        std::vector<CandidateSpan> cands =
            candidates(item, length, start_thr, end_thr, cfg.max_span_width);
        // Inactive label columns (padding in C) never produce spans.
        std::erase_if(cands, [&](const CandidateSpan& s) { return s.class_index >= n_item_labels; });
        std::vector<CandidateSpan> selected = greedy_select(std::move(cands), cfg.mode);
        for (const CandidateSpan& s : selected) {
            if (s.span_score < final_thr) continue;
            if (s.class_index >= static_cast<int>(labels.size())) {
                fail(ErrorCode::shape_mismatch, "class index outside the label list");
            }
            out[static_cast<std::size_t>(b)].push_back(
                {s.start, s.end, labels[static_cast<std::size_t>(s.class_index)], s.span_score});
        }
    }
    return out;
}

} // namespace glie

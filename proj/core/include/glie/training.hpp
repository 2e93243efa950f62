#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glie/model.hpp"
#include "glie/tensor.hpp"
#include "glie/types.hpp"

namespace glie {

enum class Schedule { cosine, linear, constant };

std::string_view schedule_name(Schedule s);
Schedule parse_schedule(std::string_view name);

struct TrainConfig {
    int steps = 1000;
    int batch_size = 8;
    // Stage-one defaults; the second fine-tuning stage used 5e-6 / 7e-6 with
    // a linear schedule (see the built-in presets).
    double lr_encoder = 1e-5;
    double lr_other = 5e-5;
    double weight_decay = 0.01;
    Schedule schedule = Schedule::cosine;
    double alpha_pos = 0.75;       // BCE weight on positive targets
    double label_smoothing = 0.0;  // alpha in [0, 1)
    double gamma = 0.0;            // focal exponent; 0 is plain BCE
};

// Built-in presets: "multitask" (500 steps, smoothing 0.2, lr 5e-6/7e-6),
// "large-v2.1" (1000 steps, smoothing 0.01, lr 5e-6/5e-6),
// "nuner-zero-span" (100 steps, smoothing 0.01, lr 5e-6/5e-6).
TrainConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

TrainConfig load_train_config(const std::string& path);
TrainConfig train_config_from_json(const std::string& text);

// ============================================================================
// Targets and loss
// ============================================================================

// Rank 3 (L x C x 3) for a single example, rank 4 (B x L x C x 3) once
// batched. mask is 1 on cells that count toward the loss.
struct TargetTensor {
    Tensor values;
    Tensor mask;
};

// For each gold span (i, j, c): start=1 at (i, c), end=1 at (j, c), inside=1
// at (k, c) for k in [i, j]; overlapping spans OR together.
TargetTensor build_targets(const AnnotatedExample& ex,
                           const std::vector<std::string>& label_order);

// Pads per-example targets into B x L x C x 3; padding and label columns
// beyond each example's own set are masked out.
TargetTensor stack_targets(const std::vector<TargetTensor>& per_example, int max_len,
                           int max_labels);

// targets <- targets * (1 - alpha) + 0.5 * alpha, elementwise.
TargetTensor smooth_targets(const TargetTensor& targets, double alpha);

struct BceResult {
    double loss = 0.0;
    Tensor grad_logits;  // same shape as probs, averaged over valid cells
};

// Weighted binary cross-entropy over probabilities; alpha_pos weights the
// positive term, (1 - alpha_pos) the negative term, optionally focal-scaled
// by gamma. Returns the mean loss over valid cells and its logit gradient.
BceResult weighted_bce(const Tensor& probs, const TargetTensor& targets, double alpha_pos,
                       double gamma);

// ============================================================================
// Optimization
// ============================================================================

double lr_schedule(Schedule kind, long step, long total_steps, double base_lr);

struct GroupLr {
    double encoder = 0.0;  // "bilstm." blocks
    double other = 0.0;    // "head." blocks
};

struct AdamState {
    long step = 0;
    ModelParams m;
    ModelParams v;
};

AdamState adam_init(const ModelParams& params);

// Adam with beta1=0.9, beta2=0.999, eps=1e-8, bias correction, and decoupled
// weight decay (params scaled by 1 - lr*wd before the update).
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, GroupLr lr,
               double weight_decay);

// ============================================================================
// Training loops
// ============================================================================

struct TrainStepRow {
    long step = 0;
    double lr_encoder = 0.0;
    double lr_other = 0.0;
    double loss = 0.0;
};

struct TrainResult {
    std::vector<TrainStepRow> history;
};

// Computes the loss and full parameter gradients for one batch of examples.
// Exposed for gradient checking.
double batch_loss_and_grads(const Model& model, const std::vector<AnnotatedExample>& batch,
                            double alpha_pos, double gamma, double label_smoothing,
                            ModelParams* grads);

TrainResult train(Model& model, const std::vector<AnnotatedExample>& dataset,
                  const TrainConfig& cfg, std::uint64_t seed);

void write_loss_csv(const std::string& path, const std::vector<TrainStepRow>& history);

// ============================================================================
// Self-learning
// ============================================================================

struct UnlabeledExample {
    TokenizedText text;
    std::vector<std::string> label_set;
};

struct SelfLearnReport {
    double pre_f1 = 0.0;
    double post_f1 = 0.0;
    double delta = 0.0;
    long pseudo_examples = 0;
    long pseudo_spans = 0;
    std::vector<TrainStepRow> history;
};

// Pseudo-annotates the unlabeled pool at pseudo_threshold, fine-tunes on the
// pseudo-labels with cfg, and reports span micro-F1 on the held-out split
// before and after. Throws NoPseudoLabels when nothing clears the threshold.
SelfLearnReport self_learn(Model& model, const std::vector<UnlabeledExample>& unlabeled,
                           const std::vector<AnnotatedExample>& heldout, const TrainConfig& cfg,
                           double pseudo_threshold, std::uint64_t seed);

// Span micro-F1 of the model on a labeled dataset (decodes each example with
// its own label set at the task's default threshold).
double evaluate_span_f1(const Model& model, const std::vector<AnnotatedExample>& dataset);

} // namespace glie

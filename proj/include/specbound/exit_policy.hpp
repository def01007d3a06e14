#pragma once

#include <span>
#include <utility>

namespace specbound {

// Annealed confidence threshold for early-exit decisions. A layer-dependent
// temperature T_l = 1 + anneal_alpha * (1 - l/L) flattens shallow-layer
// softmax outputs before the top-1 confidence is compared against the
// threshold. T_L == 1 exactly, so the final layer sees the raw distribution.
//
// The literature uses tau and gamma interchangeably for the threshold; this
// config has a single `threshold` field. `anneal_alpha` is the annealing
// strength and is unrelated to the acceptance rate used by the analytics
// module.
struct ActConfig {
    double threshold = 0.55;    // in (0, 1)
    double anneal_alpha = 0.2;  // >= 0
    int num_layers = 0;         // L

    void validate() const;
};

struct ExitDecision {
    bool exited = false;
    int token_id = 0;        // argmax of the raw logits (temperature preserves argmax)
    double confidence = 0.0; // top-1 probability under T_l
    int layer = 0;
    double temperature = 1.0;
};

// T_l = 1 + alpha * (1 - l/L); strictly decreasing in l for alpha > 0,
// exactly 1.0 at l == L. Requires 1 <= layer <= num_layers.
double anneal_temperature(int layer, int num_layers, double anneal_alpha);

// Top-1 token and its probability under softmax(logits / t).
std::pair<int, double> top1_confidence(std::span<const double> logits, double temperature);

// Exit iff the annealed top-1 confidence reaches the threshold. Never forces
// an exit; depth-bound handling is the engine's job.
ExitDecision should_exit(std::span<const double> logits, int layer, const ActConfig& cfg);

}  // namespace specbound

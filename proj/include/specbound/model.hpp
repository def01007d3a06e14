#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "specbound/kv_cache.hpp"
#include "specbound/rng.hpp"

namespace specbound {

// Reserved end-of-sequence token id.
inline constexpr int kEosToken = 1;

struct ToyModelSpec {
    int num_layers = 12;
    int hidden_dim = 32;
    int vocab_size = 64;
    int max_context = 256;
    uint64_t seed = 0;

    void validate() const;
    bool operator==(const ToyModelSpec&) const = default;
};

struct LayerParams {
    // All matrices row-major, out_dim x in_dim.
    std::vector<double> wq, wk, wv, wo;       // dim x dim
    std::vector<double> attn_norm, ffn_norm;  // dim, pre-norm scales
    std::vector<double> w1;                   // (2*dim) x dim
    std::vector<double> w2;                   // dim x (2*dim)
};

// Deterministic L-layer causal transformer with one exit head per layer
// 1..L-1 and a final LM head. Pre-norm, single-head attention, 2x-expansion
// feed-forward with SiLU, all in doubles with fixed reduction orders.
// Immutable after build/training; safe to share across decode sessions.
struct ToyModel {
    ToyModelSpec spec;
    std::vector<double> embedding;                 // vocab x dim
    std::vector<LayerParams> layers;               // L entries
    std::vector<double> final_head;                // vocab x dim
    std::vector<std::vector<double>> exit_heads;   // L-1 entries, vocab x dim
    // When set, exit_logits uses the final head at every layer (untrained
    // probing over intermediate states instead of the trained heads).
    bool oracle_heads = false;

    int num_layers() const { return spec.num_layers; }
    int hidden_dim() const { return spec.hidden_dim; }
    int vocab_size() const { return spec.vocab_size; }
};

// Builds all parameters from one seeded stream. Draw order: embedding rows,
// then per layer (wq, wk, wv, wo, attn_norm, ffn_norm, w1, w2), then the
// final head, then exit heads 1..L-1. Weights are uniform in [-s, s] with
// s = hidden_dim^(-1/2); norm scales are 1 + u with u uniform in [-s, s] so
// the residual stream keeps unit-scale layer contributions.
ToyModel build_model(const ToyModelSpec& spec);

// Layer-0 state of a token: its embedding row.
std::vector<double> embed(const ToyModel& m, int token);

// Runs layer `layer` (1-based) for `position`: writes this position's key
// and value at that layer into kv, attends over positions 0..position, and
// returns the layer output. Requires KV at `layer` for all earlier
// positions (CacheGapError otherwise, naming the first missing position).
std::vector<double> forward_layer(const ToyModel& m, int layer, int position,
                                  std::span<const double> hidden_in, KvCache& kv);

// Exit logits at a layer: heads 1..L-1 for intermediate layers, the final
// head at layer L (or everywhere in oracle-heads mode). Unscaled.
std::vector<double> exit_logits(const ToyModel& m, int layer, std::span<const double> hidden);

// Final LM head over a layer-L state: the reference distribution source.
std::vector<double> final_logits(const ToyModel& m, std::span<const double> hidden_last);

// ---- decoding strategies ---------------------------------------------------

struct Greedy {};
struct Temperature { double t = 1.0; };
struct TopP { double p = 0.9; double t = 1.0; };
using DecodeStrategy = std::variant<Greedy, Temperature, TopP>;

bool is_greedy(const DecodeStrategy& s);

// Probability distribution a strategy samples from, given raw logits.
// Temperature: softmax(logits / t). TopP: temperature softmax, then the
// smallest prefix of tokens (by descending probability, ties toward lower
// id) with cumulative mass >= p, renormalized. Greedy: point mass at the
// argmax.
std::vector<double> strategy_distribution(const DecodeStrategy& s, std::span<const double> logits);

// Token selection: argmax for greedy (no RNG consumed), otherwise one draw
// from strategy_distribution.
int select_token(const DecodeStrategy& s, std::span<const double> logits, RandomStream& rng);

// ---- baseline decoding -----------------------------------------------------

struct BaselineResult {
    std::vector<int> tokens;           // generated continuation (may end at EOS)
    std::vector<int> layers_per_token; // full-depth work per token, always L
};

// Full-depth autoregressive decoding. Generates up to n tokens, stopping
// after an EOS commit. Greedy is RNG-free; sampling strategies consume the
// seeded stream one draw per token.
BaselineResult baseline_decode(const ToyModel& m, std::span<const int> prompt, int n,
                               const DecodeStrategy& strategy, uint64_t rng_seed);

}  // namespace specbound

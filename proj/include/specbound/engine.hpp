#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "specbound/exit_policy.hpp"
#include "specbound/hidden_cache.hpp"
#include "specbound/kv_cache.hpp"
#include "specbound/model.hpp"
#include "specbound/rng.hpp"
#include "specbound/trace.hpp"

namespace specbound {

struct EngineConfig {
    ActConfig act;                      // act.num_layers is filled from the model
    int d_max = 10;                     // in [1, L-1]
    int w_max = 8;                      // >= 1
    DecodeStrategy strategy = Greedy{};
    int max_new_tokens = 64;
    uint64_t rng_seed = 0;
    // Excludes bonus tokens from the cost simulator's committed count so the
    // accounting matches the analytic round model. Does not change decoding.
    bool paper_faithful_bonus = false;

    void validate(int num_layers) const;
};

struct DraftOutcome {
    bool exited = false;        // false: depth bound hit, nothing drafted
    DraftToken draft;           // valid when exited
};

struct VerifyResult {
    int accepted_count = 0;
    std::optional<int> bonus_token;   // corrected token or free deep-pass token
    bool bonus_is_correction = false;
    std::vector<int> committed;       // tokens appended this round, in order
};

struct DecodeResult {
    std::vector<int> tokens;          // generated continuation (prompt excluded)
    std::vector<RoundTrace> traces;
    bool truncated_by_context = false;
};

// One speculative decode session over a shared immutable model.
//
// Sequence positions are absolute: position p holds token p, and the final
// logits at p give the distribution of token p+1. Between rounds every
// committed position except the last is at full depth; the newest committed
// token (corrected or bonus) has not been forwarded yet and becomes the
// first drafting position of the next round. Right after prefill the last
// prompt position is already at full depth and its final logits are held as
// the verification anchor, so the first round starts with a free scan over
// its cached states.
//
// Each drafting attempt forwards one position through layers 1..exit (Write),
// lazily extending earlier in-flight positions layer by layer whenever a
// deeper layer is entered (Reuse). A depth-bound trigger therefore leaves
// every in-flight position at exactly d_max; width-bound rounds align
// laggards to the deepest exit layer before the joint deep pass.
class DecodeSession {
public:
    DecodeSession(const ToyModel& m, EngineConfig cfg);

    // Full-depth forward of the prompt; stores the anchor logits.
    void prefill(std::span<const int> prompt);

    // Rewinds to the post-prefill state (prompt KV, anchor) and reseeds the
    // sampling stream. Requires a prior prefill in this session.
    void rewind_to_prefill(uint64_t new_seed);

    bool done() const;
    bool truncated_by_context() const { return truncated_; }

    // One draft-align-verify cycle; commits at least one token.
    RoundTrace run_round();

    // Runs rounds until done; returns generated tokens and traces.
    DecodeResult finish();

    // ---- round phases, exposed for tests ----
    DraftOutcome draft_next();
    int align_block();                 // returns the align target layer
    VerifyResult verify_block(int align_target_layer);

    const std::vector<int>& committed() const { return committed_; }
    std::vector<int> generated() const;
    const KvCache& kv() const { return kv_; }
    const EngineConfig& config() const { return cfg_; }

    // Records every committed position's hidden state at every layer for
    // coherence checks (memory grows with sequence length).
    void enable_hidden_recording(bool on) { record_hiddens_ = on; }
    // recorded_hiddens()[p][l] is position p's layer-l state (l in 0..L).
    const std::map<int, std::vector<std::vector<double>>>& recorded_hiddens() const {
        return archive_;
    }

    // Test fixture: verification stops one layer short of the top and reads
    // final logits off the layer-(L-1) state. Breaks losslessness on purpose.
    void debug_skip_final_verify_layer(bool on) { corrupt_verifier_ = on; }

private:
    struct PendingChecks;

    int attempt_position() const;
    void extend_slot_to(int slot, int layer, long& units);
    void drag_earlier_to(int layer, int before_position, long& units);
    const std::vector<double>& anchor() const;
    void archive_slot(int slot);
    void commit_token(int tok);

    const ToyModel& model_;
    EngineConfig cfg_;
    KvCache kv_;
    HiddenStateCache slots_;
    RandomStream rng_;

    std::vector<int> committed_;
    int prompt_len_ = 0;

    // In-flight round state.
    std::vector<int> block_;                 // slot ids, ascending position
    std::vector<DraftToken> drafts_;
    std::optional<TriggerReason> trigger_;
    long units_draft_ = 0, units_align_ = 0, units_verify_ = 0;
    int align_layers_crossed_ = 0;

    std::optional<std::vector<double>> anchor_logits_;  // finals at anchor_pos_
    int anchor_pos_ = -1;
    std::vector<std::vector<double>> last_prompt_hiddens_;  // layers 0..L of prompt end

    // Prefill snapshot for rewind.
    std::vector<int> prompt_snapshot_;
    std::vector<double> anchor_snapshot_;

    bool eos_seen_ = false;
    bool truncated_ = false;
    bool record_hiddens_ = false;
    bool corrupt_verifier_ = false;
    std::map<int, std::vector<std::vector<double>>> archive_;
};

// Decodes a prompt with the bounded-speculation engine.
DecodeResult decode(const ToyModel& m, std::span<const int> prompt, const EngineConfig& cfg);

// ---- lossless-equivalence checking ----------------------------------------

struct PromptEquivalence {
    int prompt_index = 0;
    bool match = true;
    int first_divergence = -1;   // token index, -1 if none
    int engine_token_count = 0;
    int rounds = 0;
    long accepted_total = 0;     // accepted drafts across rounds (CR input)
    long draft_total = 0;
};

struct EquivalenceReport {
    int mismatch_count = 0;
    std::vector<PromptEquivalence> prompts;
    double compression_rate() const;   // total accepted / total rounds
};

// Greedy-only: engine output vs full-depth baseline, token by token.
EquivalenceReport assert_equivalence(const ToyModel& m,
                                     std::span<const std::vector<int>> prompts,
                                     const EngineConfig& cfg);

// ---- layer-wise probing ----------------------------------------------------

struct LayerScanCell {
    int token_id = 0;
    double confidence = 0.0;
    bool exited_before = false;  // a shallower layer already cleared the threshold
};

struct LayerScanGrid {
    int num_layers = 0;
    int n_positions = 0;
    std::vector<int> generated;        // greedy continuation, one per column
    std::vector<LayerScanCell> cells;  // row-major, (layer-1) * n_positions + pos

    const LayerScanCell& at(int layer, int pos) const {
        return cells[static_cast<size_t>(layer - 1) * n_positions + static_cast<size_t>(pos)];
    }
};

// Greedy-decodes n positions from the context, recording every layer's
// exit-head token and annealed confidence per generated position.
LayerScanGrid layer_scan(const ToyModel& m, std::span<const int> context, int n_positions,
                         const ActConfig& act);

}  // namespace specbound

#pragma once

#include <optional>
#include <string>
#include <vector>

namespace specbound {

inline constexpr const char* kTraceSchema = "specbound-trace/1";

enum class TriggerReason { DepthBound, WidthBound, LengthLimit };

std::string to_string(TriggerReason t);
TriggerReason trigger_from_string(const std::string& s);

// One speculative token. `position` is the absolute sequence index the token
// occupies; `exit_layer` is the layer whose annealed confidence cleared the
// threshold (and no shallower layer did). The draft distribution is retained
// only in sampling modes, for the acceptance test.
struct DraftToken {
    int position = 0;
    int token_id = 0;
    std::optional<int> exit_layer;
    double confidence = 0.0;
    std::vector<double> draft_distribution;  // empty in greedy mode
};

// Record of one draft-align-verify cycle. `bonus_token` is the extra token
// committed from the verification pass's final logits: the corrected token
// after a rejection, or the free deep-pass token when a depth-bound round
// accepts all drafts. Width-bound rounds expose no extra logits, so they
// carry no bonus. Layer-unit counters are raw (token x layer) work;
// align_layers_crossed and verify_layers count distinct layers for the
// parallel-cost model.
struct RoundTrace {
    std::vector<DraftToken> drafts;
    TriggerReason trigger = TriggerReason::DepthBound;
    int align_target_layer = 0;
    int accepted_count = 0;
    std::optional<int> bonus_token;
    bool bonus_is_correction = false;
    long layer_units_draft = 0;
    long layer_units_align = 0;
    long layer_units_verify = 0;
    int align_layers_crossed = 0;
    int verify_layers = 0;
    int verify_positions = 0;
    double wall_ms = 0.0;
    int prompt_index = 0;  // set by multi-prompt drivers

    int committed_count() const { return accepted_count + (bonus_token.has_value() ? 1 : 0); }
};

}  // namespace specbound

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "specbound/model.hpp"

namespace specbound {

// Feature-cached training data for the exit heads. Sequences are sampled
// from the model itself; labels are the final head's greedy tokens; the
// hidden states of layers 1..L-1 at every position are cached so head
// training never re-runs the base model.
struct TrainCorpus {
    std::vector<std::vector<int>> sequences;
    // labels[s][t]: argmax of the final head over the full-depth state at
    // (sequence s, position t).
    std::vector<std::vector<int>> labels;
    // features[s][l-1]: (seq_len x dim) row-major hidden states of layer l.
    std::vector<std::vector<std::vector<double>>> features;

    size_t total_positions() const {
        size_t n = 0;
        for (const auto& s : sequences) n += s.size();
        return n;
    }
};

// Samples num_sequences sequences of seq_len tokens at temperature 1.0 from
// random single-token prompts, caching features and labels in one full-depth
// pass per sequence.
TrainCorpus build_corpus(const ToyModel& m, int num_sequences, int seq_len, uint64_t rng_seed);

// Mean cross-entropy of head `w` (vocab x dim) over (features, labels), and
// its analytic gradient d(loss)/d(w): mean over examples of
// (softmax(w h) - onehot(label)) outer h. Exposed for gradient checking.
double head_loss_and_gradient(std::span<const double> w, int vocab, int dim,
                              std::span<const double> features, std::span<const int> labels,
                              std::span<double> grad_out);

double head_loss(std::span<const double> w, int vocab, int dim,
                 std::span<const double> features, std::span<const int> labels);

struct TrainResult {
    // loss_curves[l-1]: per-head trajectory, entry 0 the pre-training loss
    // followed by one entry per step.
    std::vector<std::vector<double>> loss_curves;
};

// Full-batch gradient descent on each exit head independently. Base
// parameters and the final head are never touched.
TrainResult train_exit_heads(ToyModel& m, const TrainCorpus& corpus, int steps, double step_size);

}  // namespace specbound

#include "specbound/trainer.hpp"

#include <cmath>
#include <stdexcept>

#include "specbound/mathutil.hpp"

namespace specbound {

TrainCorpus build_corpus(const ToyModel& m, int num_sequences, int seq_len, uint64_t rng_seed) {
    if (num_sequences < 1 || seq_len < 1)
        throw std::invalid_argument("build_corpus: counts must be positive");
    if (seq_len > m.spec.max_context)
        throw std::length_error("build_corpus: seq_len exceeds max_context");

    const int L = m.num_layers();
    const size_t dim = static_cast<size_t>(m.hidden_dim());
    RandomStream rng(rng_seed);
    const Temperature sampler{1.0};

    TrainCorpus corpus;
    corpus.sequences.resize(static_cast<size_t>(num_sequences));
    corpus.labels.resize(static_cast<size_t>(num_sequences));
    corpus.features.resize(static_cast<size_t>(num_sequences));

    for (int s = 0; s < num_sequences; ++s) {
        auto& seq = corpus.sequences[static_cast<size_t>(s)];
        auto& labels = corpus.labels[static_cast<size_t>(s)];
        auto& feats = corpus.features[static_cast<size_t>(s)];
        feats.assign(static_cast<size_t>(L - 1),
                     std::vector<double>(static_cast<size_t>(seq_len) * dim));

        KvCache kv(L, m.hidden_dim(), m.spec.max_context);
        seq.push_back(rng.uniform_int(m.vocab_size()));
        for (int t = 0; t < seq_len; ++t) {
            std::vector<double> h = embed(m, seq[static_cast<size_t>(t)]);
            for (int l = 1; l <= L; ++l) {
                h = forward_layer(m, l, t, h, kv);
                if (l < L) {
                    double* dst = feats[static_cast<size_t>(l - 1)].data() +
                                  static_cast<size_t>(t) * dim;
                    for (size_t i = 0; i < dim; ++i) dst[i] = h[i];
                }
            }
            const std::vector<double> logits = final_logits(m, h);
            labels.push_back(argmax_lowest(logits));
            if (t + 1 < seq_len) {
                const std::vector<double> dist = strategy_distribution(sampler, logits);
                seq.push_back(rng.sample(dist));
            }
        }
    }
    return corpus;
}

double head_loss_and_gradient(std::span<const double> w, int vocab, int dim,
                              std::span<const double> features, std::span<const int> labels,
                              std::span<double> grad_out) {
    const size_t n = labels.size();
    if (n == 0) throw std::invalid_argument("head gradient: no examples");
    if (features.size() != n * static_cast<size_t>(dim))
        throw std::invalid_argument("head gradient: feature dimensions mismatch");
    if (w.size() != static_cast<size_t>(vocab) * dim || grad_out.size() != w.size())
        throw std::invalid_argument("head gradient: bad head size");

    for (double& g : grad_out) g = 0.0;
    double loss = 0.0;
    std::vector<double> logits(static_cast<size_t>(vocab));
    const double inv_n = 1.0 / static_cast<double>(n);
    for (size_t e = 0; e < n; ++e) {
        std::span<const double> h = features.subspan(e * dim, static_cast<size_t>(dim));
        matvec(w, h, logits, static_cast<size_t>(vocab), static_cast<size_t>(dim));
        const std::vector<double> p = softmax_stable(logits, 1.0);
        const int y = labels[e];
        if (y < 0 || y >= vocab) throw std::out_of_range("head gradient: bad label");
        loss += -std::log(std::max(p[static_cast<size_t>(y)], 1e-300));
        for (int v = 0; v < vocab; ++v) {
            const double coeff = (p[static_cast<size_t>(v)] - (v == y ? 1.0 : 0.0)) * inv_n;
            double* grow = grad_out.data() + static_cast<size_t>(v) * dim;
            for (int i = 0; i < dim; ++i) grow[i] += coeff * h[static_cast<size_t>(i)];
        }
    }
    return loss * inv_n;
}

double head_loss(std::span<const double> w, int vocab, int dim,
                 std::span<const double> features, std::span<const int> labels) {
    const size_t n = labels.size();
    if (n == 0) throw std::invalid_argument("head loss: no examples");
    double loss = 0.0;
    std::vector<double> logits(static_cast<size_t>(vocab));
    for (size_t e = 0; e < n; ++e) {
        std::span<const double> h = features.subspan(e * static_cast<size_t>(dim),
                                                     static_cast<size_t>(dim));
        matvec(w, h, logits, static_cast<size_t>(vocab), static_cast<size_t>(dim));
        const std::vector<double> p = softmax_stable(logits, 1.0);
        loss += -std::log(std::max(p[static_cast<size_t>(labels[e])], 1e-300));
    }
    return loss / static_cast<double>(n);
}

TrainResult train_exit_heads(ToyModel& m, const TrainCorpus& corpus, int steps, double step_size) {
    if (corpus.sequences.empty() || corpus.total_positions() == 0)
        throw std::invalid_argument("train_exit_heads: empty corpus");
    if (steps < 0) throw std::invalid_argument("train_exit_heads: negative steps");
    if (!(step_size > 0.0)) throw std::invalid_argument("train_exit_heads: step_size must be positive");

    const int L = m.num_layers();
    const int vocab = m.vocab_size();
    const int dim = m.hidden_dim();
    if (static_cast<int>(corpus.features.front().size()) != L - 1)
        throw std::invalid_argument("train_exit_heads: corpus layer count mismatch");

    // Flatten per-layer features and labels across sequences once.
    std::vector<int> labels;
    for (const auto& ls : corpus.labels) labels.insert(labels.end(), ls.begin(), ls.end());
    std::vector<std::vector<double>> feats(static_cast<size_t>(L - 1));
    for (int l = 1; l < L; ++l) {
        auto& flat = feats[static_cast<size_t>(l - 1)];
        flat.reserve(labels.size() * static_cast<size_t>(dim));
        for (const auto& seq_feats : corpus.features) {
            const auto& f = seq_feats.at(static_cast<size_t>(l - 1));
            flat.insert(flat.end(), f.begin(), f.end());
        }
    }
    if (feats.front().size() != labels.size() * static_cast<size_t>(dim))
        throw std::invalid_argument("train_exit_heads: feature dimensions mismatch");

    TrainResult result;
    result.loss_curves.resize(static_cast<size_t>(L - 1));
    std::vector<double> grad(static_cast<size_t>(vocab) * static_cast<size_t>(dim));
    for (int l = 1; l < L; ++l) {
        auto& head = m.exit_heads[static_cast<size_t>(l - 1)];
        auto& curve = result.loss_curves[static_cast<size_t>(l - 1)];
        const auto& flat = feats[static_cast<size_t>(l - 1)];
        for (int step = 0; step < steps; ++step) {
            const double loss = head_loss_and_gradient(head, vocab, dim, flat, labels, grad);
            curve.push_back(loss);
            for (size_t i = 0; i < head.size(); ++i) head[i] -= step_size * grad[i];
        }
        curve.push_back(head_loss(head, vocab, dim, flat, labels));
    }
    return result;
}

}  // namespace specbound

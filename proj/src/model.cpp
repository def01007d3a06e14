#include "specbound/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "specbound/mathutil.hpp"

namespace specbound {

namespace {

constexpr double kNormEps = 1e-6;

void fill_uniform(std::vector<double>& v, size_t n, double s, RandomStream& rng) {
    v.resize(n);
    for (size_t i = 0; i < n; ++i) v[i] = rng.uniform(-s, s);
}

// RMS normalization with per-channel scale; sum in index order.
std::vector<double> rmsnorm(std::span<const double> x, std::span<const double> scale) {
    double ss = 0.0;
    for (double xi : x) ss += xi * xi;
    const double inv = 1.0 / std::sqrt(ss / static_cast<double>(x.size()) + kNormEps);
    std::vector<double> out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] * inv * scale[i];
    return out;
}

}  // namespace

void ToyModelSpec::validate() const {
    if (num_layers < 2)
        throw std::invalid_argument("ToyModelSpec: num_layers must be >= 2, got " +
                                    std::to_string(num_layers));
    if (hidden_dim < 2) throw std::invalid_argument("ToyModelSpec: hidden_dim must be >= 2");
    if (vocab_size < 4) throw std::invalid_argument("ToyModelSpec: vocab_size must be >= 4");
    if (max_context < 1) throw std::invalid_argument("ToyModelSpec: max_context must be >= 1");
}

ToyModel build_model(const ToyModelSpec& spec) {
    spec.validate();
    const size_t dim = static_cast<size_t>(spec.hidden_dim);
    const size_t vocab = static_cast<size_t>(spec.vocab_size);
    const double s = 1.0 / std::sqrt(static_cast<double>(dim));

    ToyModel m;
    m.spec = spec;
    RandomStream rng(spec.seed);

    fill_uniform(m.embedding, vocab * dim, s, rng);
    m.layers.resize(static_cast<size_t>(spec.num_layers));
    for (LayerParams& lp : m.layers) {
        fill_uniform(lp.wq, dim * dim, s, rng);
        fill_uniform(lp.wk, dim * dim, s, rng);
        fill_uniform(lp.wv, dim * dim, s, rng);
        fill_uniform(lp.wo, dim * dim, s, rng);
        fill_uniform(lp.attn_norm, dim, s, rng);
        for (double& g : lp.attn_norm) g += 1.0;
        fill_uniform(lp.ffn_norm, dim, s, rng);
        for (double& g : lp.ffn_norm) g += 1.0;
        fill_uniform(lp.w1, 2 * dim * dim, s, rng);
        fill_uniform(lp.w2, dim * 2 * dim, s, rng);
    }
    fill_uniform(m.final_head, vocab * dim, s, rng);
    m.exit_heads.resize(static_cast<size_t>(spec.num_layers - 1));
    for (auto& head : m.exit_heads) fill_uniform(head, vocab * dim, s, rng);
    return m;
}

std::vector<double> embed(const ToyModel& m, int token) {
    if (token < 0 || token >= m.vocab_size())
        throw std::out_of_range("embed: token " + std::to_string(token) + " out of range");
    const size_t dim = static_cast<size_t>(m.hidden_dim());
    const double* row = m.embedding.data() + static_cast<size_t>(token) * dim;
    return {row, row + dim};
}

std::vector<double> forward_layer(const ToyModel& m, int layer, int position,
                                  std::span<const double> hidden_in, KvCache& kv) {
    const int L = m.num_layers();
    if (layer < 1 || layer > L)
        throw std::out_of_range("forward_layer: layer " + std::to_string(layer) + " out of range");
    const size_t dim = static_cast<size_t>(m.hidden_dim());
    if (hidden_in.size() != dim) throw std::invalid_argument("forward_layer: bad hidden size");
    if (kv.filled(layer) < position) throw CacheGapError(layer, kv.filled(layer));

    const LayerParams& lp = m.layers[static_cast<size_t>(layer - 1)];

    // Attention sublayer: pre-norm, q/k/v projections, write this position's
    // kv, then causal attention over positions 0..position in ascending order.
    const std::vector<double> xa = rmsnorm(hidden_in, lp.attn_norm);
    std::vector<double> q(dim), k(dim), v(dim);
    matvec(lp.wq, xa, q, dim, dim);
    matvec(lp.wk, xa, k, dim, dim);
    matvec(lp.wv, xa, v, dim, dim);
    kv.append(layer, position, k, v);  // rejects re-runs: filled must equal position

    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    std::vector<double> scores(static_cast<size_t>(position) + 1);
    double mx = -1e300;
    for (int p = 0; p <= position; ++p) {
        const double sc = dot(q, kv.key(layer, p)) * scale;
        scores[static_cast<size_t>(p)] = sc;
        if (sc > mx) mx = sc;
    }
    double denom = 0.0;
    for (double& sc : scores) { sc = std::exp(sc - mx); denom += sc; }
    std::vector<double> mix(dim, 0.0);
    for (int p = 0; p <= position; ++p) {
        const double w = scores[static_cast<size_t>(p)] / denom;
        std::span<const double> vp = kv.value(layer, p);
        for (size_t i = 0; i < dim; ++i) mix[i] += w * vp[i];
    }
    std::vector<double> attn_out(dim);
    matvec(lp.wo, mix, attn_out, dim, dim);

    std::vector<double> h(dim);
    for (size_t i = 0; i < dim; ++i) h[i] = hidden_in[i] + attn_out[i];

    // Feed-forward sublayer: pre-norm, expand 2x with SiLU, project back.
    const std::vector<double> xf = rmsnorm(h, lp.ffn_norm);
    std::vector<double> mid(2 * dim);
    matvec(lp.w1, xf, mid, 2 * dim, dim);
    for (double& x : mid) x = silu(x);
    std::vector<double> ffn_out(dim);
    matvec(lp.w2, mid, ffn_out, dim, 2 * dim);
    for (size_t i = 0; i < dim; ++i) h[i] += ffn_out[i];
    return h;
}

std::vector<double> exit_logits(const ToyModel& m, int layer, std::span<const double> hidden) {
    const int L = m.num_layers();
    if (layer < 1 || layer > L)
        throw std::out_of_range("exit_logits: layer " + std::to_string(layer) + " outside [1, " +
                                std::to_string(L) + "]");
    const size_t dim = static_cast<size_t>(m.hidden_dim());
    const size_t vocab = static_cast<size_t>(m.vocab_size());
    if (hidden.size() != dim) throw std::invalid_argument("exit_logits: bad hidden size");
    const std::vector<double>& head =
        (layer == L || m.oracle_heads) ? m.final_head : m.exit_heads[static_cast<size_t>(layer - 1)];
    std::vector<double> logits(vocab);
    matvec(head, hidden, logits, vocab, dim);
    return logits;
}

std::vector<double> final_logits(const ToyModel& m, std::span<const double> hidden_last) {
    return exit_logits(m, m.num_layers(), hidden_last);
}

bool is_greedy(const DecodeStrategy& s) { return std::holds_alternative<Greedy>(s); }

std::vector<double> strategy_distribution(const DecodeStrategy& s, std::span<const double> logits) {
    if (const auto* g = std::get_if<Greedy>(&s); g != nullptr) {
        std::vector<double> dist(logits.size(), 0.0);
        dist[static_cast<size_t>(argmax_lowest(logits))] = 1.0;
        return dist;
    }
    if (const auto* t = std::get_if<Temperature>(&s)) {
        if (!(t->t > 0.0)) throw std::invalid_argument("Temperature strategy: t must be positive");
        return softmax_stable(logits, t->t);
    }
    const TopP& tp = std::get<TopP>(s);
    if (!(tp.t > 0.0)) throw std::invalid_argument("TopP strategy: t must be positive");
    if (!(tp.p > 0.0 && tp.p <= 1.0)) throw std::invalid_argument("TopP strategy: p must be in (0,1]");
    std::vector<double> probs = softmax_stable(logits, tp.t);
    // Nucleus: keep the smallest prefix by descending probability (ties
    // toward lower id) reaching mass p; always at least one token.
    std::vector<int> order(probs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return probs[static_cast<size_t>(a)] > probs[static_cast<size_t>(b)]; });
    std::vector<double> dist(probs.size(), 0.0);
    double cum = 0.0;
    for (int idx : order) {
        dist[static_cast<size_t>(idx)] = probs[static_cast<size_t>(idx)];
        cum += probs[static_cast<size_t>(idx)];
        if (cum >= tp.p) break;
    }
    for (double& x : dist) x /= cum;
    return dist;
}

int select_token(const DecodeStrategy& s, std::span<const double> logits, RandomStream& rng) {
    if (is_greedy(s)) return argmax_lowest(logits);
    const std::vector<double> dist = strategy_distribution(s, logits);
    return rng.sample(dist);
}

BaselineResult baseline_decode(const ToyModel& m, std::span<const int> prompt, int n,
                               const DecodeStrategy& strategy, uint64_t rng_seed) {
    if (prompt.empty()) throw std::invalid_argument("baseline_decode: empty prompt");
    if (n < 0) throw std::invalid_argument("baseline_decode: negative count");
    if (static_cast<int>(prompt.size()) + n > m.spec.max_context)
        throw std::length_error("baseline_decode: context overflow");

    const int L = m.num_layers();
    KvCache kv(L, m.hidden_dim(), m.spec.max_context);
    RandomStream rng(rng_seed);

    std::vector<double> h;
    auto run_full = [&](int token, int position) {
        h = embed(m, token);
        for (int l = 1; l <= L; ++l) h = forward_layer(m, l, position, h, kv);
    };

    for (size_t p = 0; p < prompt.size(); ++p) run_full(prompt[p], static_cast<int>(p));

    BaselineResult out;
    int position = static_cast<int>(prompt.size()) - 1;
    for (int i = 0; i < n; ++i) {
        const std::vector<double> logits = final_logits(m, h);
        const int tok = select_token(strategy, logits, rng);
        out.tokens.push_back(tok);
        out.layers_per_token.push_back(L);
        if (tok == kEosToken) break;
        if (i + 1 < n) {
            ++position;
            run_full(tok, position);
        }
    }
    return out;
}

}  // namespace specbound

#include "specbound/exit_policy.hpp"

#include <stdexcept>
#include <string>

#include "specbound/mathutil.hpp"

namespace specbound {

void ActConfig::validate() const {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("ActConfig: threshold must be in (0,1), got " +
                                    std::to_string(threshold));
    if (!(anneal_alpha >= 0.0))
        throw std::invalid_argument("ActConfig: anneal_alpha must be >= 0");
    if (num_layers < 2)
        throw std::invalid_argument("ActConfig: num_layers must be >= 2");
}

double anneal_temperature(int layer, int num_layers, double anneal_alpha) {
    if (layer < 1 || layer > num_layers)
        throw std::out_of_range("anneal_temperature: layer " + std::to_string(layer) +
                                " outside [1, " + std::to_string(num_layers) + "]");
    if (!(anneal_alpha >= 0.0))
        throw std::invalid_argument("anneal_temperature: anneal_alpha must be >= 0");
    // 1 - l/L is exactly 0 at l == L, so T_L == 1 with no rounding residue.
    return 1.0 + anneal_alpha * (1.0 - static_cast<double>(layer) / static_cast<double>(num_layers));
}

std::pair<int, double> top1_confidence(std::span<const double> logits, double temperature) {
    if (!(temperature >= 1.0))
        throw std::invalid_argument("top1_confidence: temperature must be >= 1");
    const std::vector<double> p = softmax_stable(logits, temperature);
    const int tok = argmax_lowest(p);
    return {tok, p[static_cast<size_t>(tok)]};
}

ExitDecision should_exit(std::span<const double> logits, int layer, const ActConfig& cfg) {
    cfg.validate();
    const double t = anneal_temperature(layer, cfg.num_layers, cfg.anneal_alpha);
    const auto [tok, p] = top1_confidence(logits, t);
    ExitDecision d;
    d.exited = p >= cfg.threshold;
    d.token_id = tok;
    d.confidence = p;
    d.layer = layer;
    d.temperature = t;
    return d;
}

}  // namespace specbound

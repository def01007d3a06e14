#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace specbound {

// Argmax with ties broken toward the lowest index. Used everywhere a token
// is selected greedily; the tie-break keeps runs reproducible.
inline int argmax_lowest(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("argmax over empty vector");
    int best = 0;
    for (size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = static_cast<int>(i);
    }
    return best;
}

// Numerically stable softmax with temperature: softmax(logits / T).
// Max-subtraction before exponentiation; summation in index order.
inline std::vector<double> softmax_stable(std::span<const double> logits, double temperature) {
    if (logits.empty()) throw std::invalid_argument("softmax over empty vector");
    if (!(temperature > 0.0)) throw std::invalid_argument("softmax temperature must be positive");
    double mx = logits[0];
    for (double z : logits) {
        if (!std::isfinite(z)) throw std::invalid_argument("softmax input must be finite");
        if (z > mx) mx = z;
    }
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp((logits[i] - mx) / temperature);
        sum += p[i];
    }
    for (double& x : p) x /= sum;
    return p;
}

// out[o] = sum_i w[o * in_dim + i] * x[i], w row-major (out_dim x in_dim).
// Accumulation in ascending i; callers rely on this fixed reduction order.
inline void matvec(std::span<const double> w, std::span<const double> x,
                   std::span<double> out, size_t out_dim, size_t in_dim) {
    for (size_t o = 0; o < out_dim; ++o) {
        const double* row = w.data() + o * in_dim;
        double acc = 0.0;
        for (size_t i = 0; i < in_dim; ++i) acc += row[i] * x[i];
        out[o] = acc;
    }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double silu(double x) { return x / (1.0 + std::exp(-x)); }

}  // namespace specbound

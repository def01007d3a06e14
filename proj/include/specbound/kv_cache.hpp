#pragma once

#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace specbound {

// Structured error for a missing KV entry: attention at (layer, position)
// found a gap at an earlier position.
struct CacheGapError : std::runtime_error {
    int layer;
    int position;
    CacheGapError(int layer_, int position_)
        : std::runtime_error("KV cache gap at layer " + std::to_string(layer_) +
                             ", position " + std::to_string(position_)),
          layer(layer_),
          position(position_) {}
};

// Per-layer append-only key/value store over absolute positions. Each layer's
// filled positions form a contiguous prefix; layers fill at different rates
// while draft positions sit at different depths. truncate() drops a suffix on
// every layer and poisons the dropped entries with NaN so any stale read
// surfaces immediately.
class KvCache {
public:
    KvCache(int num_layers, int dim, int capacity)
        : num_layers_(num_layers), dim_(dim), capacity_(capacity),
          len_(static_cast<size_t>(num_layers), 0) {
        if (num_layers < 1 || dim < 1 || capacity < 1)
            throw std::invalid_argument("KvCache: dimensions must be positive");
        keys_.assign(static_cast<size_t>(num_layers) * capacity * dim, kPoison);
        values_.assign(static_cast<size_t>(num_layers) * capacity * dim, kPoison);
    }

    int num_layers() const { return num_layers_; }
    int dim() const { return dim_; }
    int capacity() const { return capacity_; }

    // Contiguous filled length of a layer (1-based layer index).
    int filled(int layer) const { return len_[check_layer(layer)]; }

    // Appends position `position` at `layer`; must be the next free slot.
    void append(int layer, int position, std::span<const double> k, std::span<const double> v) {
        const size_t li = check_layer(layer);
        if (position != len_[li])
            throw std::logic_error("KvCache::append out of order: layer " + std::to_string(layer) +
                                   " expected position " + std::to_string(len_[li]) + ", got " +
                                   std::to_string(position));
        if (position >= capacity_)
            throw std::length_error("KvCache::append: capacity exceeded");
        if (static_cast<int>(k.size()) != dim_ || static_cast<int>(v.size()) != dim_)
            throw std::invalid_argument("KvCache::append: bad vector size");
        double* kd = keys_.data() + offset(li, position);
        double* vd = values_.data() + offset(li, position);
        for (int i = 0; i < dim_; ++i) { kd[i] = k[i]; vd[i] = v[i]; }
        len_[li] = position + 1;
    }

    std::span<const double> key(int layer, int position) const {
        const size_t li = check_layer(layer);
        check_pos(li, layer, position);
        return {keys_.data() + offset(li, position), static_cast<size_t>(dim_)};
    }

    std::span<const double> value(int layer, int position) const {
        const size_t li = check_layer(layer);
        check_pos(li, layer, position);
        return {values_.data() + offset(li, position), static_cast<size_t>(dim_)};
    }

    // Shrinks every layer to at most new_length positions. Kept prefix
    // entries are untouched; dropped entries are poisoned.
    void truncate(int new_length) {
        if (new_length < 0) throw std::invalid_argument("KvCache::truncate: negative length");
        for (size_t li = 0; li < len_.size(); ++li) {
            for (int p = new_length; p < len_[li]; ++p) {
                double* kd = keys_.data() + offset(li, p);
                double* vd = values_.data() + offset(li, p);
                for (int i = 0; i < dim_; ++i) { kd[i] = kPoison; vd[i] = kPoison; }
            }
            if (len_[li] > new_length) len_[li] = new_length;
        }
    }

private:
    static constexpr double kPoison = std::numeric_limits<double>::quiet_NaN();

    size_t check_layer(int layer) const {
        if (layer < 1 || layer > num_layers_)
            throw std::out_of_range("KvCache: layer " + std::to_string(layer) + " out of range");
        return static_cast<size_t>(layer - 1);
    }
    void check_pos(size_t li, int layer, int position) const {
        if (position < 0 || position >= len_[li]) throw CacheGapError(layer, position);
    }
    size_t offset(size_t li, int position) const {
        return (li * capacity_ + static_cast<size_t>(position)) * dim_;
    }

    int num_layers_;
    int dim_;
    int capacity_;
    std::vector<int> len_;
    std::vector<double> keys_;
    std::vector<double> values_;
};

}  // namespace specbound

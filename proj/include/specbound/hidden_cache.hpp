#pragma once

#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace specbound {

// Fixed-size table of in-flight hidden states: (L+1) layers x w_max slots,
// allocated once per decode session and reused every round. Row 0 holds the
// embedding; row l the layer-l output. Each slot tracks its absolute
// position and high-water mark (deepest computed layer); entries exist for
// exactly layers 0..high_water.
class HiddenStateCache {
public:
    HiddenStateCache(int num_layers, int dim, int num_slots)
        : num_layers_(num_layers), dim_(dim), num_slots_(num_slots) {
        if (num_layers < 1 || dim < 1 || num_slots < 1)
            throw std::invalid_argument("HiddenStateCache: dimensions must be positive");
        data_.assign(static_cast<size_t>(num_layers + 1) * num_slots * dim, kPoison);
        position_.assign(static_cast<size_t>(num_slots), -1);
        high_water_.assign(static_cast<size_t>(num_slots), -1);
    }

    int num_slots() const { return num_slots_; }
    int position(int slot) const { return position_[check_slot(slot)]; }
    int high_water(int slot) const { return high_water_[check_slot(slot)]; }
    bool in_use(int slot) const { return position_[check_slot(slot)] >= 0; }

    // Claims a slot for an absolute position, installing its layer-0 state.
    void open(int slot, int abs_position, std::span<const double> embedding) {
        const size_t si = check_slot(slot);
        if (position_[si] >= 0) throw std::logic_error("HiddenStateCache: slot already in use");
        if (static_cast<int>(embedding.size()) != dim_)
            throw std::invalid_argument("HiddenStateCache: bad embedding size");
        position_[si] = abs_position;
        high_water_[si] = 0;
        write(si, 0, embedding);
    }

    std::span<const double> state(int slot, int layer) const {
        const size_t si = check_slot(slot);
        if (layer < 0 || layer > high_water_[si])
            throw std::out_of_range("HiddenStateCache: layer above high-water mark");
        return {data_.data() + offset(si, layer), static_cast<size_t>(dim_)};
    }

    // Stores the layer output one above the current high-water mark.
    void push_layer(int slot, int layer, std::span<const double> h) {
        const size_t si = check_slot(slot);
        if (layer != high_water_[si] + 1)
            throw std::logic_error("HiddenStateCache: non-contiguous layer write");
        if (layer > num_layers_) throw std::out_of_range("HiddenStateCache: layer out of range");
        write(si, layer, h);
        high_water_[si] = layer;
    }

    // Releases a slot, poisoning its contents.
    void release(int slot) {
        const size_t si = check_slot(slot);
        double* base = data_.data() + offset(si, 0);
        for (size_t i = 0; i < static_cast<size_t>(num_layers_ + 1) * dim_; ++i) base[i] = kPoison;
        position_[si] = -1;
        high_water_[si] = -1;
    }

private:
    static constexpr double kPoison = std::numeric_limits<double>::quiet_NaN();

    size_t check_slot(int slot) const {
        if (slot < 0 || slot >= num_slots_) throw std::out_of_range("HiddenStateCache: bad slot");
        return static_cast<size_t>(slot);
    }
    size_t offset(size_t si, int layer) const {
        return (static_cast<size_t>(layer) * num_slots_ + si) * dim_;
    }
    void write(size_t si, int layer, std::span<const double> h) {
        double* dst = data_.data() + offset(si, layer);
        for (int i = 0; i < dim_; ++i) dst[i] = h[static_cast<size_t>(i)];
    }

    int num_layers_;
    int dim_;
    int num_slots_;
    std::vector<double> data_;
    std::vector<int> position_;
    std::vector<int> high_water_;
};

}  // namespace specbound

#include "rsense/channels.hpp"

#include <cmath>
#include <stdexcept>

namespace rsense {

ChannelSet::ChannelSet(double start_hz, double spacing_hz, int count, double c0)
    : start_hz_(start_hz), spacing_hz_(spacing_hz), count_(count), c0_(c0) {
    if (!(start_hz > 0.0)) throw std::invalid_argument("ChannelSet: start frequency must be positive");
    if (!(spacing_hz > 0.0)) throw std::invalid_argument("ChannelSet: spacing must be positive");
    if (count < 1) throw std::invalid_argument("ChannelSet: need at least one channel");
    if (!(c0 > 0.0)) throw std::invalid_argument("ChannelSet: c0 must be positive");
}

ChannelSet ChannelSet::ieee802154_2_4ghz(int count, double c0) {
    return ChannelSet(2.405e9, 5.0e6, count, c0);
}

double ChannelSet::frequency_hz(int index) const {
    if (index < 0 || index >= count_) throw std::out_of_range("ChannelSet: channel index");
    return start_hz_ + static_cast<double>(index) * spacing_hz_;
}

double ChannelSet::beta(int index) const { return frequency_hz(index) / c0_; }

double ChannelSet::spacing_beta() const { return spacing_hz_ / c0_; }

double ChannelSet::mean_beta() const {
    return (start_hz_ + 0.5 * (count_ - 1) * spacing_hz_) / c0_;
}

std::vector<double> ChannelSet::betas() const {
    std::vector<double> out(static_cast<std::size_t>(count_));
    for (int l = 0; l < count_; ++l) out[static_cast<std::size_t>(l)] = beta(l);
    return out;
}

std::vector<int> channel_subset_indices(int total, int size) {
    if (total < 1 || size < 1 || size > total) {
        throw std::invalid_argument("channel_subset_indices: need 1 <= size <= total");
    }
    if (size == 1) return {total / 2};
    std::vector<int> out(static_cast<std::size_t>(size));
    for (int k = 0; k < size; ++k) {
        out[static_cast<std::size_t>(k)] = static_cast<int>(
            std::lround(static_cast<double>(k) * (total - 1) / (size - 1)));
    }
    return out;
}

}  // namespace rsense

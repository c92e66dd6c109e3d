#pragma once

#include <vector>

#include "rsense/constants.hpp"

namespace rsense {

// Ordered, uniformly spaced set of carrier frequencies and the derived
// inverse-wavelength grid.
class ChannelSet {
public:
    ChannelSet(double start_hz, double spacing_hz, int count, double c0 = kDefaultC0);

    // The 16 channels of the 2.4 GHz ISM band used by 802.15.4 radios:
    // 2.405 GHz start, 5 MHz spacing.
    static ChannelSet ieee802154_2_4ghz(int count = 16, double c0 = kDefaultC0);

    int count() const { return count_; }
    double start_hz() const { return start_hz_; }
    double spacing_hz() const { return spacing_hz_; }
    double c0() const { return c0_; }

    double frequency_hz(int index) const;  // 0-based channel index
    double beta(int index) const;          // cycles per meter
    double spacing_beta() const;           // xi = spacing_hz / c0
    double mean_beta() const;              // average over the set
    std::vector<double> betas() const;

private:
    double start_hz_;
    double spacing_hz_;
    int count_;
    double c0_;
};

// Indices (0-based) of `size` channels out of `total` chosen symmetrically
// so the subset keeps the full set's mean frequency while spreading the
// picks as wide as the band allows. For 16 channels this yields {0,15} at
// size 2 and {0,5,10,15} at size 4.
std::vector<int> channel_subset_indices(int total, int size);

}  // namespace rsense

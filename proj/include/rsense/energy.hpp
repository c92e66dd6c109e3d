#pragma once

#include <span>

#include "rsense/channels.hpp"
#include "rsense/reflection.hpp"

namespace rsense {

enum class EnergyMode {
    exact,            // channel-by-channel sum of squared zeta values
    closed_two_term,  // closed form for the two-harmonic signal
    average,          // flat average 4 ebar^2 C (a1^2 + a2^2) / 2
};

struct EnergyValue {
    double value = 0.0;  // squared dB
    EnergyMode mode = EnergyMode::exact;
};

// Reflected-signal energy accumulated over the channel set. The closed
// two-term form is exact for odd channel counts and an approximation for
// even ones; the average form drops the oscillatory terms entirely.
EnergyValue energy(const ReflectionParams& params, double d_m, const ChannelSet& channels,
                   EnergyMode mode);

// Brute-force energy over an explicit inverse-wavelength grid, with the
// zeta flavour selectable so approximations can be compared against their
// own channel sums.
double exact_energy_over_betas(const ReflectionParams& params, double d_m,
                               std::span<const double> betas,
                               ZetaMode zmode = ZetaMode::closed, double c0 = kDefaultC0);

// Ratio of signal energy to total noise energy: E / (C sigma^2).
double snr(const EnergyValue& e, int channel_count, double sigma_db);

// sin(pi count t) / sin(pi t) evaluated stably; equals `count` at integer t
// for odd counts. Exposed for tests of the closed energy form.
double dirichlet_ratio(int count, double t);

}  // namespace rsense

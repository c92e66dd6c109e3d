#pragma once

#include "rsense/constants.hpp"

namespace rsense {

// Scalar description of a single-bounce reflector. `gamma` is the
// field-amplitude reflection coefficient, `eta` the path-loss exponent and
// `delta_m` the excess path length of the bounced wave in meters.
struct ReflectionParams {
    double gamma = 0.0;
    double eta = kDefaultEta;
    double delta_m = 0.0;

    // Throws std::invalid_argument when outside the mathematically valid
    // range (series convergence requires gamma < 1).
    void validate() const;

    // True when gamma lies in the 0.2..0.7 band the model was calibrated
    // for. Values outside are accepted but worth flagging to users.
    bool gamma_in_assumed_band() const { return gamma >= 0.2 && gamma <= 0.7; }
};

// Carrier expressed as cycles per meter.
struct InverseWavelength {
    double beta = 0.0;       // f_c / c0, cycles per meter
    double c0 = kDefaultC0;  // propagation speed, m/s

    static InverseWavelength from_frequency_hz(double f_hz, double c0 = kDefaultC0);
    double frequency_hz() const { return beta * c0; }
    void validate() const;
};

enum class ZetaMode {
    closed,    // exact log-domain expression
    series,    // truncated Fourier series
    two_term,  // harmonics 1 and 2 only
};

// Fourier amplitude of the reflected component: A = gamma (1 + delta/d)^(-eta/2).
double amplitude(const ReflectionParams& params, double d_m);

// Depth of the sinusoidal ripple in the linear-scale received power,
// kappa = 2 A / (1 + A^2); strictly below 1 whenever gamma < 1.
double kappa(const ReflectionParams& params, double d_m);

// Log-scale perturbation (dB) the reflector adds on top of the direct-path
// power at the given carrier.
double zeta(const ReflectionParams& params, double d_m, const InverseWavelength& beta,
            ZetaMode mode, int series_terms = kDefaultSeriesTerms);

// Total power of the periodic perturbation, in squared dB:
// 4 ebar^2 Li2(A^2) with ebar = 10 log10(e).
double signal_power(const ReflectionParams& params, double d_m);

// Share of signal_power carried by the first two harmonics,
// (A^2 + A^4/4) / Li2(A^2); tends to 1 as the amplitude vanishes.
double two_harmonic_power_fraction(const ReflectionParams& params, double d_m);

}  // namespace rsense

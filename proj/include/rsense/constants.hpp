#pragma once

namespace rsense {

// One neper expressed in dB of a power ratio: 10*log10(e).
inline constexpr double kDbPerNeper = 4.342944819032518;

// Propagation speed used by default (m/s).
inline constexpr double kDefaultC0 = 3.0e8;

// Indoor path-loss exponent default.
inline constexpr double kDefaultEta = 3.0;

// Default false-alarm probability target.
inline constexpr double kDefaultPf = 6.0e-6;

// Default number of Fourier terms for the series form of the reflected
// signal. At amplitude 0.7 the first dropped term is below 1e-9.
inline constexpr int kDefaultSeriesTerms = 60;

}  // namespace rsense

#include "rsense/reflection.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rsense/specfun.hpp"

namespace rsense {

void ReflectionParams::validate() const {
    if (!(gamma >= 0.0 && gamma < 1.0)) {
        throw std::invalid_argument("ReflectionParams: gamma must lie in [0, 1)");
    }
    if (!(eta > 0.0)) {
        throw std::invalid_argument("ReflectionParams: eta must be positive");
    }
    if (!(delta_m >= 0.0)) {
        throw std::invalid_argument("ReflectionParams: delta must be non-negative");
    }
}

InverseWavelength InverseWavelength::from_frequency_hz(double f_hz, double c0) {
    if (!(f_hz > 0.0) || !(c0 > 0.0)) {
        throw std::invalid_argument("InverseWavelength: frequency and c0 must be positive");
    }
    return InverseWavelength{f_hz / c0, c0};
}

void InverseWavelength::validate() const {
    if (!(beta > 0.0) || !(c0 > 0.0)) {
        throw std::invalid_argument("InverseWavelength: beta and c0 must be positive");
    }
}

double amplitude(const ReflectionParams& params, double d_m) {
    params.validate();
    if (!(d_m > 0.0)) throw std::invalid_argument("amplitude: d must be positive");
    return params.gamma * std::pow(1.0 + params.delta_m / d_m, -0.5 * params.eta);
}

double kappa(const ReflectionParams& params, double d_m) {
    const double a = amplitude(params, d_m);
    return 2.0 * a / (1.0 + a * a);
}

double zeta(const ReflectionParams& params, double d_m, const InverseWavelength& beta,
            ZetaMode mode, int series_terms) {
    beta.validate();
    const double a = amplitude(params, d_m);
    if (a == 0.0) return 0.0;
    const double phase = 2.0 * std::numbers::pi * params.delta_m * beta.beta;

    switch (mode) {
        case ZetaMode::closed: {
            // ebar ln(1 + A^2) + ebar ln(1 - kappa cos(phase))
            const double k = 2.0 * a / (1.0 + a * a);
            return kDbPerNeper *
                   (std::log1p(a * a) + std::log1p(-k * std::cos(phase)));
        }
        case ZetaMode::series: {
            if (series_terms < 1) {
                throw std::invalid_argument("zeta: series needs at least one term");
            }
            double sum = 0.0;
            double ai = 1.0;
            for (int i = 1; i <= series_terms; ++i) {
                ai *= a;
                sum += ai / i * std::cos(i * phase);
            }
            return -2.0 * kDbPerNeper * sum;
        }
        case ZetaMode::two_term: {
            return -2.0 * kDbPerNeper *
                   (a * std::cos(phase) + 0.5 * a * a * std::cos(2.0 * phase));
        }
    }
    throw std::logic_error("zeta: unknown mode");
}

double signal_power(const ReflectionParams& params, double d_m) {
    const double a = amplitude(params, d_m);
    return 4.0 * kDbPerNeper * kDbPerNeper * dilog(a * a);
}

double two_harmonic_power_fraction(const ReflectionParams& params, double d_m) {
    const double a = amplitude(params, d_m);
    if (a == 0.0) return 1.0;  // limit of the ratio as the amplitude vanishes
    const double a2 = a * a;
    return (a2 + 0.25 * a2 * a2) / dilog(a2);
}

}  // namespace rsense

#include "rsense/energy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rsense {

namespace {

// Kernel sum form sum_{l=1..C} cos(2 pi (l - (C+1)/2) t), identical to
// sin(pi C t)/sin(pi t) but well conditioned near the removable
// singularities at integer t.
double dirichlet_kernel_sum(int count, double t) {
    const double offset = 0.5 * (count + 1);
    double sum = 0.0;
    for (int l = 1; l <= count; ++l) {
        sum += std::cos(2.0 * std::numbers::pi * (l - offset) * t);
    }
    return sum;
}

}  // namespace

double dirichlet_ratio(int count, double t) {
    if (count < 1) throw std::invalid_argument("dirichlet_ratio: count must be >= 1");
    const double denom = std::sin(std::numbers::pi * t);
    if (std::fabs(denom) < 1e-3) return dirichlet_kernel_sum(count, t);
    return std::sin(std::numbers::pi * count * t) / denom;
}

EnergyValue energy(const ReflectionParams& params, double d_m, const ChannelSet& channels,
                   EnergyMode mode) {
    params.validate();
    const double a = amplitude(params, d_m);
    const double a1 = a;
    const double a2 = 0.5 * a * a;
    const double four_e2 = 4.0 * kDbPerNeper * kDbPerNeper;
    const int c = channels.count();

    switch (mode) {
        case EnergyMode::exact: {
            double sum = 0.0;
            for (int l = 0; l < c; ++l) {
                const InverseWavelength b{channels.beta(l), channels.c0()};
                const double z = zeta(params, d_m, b, ZetaMode::closed);
                sum += z * z;
            }
            return {sum, mode};
        }
        case EnergyMode::closed_two_term: {
            const double delta = params.delta_m;
            const double xi = channels.spacing_beta();
            const double mean_phase = 2.0 * std::numbers::pi * delta * channels.mean_beta();
            double sum = c * 0.5 * (a1 * a1 + a2 * a2);
            const double coeff[4] = {a1 * a2, 0.5 * a1 * a1, a1 * a2, 0.5 * a2 * a2};
            for (int k = 1; k <= 4; ++k) {
                sum += coeff[k - 1] * std::cos(k * mean_phase) *
                       dirichlet_ratio(c, k * delta * xi);
            }
            return {four_e2 * sum, mode};
        }
        case EnergyMode::average: {
            return {four_e2 * c * 0.5 * (a1 * a1 + a2 * a2), mode};
        }
    }
    throw std::logic_error("energy: unknown mode");
}

double exact_energy_over_betas(const ReflectionParams& params, double d_m,
                               std::span<const double> betas, ZetaMode zmode, double c0) {
    double sum = 0.0;
    for (const double b : betas) {
        const double z = zeta(params, d_m, InverseWavelength{b, c0}, zmode);
        sum += z * z;
    }
    return sum;
}

double snr(const EnergyValue& e, int channel_count, double sigma_db) {
    if (channel_count < 1) throw std::invalid_argument("snr: channel count must be >= 1");
    if (!(sigma_db > 0.0)) throw std::invalid_argument("snr: sigma must be positive");
    return e.value / (channel_count * sigma_db * sigma_db);
}

}  // namespace rsense

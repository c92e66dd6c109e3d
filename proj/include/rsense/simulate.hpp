#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "rsense/channels.hpp"
#include "rsense/reflection.hpp"

namespace rsense {

// Deterministic per-trial Gaussian stream. Every (seed, trial) pair maps to
// its own generator state, so results do not depend on how trials are
// scheduled. Variates come from a fixed Box-Muller transform over
// mt19937_64 output rather than std::normal_distribution, whose algorithm
// is implementation-defined.
class TrialNormalStream {
public:
    TrialNormalStream(std::uint64_t seed, std::uint64_t trial);
    double next();

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;

    std::uint64_t next_u64();
};

struct SimSpec {
    ReflectionParams params;
    double d_m = 3.0;
    ChannelSet channels = ChannelSet::ieee802154_2_4ghz();
    double sigma_db = 0.5;
    std::int64_t trials = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

// Row-major trials x channels matrix of simulated measurements.
struct TrialMatrix {
    std::int64_t trials = 0;
    int channels = 0;
    std::vector<double> data;

    std::span<const double> row(std::int64_t t) const {
        return {data.data() + t * channels, static_cast<std::size_t>(channels)};
    }
};

// Full measurement model: per-channel zeta plus white Gaussian noise.
TrialMatrix simulate_measurements(const SimSpec& spec);

struct RateSummary {
    double detection_rate = 0.0;
    double mean_energy_db2 = 0.0;
};

// Fraction of trials whose energy exceeds the threshold, without
// materializing the full trial matrix.
RateSummary empirical_rates(const SimSpec& spec, double threshold_db2);

// Sum of squares of independent Gaussians with per-component means and
// variances (identity quadratic form, diagonal covariance).
struct QuadraticFormSpec {
    std::vector<double> means;
    std::vector<double> variances;

    void validate() const;
};

// Characteristic function of the quadratic form at angular frequency omega.
std::complex<double> quadratic_cf(const QuadraticFormSpec& spec, double omega);

// Survival probability P{y > x} by Gil-Pelaez inversion of quadratic_cf.
// Works for unequal variances, where no closed form is available; absolute
// accuracy around 1e-8. Throws on quadrature non-convergence.
double sf_via_cf_inversion(const QuadraticFormSpec& spec, double x);

// Monte Carlo estimate of the same exceedance probability; the independent
// oracle for both the closed forms and the inversion.
double mc_exceed_rate(const QuadraticFormSpec& spec, double x, std::int64_t trials,
                      std::uint64_t seed);

}  // namespace rsense

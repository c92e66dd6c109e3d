#include "rsense/simulate.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rsense {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<double> zeta_per_channel(const SimSpec& spec) {
    std::vector<double> out(static_cast<std::size_t>(spec.channels.count()));
    for (int l = 0; l < spec.channels.count(); ++l) {
        out[static_cast<std::size_t>(l)] =
            zeta(spec.params, spec.d_m,
                 InverseWavelength{spec.channels.beta(l), spec.channels.c0()},
                 ZetaMode::closed);
    }
    return out;
}

}  // namespace

TrialNormalStream::TrialNormalStream(std::uint64_t seed, std::uint64_t trial)
    : state_(mix64(seed ^ mix64(trial + kGolden))) {}

std::uint64_t TrialNormalStream::next_u64() {
    state_ += kGolden;
    return mix64(state_);
}

double TrialNormalStream::next() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    // Box-Muller on 53-bit uniforms; u1 shifted into (0, 1] so the log is safe.
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(angle);
    has_cached_ = true;
    return r * std::cos(angle);
}

void SimSpec::validate() const {
    params.validate();
    if (!(d_m > 0.0)) throw std::invalid_argument("SimSpec: d must be positive");
    if (!(sigma_db > 0.0)) throw std::invalid_argument("SimSpec: sigma must be positive");
    if (trials < 1) throw std::invalid_argument("SimSpec: trials must be >= 1");
}

TrialMatrix simulate_measurements(const SimSpec& spec) {
    spec.validate();
    const std::vector<double> z = zeta_per_channel(spec);
    const int c = spec.channels.count();
    TrialMatrix m;
    m.trials = spec.trials;
    m.channels = c;
    m.data.resize(static_cast<std::size_t>(spec.trials) * c);
    for (std::int64_t t = 0; t < spec.trials; ++t) {
        TrialNormalStream rng(spec.seed, static_cast<std::uint64_t>(t));
        double* row = m.data.data() + t * c;
        for (int l = 0; l < c; ++l) {
            row[l] = z[static_cast<std::size_t>(l)] + spec.sigma_db * rng.next();
        }
    }
    return m;
}

RateSummary empirical_rates(const SimSpec& spec, double threshold_db2) {
    spec.validate();
    const std::vector<double> z = zeta_per_channel(spec);
    const int c = spec.channels.count();
    std::int64_t hits = 0;
    double energy_sum = 0.0;
    for (std::int64_t t = 0; t < spec.trials; ++t) {
        TrialNormalStream rng(spec.seed, static_cast<std::uint64_t>(t));
        double e = 0.0;
        for (int l = 0; l < c; ++l) {
            const double v = z[static_cast<std::size_t>(l)] + spec.sigma_db * rng.next();
            e += v * v;
        }
        if (e > threshold_db2) ++hits;
        energy_sum += e;
    }
    return RateSummary{static_cast<double>(hits) / static_cast<double>(spec.trials),
                       energy_sum / static_cast<double>(spec.trials)};
}

void QuadraticFormSpec::validate() const {
    if (means.empty() || means.size() != variances.size()) {
        throw std::invalid_argument("QuadraticFormSpec: means and variances must match and be non-empty");
    }
    for (const double v : variances) {
        if (!(v > 0.0)) throw std::invalid_argument("QuadraticFormSpec: variances must be positive");
    }
}

std::complex<double> quadratic_cf(const QuadraticFormSpec& spec, double omega) {
    spec.validate();
    std::complex<double> product(1.0, 0.0);
    for (std::size_t i = 0; i < spec.means.size(); ++i) {
        const std::complex<double> denom(1.0, -2.0 * omega * spec.variances[i]);
        const std::complex<double> arg =
            std::complex<double>(0.0, omega * spec.means[i] * spec.means[i]) / denom;
        // Each denom has positive real part, so the principal square root is
        // the right branch factor by factor.
        product *= std::exp(arg) / std::sqrt(denom);
    }
    return product;
}

namespace {

// 24-point Gauss-Legendre nodes/weights on [-1, 1], via Newton iteration on
// the Legendre polynomial (computed once).
struct GaussLegendre24 {
    double node[24];
    double weight[24];
    GaussLegendre24() {
        const int n = 24;
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
                }
                pp = n * (x * p0 - p1) / (x * x - 1.0);
                const double dx = p0 / pp;
                x -= dx;
                if (std::fabs(dx) < 1e-15) break;
            }
            node[i] = -x;
            node[n - 1 - i] = x;
            weight[i] = 2.0 / ((1.0 - x * x) * pp * pp);
            weight[n - 1 - i] = weight[i];
        }
    }
};

const GaussLegendre24& gl24() {
    static const GaussLegendre24 table;
    return table;
}

}  // namespace

double sf_via_cf_inversion(const QuadraticFormSpec& spec, double x) {
    spec.validate();
    if (!(x > 0.0)) throw std::invalid_argument("sf_via_cf_inversion: x must be positive");

    // Gil-Pelaez: P{y > x} = 1/2 + (1/pi) Int_0^inf Im[psi(w) e^{-iwx}] / w dw.
    // Panels are half a period of the fastest oscillation, so panel sums
    // alternate once the envelope decays smoothly and the truncation error
    // is bounded by the last panel.
    double phase_scale = x;
    for (std::size_t i = 0; i < spec.means.size(); ++i) {
        phase_scale += spec.means[i] * spec.means[i] + 2.0 * spec.variances[i];
    }
    const double h = std::numbers::pi / phase_scale;
    const auto& gl = gl24();

    const double tol = 1e-9;
    double integral = 0.0;
    double prev[4] = {1.0, 1.0, 1.0, 1.0};
    const long max_panels = 500000;
    for (long k = 0; k < max_panels; ++k) {
        const double lo = k * h;
        double panel = 0.0;
        for (int q = 0; q < 24; ++q) {
            const double w = lo + 0.5 * h * (gl.node[q] + 1.0);
            const std::complex<double> val =
                quadratic_cf(spec, w) * std::polar(1.0, -w * x);
            panel += gl.weight[q] * val.imag() / w;
        }
        panel *= 0.5 * h;
        integral += panel;

        prev[k % 4] = panel;
        const bool tiny =
            std::fabs(prev[0]) < 1e-14 && std::fabs(prev[1]) < 1e-14 &&
            std::fabs(prev[2]) < 1e-14 && std::fabs(prev[3]) < 1e-14;
        const bool alternating =
            k >= 3 && (prev[(k - 1) % 4] * prev[k % 4]) < 0.0 &&
            (prev[(k - 2) % 4] * prev[(k - 1) % 4]) < 0.0 &&
            (prev[(k - 3) % 4] * prev[(k - 2) % 4]) < 0.0;
        if (k >= 8 && (tiny || (alternating && std::fabs(panel) < 0.5 * tol))) {
            const double sf = 0.5 + integral / std::numbers::pi;
            return std::min(1.0, std::max(0.0, sf));
        }
    }
    throw std::runtime_error("sf_via_cf_inversion: quadrature did not converge");
}

double mc_exceed_rate(const QuadraticFormSpec& spec, double x, std::int64_t trials,
                      std::uint64_t seed) {
    spec.validate();
    if (trials < 1) throw std::invalid_argument("mc_exceed_rate: trials must be >= 1");
    const std::size_t n = spec.means.size();
    std::vector<double> stds(n);
    for (std::size_t i = 0; i < n; ++i) stds[i] = std::sqrt(spec.variances[i]);
    std::int64_t hits = 0;
    for (std::int64_t t = 0; t < trials; ++t) {
        TrialNormalStream rng(seed, static_cast<std::uint64_t>(t));
        double y = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = spec.means[i] + stds[i] * rng.next();
            y += v * v;
        }
        if (y > x) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace rsense

#include "doctest.h"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "rsense/detector.hpp"
#include "rsense/energy.hpp"
#include "rsense/simulate.hpp"
#include "rsense/specfun.hpp"

using namespace rsense;

TEST_CASE("trial streams are deterministic and trial-indexed") {
    TrialNormalStream a(42, 7);
    TrialNormalStream b(42, 7);
    TrialNormalStream c(42, 8);
    bool any_differs = false;
    for (int i = 0; i < 32; ++i) {
        const double va = a.next();
        CHECK(va == b.next());
        if (va != c.next()) any_differs = true;
    }
    CHECK(any_differs);
}

TEST_CASE("simulate_measurements") {
    SimSpec spec;
    spec.params = ReflectionParams{0.35, 3.0, 0.4};
    spec.d_m = 3.0;
    spec.sigma_db = 0.5;
    spec.trials = 1000;
    spec.seed = 99;

    SUBCASE("identical seeds give bit-identical matrices") {
        const TrialMatrix m1 = simulate_measurements(spec);
        const TrialMatrix m2 = simulate_measurements(spec);
        CHECK(m1.data == m2.data);

        spec.seed = 100;
        const TrialMatrix m3 = simulate_measurements(spec);
        CHECK(m1.data != m3.data);
    }

    SUBCASE("pure noise has vanishing per-channel mean") {
        spec.params = ReflectionParams{0.0, 3.0, 0.0};
        spec.trials = 100'000;
        const TrialMatrix m = simulate_measurements(spec);
        for (int l = 0; l < m.channels; ++l) {
            double mean = 0.0;
            for (std::int64_t t = 0; t < m.trials; ++t) mean += m.row(t)[l];
            mean /= static_cast<double>(m.trials);
            CHECK(std::fabs(mean) < 4.0 * spec.sigma_db / std::sqrt(1e5));
        }
    }

    SUBCASE("noise-free limit reproduces the deterministic signal") {
        spec.sigma_db = 1e-9;
        spec.trials = 4;
        const TrialMatrix m = simulate_measurements(spec);
        for (std::int64_t t = 0; t < m.trials; ++t) {
            for (int l = 0; l < m.channels; ++l) {
                const double z = zeta(spec.params, spec.d_m,
                                      InverseWavelength{spec.channels.beta(l), spec.channels.c0()},
                                      ZetaMode::closed);
                CHECK(std::fabs(m.row(t)[l] - z) < 1e-6);
            }
        }
    }

    SUBCASE("per-channel sample variance matches sigma^2") {
        spec.params = ReflectionParams{0.0, 3.0, 0.0};
        spec.trials = 100'000;
        const TrialMatrix m = simulate_measurements(spec);
        const double n = static_cast<double>(m.trials);
        for (int l = 0; l < m.channels; ++l) {
            double mean = 0.0;
            for (std::int64_t t = 0; t < m.trials; ++t) mean += m.row(t)[l];
            mean /= n;
            double var = 0.0;
            for (std::int64_t t = 0; t < m.trials; ++t) {
                var += (m.row(t)[l] - mean) * (m.row(t)[l] - mean);
            }
            var /= (n - 1.0);
            // std of the variance estimator is sigma^2 sqrt(2/(n-1))
            CHECK(std::fabs(var - 0.25) < 3.0 * 0.25 * std::sqrt(2.0 / (n - 1.0)));
        }
    }
}

TEST_CASE("empirical rates track the closed forms") {
    SUBCASE("pure noise against the false-alarm expression") {
        SimSpec spec;
        spec.params = ReflectionParams{0.0, 3.0, 0.0};
        spec.sigma_db = 0.5;
        spec.trials = 1'000'000;
        spec.seed = 4242;
        const double pf = 1e-3;  // resolvable with 1e6 trials
        const double x = threshold_for_pf(16, 0.5, pf);
        const RateSummary rs = empirical_rates(spec, x);
        CHECK(std::fabs(rs.detection_rate - pf) <
              3.0 * std::sqrt(pf * (1.0 - pf) / 1e6));
        // mean energy of 16 squared noise terms is C sigma^2
        CHECK(rs.mean_energy_db2 == doctest::Approx(16.0 * 0.25).epsilon(0.01));
    }

    SUBCASE("deterministic exceedance when noise vanishes") {
        SimSpec spec;
        spec.params = ReflectionParams{0.35, 3.0, 0.5};
        spec.sigma_db = 1e-9;
        spec.trials = 100;
        const double e = energy(spec.params, spec.d_m, spec.channels, EnergyMode::exact).value;
        const double x = threshold_for_pf(16, 0.5, 6e-6);
        REQUIRE(e > x);
        CHECK(empirical_rates(spec, x).detection_rate == doctest::Approx(1.0));
    }

    SUBCASE("occupied trials against the ROC closed form") {
        SimSpec spec;
        spec.params = ReflectionParams{0.35, 3.0, 0.4};
        spec.sigma_db = 0.5;
        spec.trials = 1'000'000;
        spec.seed = 777;
        const double pf = 6e-6;
        const double x = threshold_for_pf(16, spec.sigma_db, pf);
        const double e = energy(spec.params, spec.d_m, spec.channels, EnergyMode::exact).value;
        const double pd = roc_point(16, spec.sigma_db, e, pf);
        const RateSummary rs = empirical_rates(spec, x);
        CHECK(std::fabs(rs.detection_rate - pd) <
              3.0 * std::sqrt(pd * (1.0 - pd) / 1e6));
    }
}

TEST_CASE("characteristic function of the Gaussian quadratic form") {
    SUBCASE("unit value at zero frequency") {
        const QuadraticFormSpec q{{1.0, -2.0}, {0.5, 2.0}};
        const std::complex<double> v = quadratic_cf(q, 0.0);
        CHECK(v.real() == doctest::Approx(1.0));
        CHECK(v.imag() == doctest::Approx(0.0));
    }

    SUBCASE("central equal-variance case reduces to (1-2jw)^(-N/2)") {
        const QuadraticFormSpec q{{0.0, 0.0, 0.0, 0.0}, {1.0, 1.0, 1.0, 1.0}};
        const std::complex<double> got = quadratic_cf(q, 0.1);
        const std::complex<double> want =
            std::pow(std::complex<double>(1.0, -0.2), -2.0);
        CHECK(std::abs(got - want) < 1e-14);
    }

    SUBCASE("empirical characteristic function agrees") {
        const QuadraticFormSpec q{{1.0, 2.0, 0.0}, {1.0, 1.0, 1.0}};
        const double omega = 0.05;
        const std::complex<double> want = quadratic_cf(q, omega);
        const std::int64_t trials = 10'000'000;
        double re = 0.0, im = 0.0;
        for (std::int64_t t = 0; t < trials; ++t) {
            TrialNormalStream rng(31337, static_cast<std::uint64_t>(t));
            double y = 0.0;
            for (std::size_t i = 0; i < q.means.size(); ++i) {
                const double v = q.means[i] + rng.next();
                y += v * v;
            }
            re += std::cos(omega * y);
            im += std::sin(omega * y);
        }
        re /= static_cast<double>(trials);
        im /= static_cast<double>(trials);
        // the summands are bounded by one, so the estimator std is below
        // 1/sqrt(trials)
        const double band = 3.0 / std::sqrt(static_cast<double>(trials));
        CHECK(std::fabs(re - want.real()) < band);
        CHECK(std::fabs(im - want.imag()) < band);
    }

    SUBCASE("validation") {
        CHECK_THROWS_AS((quadratic_cf(QuadraticFormSpec{{1.0}, {1.0, 2.0}}, 0.1)),
                        std::invalid_argument);
        CHECK_THROWS_AS((quadratic_cf(QuadraticFormSpec{{1.0}, {0.0}}, 0.1)),
                        std::invalid_argument);
    }
}

TEST_CASE("Gil-Pelaez inversion of the quadratic-form distribution") {
    SUBCASE("equal variances, zero means: matches the gamma tail") {
        const QuadraticFormSpec q{std::vector<double>(16, 0.0), std::vector<double>(16, 1.0)};
        CHECK(std::fabs(sf_via_cf_inversion(q, 53.6117) - reg_upper_gamma(8.0, 53.6117 / 2.0)) <
              1e-7);
        for (double x : {4.0, 12.0, 20.0}) {
            CHECK(std::fabs(sf_via_cf_inversion(q, x) - reg_upper_gamma(8.0, x / 2.0)) < 1e-8);
        }
    }

    SUBCASE("noncentral equal-variance case matches the mixture series") {
        const QuadraticFormSpec q{{1.0, 2.0, 0.0, 1.5}, std::vector<double>(4, 1.0)};
        const double mu = 1.0 + 4.0 + 0.0 + 2.25;
        for (double x : {2.0, 8.0, 20.0}) {
            CHECK(std::fabs(sf_via_cf_inversion(q, x) -
                            noncentral_chi2_sf(Chi2Spec{4, 1.0, mu}, x)) < 1e-7);
        }
    }

    SUBCASE("unequal variances against Monte Carlo") {
        const QuadraticFormSpec q{{0.0, 0.0, 0.0}, {1.0, 2.0, 3.0}};
        const double p = sf_via_cf_inversion(q, 5.0);
        const std::int64_t trials = 10'000'000;
        const double rate = mc_exceed_rate(q, 5.0, trials, 8675309);
        CHECK(std::fabs(rate - p) <
              3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(trials)));
    }
}

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "rsense/energy.hpp"
#include "rsense/pipeline.hpp"
#include "rsense/simulate.hpp"

using namespace rsense;

TEST_CASE("trace parsing") {
    SUBCASE("whitespace, commas, comments and the optional annotation") {
        std::istringstream in(
            "# time_s channel rss_dbm\n"
            "0.000, 0, -50.25\n"
            "0.002 1 -51.5 7\n"
            "\n"
            "0.004,2,-49.75,3\n");
        const auto records = parse_trace(in);
        REQUIRE(records.size() == 3);
        CHECK(records[0].channel_index == 0);
        CHECK(records[0].rss_dbm == doctest::Approx(-50.25));
        CHECK(records[0].annotation == -1);
        CHECK(records[1].annotation == 7);
        CHECK(records[2].annotation == 3);
    }

    SUBCASE("malformed lines are rejected with the line number") {
        std::istringstream in("0.0 0 -50\nnot-a-number 1 -51\n");
        CHECK_THROWS_WITH_AS(static_cast<void>(parse_trace(in)),
                             doctest::Contains("line 2"), std::runtime_error);
    }

    SUBCASE("round trip through the text format") {
        std::vector<RssRecord> records{{0.0, 0, -50.125, -1}, {0.002, 1, -51.5, 4}};
        std::stringstream buf;
        write_trace(buf, records);
        const auto back = parse_trace(buf);
        REQUIRE(back.size() == records.size());
        for (std::size_t i = 0; i < records.size(); ++i) {
            CHECK(back[i].timestamp_s == doctest::Approx(records[i].timestamp_s));
            CHECK(back[i].channel_index == records[i].channel_index);
            CHECK(back[i].rss_dbm == doctest::Approx(records[i].rss_dbm));
            CHECK(back[i].annotation == records[i].annotation);
        }
    }
}

TEST_CASE("baseline estimation") {
    const ChannelSet channels = ChannelSet::ieee802154_2_4ghz(4);

    SUBCASE("constant trace") {
        std::vector<RssRecord> trace;
        for (int s = 0; s < 10; ++s) {
            for (int l = 0; l < 4; ++l) {
                trace.push_back(RssRecord{s * 0.008 + l * 0.002, l, -50.0, -1});
            }
        }
        const BaselineProfile profile = estimate_baseline(trace, channels);
        for (int l = 0; l < 4; ++l) {
            CHECK(profile.mean_dbm[l] == doctest::Approx(-50.0));
            CHECK(profile.resid_std_db[l] == doctest::Approx(0.0));
            CHECK(profile.sample_count[l] == 10);
        }
    }

    SUBCASE("noisy channel-dependent levels are recovered") {
        const int k = 1000;
        const double sigma = 0.2;
        std::vector<RssRecord> trace;
        for (int s = 0; s < k; ++s) {
            TrialNormalStream rng(5, static_cast<std::uint64_t>(s));
            for (int l = 0; l < 4; ++l) {
                trace.push_back(
                    RssRecord{s * 0.008 + l * 0.002, l, -40.0 - l + sigma * rng.next(), -1});
            }
        }
        const BaselineProfile profile = estimate_baseline(trace, channels);
        for (int l = 0; l < 4; ++l) {
            CHECK(std::fabs(profile.mean_dbm[l] - (-40.0 - l)) <
                  4.0 * sigma / std::sqrt(static_cast<double>(k)));
            CHECK(profile.resid_std_db[l] == doctest::Approx(sigma).epsilon(0.15));
        }
    }

    SUBCASE("single sample per channel") {
        std::vector<RssRecord> trace{{0.0, 0, -47.5, -1},
                                     {0.002, 1, -48.5, -1},
                                     {0.004, 2, -49.5, -1},
                                     {0.006, 3, -50.5, -1}};
        const BaselineProfile profile = estimate_baseline(trace, channels);
        CHECK(profile.mean_dbm[2] == doctest::Approx(-49.5));
        CHECK(profile.resid_std_db[2] == doctest::Approx(0.0));
        CHECK(profile.sample_count[2] == 1);
    }

    SUBCASE("empty channel names the offender") {
        std::vector<RssRecord> trace{{0.0, 0, -47.5, -1}, {0.002, 1, -48.5, -1}};
        CHECK_THROWS_WITH_AS(static_cast<void>(estimate_baseline(trace, channels)),
                             doctest::Contains("channel 2"), std::runtime_error);
    }

    SUBCASE("profile file round trip") {
        std::vector<RssRecord> trace;
        for (int s = 0; s < 3; ++s) {
            TrialNormalStream rng(17, static_cast<std::uint64_t>(s));
            for (int l = 0; l < 4; ++l) {
                trace.push_back(RssRecord{s * 0.008, l, -45.0 + 0.3 * rng.next(), -1});
            }
        }
        const BaselineProfile profile = estimate_baseline(trace, channels);
        std::stringstream buf;
        write_baseline(buf, profile);
        const BaselineProfile back = read_baseline(buf);
        REQUIRE(back.channels() == profile.channels());
        for (int l = 0; l < 4; ++l) {
            CHECK(back.mean_dbm[l] == doctest::Approx(profile.mean_dbm[l]).epsilon(1e-10));
            CHECK(back.resid_std_db[l] ==
                  doctest::Approx(profile.resid_std_db[l]).epsilon(1e-10));
            CHECK(back.sample_count[l] == profile.sample_count[l]);
        }
    }

    SUBCASE("baseline subtraction is idempotent") {
        std::vector<RssRecord> trace;
        for (int s = 0; s < 200; ++s) {
            TrialNormalStream rng(23, static_cast<std::uint64_t>(s));
            for (int l = 0; l < 4; ++l) {
                trace.push_back(RssRecord{s * 0.008, l, -45.0 - l + 0.2 * rng.next(), -1});
            }
        }
        const BaselineProfile profile = estimate_baseline(trace, channels);
        std::vector<RssRecord> corrected = trace;
        for (RssRecord& r : corrected) r.rss_dbm -= profile.mean_dbm[r.channel_index];
        const BaselineProfile again = estimate_baseline(corrected, channels);
        for (int l = 0; l < 4; ++l) {
            CHECK(std::fabs(again.mean_dbm[l]) < 1e-12);
        }
    }
}

TEST_CASE("FIR low-pass") {
    SUBCASE("impulse response returns the taps") {
        const auto taps = design_lowpass_taps(8, 1.0, 31.25);
        std::vector<double> impulse(taps.size(), 0.0);
        impulse[0] = 1.0;
        const auto out = fir_lowpass(impulse, taps);
        REQUIRE(out.size() == taps.size());
        for (std::size_t i = 0; i < taps.size(); ++i) {
            CHECK(out[i] == doctest::Approx(taps[i]).epsilon(1e-14));
        }
    }

    SUBCASE("unit DC gain passes constants through") {
        const auto taps = design_lowpass_taps(64, 1.0, 31.25);
        double dc = 0.0;
        for (double t : taps) dc += t;
        CHECK(dc == doctest::Approx(1.0).epsilon(1e-12));

        std::vector<double> series(400, -47.25);
        const auto out = fir_lowpass(series, taps);
        for (std::size_t i = taps.size(); i < out.size(); ++i) {
            CHECK(out[i] == doctest::Approx(-47.25).epsilon(1e-12));
        }
    }

    SUBCASE("10 Hz tone at the sweep rate is attenuated by more than 40 dB") {
        const double fs = 31.25;
        const auto taps = design_lowpass_taps(64, 1.0, fs);
        const int n = 2000;
        std::vector<double> tone(n);
        for (int i = 0; i < n; ++i) {
            tone[i] = std::sin(2.0 * std::numbers::pi * 10.0 * i / fs);
        }
        const auto out = fir_lowpass(tone, taps);
        double peak = 0.0;
        for (int i = 200; i < n; ++i) peak = std::max(peak, std::fabs(out[i]));
        CHECK(20.0 * std::log10(peak) < -40.0);
    }

    SUBCASE("empty taps rejected") {
        std::vector<double> series(8, 1.0);
        CHECK_THROWS_AS(static_cast<void>(fir_lowpass(series, {})), std::invalid_argument);
    }
}

TEST_CASE("trace filtering works per channel stream") {
    const auto taps = design_lowpass_taps(8, 1.0, 31.25);

    // an impulse on channel 1 must leave the other channels untouched
    std::vector<RssRecord> trace;
    for (int s = 0; s < 30; ++s) {
        for (int l = 0; l < 3; ++l) {
            const double v = (l == 1 && s == 0) ? 1.0 : 0.0;
            trace.push_back(RssRecord{s * 0.006 + l * 0.002, l, v, 5});
        }
    }
    const auto filtered = filter_trace(trace, taps);
    REQUIRE(filtered.size() == trace.size());
    for (std::size_t i = 0; i < filtered.size(); ++i) {
        CHECK(filtered[i].timestamp_s == trace[i].timestamp_s);
        CHECK(filtered[i].channel_index == trace[i].channel_index);
        CHECK(filtered[i].annotation == trace[i].annotation);
        if (filtered[i].channel_index != 1) {
            CHECK(filtered[i].rss_dbm == doctest::Approx(0.0));
        }
    }
    // channel 1 carries the impulse response in sweep order
    int k = 0;
    for (const RssRecord& r : filtered) {
        if (r.channel_index != 1) continue;
        const double want = k < static_cast<int>(taps.size()) ? taps[k] : 0.0;
        CHECK(r.rss_dbm == doctest::Approx(want).epsilon(1e-12));
        ++k;
    }
}

TEST_CASE("noise calibration") {
    SUBCASE("gaussian residuals need little or no inflation") {
        std::vector<double> residuals;
        for (int s = 0; s < 6000; ++s) {
            TrialNormalStream rng(11, static_cast<std::uint64_t>(s));
            for (int l = 0; l < 16; ++l) residuals.push_back(0.15 * rng.next());
        }
        const CalibrationResult cal = calibrate_sigma(residuals, 16, 6e-6);
        CHECK(cal.sigma_db == doctest::Approx(0.15).epsilon(0.02));
        CHECK(cal.sigma_hat_db >= cal.sigma_db);
        CHECK(cal.sigma_hat_db / cal.sigma_db < 1.05);
        CHECK(cal.windows_used == 6000);
    }

    SUBCASE("right-skewed residuals force inflation") {
        std::vector<double> residuals;
        for (int s = 0; s < 4000; ++s) {
            TrialNormalStream rng(13, static_cast<std::uint64_t>(s));
            for (int l = 0; l < 16; ++l) {
                double v = 0.13 * rng.next();
                // sparse positive contamination every 11th sample
                if ((s * 16 + l) % 11 == 0) v += 0.5 * std::fabs(rng.next());
                residuals.push_back(v);
            }
        }
        const CalibrationResult cal = calibrate_sigma(residuals, 16, 6e-6);
        CHECK(cal.sigma_hat_db > cal.sigma_db);
    }

    SUBCASE("insufficient residuals") {
        std::vector<double> residuals(15, 0.1);
        CHECK_THROWS_AS(static_cast<void>(calibrate_sigma(residuals, 16, 6e-6)),
                        std::invalid_argument);
    }

    SUBCASE("calibration file round trip") {
        const CalibrationResult cal{0.1325, 0.16, 3750};
        std::stringstream buf;
        write_calibration(buf, cal);
        const CalibrationResult back = read_calibration(buf);
        CHECK(back.sigma_db == doctest::Approx(cal.sigma_db));
        CHECK(back.sigma_hat_db == doctest::Approx(cal.sigma_hat_db));
        CHECK(back.windows_used == cal.windows_used);
    }
}

TEST_CASE("channel subsets keep the mean carrier and spread wide") {
    CHECK(channel_subset_indices(16, 16).size() == 16);
    CHECK(channel_subset_indices(16, 2) == std::vector<int>{0, 15});
    CHECK(channel_subset_indices(16, 4) == std::vector<int>{0, 5, 10, 15});
    CHECK(channel_subset_indices(16, 8) == std::vector<int>{0, 2, 4, 6, 9, 11, 13, 15});
    for (int size : {2, 4, 8, 16}) {
        const auto subset = channel_subset_indices(16, size);
        double mean = 0.0;
        for (int idx : subset) mean += idx;
        mean /= static_cast<double>(subset.size());
        CHECK(mean == doctest::Approx(7.5));  // mean of 0..15
    }
    CHECK_THROWS_AS(static_cast<void>(channel_subset_indices(16, 17)), std::invalid_argument);
}

namespace {

TraceSynthesisSpec make_synth_spec(std::uint64_t seed, double sigma) {
    TraceSynthesisSpec spec;
    spec.geom = LinkGeometry(Point2{0.0, 0.0}, Point2{3.0, 0.0});
    spec.gamma = 0.35;
    spec.channels = ChannelSet::ieee802154_2_4ghz();
    spec.los_power_dbm.assign(16, -45.0);
    for (int l = 0; l < 16; ++l) spec.los_power_dbm[l] = -45.0 - 0.1 * l;
    spec.noise_sigma_db = sigma;
    spec.seed = seed;
    return spec;
}

}  // namespace

TEST_CASE("windowing rules") {
    const ChannelSet channels = ChannelSet::ieee802154_2_4ghz(4);
    BaselineProfile baseline;
    baseline.mean_dbm.assign(4, 0.0);
    baseline.resid_std_db.assign(4, 0.0);
    baseline.sample_count.assign(4, 1);
    const DetectorConfig config{4, 0.5, 6e-6};

    SUBCASE("out-of-order records within a sweep are reordered") {
        std::vector<RssRecord> trace{{0.000, 0, 1.0, -1}, {0.004, 2, 1.0, -1},
                                     {0.002, 1, 1.0, -1}, {0.006, 3, 1.0, -1},
                                     {0.008, 0, 1.0, -1}, {0.010, 1, 1.0, -1},
                                     {0.012, 2, 1.0, -1}, {0.014, 3, 1.0, -1}};
        const TraceEvaluation eval = evaluate_trace(trace, baseline, channels, config);
        CHECK(eval.windows.size() == 2);
        CHECK(eval.skipped_windows == 0);
        CHECK(eval.windows[0].decision.energy_db2 == doctest::Approx(4.0));
    }

    SUBCASE("duplicates keep the latest value") {
        std::vector<RssRecord> trace{{0.000, 0, 1.0, -1}, {0.002, 1, 1.0, -1},
                                     {0.003, 1, 2.0, -1}, {0.004, 2, 1.0, -1},
                                     {0.006, 3, 1.0, -1}};
        const TraceEvaluation eval = evaluate_trace(trace, baseline, channels, config);
        REQUIRE(eval.windows.size() == 1);
        CHECK(eval.windows[0].decision.energy_db2 == doctest::Approx(1.0 + 4.0 + 1.0 + 1.0));
    }

    SUBCASE("missing channels skip the sweep and are counted") {
        std::vector<RssRecord> trace{{0.000, 0, 1.0, -1}, {0.002, 1, 1.0, -1},
                                     {0.006, 3, 1.0, -1},  // channel 2 lost
                                     {0.008, 0, 1.0, -1}, {0.010, 1, 1.0, -1},
                                     {0.012, 2, 1.0, -1}, {0.014, 3, 1.0, -1}};
        const TraceEvaluation eval = evaluate_trace(trace, baseline, channels, config);
        CHECK(eval.windows.size() == 1);
        CHECK(eval.skipped_windows == 1);
    }

    SUBCASE("accounting identity") {
        const auto spec = make_synth_spec(3, 0.1);
        const auto trace = synthesize_vacant_trace(spec, 20.0);
        BaselineProfile flat;
        flat.mean_dbm = spec.los_power_dbm;
        flat.resid_std_db.assign(16, 0.1);
        flat.sample_count.assign(16, 1);
        const TraceEvaluation eval =
            evaluate_trace(trace, flat, spec.channels, DetectorConfig{16, 0.1, 6e-6});
        const long total_sweeps = static_cast<long>(trace.size()) / 16;
        CHECK(static_cast<long>(eval.windows.size()) + eval.skipped_windows == total_sweeps);
    }
}

TEST_CASE("trace evaluation against closed-form rates") {
    SUBCASE("vacant trace false-alarm ratio") {
        auto spec = make_synth_spec(21, 0.15);
        const auto trace = synthesize_vacant_trace(spec, 0.032 * 20000);
        const BaselineProfile baseline = estimate_baseline(trace, spec.channels);
        const double pf = 0.01;  // resolvable at 2e4 windows
        const TraceEvaluation eval = evaluate_trace(trace, baseline, spec.channels,
                                                    DetectorConfig{16, 0.15, pf});
        REQUIRE(eval.per_annotation.size() == 1);
        const double ratio = eval.per_annotation[0].detection_ratio;
        CHECK(std::fabs(ratio - pf) < 3.0 * std::sqrt(pf * (1.0 - pf) / 2e4));
    }

    SUBCASE("noise-free occupied trace detects every window") {
        auto spec = make_synth_spec(22, 1e-9);
        const Point2 person{1.2, 0.45};
        const auto trace = synthesize_grid_trace(spec, std::vector<Point2>{person}, 5.0);
        BaselineProfile baseline;
        baseline.mean_dbm = spec.los_power_dbm;
        baseline.resid_std_db.assign(16, 0.0);
        baseline.sample_count.assign(16, 1);

        const double x = threshold_for_pf(16, 0.5, 6e-6);
        const ReflectionParams params{spec.gamma, spec.eta,
                                      excess_path_length(person, spec.geom)};
        const double e = energy(params, 3.0, spec.channels, EnergyMode::exact).value;
        REQUIRE(e > x);

        const TraceEvaluation eval = evaluate_trace(trace, baseline, spec.channels,
                                                    DetectorConfig{16, 0.5, 6e-6});
        REQUIRE(eval.per_annotation.size() == 1);
        CHECK(eval.per_annotation[0].annotation == 1);
        CHECK(eval.per_annotation[0].detection_ratio == doctest::Approx(1.0));
    }

    SUBCASE("per-point ratios follow the detector prediction") {
        auto spec = make_synth_spec(23, 0.15);
        const std::vector<Point2> points{{0.9, 0.5}, {1.5, 0.8}, {2.1, 0.6}, {1.2, 1.1}};
        const auto vacant = synthesize_vacant_trace(spec, 120.0);
        auto occupied_spec = spec;
        occupied_spec.seed = 24;
        const auto occupied = synthesize_grid_trace(occupied_spec, points, 30.0);

        const BaselineProfile baseline = estimate_baseline(vacant, spec.channels);
        std::vector<double> residuals;
        for (const RssRecord& r : vacant) {
            residuals.push_back(r.rss_dbm - baseline.mean_dbm[r.channel_index]);
        }
        const CalibrationResult cal = calibrate_sigma(residuals, 16, 6e-6);
        const DetectorConfig config{16, cal.sigma_hat_db, 6e-6};
        const TraceEvaluation eval = evaluate_trace(occupied, baseline, spec.channels, config);
        REQUIRE(eval.per_annotation.size() == points.size());

        const double x = threshold_for_pf(16, cal.sigma_hat_db, 6e-6);
        for (const AnnotationStat& st : eval.per_annotation) {
            const Point2& p = points[static_cast<std::size_t>(st.annotation - 1)];
            const ReflectionParams params{spec.gamma, spec.eta,
                                          excess_path_length(p, spec.geom)};
            const double e = energy(params, 3.0, spec.channels, EnergyMode::exact).value;
            const double pd = prob_detection(16, cal.sigma_hat_db, e, x);
            const double band =
                3.0 * std::sqrt(std::max(pd * (1.0 - pd), 1e-12) /
                                static_cast<double>(st.windows)) +
                2.0 / static_cast<double>(st.windows);
            CHECK(std::fabs(st.detection_ratio - pd) <= band);
        }
    }
}

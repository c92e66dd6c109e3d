#include "rsense/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "rsense/simulate.hpp"

namespace rsense {

namespace {

double sample_std(std::span<const double> values, double mean) {
    if (values.size() < 2) return 0.0;
    double acc = 0.0;
    for (const double v : values) acc += (v - mean) * (v - mean);
    return std::sqrt(acc / (static_cast<double>(values.size()) - 1.0));
}

}  // namespace

std::vector<RssRecord> parse_trace(std::istream& in) {
    std::vector<RssRecord> out;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // Comma and whitespace delimiters are both accepted.
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        std::string first;
        if (!(fields >> first)) continue;          // blank line
        if (first.front() == '#') continue;        // comment / header
        RssRecord rec;
        std::istringstream ts(first);
        if (!(ts >> rec.timestamp_s) || !(fields >> rec.channel_index >> rec.rss_dbm)) {
            throw std::runtime_error("trace parse error at line " + std::to_string(line_no));
        }
        fields >> rec.annotation;  // optional fourth column
        if (rec.channel_index < 0) {
            throw std::runtime_error("negative channel index at line " + std::to_string(line_no));
        }
        out.push_back(rec);
    }
    return out;
}

std::vector<RssRecord> read_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file: " + path);
    return parse_trace(in);
}

void write_trace(std::ostream& out, std::span<const RssRecord> records) {
    out << "# time_s channel rss_dbm annotation\n";
    char buf[128];
    for (const RssRecord& r : records) {
        std::snprintf(buf, sizeof buf, "%.6f %d %.6f %d\n", r.timestamp_s, r.channel_index,
                      r.rss_dbm, r.annotation);
        out << buf;
    }
}

void write_trace_file(const std::string& path, std::span<const RssRecord> records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open trace file for writing: " + path);
    write_trace(out, records);
}

BaselineProfile estimate_baseline(std::span<const RssRecord> trace, const ChannelSet& channels) {
    const int c = channels.count();
    std::vector<std::vector<double>> per_channel(static_cast<std::size_t>(c));
    for (const RssRecord& r : trace) {
        if (r.channel_index >= c) {
            throw std::runtime_error("trace record references channel " +
                                     std::to_string(r.channel_index) + " outside the set");
        }
        per_channel[static_cast<std::size_t>(r.channel_index)].push_back(r.rss_dbm);
    }
    BaselineProfile profile;
    profile.mean_dbm.resize(static_cast<std::size_t>(c));
    profile.resid_std_db.resize(static_cast<std::size_t>(c));
    profile.sample_count.resize(static_cast<std::size_t>(c));
    for (int l = 0; l < c; ++l) {
        const auto& samples = per_channel[static_cast<std::size_t>(l)];
        if (samples.empty()) {
            throw std::runtime_error("baseline estimation: channel " + std::to_string(l) +
                                     " has no samples");
        }
        double sum = 0.0;
        for (const double v : samples) sum += v;
        const double mean = sum / static_cast<double>(samples.size());
        profile.mean_dbm[static_cast<std::size_t>(l)] = mean;
        profile.resid_std_db[static_cast<std::size_t>(l)] = sample_std(samples, mean);
        profile.sample_count[static_cast<std::size_t>(l)] = static_cast<long>(samples.size());
    }
    return profile;
}

void write_baseline(std::ostream& out, const BaselineProfile& profile) {
    out << "# rsense baseline v1\n";
    out << "channels " << profile.channels() << "\n";
    char buf[160];
    for (int l = 0; l < profile.channels(); ++l) {
        std::snprintf(buf, sizeof buf, "channel %d mean_dbm %.12g resid_std_db %.12g samples %ld\n",
                      l, profile.mean_dbm[static_cast<std::size_t>(l)],
                      profile.resid_std_db[static_cast<std::size_t>(l)],
                      profile.sample_count[static_cast<std::size_t>(l)]);
        out << buf;
    }
}

BaselineProfile read_baseline(std::istream& in) {
    BaselineProfile profile;
    std::string token;
    int channels = -1;
    while (in >> token) {
        if (token == "#") {
            std::string rest;
            std::getline(in, rest);
        } else if (token == "channels") {
            if (!(in >> channels) || channels < 1) {
                throw std::runtime_error("baseline file: bad channel count");
            }
            profile.mean_dbm.assign(static_cast<std::size_t>(channels), 0.0);
            profile.resid_std_db.assign(static_cast<std::size_t>(channels), 0.0);
            profile.sample_count.assign(static_cast<std::size_t>(channels), 0);
        } else if (token == "channel") {
            int l = -1;
            std::string key1, key2, key3;
            double mean = 0.0, resid = 0.0;
            long samples = 0;
            if (!(in >> l >> key1 >> mean >> key2 >> resid >> key3 >> samples) || channels < 0 ||
                l < 0 || l >= channels || key1 != "mean_dbm" || key2 != "resid_std_db" ||
                key3 != "samples") {
                throw std::runtime_error("baseline file: malformed channel line");
            }
            profile.mean_dbm[static_cast<std::size_t>(l)] = mean;
            profile.resid_std_db[static_cast<std::size_t>(l)] = resid;
            profile.sample_count[static_cast<std::size_t>(l)] = samples;
        } else {
            throw std::runtime_error("baseline file: unknown key " + token);
        }
    }
    if (channels < 1) throw std::runtime_error("baseline file: missing channel count");
    return profile;
}

void write_calibration(std::ostream& out, const CalibrationResult& cal) {
    char buf[160];
    out << "# rsense calibration v1\n";
    std::snprintf(buf, sizeof buf, "sigma_db %.12g\nsigma_hat_db %.12g\nwindows_used %ld\n",
                  cal.sigma_db, cal.sigma_hat_db, cal.windows_used);
    out << buf;
}

CalibrationResult read_calibration(std::istream& in) {
    CalibrationResult cal;
    std::string token;
    bool have_sigma = false, have_hat = false;
    while (in >> token) {
        if (token == "#") {
            std::string rest;
            std::getline(in, rest);
        } else if (token == "sigma_db") {
            in >> cal.sigma_db;
            have_sigma = true;
        } else if (token == "sigma_hat_db") {
            in >> cal.sigma_hat_db;
            have_hat = true;
        } else if (token == "windows_used") {
            in >> cal.windows_used;
        } else {
            throw std::runtime_error("calibration file: unknown key " + token);
        }
    }
    if (!have_sigma || !have_hat) throw std::runtime_error("calibration file: missing fields");
    return cal;
}

std::vector<double> design_lowpass_taps(int order, double cutoff_hz, double sample_rate_hz) {
    if (order < 1) throw std::invalid_argument("design_lowpass_taps: order must be >= 1");
    if (!(sample_rate_hz > 0.0) || !(cutoff_hz > 0.0) || !(cutoff_hz < 0.5 * sample_rate_hz)) {
        throw std::invalid_argument("design_lowpass_taps: cutoff must lie in (0, fs/2)");
    }
    const int taps = order + 1;
    const double fc = cutoff_hz / sample_rate_hz;  // normalized cutoff
    std::vector<double> h(static_cast<std::size_t>(taps));
    double sum = 0.0;
    for (int n = 0; n < taps; ++n) {
        const double m = n - 0.5 * order;
        const double x = 2.0 * fc * m;
        const double sinc = x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
        const double window = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / order);
        h[static_cast<std::size_t>(n)] = 2.0 * fc * sinc * window;
        sum += h[static_cast<std::size_t>(n)];
    }
    for (double& v : h) v /= sum;  // unit DC gain
    return h;
}

std::vector<double> fir_lowpass(std::span<const double> series, std::span<const double> taps) {
    if (taps.empty()) throw std::invalid_argument("fir_lowpass: taps must be non-empty");
    std::vector<double> out(series.size(), 0.0);
    const long k = static_cast<long>(taps.size());
    for (long n = 0; n < static_cast<long>(series.size()); ++n) {
        double acc = 0.0;
        const long kmax = std::min(k - 1, n);
        for (long j = 0; j <= kmax; ++j) {
            acc += taps[static_cast<std::size_t>(j)] * series[static_cast<std::size_t>(n - j)];
        }
        out[static_cast<std::size_t>(n)] = acc;
    }
    return out;
}

std::vector<double> read_taps_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open taps file: " + path);
    std::vector<double> taps;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream fields(line);
        std::string first;
        if (!(fields >> first) || first.front() == '#') continue;
        taps.push_back(std::stod(first));
    }
    if (taps.empty()) throw std::runtime_error("taps file holds no coefficients: " + path);
    return taps;
}

std::vector<RssRecord> filter_trace(std::span<const RssRecord> trace,
                                    std::span<const double> taps) {
    if (taps.empty()) throw std::invalid_argument("filter_trace: taps must be non-empty");
    int max_channel = -1;
    for (const RssRecord& r : trace) max_channel = std::max(max_channel, r.channel_index);

    std::vector<std::vector<double>> series(static_cast<std::size_t>(max_channel) + 1);
    std::vector<std::vector<std::size_t>> positions(static_cast<std::size_t>(max_channel) + 1);
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const int ch = trace[i].channel_index;
        series[static_cast<std::size_t>(ch)].push_back(trace[i].rss_dbm);
        positions[static_cast<std::size_t>(ch)].push_back(i);
    }

    std::vector<RssRecord> out(trace.begin(), trace.end());
    for (int ch = 0; ch <= max_channel; ++ch) {
        const auto& s = series[static_cast<std::size_t>(ch)];
        if (s.empty()) continue;
        const std::vector<double> filtered = fir_lowpass(s, taps);
        const auto& pos = positions[static_cast<std::size_t>(ch)];
        for (std::size_t j = 0; j < pos.size(); ++j) {
            out[pos[j]].rss_dbm = filtered[j];
        }
    }
    return out;
}

CalibrationResult calibrate_sigma(std::span<const double> residuals, int channel_count,
                                  double target_pf) {
    if (channel_count < 1) throw std::invalid_argument("calibrate_sigma: channel count must be >= 1");
    if (!(target_pf > 0.0 && target_pf < 1.0)) {
        throw std::invalid_argument("calibrate_sigma: target pf must lie in (0, 1)");
    }
    const long windows = static_cast<long>(residuals.size()) / channel_count;
    if (windows < 1) {
        throw std::invalid_argument("calibrate_sigma: not enough residuals for a single window");
    }

    double mean = 0.0;
    for (const double r : residuals) mean += r;
    mean /= static_cast<double>(residuals.size());
    const double sigma = sample_std(residuals, mean);
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("calibrate_sigma: residuals have zero variance");
    }

    std::vector<double> energies(static_cast<std::size_t>(windows), 0.0);
    for (long w = 0; w < windows; ++w) {
        double e = 0.0;
        for (int l = 0; l < channel_count; ++l) {
            const double v = residuals[static_cast<std::size_t>(w * channel_count + l)];
            e += v * v;
        }
        energies[static_cast<std::size_t>(w)] = e;
    }
    const long allowed = static_cast<long>(target_pf * static_cast<double>(windows));
    const auto false_alarms_ok = [&](double s) {
        const double x = threshold_for_pf(channel_count, s, target_pf);
        long count = 0;
        for (const double e : energies) {
            if (e > x) ++count;
        }
        return count <= allowed;
    };

    double sigma_hat = sigma;
    if (!false_alarms_ok(sigma_hat)) {
        double lo = sigma;
        double hi = sigma;
        do {
            lo = hi;
            hi *= 1.5;
            if (hi > 1e6 * sigma) {
                throw std::runtime_error("calibrate_sigma: inflation search diverged");
            }
        } while (!false_alarms_ok(hi));
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (false_alarms_ok(mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        sigma_hat = hi;
    }
    return CalibrationResult{sigma, sigma_hat, windows};
}

namespace {

struct SweepSlot {
    double value = 0.0;
    double time_s = 0.0;
    int annotation = -1;
    bool filled = false;
};

int majority_annotation(const std::vector<SweepSlot>& slots) {
    std::map<int, int> votes;
    for (const SweepSlot& s : slots) {
        if (s.filled) ++votes[s.annotation];
    }
    int best = -1, best_votes = -1;
    for (const auto& [ann, n] : votes) {
        if (n > best_votes) {  // ties resolve to the smallest id (map order)
            best = ann;
            best_votes = n;
        }
    }
    return best;
}

}  // namespace

TraceEvaluation evaluate_trace(std::span<const RssRecord> trace, const BaselineProfile& baseline,
                               const ChannelSet& channels, const DetectorConfig& config,
                               std::optional<double> threshold_db2) {
    config.validate();
    const int c_total = channels.count();
    if (baseline.channels() != c_total) {
        throw std::invalid_argument("evaluate_trace: baseline does not cover the channel set");
    }
    if (config.channel_count > c_total) {
        throw std::invalid_argument("evaluate_trace: detector channel count exceeds the set");
    }

    TraceEvaluation eval;
    eval.subset = channel_subset_indices(c_total, config.channel_count);
    eval.threshold_db2 = threshold_db2.value_or(
        threshold_for_pf(config.channel_count, config.sigma_db, config.target_pf));

    std::vector<SweepSlot> window(static_cast<std::size_t>(c_total));
    int filled = 0;
    int prev_channel = -1;
    long window_index = 0;
    std::map<int, AnnotationStat> stats;
    std::vector<double> z(static_cast<std::size_t>(config.channel_count));

    const auto flush_window = [&]() {
        if (filled == 0) return;
        if (filled == c_total) {
            double start = window[0].time_s;
            for (const SweepSlot& s : window) start = std::min(start, s.time_s);
            for (std::size_t i = 0; i < eval.subset.size(); ++i) {
                const int l = eval.subset[i];
                z[i] = window[static_cast<std::size_t>(l)].value -
                       baseline.mean_dbm[static_cast<std::size_t>(l)];
            }
            const Decision d = decide(z, config.channel_count, eval.threshold_db2);
            const int ann = majority_annotation(window);
            eval.windows.push_back(WindowDecision{window_index, start, ann, d});
            AnnotationStat& st = stats[ann];
            st.annotation = ann;
            st.windows += 1;
            st.detections += d.occupied ? 1 : 0;
        } else {
            eval.skipped_windows += 1;
        }
        ++window_index;
        for (SweepSlot& s : window) s.filled = false;
        filled = 0;
    };

    for (const RssRecord& r : trace) {
        if (r.channel_index >= c_total) {
            throw std::runtime_error("evaluate_trace: record references channel " +
                                     std::to_string(r.channel_index) + " outside the set");
        }
        SweepSlot& slot = window[static_cast<std::size_t>(r.channel_index)];
        // Wrap-around (a lower channel that is already present) starts a new
        // sweep; a repeat of the same or a higher channel is a duplicate and
        // keeps the latest value.
        if (slot.filled && r.channel_index < prev_channel) {
            flush_window();
        }
        SweepSlot& dest = window[static_cast<std::size_t>(r.channel_index)];
        if (!dest.filled) ++filled;
        dest = SweepSlot{r.rss_dbm, r.timestamp_s, r.annotation, true};
        prev_channel = r.channel_index;
    }
    flush_window();

    for (auto& [ann, st] : stats) {
        st.detection_ratio =
            st.windows > 0 ? static_cast<double>(st.detections) / static_cast<double>(st.windows)
                           : 0.0;
        eval.per_annotation.push_back(st);
    }
    return eval;
}

namespace {

void append_sweeps(std::vector<RssRecord>& out, const TraceSynthesisSpec& spec,
                   std::span<const double> zeta_db, long sweeps, double start_time_s,
                   std::uint64_t first_sweep_index, int annotation) {
    const int c = spec.channels.count();
    if (static_cast<int>(spec.los_power_dbm.size()) != c) {
        throw std::invalid_argument("trace synthesis: los_power_dbm must cover every channel");
    }
    const double sweep_period = spec.packet_interval_s * c;
    for (long s = 0; s < sweeps; ++s) {
        TrialNormalStream rng(spec.seed, first_sweep_index + static_cast<std::uint64_t>(s));
        const double t0 = start_time_s + static_cast<double>(s) * sweep_period;
        for (int l = 0; l < c; ++l) {
            RssRecord rec;
            rec.timestamp_s = t0 + l * spec.packet_interval_s;
            rec.channel_index = l;
            rec.rss_dbm = spec.los_power_dbm[static_cast<std::size_t>(l)] +
                          (zeta_db.empty() ? 0.0 : zeta_db[static_cast<std::size_t>(l)]) +
                          spec.noise_sigma_db * rng.next();
            rec.annotation = annotation;
            out.push_back(rec);
        }
    }
}

}  // namespace

std::vector<RssRecord> synthesize_vacant_trace(const TraceSynthesisSpec& spec, double duration_s,
                                               double start_time_s) {
    if (!(duration_s > 0.0)) throw std::invalid_argument("synthesize_vacant_trace: bad duration");
    const double sweep_period = spec.packet_interval_s * spec.channels.count();
    const long sweeps = static_cast<long>(duration_s / sweep_period);
    std::vector<RssRecord> out;
    out.reserve(static_cast<std::size_t>(sweeps) * spec.channels.count());
    append_sweeps(out, spec, {}, sweeps, start_time_s, 0, -1);
    return out;
}

std::vector<RssRecord> synthesize_grid_trace(const TraceSynthesisSpec& spec,
                                             std::span<const Point2> points, double dwell_s,
                                             double start_time_s) {
    if (points.empty()) throw std::invalid_argument("synthesize_grid_trace: no points");
    if (!(dwell_s > 0.0)) throw std::invalid_argument("synthesize_grid_trace: bad dwell");
    const int c = spec.channels.count();
    const double sweep_period = spec.packet_interval_s * c;
    const long sweeps_per_point = static_cast<long>(dwell_s / sweep_period);

    std::vector<RssRecord> out;
    out.reserve(static_cast<std::size_t>(sweeps_per_point) * c * points.size());
    std::vector<double> zeta_db(static_cast<std::size_t>(c));
    std::uint64_t sweep_counter = 0;
    double t = start_time_s;
    for (std::size_t p = 0; p < points.size(); ++p) {
        const ReflectionParams params{spec.gamma, spec.eta,
                                      excess_path_length(points[p], spec.geom)};
        for (int l = 0; l < c; ++l) {
            zeta_db[static_cast<std::size_t>(l)] =
                zeta(params, spec.geom.los_distance_m(),
                     InverseWavelength{spec.channels.beta(l), spec.channels.c0()},
                     ZetaMode::closed);
        }
        append_sweeps(out, spec, zeta_db, sweeps_per_point, t, sweep_counter,
                      static_cast<int>(p) + 1);
        sweep_counter += static_cast<std::uint64_t>(sweeps_per_point);
        t += static_cast<double>(sweeps_per_point) * sweep_period;
    }
    return out;
}

}  // namespace rsense

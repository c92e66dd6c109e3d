// rsense: reflection-aware RSS detection toolkit.
//
// Subcommands expose the model sweeps, detector math, Monte Carlo
// validation, trace pipeline stages and deployment planning as plot-ready
// data (CSV by default, JSON via --format json).

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "rsense/channels.hpp"
#include "rsense/detector.hpp"
#include "rsense/energy.hpp"
#include "rsense/geometry.hpp"
#include "rsense/pipeline.hpp"
#include "rsense/reflection.hpp"
#include "rsense/simulate.hpp"
#include "rsense/spatial.hpp"
#include "rsense/specfun.hpp"

namespace {

using nlohmann::ordered_json;
using namespace rsense;

struct OutputOptions {
    std::string format = "csv";
    std::string path = "-";
};

void add_output_options(CLI::App* cmd, OutputOptions& out) {
    cmd->add_option("--format", out.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd->add_option("--out", out.path, "Output file, - for stdout")->capture_default_str();
}

std::unique_ptr<std::ostream> open_output(const std::string& path, std::ostream*& stream) {
    if (path == "-") {
        stream = &std::cout;
        return nullptr;
    }
    auto file = std::make_unique<std::ofstream>(path);
    if (!*file) throw std::runtime_error("cannot open output file: " + path);
    stream = file.get();
    return file;
}

void write_records(const OutputOptions& opts, const std::vector<ordered_json>& rows) {
    std::ostream* os = nullptr;
    auto holder = open_output(opts.path, os);
    if (opts.format == "json") {
        ordered_json doc = rows;
        *os << doc.dump(2) << "\n";
        return;
    }
    if (rows.empty()) return;
    bool first = true;
    for (const auto& [key, value] : rows.front().items()) {
        *os << (first ? "" : ",") << key;
        first = false;
        (void)value;
    }
    *os << "\n";
    for (const ordered_json& row : rows) {
        first = true;
        for (const auto& [key, value] : row.items()) {
            *os << (first ? "" : ",");
            first = false;
            if (value.is_string()) {
                *os << value.get<std::string>();
            } else {
                *os << value.dump();
            }
            (void)key;
        }
        *os << "\n";
    }
}

// Channel-set flags shared by the model-facing subcommands.
struct ChannelOptions {
    double start_hz = 2.405e9;
    double spacing_hz = 5.0e6;
    int count = 16;
    double c0 = kDefaultC0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--start-hz", start_hz, "First carrier frequency")->capture_default_str();
        cmd->add_option("--spacing-hz", spacing_hz, "Channel spacing")->capture_default_str();
        cmd->add_option("--channels,--C", count, "Number of channels")->capture_default_str();
        cmd->add_option("--c0-mps,--c0", c0, "Propagation speed, m/s")->capture_default_str();
    }
    ChannelSet make() const { return ChannelSet(start_hz, spacing_hz, count, c0); }
};

// Optional per-channel low-pass filtering of trace inputs, either with taps
// loaded from a file or with the windowed-sinc design.
struct FilterOptions {
    std::string taps_path;
    int order = 0;  // 0 disables the designed filter
    double cutoff_hz = 1.0;
    double rate_hz = 31.25;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--fir-taps", taps_path, "Tap file, one coefficient per line");
        cmd->add_option("--fir-order", order, "Design a windowed-sinc filter of this order");
        cmd->add_option("--fir-cutoff-hz", cutoff_hz, "Cutoff of the designed filter")
            ->capture_default_str();
        cmd->add_option("--fir-rate-hz", rate_hz, "Per-channel sample rate of the designed filter")
            ->capture_default_str();
    }

    std::vector<RssRecord> apply(std::vector<RssRecord> trace) const {
        if (!taps_path.empty() && order > 0) {
            throw std::runtime_error("choose either --fir-taps or --fir-order, not both");
        }
        if (!taps_path.empty()) {
            return filter_trace(trace, read_taps_file(taps_path));
        }
        if (order > 0) {
            return filter_trace(trace, design_lowpass_taps(order, cutoff_hz, rate_hz));
        }
        return trace;
    }
};

void warn_gamma_band(const ReflectionParams& params) {
    if (!params.gamma_in_assumed_band() && params.gamma > 0.0) {
        std::cerr << "warning: gamma " << params.gamma
                  << " lies outside the calibrated band [0.2, 0.7]\n";
    }
}

double json_round(double v) { return v; }

// ---------------------------------------------------------------- model --

struct ModelArgs {
    double gamma = 0.35;
    double eta = kDefaultEta;
    double d_m = 3.0;
    double c0 = kDefaultC0;
    std::string sweep = "delta";
    double freq_hz = 2.4425e9;
    double delta_m = 0.5;
    double delta_lo = 0.0, delta_hi = 4.0;
    double freq_lo = 2.4e9, freq_hi = 2.48e9;
    int steps = 801;
    int series_terms = kDefaultSeriesTerms;
    OutputOptions out;
};

void run_model(const ModelArgs& a) {
    const ReflectionParams base{a.gamma, a.eta, 0.0};
    base.validate();
    warn_gamma_band(base);
    std::vector<ordered_json> rows;
    rows.reserve(static_cast<std::size_t>(a.steps));
    for (int i = 0; i < a.steps; ++i) {
        const double frac = a.steps == 1 ? 0.0 : static_cast<double>(i) / (a.steps - 1);
        ReflectionParams params = base;
        InverseWavelength beta{};
        ordered_json row;
        if (a.sweep == "delta") {
            params.delta_m = a.delta_lo + (a.delta_hi - a.delta_lo) * frac;
            beta = InverseWavelength::from_frequency_hz(a.freq_hz, a.c0);
            row["delta_m"] = json_round(params.delta_m);
        } else {
            params.delta_m = a.delta_m;
            beta = InverseWavelength::from_frequency_hz(a.freq_lo + (a.freq_hi - a.freq_lo) * frac,
                                                        a.c0);
            row["freq_hz"] = beta.frequency_hz();
        }
        row["zeta_closed_db"] = zeta(params, a.d_m, beta, ZetaMode::closed);
        row["zeta_two_term_db"] = zeta(params, a.d_m, beta, ZetaMode::two_term);
        row["zeta_series_db"] = zeta(params, a.d_m, beta, ZetaMode::series, a.series_terms);
        rows.push_back(std::move(row));
    }
    write_records(a.out, rows);
}

// --------------------------------------------------------------- energy --

struct EnergyArgs {
    double gamma = 0.7;
    double eta = kDefaultEta;
    double d_m = 3.0;
    ChannelOptions channels;
    double delta_lo = 1e-3, delta_hi = 4.0;
    int steps = 801;
    OutputOptions out;
};

void run_energy(const EnergyArgs& a) {
    const ChannelSet channels = a.channels.make();
    warn_gamma_band(ReflectionParams{a.gamma, a.eta, 0.0});
    std::vector<ordered_json> rows;
    for (int i = 0; i < a.steps; ++i) {
        const double frac = a.steps == 1 ? 0.0 : static_cast<double>(i) / (a.steps - 1);
        const ReflectionParams params{a.gamma, a.eta,
                                      a.delta_lo + (a.delta_hi - a.delta_lo) * frac};
        ordered_json row;
        row["delta_m"] = params.delta_m;
        row["e_exact_db2"] = energy(params, a.d_m, channels, EnergyMode::exact).value;
        row["e_two_term_db2"] =
            energy(params, a.d_m, channels, EnergyMode::closed_two_term).value;
        row["e_average_db2"] = energy(params, a.d_m, channels, EnergyMode::average).value;
        rows.push_back(std::move(row));
    }
    write_records(a.out, rows);
}

// ------------------------------------------------------------------ roc --

struct RocArgs {
    std::vector<int> channel_counts{16};
    std::vector<double> snrs{1.0, 2.0, 4.0, 8.0};
    double pf_lo = 1e-7, pf_hi = 1e-1;
    int points = 61;
    OutputOptions out;
};

void run_roc(const RocArgs& a) {
    std::vector<ordered_json> rows;
    const double sigma = 1.0;  // the ROC depends on the energy only through the SNR
    for (int c : a.channel_counts) {
        for (double snr : a.snrs) {
            const double e = snr * c * sigma * sigma;
            for (int i = 0; i < a.points; ++i) {
                const double frac =
                    a.points == 1 ? 0.0 : static_cast<double>(i) / (a.points - 1);
                const double pf =
                    std::exp(std::log(a.pf_lo) + (std::log(a.pf_hi) - std::log(a.pf_lo)) * frac);
                ordered_json row;
                row["channels"] = c;
                row["snr"] = snr;
                row["pf"] = pf;
                row["pd"] = roc_point(c, sigma, e, pf);
                rows.push_back(std::move(row));
            }
        }
    }
    write_records(a.out, rows);
}

// ------------------------------------------------------------------- pd --

struct PdArgs {
    double gamma = 0.35;
    double eta = kDefaultEta;
    double d_m = 3.0;
    ChannelOptions channels;
    double sigma_db = 0.5;
    double pf = kDefaultPf;
    double delta_lo = 1e-3, delta_hi = 4.0;
    int steps = 801;
    OutputOptions out;
};

void run_pd(const PdArgs& a) {
    const ChannelSet channels = a.channels.make();
    warn_gamma_band(ReflectionParams{a.gamma, a.eta, 0.0});
    const double x = threshold_for_pf(channels.count(), a.sigma_db, a.pf);
    std::vector<ordered_json> rows;
    for (int i = 0; i < a.steps; ++i) {
        const double frac = a.steps == 1 ? 0.0 : static_cast<double>(i) / (a.steps - 1);
        const ReflectionParams params{a.gamma, a.eta,
                                      a.delta_lo + (a.delta_hi - a.delta_lo) * frac};
        const double e = energy(params, a.d_m, channels, EnergyMode::exact).value;
        ordered_json row;
        row["delta_m"] = params.delta_m;
        row["energy_db2"] = e;
        row["pd"] = prob_detection(channels.count(), a.sigma_db, e, x);
        rows.push_back(std::move(row));
    }
    write_records(a.out, rows);
}

// ---------------------------------------------------------------- pdmap --

struct PdMapArgs {
    std::string grid_out;
    double tx_x = 0.0, tx_y = 0.0, rx_x = 3.0, rx_y = 0.0;
    double x_lo = -0.5, x_hi = 3.5, y_lo = -1.5, y_hi = 1.5;
    double res_m = 0.02;
    double gamma = 0.35;
    double eta = kDefaultEta;
    ChannelOptions channels;
    double sigma_db = 0.5;
    double pf = kDefaultPf;
    OutputOptions out;
};

void run_pdmap(const PdMapArgs& a) {
    const LinkGeometry geom(Point2{a.tx_x, a.tx_y}, Point2{a.rx_x, a.rx_y});
    const GridSpec grid{a.x_lo, a.x_hi, a.y_lo, a.y_hi, a.res_m};
    warn_gamma_band(ReflectionParams{a.gamma, a.eta, 0.0});
    const PdMap map = pd_map(geom, grid, a.gamma, a.eta, a.channels.make(), a.sigma_db, a.pf);
    if (!a.grid_out.empty()) {
        std::ofstream grid_file(a.grid_out);
        if (!grid_file) throw std::runtime_error("cannot open grid output: " + a.grid_out);
        write_pd_map_grid(grid_file, map);
    }
    if (a.out.format == "json") {
        std::vector<ordered_json> rows;
        rows.reserve(map.cells.size());
        for (const PdCell& cell : map.cells) {
            ordered_json row;
            row["x_m"] = cell.x_m;
            row["y_m"] = cell.y_m;
            row["delta_m"] = cell.delta_m;
            row["energy_db2"] = cell.energy_db2;
            row["pd"] = cell.pd;
            row["in_los_strip"] = cell.in_los_strip;
            rows.push_back(std::move(row));
        }
        write_records(a.out, rows);
        return;
    }
    std::ostream* os = nullptr;
    auto holder = open_output(a.out.path, os);
    write_pd_map_csv(*os, map);
}

// ------------------------------------------------------------ threshold --

struct ThresholdArgs {
    int channel_count = 16;
    double sigma_db = 1.0;
    double pf = kDefaultPf;
    OutputOptions out;
};

void run_threshold(const ThresholdArgs& a) {
    const double x = threshold_for_pf(a.channel_count, a.sigma_db, a.pf);
    std::ostream* os = nullptr;
    auto holder = open_output(a.out.path, os);
    if (a.out.format == "json") {
        ordered_json row;
        row["channels"] = a.channel_count;
        row["sigma_db"] = a.sigma_db;
        row["pf"] = a.pf;
        row["threshold_db2"] = x;
        *os << row.dump(2) << "\n";
    } else {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.4f\n", x);
        *os << buf;
    }
}

// ------------------------------------------------------------- simulate --

struct SimulateArgs {
    double gamma = 0.35;
    double eta = kDefaultEta;
    double d_m = 3.0;
    double delta_m = 0.5;
    double tx_x = 0.0, tx_y = 0.0, rx_x = 3.0, rx_y = 0.0;
    double point_x = 0.0, point_y = 0.0;
    bool have_point = false;
    ChannelOptions channels;
    double sigma_db = 0.5;
    double pf = kDefaultPf;
    std::int64_t trials = 1'000'000;
    std::uint64_t seed = 1;
    std::string dump_trials;
    OutputOptions out;
};

void run_simulate(const SimulateArgs& a) {
    SimSpec spec;
    double delta = a.delta_m;
    double d = a.d_m;
    if (a.have_point) {
        const LinkGeometry geom(Point2{a.tx_x, a.tx_y}, Point2{a.rx_x, a.rx_y});
        delta = excess_path_length(Point2{a.point_x, a.point_y}, geom);
        d = geom.los_distance_m();
    }
    spec.params = ReflectionParams{a.gamma, a.eta, delta};
    spec.d_m = d;
    spec.channels = a.channels.make();
    spec.sigma_db = a.sigma_db;
    spec.trials = a.trials;
    spec.seed = a.seed;
    spec.validate();
    warn_gamma_band(spec.params);

    const int c = spec.channels.count();
    const double x = threshold_for_pf(c, a.sigma_db, a.pf);
    const double e = energy(spec.params, spec.d_m, spec.channels, EnergyMode::exact).value;
    const double pd = prob_detection(c, a.sigma_db, e, x);
    const RateSummary rs = empirical_rates(spec, x);
    const double band =
        3.0 * std::sqrt(std::max(pd * (1.0 - pd), 0.0) / static_cast<double>(a.trials));

    if (!a.dump_trials.empty()) {
        const TrialMatrix m = simulate_measurements(spec);
        std::ofstream dump(a.dump_trials);
        if (!dump) throw std::runtime_error("cannot open trial dump file: " + a.dump_trials);
        dump << "# trial";
        for (int l = 0; l < c; ++l) dump << ",z" << l << "_db";
        dump << "\n";
        char buf[32];
        for (std::int64_t t = 0; t < m.trials; ++t) {
            dump << t;
            for (int l = 0; l < c; ++l) {
                std::snprintf(buf, sizeof buf, ",%.12g", m.row(t)[l]);
                dump << buf;
            }
            dump << "\n";
        }
    }

    ordered_json row;
    row["trials"] = a.trials;
    row["seed"] = a.seed;
    row["channels"] = c;
    row["sigma_db"] = a.sigma_db;
    row["pf"] = a.pf;
    row["threshold_db2"] = x;
    row["energy_exact_db2"] = e;
    row["predicted_pd"] = pd;
    row["empirical_rate"] = rs.detection_rate;
    row["abs_error"] = std::fabs(rs.detection_rate - pd);
    row["binom_3std"] = band;
    row["within_3std"] = std::fabs(rs.detection_rate - pd) <= band;
    row["mean_energy_db2"] = rs.mean_energy_db2;
    row["predicted_mean_db2"] = e + c * a.sigma_db * a.sigma_db;
    write_records(a.out, {row});
}

// ------------------------------------------------- baseline / calibrate --

struct BaselineArgs {
    std::string trace_path;
    ChannelOptions channels;
    FilterOptions filter;
    OutputOptions out;
};

void run_baseline(const BaselineArgs& a) {
    const auto trace = a.filter.apply(read_trace_file(a.trace_path));
    const BaselineProfile profile = estimate_baseline(trace, a.channels.make());
    std::ostream* os = nullptr;
    auto holder = open_output(a.out.path, os);
    if (a.out.format == "json") {
        ordered_json doc;
        doc["channels"] = profile.channels();
        doc["mean_dbm"] = profile.mean_dbm;
        doc["resid_std_db"] = profile.resid_std_db;
        doc["samples"] = profile.sample_count;
        *os << doc.dump(2) << "\n";
    } else {
        write_baseline(*os, profile);
    }
}

struct CalibrateArgs {
    std::string trace_path;
    std::string baseline_path;
    int channel_count = 16;
    double pf = kDefaultPf;
    FilterOptions filter;
    OutputOptions out;
};

void run_calibrate(const CalibrateArgs& a) {
    const auto trace = a.filter.apply(read_trace_file(a.trace_path));
    std::ifstream bl(a.baseline_path);
    if (!bl) throw std::runtime_error("cannot open baseline file: " + a.baseline_path);
    const BaselineProfile profile = read_baseline(bl);

    std::vector<double> residuals;
    residuals.reserve(trace.size());
    for (const RssRecord& r : trace) {
        if (r.channel_index >= profile.channels()) {
            throw std::runtime_error("trace channel outside the baseline profile");
        }
        residuals.push_back(r.rss_dbm - profile.mean_dbm[static_cast<std::size_t>(r.channel_index)]);
    }
    if (static_cast<long>(residuals.size()) < 100L * a.channel_count) {
        std::cerr << "warning: fewer than 100 residuals per channel; sigma estimate will be noisy\n";
    }
    const CalibrationResult cal = calibrate_sigma(residuals, a.channel_count, a.pf);

    std::ostream* os = nullptr;
    auto holder = open_output(a.out.path, os);
    if (a.out.format == "json") {
        ordered_json doc;
        doc["sigma_db"] = cal.sigma_db;
        doc["sigma_hat_db"] = cal.sigma_hat_db;
        doc["windows_used"] = cal.windows_used;
        *os << doc.dump(2) << "\n";
    } else {
        write_calibration(*os, cal);
    }
}

// ---------------------------------------------------------------- detect --

struct DetectArgs {
    std::string trace_path;
    std::string baseline_path;
    std::string calibration_path;
    double sigma_db = 0.0;  // used when no calibration file is given
    int channel_count = 16;
    double pf = kDefaultPf;
    double threshold_db2 = 0.0;
    bool have_threshold = false;
    ChannelOptions channels;
    FilterOptions filter;
    std::string summary_path;
    OutputOptions out;
};

void run_detect(const DetectArgs& a) {
    const auto trace = a.filter.apply(read_trace_file(a.trace_path));
    std::ifstream bl(a.baseline_path);
    if (!bl) throw std::runtime_error("cannot open baseline file: " + a.baseline_path);
    const BaselineProfile profile = read_baseline(bl);

    double sigma = a.sigma_db;
    if (!a.calibration_path.empty()) {
        std::ifstream cf(a.calibration_path);
        if (!cf) throw std::runtime_error("cannot open calibration file: " + a.calibration_path);
        sigma = read_calibration(cf).sigma_hat_db;
    }
    if (!(sigma > 0.0) && !a.have_threshold) {
        throw std::runtime_error("detect needs --calibration, --sigma-db or --threshold");
    }

    const DetectorConfig config{a.channel_count, sigma > 0.0 ? sigma : 1.0, a.pf};
    const std::optional<double> threshold =
        a.have_threshold ? std::optional<double>(a.threshold_db2) : std::nullopt;
    const TraceEvaluation eval =
        evaluate_trace(trace, profile, a.channels.make(), config, threshold);

    std::vector<ordered_json> window_rows;
    window_rows.reserve(eval.windows.size());
    for (const WindowDecision& w : eval.windows) {
        ordered_json row;
        row["window"] = w.window_index;
        row["start_time_s"] = w.start_time_s;
        row["annotation"] = w.annotation;
        row["energy_db2"] = w.decision.energy_db2;
        row["threshold_db2"] = w.decision.threshold_db2;
        row["occupied"] = w.decision.occupied ? 1 : 0;
        window_rows.push_back(std::move(row));
    }
    std::vector<ordered_json> summary_rows;
    for (const AnnotationStat& st : eval.per_annotation) {
        ordered_json row;
        row["annotation"] = st.annotation;
        row["windows"] = st.windows;
        row["detections"] = st.detections;
        row["detection_ratio"] = st.detection_ratio;
        summary_rows.push_back(std::move(row));
    }

    if (a.out.format == "json") {
        std::ostream* os = nullptr;
        auto holder = open_output(a.out.path, os);
        ordered_json doc;
        doc["threshold_db2"] = eval.threshold_db2;
        doc["skipped_windows"] = eval.skipped_windows;
        doc["subset"] = eval.subset;
        doc["windows"] = window_rows;
        doc["per_annotation"] = summary_rows;
        *os << doc.dump(2) << "\n";
    } else {
        write_records(a.out, window_rows);
        if (!a.summary_path.empty()) {
            OutputOptions sum_out{"csv", a.summary_path};
            write_records(sum_out, summary_rows);
        }
    }
}

// ------------------------------------------------------------------ plan --

struct PlanArgs {
    double target_pd = 0.95;
    double pf = kDefaultPf;
    double delta_lo = 1.0, delta_hi = 2.0;
    double gamma = 0.35;
    double eta = kDefaultEta;
    int channel_count = 16;
    double sigma_db = 0.5;
    double d_lo = 0.5, d_hi = 20.0;
    OutputOptions out;
};

void run_plan(const PlanArgs& a) {
    warn_gamma_band(ReflectionParams{a.gamma, a.eta, 0.0});
    const PlanResult r = plan_distance(a.target_pd, a.pf, a.delta_lo, a.delta_hi, a.gamma, a.eta,
                                       a.channel_count, a.sigma_db, a.d_lo, a.d_hi);
    ordered_json row;
    row["feasible"] = r.feasible;
    row["d_m"] = r.d_m;
    row["achieved_min_pd"] = r.achieved_min_pd;
    row["target_pd"] = a.target_pd;
    write_records(a.out, {row});
}

std::string default_config_path() {
    const char* dir = std::getenv("RSENSE_CONFIG_DIR");
    if (dir == nullptr) return {};
    const std::filesystem::path candidate = std::filesystem::path(dir) / "rsense.conf";
    std::error_code ec;
    if (std::filesystem::exists(candidate, ec)) return candidate.string();
    return {};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reflection-aware RSS detection toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", default_config_path(), "Read options from an INI-style file");
    app.allow_config_extras(CLI::config_extras_mode::error);

    ModelArgs model;
    auto* model_cmd = app.add_subcommand("model", "Reflected-signal sweeps vs delta or frequency");
    model_cmd->add_option("--gamma", model.gamma, "Reflection coefficient")->capture_default_str();
    model_cmd->add_option("--eta", model.eta, "Path-loss exponent")->capture_default_str();
    model_cmd->add_option("--d-m,--d", model.d_m, "TX-RX distance, m")->capture_default_str();
    model_cmd->add_option("--c0-mps,--c0", model.c0, "Propagation speed, m/s")
        ->capture_default_str();
    model_cmd->add_option("--sweep", model.sweep, "Sweep variable")
        ->check(CLI::IsMember({"delta", "beta"}))
        ->capture_default_str();
    model_cmd->add_option("--freq-hz", model.freq_hz, "Carrier for delta sweeps")
        ->capture_default_str();
    model_cmd->add_option("--delta-m", model.delta_m, "Excess path for beta sweeps")
        ->capture_default_str();
    model_cmd->add_option("--delta-lo", model.delta_lo)->capture_default_str();
    model_cmd->add_option("--delta-hi", model.delta_hi)->capture_default_str();
    model_cmd->add_option("--freq-lo-hz", model.freq_lo)->capture_default_str();
    model_cmd->add_option("--freq-hi-hz", model.freq_hi)->capture_default_str();
    model_cmd->add_option("--steps", model.steps)->capture_default_str();
    model_cmd->add_option("--series-terms", model.series_terms)->capture_default_str();
    add_output_options(model_cmd, model.out);

    EnergyArgs energy_args;
    auto* energy_cmd = app.add_subcommand("energy", "Signal energy vs excess path length");
    energy_cmd->add_option("--gamma", energy_args.gamma)->capture_default_str();
    energy_cmd->add_option("--eta", energy_args.eta)->capture_default_str();
    energy_cmd->add_option("--d-m,--d", energy_args.d_m)->capture_default_str();
    energy_args.channels.add_to(energy_cmd);
    energy_cmd->add_option("--delta-lo", energy_args.delta_lo)->capture_default_str();
    energy_cmd->add_option("--delta-hi", energy_args.delta_hi)->capture_default_str();
    energy_cmd->add_option("--steps", energy_args.steps)->capture_default_str();
    add_output_options(energy_cmd, energy_args.out);

    RocArgs roc_args;
    auto* roc_cmd = app.add_subcommand("roc", "Detection probability over false-alarm grids");
    roc_cmd->add_option("--channels,--C", roc_args.channel_counts, "Channel counts")
        ->capture_default_str();
    roc_cmd->add_option("--snr", roc_args.snrs, "Linear SNR values")->capture_default_str();
    roc_cmd->add_option("--pf-lo", roc_args.pf_lo)->capture_default_str();
    roc_cmd->add_option("--pf-hi", roc_args.pf_hi)->capture_default_str();
    roc_cmd->add_option("--points", roc_args.points)->capture_default_str();
    add_output_options(roc_cmd, roc_args.out);

    PdArgs pd_args;
    auto* pd_cmd = app.add_subcommand("pd", "Detection probability vs excess path length");
    pd_cmd->add_option("--gamma", pd_args.gamma)->capture_default_str();
    pd_cmd->add_option("--eta", pd_args.eta)->capture_default_str();
    pd_cmd->add_option("--d-m,--d", pd_args.d_m)->capture_default_str();
    pd_args.channels.add_to(pd_cmd);
    pd_cmd->add_option("--sigma-db,--sigma", pd_args.sigma_db)->capture_default_str();
    pd_cmd->add_option("--pf", pd_args.pf)->capture_default_str();
    pd_cmd->add_option("--delta-lo", pd_args.delta_lo)->capture_default_str();
    pd_cmd->add_option("--delta-hi", pd_args.delta_hi)->capture_default_str();
    pd_cmd->add_option("--steps", pd_args.steps)->capture_default_str();
    add_output_options(pd_cmd, pd_args.out);

    PdMapArgs pdmap_args;
    auto* pdmap_cmd = app.add_subcommand("pdmap", "Spatial detection-probability map");
    pdmap_cmd->add_option("--tx-x", pdmap_args.tx_x)->capture_default_str();
    pdmap_cmd->add_option("--tx-y", pdmap_args.tx_y)->capture_default_str();
    pdmap_cmd->add_option("--rx-x", pdmap_args.rx_x)->capture_default_str();
    pdmap_cmd->add_option("--rx-y", pdmap_args.rx_y)->capture_default_str();
    pdmap_cmd->add_option("--x-lo", pdmap_args.x_lo)->capture_default_str();
    pdmap_cmd->add_option("--x-hi", pdmap_args.x_hi)->capture_default_str();
    pdmap_cmd->add_option("--y-lo", pdmap_args.y_lo)->capture_default_str();
    pdmap_cmd->add_option("--y-hi", pdmap_args.y_hi)->capture_default_str();
    pdmap_cmd->add_option("--res-m", pdmap_args.res_m)->capture_default_str();
    pdmap_cmd->add_option("--gamma", pdmap_args.gamma)->capture_default_str();
    pdmap_cmd->add_option("--eta", pdmap_args.eta)->capture_default_str();
    pdmap_args.channels.add_to(pdmap_cmd);
    pdmap_cmd->add_option("--sigma-db,--sigma", pdmap_args.sigma_db)->capture_default_str();
    pdmap_cmd->add_option("--pf", pdmap_args.pf)->capture_default_str();
    pdmap_cmd->add_option("--grid-out", pdmap_args.grid_out,
                          "Also write the pd values as a delimited matrix");
    add_output_options(pdmap_cmd, pdmap_args.out);

    ThresholdArgs threshold_args;
    auto* threshold_cmd = app.add_subcommand("threshold", "Decision threshold for a target pf");
    threshold_cmd->add_option("--channels,--C", threshold_args.channel_count)
        ->capture_default_str();
    threshold_cmd->add_option("--sigma-db,--sigma", threshold_args.sigma_db)
        ->capture_default_str();
    threshold_cmd->add_option("--pf", threshold_args.pf)->capture_default_str();
    add_output_options(threshold_cmd, threshold_args.out);

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo validation of the detector");
    sim_cmd->add_option("--gamma", sim_args.gamma)->capture_default_str();
    sim_cmd->add_option("--eta", sim_args.eta)->capture_default_str();
    sim_cmd->add_option("--d-m,--d", sim_args.d_m)->capture_default_str();
    sim_cmd->add_option("--delta-m", sim_args.delta_m)->capture_default_str();
    sim_cmd->add_option("--tx-x", sim_args.tx_x)->capture_default_str();
    sim_cmd->add_option("--tx-y", sim_args.tx_y)->capture_default_str();
    sim_cmd->add_option("--rx-x", sim_args.rx_x)->capture_default_str();
    sim_cmd->add_option("--rx-y", sim_args.rx_y)->capture_default_str();
    auto* px_opt = sim_cmd->add_option("--point-x", sim_args.point_x,
                                       "Reflector position; overrides --delta-m");
    sim_cmd->add_option("--point-y", sim_args.point_y)->needs(px_opt);
    sim_args.channels.add_to(sim_cmd);
    sim_cmd->add_option("--sigma-db,--sigma", sim_args.sigma_db)->capture_default_str();
    sim_cmd->add_option("--pf", sim_args.pf)->capture_default_str();
    sim_cmd->add_option("--trials", sim_args.trials)->capture_default_str();
    sim_cmd->add_option("--seed", sim_args.seed)->capture_default_str();
    sim_cmd->add_option("--dump-trials", sim_args.dump_trials, "Write the trial matrix as CSV");
    add_output_options(sim_cmd, sim_args.out);

    BaselineArgs baseline_args;
    auto* baseline_cmd = app.add_subcommand("baseline", "Vacant-room baseline estimation");
    baseline_cmd->add_option("--trace", baseline_args.trace_path, "Input trace file")
        ->required();
    baseline_args.channels.add_to(baseline_cmd);
    baseline_args.filter.add_to(baseline_cmd);
    add_output_options(baseline_cmd, baseline_args.out);

    CalibrateArgs cal_args;
    auto* cal_cmd = app.add_subcommand("calibrate", "Noise calibration from a vacant trace");
    cal_cmd->add_option("--trace", cal_args.trace_path)->required();
    cal_cmd->add_option("--baseline", cal_args.baseline_path)->required();
    cal_cmd->add_option("--channels,--C", cal_args.channel_count)->capture_default_str();
    cal_cmd->add_option("--pf", cal_args.pf)->capture_default_str();
    cal_args.filter.add_to(cal_cmd);
    add_output_options(cal_cmd, cal_args.out);

    DetectArgs detect_args;
    auto* detect_cmd = app.add_subcommand("detect", "Windowed detection over a trace");
    detect_cmd->add_option("--trace", detect_args.trace_path)->required();
    detect_cmd->add_option("--baseline", detect_args.baseline_path)->required();
    detect_cmd->add_option("--calibration", detect_args.calibration_path);
    detect_cmd->add_option("--sigma-db,--sigma", detect_args.sigma_db);
    auto* thr_opt = detect_cmd->add_option("--threshold", detect_args.threshold_db2,
                                           "Explicit decision threshold");
    detect_cmd->add_option("--detector-channels", detect_args.channel_count,
                           "Channel count used by the detector (subset of the sweep)")
        ->capture_default_str();
    detect_cmd->add_option("--pf", detect_args.pf)->capture_default_str();
    detect_args.channels.add_to(detect_cmd);
    detect_args.filter.add_to(detect_cmd);
    detect_cmd->add_option("--summary", detect_args.summary_path,
                           "Per-annotation summary CSV path");
    add_output_options(detect_cmd, detect_args.out);

    PlanArgs plan_args;
    auto* plan_cmd = app.add_subcommand("plan", "Pre-deployment distance planning");
    plan_cmd->add_option("--target-pd", plan_args.target_pd)->capture_default_str();
    plan_cmd->add_option("--pf", plan_args.pf)->capture_default_str();
    plan_cmd->add_option("--delta-lo", plan_args.delta_lo)->capture_default_str();
    plan_cmd->add_option("--delta-hi", plan_args.delta_hi)->capture_default_str();
    plan_cmd->add_option("--gamma", plan_args.gamma)->capture_default_str();
    plan_cmd->add_option("--eta", plan_args.eta)->capture_default_str();
    plan_cmd->add_option("--channels,--C", plan_args.channel_count)->capture_default_str();
    plan_cmd->add_option("--sigma-db,--sigma", plan_args.sigma_db)->capture_default_str();
    plan_cmd->add_option("--d-lo", plan_args.d_lo)->capture_default_str();
    plan_cmd->add_option("--d-hi", plan_args.d_hi)->capture_default_str();
    add_output_options(plan_cmd, plan_args.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        nlohmann::json err;
        err["error"] = e.what();
        err["code"] = e.get_exit_code();
        std::cerr << err.dump() << "\n";
        return e.get_exit_code() == 0 ? 1 : e.get_exit_code();
    }

    try {
        if (model_cmd->parsed()) run_model(model);
        if (energy_cmd->parsed()) run_energy(energy_args);
        if (roc_cmd->parsed()) run_roc(roc_args);
        if (pd_cmd->parsed()) run_pd(pd_args);
        if (pdmap_cmd->parsed()) run_pdmap(pdmap_args);
        if (threshold_cmd->parsed()) run_threshold(threshold_args);
        if (sim_cmd->parsed()) {
            sim_args.have_point = px_opt->count() > 0;
            run_simulate(sim_args);
        }
        if (baseline_cmd->parsed()) run_baseline(baseline_args);
        if (cal_cmd->parsed()) run_calibrate(cal_args);
        if (detect_cmd->parsed()) {
            detect_args.have_threshold = thr_opt->count() > 0;
            run_detect(detect_args);
        }
        if (plan_cmd->parsed()) run_plan(plan_args);
    } catch (const std::exception& ex) {
        nlohmann::json err;
        err["error"] = ex.what();
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rsense/channels.hpp"
#include "rsense/detector.hpp"
#include "rsense/geometry.hpp"
#include "rsense/reflection.hpp"

namespace rsense {

// One RSS sample. `annotation` tags the record with a grid-point id for
// ground-truth bookkeeping; -1 means untagged.
struct RssRecord {
    double timestamp_s = 0.0;
    int channel_index = 0;
    double rss_dbm = 0.0;
    int annotation = -1;
};

struct BaselineProfile {
    std::vector<double> mean_dbm;      // per-channel vacant-room mean
    std::vector<double> resid_std_db;  // per-channel residual deviation
    std::vector<long> sample_count;    // per-channel sample count K

    int channels() const { return static_cast<int>(mean_dbm.size()); }
};

struct CalibrationResult {
    double sigma_db = 0.0;      // raw residual standard deviation
    double sigma_hat_db = 0.0;  // inflated so the detector meets its false-alarm target
    long windows_used = 0;      // non-overlapping windows behind the empirical check
};

// Trace text format: one record per line, "timestamp channel rss [annotation]",
// comma or whitespace separated; lines starting with '#' are comments.
std::vector<RssRecord> parse_trace(std::istream& in);
std::vector<RssRecord> read_trace_file(const std::string& path);
void write_trace(std::ostream& out, std::span<const RssRecord> records);
void write_trace_file(const std::string& path, std::span<const RssRecord> records);

// Vacant-room per-channel means and residual deviations. Every channel of
// the set must contribute at least one sample.
BaselineProfile estimate_baseline(std::span<const RssRecord> trace, const ChannelSet& channels);

void write_baseline(std::ostream& out, const BaselineProfile& profile);
BaselineProfile read_baseline(std::istream& in);

void write_calibration(std::ostream& out, const CalibrationResult& cal);
CalibrationResult read_calibration(std::istream& in);

// Windowed-sinc (Hamming) low-pass design, normalized to unit DC gain.
// `order` is the filter order, so the returned vector has order + 1 taps.
std::vector<double> design_lowpass_taps(int order, double cutoff_hz, double sample_rate_hz);

// Causal direct-form FIR filtering with zero initial state; output has the
// same length as the input.
std::vector<double> fir_lowpass(std::span<const double> series, std::span<const double> taps);

// One tap per line; '#' comments allowed.
std::vector<double> read_taps_file(const std::string& path);

// Filters every channel stream of a trace independently, preserving record
// order, timestamps and annotations. Channel streams never mix.
std::vector<RssRecord> filter_trace(std::span<const RssRecord> trace,
                                    std::span<const double> taps);

// Noise calibration on vacant-room residuals: sigma is their sample
// deviation; sigma_hat is the smallest inflation for which the energy
// detector's empirical false-alarm rate over non-overlapping
// `channel_count`-sized windows stays within the target. Residuals must be
// in sweep order (channel-major within each sweep).
CalibrationResult calibrate_sigma(std::span<const double> residuals, int channel_count,
                                  double target_pf);

struct WindowDecision {
    long window_index = 0;
    double start_time_s = 0.0;
    int annotation = -1;
    Decision decision;
};

struct AnnotationStat {
    int annotation = -1;
    long windows = 0;
    long detections = 0;
    double detection_ratio = 0.0;
};

struct TraceEvaluation {
    std::vector<WindowDecision> windows;
    std::vector<AnnotationStat> per_annotation;  // sorted by annotation id
    long skipped_windows = 0;                    // sweeps with missing channels
    double threshold_db2 = 0.0;
    std::vector<int> subset;                     // channel indices used
};

// Sweep-by-sweep detection over a trace. Sweeps are delimited by the
// channel index wrapping around; records inside a sweep are reordered by
// channel and duplicates keep the latest value. When config.channel_count
// is smaller than the channel set, the detector runs on the symmetric
// wide-spread subset of channels. An explicit threshold overrides the one
// derived from the config.
TraceEvaluation evaluate_trace(std::span<const RssRecord> trace, const BaselineProfile& baseline,
                               const ChannelSet& channels, const DetectorConfig& config,
                               std::optional<double> threshold_db2 = std::nullopt);

// Synthetic trace generation following the single-TX sweep schedule:
// every channel is visited once per sweep, `packet_interval_s` apart.
struct TraceSynthesisSpec {
    LinkGeometry geom{Point2{0.0, 0.0}, Point2{3.0, 0.0}};
    double gamma = 0.35;
    double eta = kDefaultEta;
    ChannelSet channels = ChannelSet::ieee802154_2_4ghz();
    std::vector<double> los_power_dbm;  // per-channel vacant level
    double noise_sigma_db = 0.15;
    double packet_interval_s = 0.002;
    std::uint64_t seed = 0;
};

// Vacant-room segment of `duration_s`, annotation -1.
std::vector<RssRecord> synthesize_vacant_trace(const TraceSynthesisSpec& spec, double duration_s,
                                               double start_time_s = 0.0);

// Person standing `dwell_s` at each point in turn; records carry the
// 1-based point id as annotation.
std::vector<RssRecord> synthesize_grid_trace(const TraceSynthesisSpec& spec,
                                             std::span<const Point2> points, double dwell_s,
                                             double start_time_s = 0.0);

}  // namespace rsense

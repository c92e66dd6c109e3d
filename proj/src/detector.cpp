#include "rsense/detector.hpp"

#include <stdexcept>

#include "rsense/specfun.hpp"

namespace rsense {

void DetectorConfig::validate() const {
    if (channel_count < 1) throw std::invalid_argument("DetectorConfig: channel count must be >= 1");
    if (!(sigma_db > 0.0)) throw std::invalid_argument("DetectorConfig: sigma must be positive");
    if (!(target_pf > 0.0 && target_pf < 1.0)) {
        throw std::invalid_argument("DetectorConfig: target pf must lie in (0, 1)");
    }
}

double threshold_for_pf(int channel_count, double sigma_db, double pf) {
    if (channel_count < 1) throw std::invalid_argument("threshold_for_pf: channel count must be >= 1");
    if (!(sigma_db > 0.0)) throw std::invalid_argument("threshold_for_pf: sigma must be positive");
    if (!(pf > 0.0 && pf < 1.0)) throw std::invalid_argument("threshold_for_pf: pf must lie in (0, 1)");
    return 2.0 * sigma_db * sigma_db * inv_reg_upper_gamma(0.5 * channel_count, pf);
}

double prob_false_alarm(int channel_count, double sigma_db, double threshold_db2) {
    if (channel_count < 1) throw std::invalid_argument("prob_false_alarm: channel count must be >= 1");
    if (!(sigma_db > 0.0)) throw std::invalid_argument("prob_false_alarm: sigma must be positive");
    if (!(threshold_db2 >= 0.0)) throw std::invalid_argument("prob_false_alarm: negative threshold");
    return reg_upper_gamma(0.5 * channel_count, threshold_db2 / (2.0 * sigma_db * sigma_db));
}

double prob_detection(int channel_count, double sigma_db, double signal_energy_db2,
                      double threshold_db2) {
    if (!(signal_energy_db2 >= 0.0)) {
        throw std::invalid_argument("prob_detection: negative signal energy");
    }
    return noncentral_chi2_sf(
        Chi2Spec{channel_count, sigma_db * sigma_db, signal_energy_db2}, threshold_db2);
}

double roc_point(int channel_count, double sigma_db, double signal_energy_db2, double pf) {
    const double threshold = threshold_for_pf(channel_count, sigma_db, pf);
    return prob_detection(channel_count, sigma_db, signal_energy_db2, threshold);
}

Decision decide(std::span<const double> z_db, double threshold_db2) {
    double sum = 0.0;
    for (const double z : z_db) sum += z * z;
    return Decision{sum, threshold_db2, sum > threshold_db2};
}

Decision decide(std::span<const double> z_db, int expected_channels, double threshold_db2) {
    if (static_cast<int>(z_db.size()) != expected_channels) {
        throw std::invalid_argument("decide: measurement length does not match channel count");
    }
    return decide(z_db, threshold_db2);
}

}  // namespace rsense

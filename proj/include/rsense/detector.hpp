#pragma once

#include <span>

#include "rsense/constants.hpp"

namespace rsense {

struct DetectorConfig {
    int channel_count = 16;
    double sigma_db = 0.5;          // noise standard deviation, dB
    double target_pf = kDefaultPf;  // false-alarm probability

    void validate() const;
};

struct Decision {
    double energy_db2 = 0.0;
    double threshold_db2 = 0.0;
    bool occupied = false;  // energy strictly above threshold
};

// Threshold X with P{noise energy > X} = pf: X = 2 sigma^2 invQ(C/2, pf).
double threshold_for_pf(int channel_count, double sigma_db, double pf);

// P{noise-only energy > threshold} = Q(C/2, X / (2 sigma^2)).
double prob_false_alarm(int channel_count, double sigma_db, double threshold_db2);

// Detection probability with a deterministic signal of the given energy;
// the energy acts as the noncentrality of the test statistic.
double prob_detection(int channel_count, double sigma_db, double signal_energy_db2,
                      double threshold_db2);

// Detection probability at a fixed false-alarm target: the composition of
// threshold_for_pf and prob_detection.
double roc_point(int channel_count, double sigma_db, double signal_energy_db2, double pf);

// Energy decision on one baseline-subtracted measurement vector. Ties are
// resolved to vacant (strict inequality).
Decision decide(std::span<const double> z_db, double threshold_db2);

// Same, but rejects vectors whose length differs from the configured
// channel count.
Decision decide(std::span<const double> z_db, int expected_channels, double threshold_db2);

}  // namespace rsense

#pragma once

#include <iosfwd>
#include <vector>

#include "rsense/channels.hpp"
#include "rsense/geometry.hpp"

namespace rsense {

struct GridSpec {
    double x_min_m = 0.0;
    double x_max_m = 1.0;
    double y_min_m = 0.0;
    double y_max_m = 1.0;
    double resolution_m = 0.1;

    void validate() const;
    int nx() const;
    int ny() const;
    Point2 cell_center(int ix, int iy) const;
};

struct PdCell {
    double x_m = 0.0;
    double y_m = 0.0;
    double delta_m = 0.0;
    double energy_db2 = 0.0;
    double pd = 0.0;
    bool in_los_strip = false;  // excess path below one mean wavelength
};

struct PdMap {
    GridSpec grid;
    double gamma = 0.0;
    double eta = 0.0;
    double sigma_db = 0.0;
    double pf = 0.0;
    int channel_count = 0;
    double threshold_db2 = 0.0;
    std::vector<PdCell> cells;  // row-major, y outer

    const PdCell& at(int ix, int iy) const;
};

// Detection probability over a planar grid for one TX-RX pair. Each cell
// uses the exact channel-sum energy at its excess path length. Cells whose
// excess path is below one mean wavelength sit in the shadowing regime the
// reflection model does not cover; they are evaluated anyway and flagged.
PdMap pd_map(const LinkGeometry& geom, const GridSpec& grid, double gamma, double eta,
             const ChannelSet& channels, double sigma_db, double pf);

// Long-format records: one row per cell with x, y, delta, energy, pd and
// the validity flag.
void write_pd_map_csv(std::ostream& out, const PdMap& map);

// Delimited matrix of pd values, one row per y line, ordered by increasing
// y; the header comments carry the axes.
void write_pd_map_grid(std::ostream& out, const PdMap& map);

struct PlanResult {
    bool feasible = false;
    double d_m = 0.0;          // smallest distance meeting the target when feasible
    double achieved_min_pd = 0.0;  // worst-case band coverage at d_m
};

// Smallest TX-RX distance in [d_lo, d_hi] whose flat-average energy keeps
// the detection probability at or above target_pd across the whole excess
// path band. Exploits that the average energy grows with d (verified
// numerically before the bisection; a violation aborts). When even d_hi
// cannot reach the target, returns infeasible with the best achievable
// worst-case probability.
PlanResult plan_distance(double target_pd, double pf, double delta_lo_m, double delta_hi_m,
                         double gamma, double eta, int channel_count, double sigma_db,
                         double d_lo_m, double d_hi_m);

}  // namespace rsense

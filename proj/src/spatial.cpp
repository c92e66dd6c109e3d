#include "rsense/spatial.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "rsense/detector.hpp"
#include "rsense/energy.hpp"

namespace rsense {

void GridSpec::validate() const {
    if (!(x_max_m > x_min_m) || !(y_max_m > y_min_m)) {
        throw std::invalid_argument("GridSpec: empty extent");
    }
    if (!(resolution_m > 0.0)) throw std::invalid_argument("GridSpec: resolution must be positive");
}

int GridSpec::nx() const {
    return static_cast<int>(std::floor((x_max_m - x_min_m) / resolution_m + 1e-9));
}

int GridSpec::ny() const {
    return static_cast<int>(std::floor((y_max_m - y_min_m) / resolution_m + 1e-9));
}

Point2 GridSpec::cell_center(int ix, int iy) const {
    return Point2{x_min_m + (ix + 0.5) * resolution_m, y_min_m + (iy + 0.5) * resolution_m};
}

const PdCell& PdMap::at(int ix, int iy) const {
    if (ix < 0 || ix >= grid.nx() || iy < 0 || iy >= grid.ny()) {
        throw std::out_of_range("PdMap::at");
    }
    return cells[static_cast<std::size_t>(iy) * grid.nx() + ix];
}

PdMap pd_map(const LinkGeometry& geom, const GridSpec& grid, double gamma, double eta,
             const ChannelSet& channels, double sigma_db, double pf) {
    grid.validate();
    const int c = channels.count();
    const double threshold = threshold_for_pf(c, sigma_db, pf);
    const double wavelength_m = 1.0 / channels.mean_beta();

    PdMap map;
    map.grid = grid;
    map.gamma = gamma;
    map.eta = eta;
    map.sigma_db = sigma_db;
    map.pf = pf;
    map.channel_count = c;
    map.threshold_db2 = threshold;
    map.cells.reserve(static_cast<std::size_t>(grid.nx()) * grid.ny());

    const std::vector<double> betas = channels.betas();
    for (int iy = 0; iy < grid.ny(); ++iy) {
        for (int ix = 0; ix < grid.nx(); ++ix) {
            const Point2 p = grid.cell_center(ix, iy);
            PdCell cell;
            cell.x_m = p.x;
            cell.y_m = p.y;
            cell.delta_m = excess_path_length(p, geom);
            const ReflectionParams params{gamma, eta, cell.delta_m};
            cell.energy_db2 =
                exact_energy_over_betas(params, geom.los_distance_m(), betas,
                                        ZetaMode::closed, channels.c0());
            cell.pd = prob_detection(c, sigma_db, cell.energy_db2, threshold);
            cell.in_los_strip = cell.delta_m < wavelength_m;
            map.cells.push_back(cell);
        }
    }
    return map;
}

void write_pd_map_csv(std::ostream& out, const PdMap& map) {
    out << "x_m,y_m,delta_m,energy_db2,pd,in_los_strip\n";
    char buf[192];
    for (const PdCell& cell : map.cells) {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.9f,%.9g,%.9g,%d\n", cell.x_m, cell.y_m,
                      cell.delta_m, cell.energy_db2, cell.pd, cell.in_los_strip ? 1 : 0);
        out << buf;
    }
}

void write_pd_map_grid(std::ostream& out, const PdMap& map) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "# pd grid %d x %d\n", map.grid.nx(), map.grid.ny());
    out << buf;
    std::snprintf(buf, sizeof buf, "# x %.6f..%.6f step %.6f\n", map.grid.x_min_m,
                  map.grid.x_max_m, map.grid.resolution_m);
    out << buf;
    std::snprintf(buf, sizeof buf, "# y %.6f..%.6f step %.6f\n", map.grid.y_min_m,
                  map.grid.y_max_m, map.grid.resolution_m);
    out << buf;
    for (int iy = 0; iy < map.grid.ny(); ++iy) {
        for (int ix = 0; ix < map.grid.nx(); ++ix) {
            std::snprintf(buf, sizeof buf, "%s%.9g", ix == 0 ? "" : ",", map.at(ix, iy).pd);
            out << buf;
        }
        out << "\n";
    }
}

namespace {

// Flat-average energy 4 ebar^2 C (a1^2 + a2^2) / 2; independent of the
// channel frequencies themselves.
double average_energy(double gamma, double eta, double delta_m, double d_m, int channel_count) {
    const ReflectionParams params{gamma, eta, delta_m};
    const double a = amplitude(params, d_m);
    const double a2 = 0.5 * a * a;
    return 4.0 * kDbPerNeper * kDbPerNeper * channel_count * 0.5 * (a * a + a2 * a2);
}

}  // namespace

PlanResult plan_distance(double target_pd, double pf, double delta_lo_m, double delta_hi_m,
                         double gamma, double eta, int channel_count, double sigma_db,
                         double d_lo_m, double d_hi_m) {
    if (!(target_pd > 0.0 && target_pd < 1.0)) {
        throw std::invalid_argument("plan_distance: target pd must lie in (0, 1)");
    }
    if (!(delta_lo_m >= 0.0) || !(delta_hi_m >= delta_lo_m)) {
        throw std::invalid_argument("plan_distance: bad excess path band");
    }
    if (!(d_lo_m > 0.0) || !(d_hi_m >= d_lo_m)) {
        throw std::invalid_argument("plan_distance: bad distance range");
    }

    // The flat-average energy carries no channel oscillation, so the band
    // minimum is a simple sweep.
    const int band_samples = 65;
    const auto min_band_pd = [&](double d) {
        double worst = 1.0;
        for (int i = 0; i < band_samples; ++i) {
            const double delta =
                delta_lo_m + (delta_hi_m - delta_lo_m) * i / (band_samples - 1.0);
            const double e = average_energy(gamma, eta, delta, d, channel_count);
            worst = std::min(worst, roc_point(channel_count, sigma_db, e, pf));
        }
        return worst;
    };

    // Monotonicity of the average energy in d underpins the bisection.
    {
        double prev = average_energy(gamma, eta, delta_hi_m, d_lo_m, channel_count);
        for (int i = 1; i <= 8; ++i) {
            const double d = d_lo_m + (d_hi_m - d_lo_m) * i / 8.0;
            const double e = average_energy(gamma, eta, delta_hi_m, d, channel_count);
            if (e < prev * (1.0 - 1e-12)) {
                throw std::runtime_error(
                    "plan_distance: average energy is not non-decreasing in d on the band; "
                    "bisection assumption violated");
            }
            prev = e;
        }
    }

    if (min_band_pd(d_lo_m) >= target_pd) {
        return PlanResult{true, d_lo_m, min_band_pd(d_lo_m)};
    }
    const double best_at_hi = min_band_pd(d_hi_m);
    if (best_at_hi < target_pd) {
        return PlanResult{false, d_hi_m, best_at_hi};
    }
    double lo = d_lo_m, hi = d_hi_m;
    for (int it = 0; it < 200 && hi - lo > 1e-9 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (min_band_pd(mid) >= target_pd) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return PlanResult{true, hi, min_band_pd(hi)};
}

}  // namespace rsense

#include "rsense/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace rsense {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double clamp_probability(double p) {
    return std::min(1.0, std::max(0.0, p));
}

// Power series for Li2, |x| <= 1/2.
double dilog_series(double x) {
    double term = x;
    double sum = x;
    for (int k = 2; k < 200; ++k) {
        term *= x;
        const double add = term / (static_cast<double>(k) * k);
        sum += add;
        if (std::fabs(add) < 1e-17 * std::fabs(sum) + 1e-300) break;
    }
    return sum;
}

// Series expansion of the regularized lower incomplete gamma P(s, x),
// valid and fast for x < s + 1.
double reg_lower_gamma_series(double s, double x) {
    double ap = s;
    double sum = 1.0 / s;
    double term = sum;
    for (int n = 0; n < 10000; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kEps) {
            return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
        }
    }
    throw std::runtime_error("reg_lower_gamma_series: no convergence");
}

// Modified Lentz continued fraction for Q(s, x), valid for x >= s + 1.
double reg_upper_gamma_cf(double s, double x) {
    const double kFpMin = std::numeric_limits<double>::min() / kEps;
    double b = x + 1.0 - s;
    double c = 1.0 / kFpMin;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = b + an / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) <= kEps) {
            return h * std::exp(-x + s * std::log(x) - std::lgamma(s));
        }
    }
    throw std::runtime_error("reg_upper_gamma_cf: no convergence");
}

// Acklam's rational approximation of the standard normal quantile.
// Used only to seed the incomplete-gamma inversion.
double norm_quantile(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return std::numeric_limits<double>::infinity();
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

// Exponentially scaled modified Bessel functions I_k(x) * exp(-x) for
// k = 0..kmax, by Miller's downward recurrence normalized with
// I_0 + 2 sum I_k = e^x.
std::vector<double> scaled_bessel_i(int kmax, double x) {
    std::vector<double> out(static_cast<std::size_t>(kmax) + 1, 0.0);
    if (x == 0.0) {
        out[0] = 1.0;
        return out;
    }
    const int start = kmax + 2 * static_cast<int>(std::sqrt(40.0 + kmax + x)) + 40;
    std::vector<double> u(static_cast<std::size_t>(start) + 2, 0.0);
    u[static_cast<std::size_t>(start) + 1] = 0.0;
    u[static_cast<std::size_t>(start)] = 1e-280;
    for (int k = start; k >= 1; --k) {
        u[k - 1] = u[k + 1] + (2.0 * k / x) * u[k];
        if (u[k - 1] > 1e250) {
            for (int j = k - 1; j <= start + 1; ++j) u[j] *= 1e-250;
        }
    }
    double norm = u[0];
    for (int k = 1; k <= start; ++k) norm += 2.0 * u[k];
    for (int k = 0; k <= kmax; ++k) out[k] = u[k] / norm;
    return out;
}

}  // namespace

double dilog(double x) {
    // Absorb harmless rounding overshoot at the endpoints.
    if (x > 1.0 && x < 1.0 + 1e-12) x = 1.0;
    if (x < 0.0 && x > -1e-12) x = 0.0;
    if (x < 0.0 || x > 1.0) {
        throw std::domain_error("dilog: argument outside [0, 1]");
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return std::numbers::pi * std::numbers::pi / 6.0;
    if (x <= 0.5) return dilog_series(x);
    // Reflection Li2(x) + Li2(1-x) = pi^2/6 - ln(x) ln(1-x).
    return std::numbers::pi * std::numbers::pi / 6.0 - std::log(x) * std::log1p(-x) -
           dilog_series(1.0 - x);
}

double reg_upper_gamma(double s, double x) {
    if (!(s > 0.0)) throw std::domain_error("reg_upper_gamma: s must be positive");
    if (!(x >= 0.0)) throw std::domain_error("reg_upper_gamma: x must be non-negative");
    if (x == 0.0) return 1.0;
    if (x < s + 1.0) return clamp_probability(1.0 - reg_lower_gamma_series(s, x));
    return clamp_probability(reg_upper_gamma_cf(s, x));
}

double inv_reg_upper_gamma(double s, double p) {
    if (!(s > 0.0)) throw std::domain_error("inv_reg_upper_gamma: s must be positive");
    if (!(p > 0.0 && p <= 1.0)) {
        throw std::domain_error("inv_reg_upper_gamma: p must lie in (0, 1]");
    }
    if (p == 1.0) return 0.0;

    // Wilson-Hilferty seed through the equivalent chi-square quantile.
    const double k = 2.0 * s;
    const double z = norm_quantile(1.0 - p);
    const double cube = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
    double x = cube > 0.0 ? 0.5 * k * cube * cube * cube : 0.5 * k * 1e-8;
    if (!(x > 0.0) || !std::isfinite(x)) x = s;

    // Bracket the root: Q is strictly decreasing with Q(0) = 1.
    double lo = 0.0;
    double hi = std::max(x, 1.0);
    while (reg_upper_gamma(s, hi) > p) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw std::runtime_error("inv_reg_upper_gamma: bracket overflow");
    }
    x = std::min(std::max(x, lo + 0.25 * (hi - lo)), hi);

    const double log_gamma_s = std::lgamma(s);
    for (int it = 0; it < 200; ++it) {
        const double q = reg_upper_gamma(s, x);
        const double resid = q - p;
        if (std::fabs(resid) <= 1e-13 * p) break;
        if (resid > 0.0) {
            lo = x;  // Q too big -> root is to the right
        } else {
            hi = x;
        }
        const double log_pdf = (s - 1.0) * std::log(x) - x - log_gamma_s;
        double step_x = x + resid / std::exp(log_pdf);
        if (!(step_x > lo && step_x < hi) || !std::isfinite(step_x)) {
            step_x = 0.5 * (lo + hi);  // bisect when Newton leaves the bracket
        }
        if (std::fabs(step_x - x) <= 4.0 * kEps * x) {
            x = step_x;
            break;
        }
        x = step_x;
    }
    return x;
}

double marcum_q(int order_m, double a, double b) {
    if (order_m < 1) throw std::domain_error("marcum_q: order must be >= 1");
    if (!(a >= 0.0) || !(b >= 0.0)) throw std::domain_error("marcum_q: negative argument");
    if (b == 0.0) return 1.0;
    if (a == 0.0) return reg_upper_gamma(static_cast<double>(order_m), 0.5 * b * b);

    const double x = a * b;
    const int kmax =
        order_m + static_cast<int>(std::ceil(x + 14.0 * std::sqrt(x + 4.0))) + 60;
    const std::vector<double> ik = scaled_bessel_i(kmax, x);
    const double envelope = std::exp(-0.5 * (a - b) * (a - b));

    if (b >= a) {
        // Q_M = exp(-(a^2+b^2)/2) sum_{k=1-M}^{inf} (a/b)^k I_k(ab)
        const double r = a / b;
        double sum = ik[0];
        double rp = 1.0;
        for (int j = 1; j <= order_m - 1; ++j) {
            rp /= r;  // (b/a)^j, the k = -j terms
            sum += rp * ik[j];
        }
        rp = 1.0;
        for (int j = 1; j <= kmax; ++j) {
            rp *= r;
            const double term = rp * ik[j];
            sum += term;
            if (j > x && term < 1e-18 * sum) break;
        }
        return clamp_probability(envelope * sum);
    }
    // a > b: complement series over k >= M.
    const double r = b / a;
    double rp = std::pow(r, order_m);
    double sum = 0.0;
    for (int j = order_m; j <= kmax; ++j) {
        const double term = rp * ik[j];
        sum += term;
        if (j > x && term < 1e-18 * sum) break;
        rp *= r;
    }
    return clamp_probability(1.0 - envelope * sum);
}

double noncentral_chi2_sf(const Chi2Spec& spec, double x) {
    if (spec.dof < 1) throw std::domain_error("noncentral_chi2_sf: dof must be >= 1");
    if (!(spec.scale > 0.0)) throw std::domain_error("noncentral_chi2_sf: scale must be positive");
    if (!(spec.noncentrality >= 0.0)) {
        throw std::domain_error("noncentral_chi2_sf: negative noncentrality");
    }
    if (!(x >= 0.0)) throw std::domain_error("noncentral_chi2_sf: negative threshold");
    if (x == 0.0) return 1.0;

    const double half_dof = 0.5 * spec.dof;
    const double x2 = 0.5 * x / spec.scale;
    const double h = 0.5 * spec.noncentrality / spec.scale;  // Poisson intensity
    if (h == 0.0) return reg_upper_gamma(half_dof, x2);

    // Poisson mixture sum_j pois(j; h) Q(C/2 + j, x2), walked outward from
    // the Poisson mode so large noncentralities stay well conditioned.
    const long j0 = static_cast<long>(h);
    const double a0 = half_dof + static_cast<double>(j0);
    const double log_p0 = -h + j0 * std::log(h) - std::lgamma(static_cast<double>(j0) + 1.0);
    const double p0 = std::exp(log_p0);
    const double q0 = reg_upper_gamma(a0, x2);
    // t(a) = x2^a e^{-x2} / Gamma(a+1) links neighbouring gamma tails:
    // Q(a+1) = Q(a) + t(a).
    const double log_t0 = a0 * std::log(x2) - x2 - std::lgamma(a0 + 1.0);
    const double t0 = std::exp(log_t0);

    double sum = p0 * q0;
    double mass = p0;  // Poisson probability accounted for

    double p_up = p0, q_up = q0, t_up = t0;
    for (long j = j0 + 1; j <= j0 + 200000; ++j) {
        q_up += t_up;
        t_up *= x2 / (half_dof + static_cast<double>(j));
        p_up *= h / static_cast<double>(j);
        sum += p_up * std::min(1.0, q_up);
        mass += p_up;
        if (1.0 - mass < 1e-16 || p_up < 1e-18 * mass) break;
    }
    double p_dn = p0, q_dn = q0, t_dn = t0;
    for (long j = j0 - 1; j >= 0; --j) {
        const double a = half_dof + static_cast<double>(j);
        t_dn *= (a + 1.0) / x2;
        q_dn -= t_dn;
        p_dn *= static_cast<double>(j + 1) / h;
        sum += p_dn * std::min(1.0, std::max(0.0, q_dn));
        mass += p_dn;
        if (1.0 - mass < 1e-16 || p_dn < 1e-18 * mass) break;
    }
    // Unvisited Poisson mass contributes at most that mass to the sum.
    return clamp_probability(sum);
}

double noncentral_chi2_pdf(const Chi2Spec& spec, double x) {
    if (spec.dof < 1) throw std::domain_error("noncentral_chi2_pdf: dof must be >= 1");
    if (!(spec.scale > 0.0)) throw std::domain_error("noncentral_chi2_pdf: scale must be positive");
    if (!(x > 0.0)) throw std::domain_error("noncentral_chi2_pdf: x must be positive");

    const double half_dof = 0.5 * spec.dof;
    const double two_scale = 2.0 * spec.scale;
    const double x2 = x / two_scale;
    const double h = 0.5 * spec.noncentrality / spec.scale;

    const auto log_central_pdf = [&](double a) {
        return (a - 1.0) * std::log(x) - x2 - a * std::log(two_scale) - std::lgamma(a);
    };
    if (h == 0.0) return std::exp(log_central_pdf(half_dof));

    // Series form of the Bessel-function density: Poisson weights times
    // central densities of increasing order. Start at the joint mode.
    const double disc = half_dof * half_dof + 4.0 * h * x2;
    long js = static_cast<long>(std::max(0.0, 0.5 * (-half_dof + std::sqrt(disc))));
    const double a_s = half_dof + static_cast<double>(js);
    const double log_pois =
        -h + (js > 0 ? js * std::log(h) : 0.0) - std::lgamma(static_cast<double>(js) + 1.0);
    const double term0 = std::exp(log_pois + log_central_pdf(a_s));

    double sum = term0;
    double t_up = term0;
    for (long j = js + 1; j <= js + 200000; ++j) {
        const double a = half_dof + static_cast<double>(j);
        t_up *= (h / static_cast<double>(j)) * (x2 / (a - 1.0));
        sum += t_up;
        if (t_up < 1e-18 * sum) break;
    }
    double t_dn = term0;
    for (long j = js - 1; j >= 0; --j) {
        const double a = half_dof + static_cast<double>(j);
        t_dn *= (static_cast<double>(j + 1) / h) * (a / x2);
        sum += t_dn;
        if (t_dn < 1e-18 * sum) break;
    }
    return sum;
}

}  // namespace rsense

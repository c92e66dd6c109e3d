#pragma once

namespace rsense {

// Dilogarithm Li2(x) = sum_{k>=1} x^k / k^2 for x in [0, 1].
// Absolute error below 1e-10 over the whole domain.
double dilog(double x);

// Regularized upper incomplete gamma function Q(s, x) for s > 0, x >= 0.
double reg_upper_gamma(double s, double x);

// Inverse of Q(s, .) in its second argument: returns x with Q(s, x) = p
// for p in (0, 1]. Q(s, .) is strictly decreasing, so the root is unique.
double inv_reg_upper_gamma(double s, double p);

// Generalized Marcum Q-function Q_M(a, b) for integer order M >= 1,
// evaluated through its modified-Bessel series. Kept as an independent
// route for cross-checking the chi-square survival function at even
// degrees of freedom.
double marcum_q(int order_m, double a, double b);

// Scaled sum-of-squares distribution: Y = sum of dof squared Gaussians with
// common variance `scale` and squared means summing to `noncentrality`.
struct Chi2Spec {
    int dof;                    // number of squared terms
    double scale;               // per-component variance, > 0
    double noncentrality = 0.0; // sum of squared means, >= 0
};

// Survival function P{Y > x}. Zero noncentrality reduces exactly to
// reg_upper_gamma(dof/2, x / (2 scale)); the noncentral branch uses the
// Poisson mixture of gamma tails, which covers odd dof as well.
double noncentral_chi2_sf(const Chi2Spec& spec, double x);

// Density of Y at x > 0.
double noncentral_chi2_pdf(const Chi2Spec& spec, double x);

}  // namespace rsense

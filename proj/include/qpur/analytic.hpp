#pragma once

#include <string>
#include <vector>

#include "qpur/types.hpp"

namespace qpur {

// Closed-form machinery for continuous J_z measurement of a qudit that
// starts maximally mixed. Times are in units of 1/gamma unless gamma != 1.

// Diagonal of the unnormalised state at record R; index k has s = J - k.
Vec unnormalized_state(double R, double t, int D, double gamma = 1.0);
// tr of the above, as the plain sum over k.
double normalization(double R, double t, int D, double gamma = 1.0);
// Same quantity written with the symmetric s sum, factored by the
// largest exponent (stable for large |R|).
double normalization_symmetric(double R, double t, int D, double gamma = 1.0);

double record_density_R(double R, double t, int D, double gamma = 1.0);
double record_density_V(double V, double t, int D, double gamma = 1.0);
// Probability mass of the scaled record in [a, b] (erf sums).
double record_mass_V(double a, double b, double t, int D, double gamma = 1.0);

double impurity_kernel(double V, double t, int D, double gamma = 1.0);
double log10_impurity_kernel(double V, double t, int D, double gamma = 1.0);

struct QuadratureOptions {
    double rel_tol = 1e-10;
    unsigned max_depth = 18;
    double tail_sigmas = 10.0;  // tails cut at |V| = J + tail_sigmas / sqrt(4 gamma t)
};

double mean_impurity(double t, int D, double gamma = 1.0, const QuadratureOptions& = {});
// <log10 Lambda> over the record distribution.
double mean_log10_impurity(double t, int D, double gamma = 1.0, const QuadratureOptions& = {});

struct TwoEigResult {
    double region_I = 0.0;
    double region_II = 0.0;
    double value = 0.0;      // 2 R_II + (D-3) R_I
    double long_time = 0.0;  // 2(D-1)/D * pi e^{-gamma t} / sqrt(16 gamma t pi)
};
TwoEigResult mean_impurity_two_eig(double t, int D, double gamma = 1.0);

double qbit_mean_impurity(double t, double gamma = 1.0, bool long_time = false);

enum class BoundKind { Upper, PseudoLower, PhysicalLikely };
BoundKind parse_bound_kind(const std::string& s);
const char* to_string(BoundKind k);
double trajectory_bound(BoundKind kind, double t, int D, double gamma = 1.0);

// Width of the V = s0 peak of P(V), where s0 is the central (D odd) or
// the s = 1/2 (D even) eigenvalue; bisection on P(V) = P(s0)/2.
double central_peak_fwhm(double t, int D, double gamma = 1.0);

struct DistributionRegion {
    double v_lo = 0.0, v_hi = 0.0;
    double ell_lo = 0.0, ell_hi = 0.0;
    double mass = 0.0;
};

struct ImpurityDistribution {
    std::vector<double> ell;      // bin centres
    std::vector<double> density;  // wp(ell)
    double bin_width = 0.0;
    std::vector<DistributionRegion> regions;
    double total_mass() const;
    double mean() const;
    // ell at which the cumulative mass (from the purest side) equals q.
    double quantile(double q) const;
};

struct DistributionGrid {
    int points_per_region = 2000;
    int bins = 4000;
    double ell_min = 0.0;  // 0 means: choose from the data
};

ImpurityDistribution log_impurity_distribution(double t, int D, double gamma = 1.0,
                                               const DistributionGrid& = {});
// Generic region-splitting procedure (any D >= 2); the D = 2 branch of
// log_impurity_distribution uses the closed form instead.
ImpurityDistribution log_impurity_distribution_regions(double t, int D, double gamma = 1.0,
                                                       const DistributionGrid& = {});
// D = 2 density in closed form.
double qbit_log_impurity_density(double ell, double t, double gamma = 1.0);

// Smallest t with mean_impurity(t) <= target (bisection).
double time_to_mean_impurity(double target, int D, double gamma = 1.0);

} // namespace qpur

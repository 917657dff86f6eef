#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "qpur/analytic.hpp"
#include "qpur/rng.hpp"

using namespace qpur;

namespace {

// Independent reference: Simpson's rule on the record density (sum of
// Gaussians of variance 1/(8 gamma t)) times the impurity from softmax weights.
double simpson(const auto& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
    return s * h / 3;
}

double oracle_density(double V, double t, int D) {
    const double J = 0.5 * (D - 1);
    const double var = 1.0 / (8 * t);
    double p = 0;
    for (int k = 0; k < D; ++k) {
        const double s = J - k;
        p += std::exp(-(V - s) * (V - s) / (2 * var)) / std::sqrt(2 * kPi * var);
    }
    return p / D;
}

double oracle_kernel(double V, double t, int D) {
    const double J = 0.5 * (D - 1);
    std::vector<double> a(D);
    for (int k = 0; k < D; ++k) {
        const double s = J - k;
        a[k] = -4 * t * s * s + 8 * t * s * V;
    }
    const double amax = *std::max_element(a.begin(), a.end());
    double z = 0, z2 = 0;
    for (double x : a) {
        z += std::exp(x - amax);
        z2 += std::exp(2 * (x - amax));
    }
    return 1 - z2 / (z * z);
}

double oracle_mean(double t, int D) {
    const double J = 0.5 * (D - 1);
    const double w = J + 12 / std::sqrt(8 * t);
    return simpson([&](double V) { return oracle_density(V, t, D) * oracle_kernel(V, t, D); }, -w, w, 40000);
}

double oracle_qbit(double t) {
    const double k = 4 * t;
    const double w = 12 / std::sqrt(k);
    return std::exp(-t) * std::sqrt(k / kPi) *
           simpson([&](double V) { return std::exp(-k * V * V) / std::cosh(k * V); }, 0, w, 40000);
}

} // namespace

TEST_CASE("unnormalised diagonal") {
    const Vec a = unnormalized_state(0.0, 1e-12, 4);
    for (int k = 0; k < 4; ++k) CHECK(a(k) == doctest::Approx(0.25).epsilon(1e-10));
    for (double R : {-0.7, 0.3, 1.9}) {
        const Vec b = unnormalized_state(R, 1.3, 2);
        CHECK(b(0) / b(1) == doctest::Approx(std::exp(2 * std::sqrt(2.0) * R)).epsilon(1e-13));
    }
    const Vec c = unnormalized_state(0.4, 0.8, 5, 2.0);
    for (int k = 0; k < 5; ++k) {
        const double s = 2.0 - k;
        CHECK(c(k) == doctest::Approx(std::exp(-8 * s * s * 0.8 + 2 * std::sqrt(4.0) * s * 0.4) / 5).epsilon(1e-13));
    }
}

TEST_CASE("both normalisation sums agree") {
    CHECK(std::abs(normalization(1.0, 2.0, 5) - normalization_symmetric(1.0, 2.0, 5)) <=
          1e-14 * normalization(1.0, 2.0, 5));
    PhiloxStream rng(17, 0, 0);
    for (int i = 0; i < 200; ++i) {
        const int D = 2 + static_cast<int>(rng.below(9));
        const double t = 0.01 + 5 * rng.uniform();
        const double R = (rng.uniform() - 0.5) * 8 * t;
        const double a = normalization(R, t, D), b = normalization_symmetric(R, t, D);
        CHECK(std::abs(a - b) <= 1e-13 * a);
    }
}

TEST_CASE("record density normalises, is symmetric and matches the Gaussian mixture") {
    for (int D : {2, 3, 5})
        for (double t : {0.5, 4.0}) {
            const double w = 0.5 * (D - 1) + 12 / std::sqrt(8 * t);
            CHECK(simpson([&](double V) { return record_density_V(V, t, D); }, -w, w, 20000) ==
                  doctest::Approx(1.0).epsilon(1e-8));
            CHECK(record_mass_V(-w, w, t, D) == doctest::Approx(1.0).epsilon(1e-8));
            for (double V : {0.0, 0.13, 0.5, 1.1, 2.7}) {
                CHECK(record_density_V(V, t, D) == doctest::Approx(record_density_V(-V, t, D)).epsilon(1e-14));
                CHECK(record_density_V(V, t, D) == doctest::Approx(oracle_density(V, t, D)).epsilon(1e-12));
            }
        }
}

TEST_CASE("peak width") {
    CHECK(central_peak_fwhm(4.0, 5) == doctest::Approx(0.418).epsilon(0.005 / 0.418));
    CHECK(0.83 / std::sqrt(4.0) == doctest::Approx(0.415));
}

TEST_CASE("impurity kernel limits") {
    for (int D : {2, 3, 5, 8})
        for (double V : {-1.0, 0.0, 0.3, 2.0}) {
            CHECK(impurity_kernel(V, 1e-10, D) == doctest::Approx(1.0 - 1.0 / D).epsilon(1e-8));
            CHECK(impurity_kernel(V, 0.7, D) == doctest::Approx(oracle_kernel(V, 0.7, D)).epsilon(1e-12));
        }
    CHECK(impurity_kernel(0.5, 30.0, 5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(impurity_kernel(-1.5, 30.0, 5) == doctest::Approx(0.5).epsilon(1e-12));
    // inner peak: Lambda e^{4t} settles to a constant
    const double a = impurity_kernel(0.0, 6.0, 5) * std::exp(24.0);
    const double b = impurity_kernel(0.0, 8.0, 5) * std::exp(32.0);
    CHECK(a == doctest::Approx(b).epsilon(1e-3));
    CHECK(log10_impurity_kernel(0.0, 200.0, 5) < -300);
    CHECK(std::isfinite(log10_impurity_kernel(0.0, 400.0, 5)));
}

TEST_CASE("mean impurity against the independent quadrature") {
    for (int D : {2, 3, 5, 7})
        for (double t : {0.1, 0.5, 2.0, 5.0}) CHECK(mean_impurity(t, D) == doctest::Approx(oracle_mean(t, D)).epsilon(1e-8));
    // quadrature values at t = 2 for D = 5 and D = 2
    CHECK(std::log10(mean_impurity(2.0, 5)) == doctest::Approx(-1.2606).epsilon(1e-4));
    CHECK(std::log10(mean_impurity(2.0, 2)) == doctest::Approx(-1.4647).epsilon(1e-4));
    for (int D : {2, 4, 9}) CHECK(mean_impurity(1e-9, D) == doctest::Approx(1.0 - 1.0 / D).epsilon(1e-6));
}

TEST_CASE("qubit forms") {
    for (double t : {0.5, 1.0, 2.0}) {
        CHECK(qbit_mean_impurity(t) == doctest::Approx(oracle_qbit(t)).epsilon(1e-10));
        CHECK(std::abs(mean_impurity(t, 2) - qbit_mean_impurity(t)) < 1e-8);
    }
    // frozen at first build from the 1-D quadrature
    CHECK(qbit_mean_impurity(2.0) == doctest::Approx(0.03429870439536942).epsilon(1e-9));
    double prev = 1.0;
    for (double t : {10.0, 50.0, 200.0}) {
        const double dev = std::abs(qbit_mean_impurity(t, 1.0, true) / qbit_mean_impurity(t) - 1.0);
        CHECK(dev < prev);
        prev = dev;
    }
    CHECK(prev < 0.01);
    CHECK(qbit_mean_impurity(3.0, 1.0, true) == doctest::Approx(kPi * std::exp(-3.0) / std::sqrt(48 * kPi)));
    for (int D : {3, 5, 8})
        for (double t : {0.3, 1.0, 3.0}) CHECK(qbit_mean_impurity(t) <= mean_impurity(t, D));
}

TEST_CASE("mean impurity is non-increasing") {
    for (int D : {2, 3, 5}) {
        double prev = 1.0;
        for (int i = 0; i < 100; ++i) {
            const double t = 0.01 + i * (10.0 - 0.01) / 99;
            const double L = mean_impurity(t, D);
            CHECK(L <= prev * (1 + 1e-10));
            prev = L;
        }
    }
}

TEST_CASE("two-eigenvalue approximation") {
    for (int D : {3, 4, 5, 7})
        for (double t : {0.5, 1.0, 2.0, 4.0, 8.0}) CHECK(mean_impurity_two_eig(t, D).value <= mean_impurity(t, D));
    CHECK(mean_impurity_two_eig(4.0, 3).value == doctest::Approx(mean_impurity(4.0, 3)).epsilon(0.05));
    for (double t : {1.0, 5.0})
        CHECK(mean_impurity_two_eig(t, 2).long_time == doctest::Approx(qbit_mean_impurity(t, 1.0, true)).epsilon(1e-14));
    const TwoEigResult r = mean_impurity_two_eig(2.0, 6);
    CHECK(r.value == doctest::Approx(2 * r.region_II + 3 * r.region_I).epsilon(1e-14));
    CHECK(r.long_time == doctest::Approx(2 * 5.0 / 6 * kPi * std::exp(-2.0) / std::sqrt(32 * kPi)).epsilon(1e-14));
}

TEST_CASE("trajectory bounds") {
    CHECK(std::abs(trajectory_bound(BoundKind::Upper, 10.0, 5) - 0.5) < 1e-6);
    const double r10 = trajectory_bound(BoundKind::PseudoLower, 10.0, 5) / trajectory_bound(BoundKind::PhysicalLikely, 10.0, 5);
    const double r20 = trajectory_bound(BoundKind::PseudoLower, 20.0, 5) / trajectory_bound(BoundKind::PhysicalLikely, 20.0, 5);
    CHECK(r10 == doctest::Approx(r20).epsilon(1e-6));
    CHECK(trajectory_bound(BoundKind::PseudoLower, 20.0, 5) / trajectory_bound(BoundKind::PseudoLower, 19.0, 5) ==
          doctest::Approx(std::exp(-4.0)).epsilon(1e-6));
    CHECK(impurity_kernel(0.5, 0.3, 5) > impurity_kernel(1.5, 0.3, 5));
    CHECK(parse_bound_kind("physical-likely") == BoundKind::PhysicalLikely);
    CHECK_THROWS(parse_bound_kind("lower"));
}

TEST_CASE("log-impurity distribution at D = 5, t = 2") {
    const ImpurityDistribution d = log_impurity_distribution(2.0, 5);
    CHECK(d.total_mass() == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(d.mean() == doctest::Approx(-2.41).epsilon(0.02 / 2.41));
    CHECK(d.quantile(1.0 / 5) == doctest::Approx(-3.1736).epsilon(0.01 / 3.1736));
    // the two sharp features: the edge near log10(1/2) and the inner-peak cusp
    std::size_t top = 0, top_hi = 0;
    for (std::size_t i = 0; i < d.ell.size(); ++i) {
        if (d.density[i] > d.density[top]) top = i;
        if (d.ell[i] > -1.0 && (d.ell[top_hi] <= -1.0 || d.density[i] > d.density[top_hi])) top_hi = i;
    }
    CHECK(d.ell[top] == doctest::Approx(-2.87).epsilon(0.01 / 2.87));
    CHECK(d.ell[top_hi] == doctest::Approx(-0.301).epsilon(0.01 / 0.301));
    double last = -100;
    for (std::size_t i = 0; i < d.ell.size(); ++i)
        if (d.density[i] > 0) last = d.ell[i];
    CHECK(last <= std::log10(0.5) + d.bin_width);
}

TEST_CASE("qubit closed-form distribution agrees with the region procedure") {
    const ImpurityDistribution a = log_impurity_distribution(1.5, 2);
    const ImpurityDistribution b = log_impurity_distribution_regions(1.5, 2);
    CHECK(a.total_mass() == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(b.total_mass() == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(a.mean() == doctest::Approx(b.mean()).epsilon(1e-3));
    CHECK(a.mean() == doctest::Approx(mean_log10_impurity(1.5, 2)).epsilon(1e-3));
}

TEST_CASE("time to reach a mean impurity") {
    for (double L : {0.1, 1e-2, 1e-4}) {
        const double t = time_to_mean_impurity(L, 4);
        CHECK(mean_impurity(t, 4) == doctest::Approx(L).epsilon(1e-6));
    }
}

#include <doctest.h>

#include <cmath>

#include "qpur/errors.hpp"
#include "qpur/qcore.hpp"
#include "qpur/rng.hpp"
#include "qpur/wigner.hpp"

using namespace qpur;

namespace {

// Racah's closed form in long double, integer spins only.
long double lf(int n) { return std::lgamma(static_cast<long double>(n) + 1); }

long double racah(int j1, int m1, int j2, int m2, int J, int M) {
    if (m1 + m2 != M || J < std::abs(j1 - j2) || J > j1 + j2 || std::abs(M) > J) return 0;
    const long double pre = 0.5L * (std::log(2.0L * J + 1) + lf(J + j1 - j2) + lf(J - j1 + j2) + lf(j1 + j2 - J) -
                                    lf(j1 + j2 + J + 1) + lf(J + M) + lf(J - M) + lf(j1 - m1) + lf(j1 + m1) +
                                    lf(j2 - m2) + lf(j2 + m2));
    long double s = 0;
    for (int k = 0; k <= j1 + j2 - J; ++k) {
        const int a = j1 + j2 - J - k, b = j1 - m1 - k, c = j2 + m2 - k, d = J - j2 + m1 + k, e = J - j1 - m2 + k;
        if (a < 0 || b < 0 || c < 0 || d < 0 || e < 0) continue;
        const long double term = std::exp(pre - lf(k) - lf(a) - lf(b) - lf(c) - lf(d) - lf(e));
        s += (k % 2 ? -term : term);
    }
    return s;
}

Mat random_state(int D, PhiloxStream& rng) {
    const Mat U = haar_unitary(D, rng);
    Vec p(D);
    for (int k = 0; k < D; ++k) p(k) = rng.uniform();
    p /= p.sum();
    return U * diagonal_state(p) * U.adjoint();
}

} // namespace

TEST_CASE("Clebsch-Gordan coefficients") {
    CHECK(clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0, 0) == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(clebsch_gordan(0.5, -0.5, 0.5, 0.5, 0, 0) == doctest::Approx(-1 / std::sqrt(2.0)));
    CHECK(clebsch_gordan(0.5, 0.5, 0.5, 0.5, 1, 1) == doctest::Approx(1.0));
    CHECK(clebsch_gordan(1, 1, 1, 0, 1, 0) == 0.0);
    for (int m1 = -1; m1 <= 1; ++m1)
        for (int m2 = -1; m2 <= 1; ++m2)
            for (int J = 0; J <= 2; ++J)
                for (int M = -J; M <= J; ++M) {
                    INFO(m1 << " " << m2 << " " << J << " " << M);
                    CHECK(std::abs(clebsch_gordan(1, m1, 1, m2, J, M) - static_cast<double>(racah(1, m1, 1, m2, J, M))) < 1e-14);
                }
    for (int m1 = -3; m1 <= 3; ++m1)
        for (int m2 = -2; m2 <= 2; ++m2)
            for (int J = 1; J <= 5; ++J)
                CHECK(std::abs(clebsch_gordan(3, m1, 2, m2, J, m1 + m2) - static_cast<double>(racah(3, m1, 2, m2, J, m1 + m2))) < 1e-13);
    CHECK_THROWS_AS(clebsch_gordan(0.3, 0.3, 0.5, 0.5, 1, 1), InvalidArgument);
}

TEST_CASE("multipole operators are orthonormal") {
    for (int D : {2, 3, 5}) {
        const auto& T = multipole_operators(D);
        REQUIRE(T.size() == static_cast<std::size_t>(D * D));
        for (int a = 0; a < D * D; ++a)
            for (int b = 0; b < D * D; ++b)
                CHECK(std::abs((T[a].adjoint() * T[b]).trace() - cplx(a == b ? 1.0 : 0.0)) < 1e-13);
    }
}

TEST_CASE("multipole coefficients") {
    const MultipoleDecomposition m = multipoles(maximally_mixed(4));
    CHECK(m.at(0, 0).real() == doctest::Approx(0.5));
    for (int i = 1; i < 16; ++i) CHECK(std::abs(m.coeff[i]) < 1e-15);
    Vec p(3);
    p << 0.6, 0.3, 0.1;
    const MultipoleDecomposition d = multipoles(diagonal_state(p));
    for (int k = 0; k < 3; ++k)
        for (int q = -k; q <= k; ++q)
            if (q != 0) CHECK(std::abs(d.at(k, q)) < 1e-15);
    // rank 1 of a diagonal state is proportional to <J_z>
    CHECK(d.at(1, 0).real() == doctest::Approx(0.5 / std::sqrt(2.0)).epsilon(1e-13));
}

TEST_CASE("Parseval and normalisation") {
    PhiloxStream rng(3, 0, 0);
    for (int D : {2, 4, 10})
        for (int k = 0; k < 10; ++k) {
            const Mat rho = random_state(D, rng);
            const MultipoleDecomposition m = multipoles(rho);
            double s = 0;
            for (const cplx& c : m.coeff) s += std::norm(c);
            CHECK(s == doctest::Approx((rho * rho).trace().real()).epsilon(1e-12));
        }
    for (int D : {2, 3, 6}) {
        const Mat rho = random_state(D, rng);
        const WignerGrid g = wigner_grid(rho, 128);
        CHECK(g.integral() == doctest::Approx(1.0).epsilon(1e-3));
        CHECK(g.max_imag < 1e-12);
        double s2 = 0;
        for (int i = 0; i < g.values.rows(); ++i)
            for (int j = 0; j < g.values.cols(); ++j) s2 += g.values(i, j) * g.values(i, j);
        CHECK(s2 * g.cell_area() == doctest::Approx(D / (4 * kPi) * (rho * rho).trace().real()).epsilon(2e-3));
    }
    const WignerGrid flat = wigner_grid(maximally_mixed(7), 64);
    CHECK((flat.values.array() - 1 / (4 * kPi)).abs().maxCoeff() < 1e-14);
    CHECK_THROWS(wigner_grid(maximally_mixed(3), 16));
}

TEST_CASE("rotation about z shifts the azimuth") {
    PhiloxStream rng(5, 0, 0);
    const int D = 5;
    const Mat rho = random_state(D, rng);
    const double alpha = 0.7;
    Mat R = Mat::Zero(D, D);
    for (int k = 0; k < D; ++k) R(k, k) = std::polar(1.0, -alpha * (2.0 - k));
    const MultipoleDecomposition a = multipoles(rho), b = multipoles(R * rho * R.adjoint());
    for (double th : {0.3, 1.2, 2.5})
        for (double ph : {-2.0, 0.1, 1.9}) CHECK(wigner_at(b, th, ph) == doctest::Approx(wigner_at(a, th, ph - alpha)).epsilon(1e-12));
}

TEST_CASE("overlaps from the Wigner function") {
    CHECK(overlap_from_wigner(maximally_mixed(5), maximally_mixed(5), 128) == doctest::Approx(0.2).epsilon(1e-4 / 0.2));
    const Mat p0 = pure_state(phase_state(6, 0)), p1 = pure_state(phase_state(6, 1));
    CHECK(overlap_from_wigner(p0, p0, 256) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(std::abs(overlap_from_wigner(p0, p1, 256)) < 1e-3);
}

TEST_CASE("phase states") {
    for (int D : {3, 4, 10}) {
        Mat P(D, D);
        for (int r = 0; r < D; ++r) P.col(r) = phase_state(D, r);
        CHECK(unitary_residual(P) < 1e-13);
        CHECK(unbiased_residual(P) < 1e-14);
        for (int r = 0; r < D; ++r) {
            const double a = phase_angle(D, r);
            CHECK(a >= -kPi);
            CHECK(a < kPi);
        }
    }
    const WignerGrid g = wigner_grid(pure_state(phase_state(10, 3)), 128);
    double d = std::remainder(peak_phi(g) - phase_angle(10, 3), 2 * kPi);
    CHECK(std::abs(d) <= 2 * kPi / 128 + 1e-12);
}

TEST_CASE("D = 4 unbiased basis states differ in their negative regions") {
    const Mat M1 = mub_basis_d4_canonical(1);
    double mins[4];
    for (int k = 0; k < 4; ++k) mins[k] = wigner_grid(pure_state(M1.col(k)), 128).values.minCoeff();
    CHECK(mins[1] < -0.25);
    CHECK(mins[2] < -0.25);
    CHECK(mins[0] > -0.15);
    CHECK(mins[3] > -0.15);
}

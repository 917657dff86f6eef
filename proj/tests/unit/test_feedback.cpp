#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qpur/errors.hpp"
#include "qpur/feedback.hpp"
#include "qpur/qcore.hpp"
#include "qpur/rng.hpp"

using namespace qpur;

namespace {

RMat qft_weights(int D) { return weight_matrix(effective_observable(qft_matrix(D), jz_operator(D))); }

Vec random_spectrum(int D, PhiloxStream& rng) {
    Vec p(D);
    for (int k = 0; k < D; ++k) p(k) = -std::log(rng.uniform());
    p /= p.sum();
    std::sort(p.data(), p.data() + D, std::greater<>());
    return p;
}

// max over all D! placements of sum_ij W(p(i), p(j)) lambda_i lambda_j
double exhaustive_weight(const Vec& ranked, const RMat& W) {
    const int D = static_cast<int>(ranked.size());
    std::vector<int> m(D);
    std::iota(m.begin(), m.end(), 0);
    double best = -1;
    do {
        double s = 0;
        for (int i = 0; i < D; ++i)
            for (int j = 0; j < D; ++j)
                if (i != j) s += W(m[i], m[j]) * ranked(i) * ranked(j);
        best = std::max(best, s);
    } while (std::next_permutation(m.begin(), m.end()));
    return best;
}

} // namespace

TEST_CASE("general increment") {
    const Mat Jz = jz_operator(4);
    Vec e = Vec::Zero(4);
    e(1) = 1;
    const DLGeneral f = dL_general(diagonal_state(e), Jz, 1.0);
    CHECK(std::abs(f.drift) < 1e-15);
    CHECK(std::abs(f.noise) < 1e-15);

    for (int D : {2, 3, 5, 8}) {
        const Mat J = jz_operator(D);
        const double trJ2 = (J * J).trace().real();
        CHECK(dL_general(maximally_mixed(D), J, 0.7).drift == doctest::Approx(-8 * 0.7 * trJ2 / (D * D)).epsilon(1e-13));
    }

    PhiloxStream rng(2, 0, 0);
    for (int D : {3, 4, 6}) {
        const Mat X = effective_observable(qft_matrix(D), jz_operator(D));
        const Mat rho = diagonal_state(random_spectrum(D, rng));
        const DLGeneral g = dL_general(rho, X, 1.3);
        CHECK(g.drift == doctest::Approx(-8 * 1.3 * (X * rho * X * rho).trace().real()).epsilon(1e-13));
        CHECK(std::abs(g.noise) < 1e-14);
    }
}

TEST_CASE("QFT increments") {
    PhiloxStream rng(4, 0, 0);
    const RMat W3 = qft_weights(3);
    for (int k = 0; k < 50; ++k) {
        const Vec p = random_spectrum(3, rng);
        const double L = impurity_of_spectrum(p);
        CHECK(dL_complementary(p, W3, 1.0) == doctest::Approx(-8.0 / 3 * L).epsilon(1e-13));
        // every placement gives the same rate
        std::vector<int> m{0, 1, 2};
        do CHECK(dL_complementary(place(p, Permutation(m)), W3, 1.0) == doctest::Approx(-8.0 / 3 * L).epsilon(1e-13));
        while (std::next_permutation(m.begin(), m.end()));
    }
    // D = 4 weights on the pairs (01, 02, 13, 03, 23, 12)
    const RMat W4 = qft_weights(4);
    const double w[6] = {W4(0, 1), W4(0, 2), W4(1, 3), W4(0, 3), W4(2, 3), W4(1, 2)};
    const double expect[6] = {1, 0.5, 0.5, 1, 1, 1};
    for (int i = 0; i < 6; ++i) CHECK(2 * w[i] == doctest::Approx(expect[i]).epsilon(1e-14));
    for (int D = 2; D <= 9; ++D) {
        Vec pure = Vec::Zero(D);
        pure(0) = 1;
        CHECK(dL_complementary(pure, effective_observable(qft_matrix(D), jz_operator(D)), 1.0) == 0.0);
    }
}

TEST_CASE("optimal placements at D = 4") {
    const RMat W = qft_weights(4);
    Vec bin(4);
    bin << 0.8, 0.2, 0, 0;
    const PermutationChoice c = optimal_permutation(bin, W, PermutationMode::Exhaustive);
    const int gap = std::abs(c.perm.map[0] - c.perm.map[1]);
    CHECK((gap == 1 || gap == 3));
    PhiloxStream rng(6, 0, 0);
    for (int k = 0; k < 30; ++k) {
        const Vec p = random_spectrum(4, rng);
        const double ex = optimal_permutation(p, W, PermutationMode::Exhaustive).rate;
        CHECK(dL_complementary(place(p, Permutation({0, 1, 3, 2})), W, 1.0) == doctest::Approx(ex).epsilon(1e-13));
    }
    CHECK_THROWS_AS(optimal_permutation(Vec::Constant(10, 0.1), qft_weights(10), PermutationMode::Exhaustive), CostGuard);
}

TEST_CASE("zigzag against the exhaustive oracle") {
    PhiloxStream rng(8, 0, 0);
    for (int D : {5, 6, 7}) {
        const RMat W = qft_weights(D);
        int mismatches = 0;
        for (int k = 0; k < 100; ++k) {
            const Vec p = random_spectrum(D, rng);
            const double zz = arrangement_weight(p, conjectured_optimal_permutation(D), W);
            const double ex = exhaustive_weight(p, W);
            CHECK(zz <= ex * (1 + 1e-12));
            if (zz < ex * (1 - 1e-12)) ++mismatches;
            CHECK(optimal_permutation(p, W, PermutationMode::Exhaustive).rate ==
                  doctest::Approx(-8 * ex).epsilon(1e-12));
        }
        INFO("D = " << D);
        CHECK(mismatches == 0);
    }
}

TEST_CASE("flat <= optimal <= binary at equal impurity") {
    PhiloxStream rng(9, 0, 0);
    for (int D = 2; D <= 8; ++D) {
        const RMat W = qft_weights(D);
        for (int k = 0; k < 20; ++k) {
            const Vec p = random_spectrum(D, rng);
            const double L = impurity_of_spectrum(p);
            if (L > 0.5) continue;
            const double opt = -optimal_permutation(p, W, PermutationMode::Exhaustive).rate;
            CHECK(flat_state_rate(L, W) <= opt * (1 + 1e-12));
            CHECK(opt <= binary_state_rate(L, W) * (1 + 1e-12));
        }
    }
}

TEST_CASE("fictitious states reproduce their impurity") {
    for (int D : {2, 3, 6})
        for (double L : {1e-4, 0.1, 0.45}) {
            CHECK(impurity_of_spectrum(flat_from_impurity(L, D).spectrum()) == doctest::Approx(L).epsilon(1e-12));
            CHECK(impurity_of_spectrum(binary_from_impurity(L, D).spectrum()) == doctest::Approx(L).epsilon(1e-12));
        }
    CHECK_THROWS(binary_from_impurity(0.6, 4));
}

TEST_CASE("closed-form bounds") {
    const SpeedupBounds b3 = speedup_bounds(3);
    CHECK(b3.lower == doctest::Approx(8.0 / 3));
    CHECK(b3.upper_qft == doctest::Approx(8.0 / 3));
    CHECK(speedup_bounds(2).upper_qft == doctest::Approx(2.0));
    CHECK(speedup_bounds(400).upper_qft / (2.0 * 400 * 400 / (kPi * kPi)) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(std::isnan(speedup_bounds(5).worst_qft));
    CHECK(speedup_bounds(7).global_upper == 72.0);
    for (int D = 2; D <= 16; ++D)
        CHECK(speedup_from_max_element(qft_matrix(D), jz_operator(D)).S ==
              doctest::Approx(speedup_bounds(D).upper_qft).epsilon(1e-12));
}

TEST_CASE("worst placement at even D") {
    for (int D : {2, 4, 6, 8, 10}) {
        const RMat W = qft_weights(D);
        Vec bin = Vec::Zero(D);
        bin(0) = 0.9;
        bin(1) = 0.1;
        const Permutation p = worst_permutation(bin, W);
        CHECK(std::abs(p.map[1] - p.map[0]) == D / 2);
        CHECK(-dL_complementary(place(bin, p), W, 1.0) / impurity_of_spectrum(bin) == doctest::Approx(2.0).epsilon(1e-13));
    }
}

TEST_CASE("D = 4 mutually unbiased protocol") {
    PhiloxStream rng(10, 0, 0);
    for (int i = 1; i <= 4; ++i) {
        const RMat W = weight_matrix(effective_observable(mub_basis_d4_canonical(i), jz_operator(4)));
        CHECK(W(0, 2) < 1e-28);
        CHECK(W(1, 3) < 1e-28);
        for (int k = 0; k < 10; ++k) {
            const Vec p = random_spectrum(4, rng);
            const double want = -8 * (2 * p(0) * p(1) + 0.5 * (p(1) * p(2) + p(0) * p(3)) + 2 * p(2) * p(3));
            CHECK(mub_dL_d4(p, i) == doctest::Approx(want).epsilon(1e-13));
        }
        CHECK(std::abs(mub_dL_d4(Vec(Eigen::Vector4d(0.5, 0, 0.5, 0)), i)) < 1e-15);
        const Vec bin(Eigen::Vector4d(0.97, 0.03, 0, 0));
        CHECK(mub_dL_d4(bin, i) == doctest::Approx(-8 * impurity_of_spectrum(bin)).epsilon(1e-13));
        CHECK(speedup_from_max_element(mub_basis_d4_canonical(i), jz_operator(4)).S == doctest::Approx(8.0));
    }
    CHECK_THROWS(mub_dL_d4(Vec::Constant(3, 1.0 / 3), 1));
}

TEST_CASE("any unbiased basis at D = 2 gives S = 2") {
    PhiloxStream rng(12, 0, 0);
    for (int k = 0; k < 10; ++k) {
        const double a = 2 * kPi * rng.uniform(), b = 2 * kPi * rng.uniform();
        Mat U(2, 2);
        U << 1, std::polar(1.0, a), std::polar(1.0, b), -std::polar(1.0, a + b);
        U /= std::sqrt(2.0);
        CHECK(speedup_from_max_element(U, jz_operator(2)).S == doctest::Approx(2.0).epsilon(1e-13));
    }
}

TEST_CASE("global bound on random bases") {
    PhiloxStream rng(13, 0, 0);
    for (int D = 2; D <= 8; ++D)
        for (int k = 0; k < 1000; ++k) {
            const Mat X = effective_observable(haar_unitary(D, rng), jz_operator(D));
            Vec p = Vec::Zero(D);
            p(1) = 0.5 * rng.uniform();
            p(0) = 1 - p(1);
            const Mat rho = diagonal_state(p);
            const double L = impurity_of_spectrum(p);
            if (L < 1e-12) continue;
            CHECK(-dL_general(rho, X, 1.0).drift / L <= 2.0 * (D - 1) * (D - 1) * (1 + 1e-12));
        }
}

TEST_CASE("register rates") {
    const RegisterRates r2 = register_rates(2, Vec::Constant(4, 0.25));
    CHECK(r2.S_lower == doctest::Approx(4.0 / 3));
    CHECK(r2.S_upper == doctest::Approx(4.0));
    CHECK(register_rates(3, Vec::Constant(8, 0.125)).S_lower < 1.0);
    CHECK(register_commuting_mean_lt(1, 2.0) / register_commuting_mean_lt(1, 1.0) ==
          doctest::Approx(std::exp(-4.0) / std::sqrt(2.0)).epsilon(1e-13));
    CHECK(register_xmax(1).S_implied == doctest::Approx(2.0));
    for (int n = 2; n <= 6; ++n) {
        const double S = register_xmax(n).S_implied;
        CHECK(S >= 1.5);
        CHECK(S <= 2.5);
    }
    CHECK(register_upper_curve(2, 1.0, 0.3) == doctest::Approx(0.3 * std::exp(-16.0 / 3)));
    CHECK(register_lower_curve(2, 1.0, 0.3) == doctest::Approx(0.3 * std::exp(-16.0)));
}

TEST_CASE("ideal-flow speed-up") {
    CHECK(asymptotic_speedup_ideal(3, {1e-2, 1e-3, 1e-4}).S == doctest::Approx(8.0 / 3).epsilon(0.08));
    std::vector<double> Ds, S;
    for (int D = 3; D <= 10; ++D) {
        Ds.push_back(D);
        S.push_back(asymptotic_speedup_ideal(D, {1e-2, 1e-3, 1e-4}).S);
    }
    CHECK(quadratic_fit_coefficient(Ds, S) == doctest::Approx(0.19).epsilon(0.02 / 0.19));
    CHECK(quadratic_fit_coefficient({1, 2, 3}, {2, 8, 18}) == doctest::Approx(2.0));
}

#include <doctest.h>

#include <cmath>

#include "qpur/basis_search.hpp"
#include "qpur/feedback.hpp"
#include "qpur/qcore.hpp"
#include "qpur/rng.hpp"

using namespace qpur;

TEST_CASE("projection keeps an unbiased basis fixed") {
    for (int D : {2, 5, 8}) {
        const ProjectionResult r = project_to_unbiased(qft_matrix(D));
        CHECK(r.converged);
        CHECK((r.U - qft_matrix(D)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("projection at D = 2 always lands on S = 2") {
    PhiloxStream rng(1, 0, 0);
    for (int k = 0; k < 10; ++k) {
        const ProjectionResult r = project_to_unbiased(haar_unitary(2, rng));
        REQUIRE(r.converged);
        CHECK(speedup_from_max_element(r.U, jz_operator(2)).S == doctest::Approx(2.0).epsilon(1e-9));
    }
}

TEST_CASE("warm starts") {
    for (int D : {2, 4, 6, 8, 10}) {
        const Mat U = signed_fourier(D);
        CHECK(unbiased_residual(U) < 1e-12);
        CHECK(speedup_from_max_element(U, jz_operator(D)).S == doctest::Approx(D * D / 2.0).epsilon(1e-12));
    }
    CHECK_THROWS(signed_fourier(5));
    for (int D : {3, 5, 7}) {
        const double s = speedup_from_max_element(best_permuted_fourier(D), jz_operator(D)).S;
        CHECK(s >= speedup_bounds(D).upper_qft * (1 - 1e-12));
    }
}

TEST_CASE("search results re-verify and respect the bounds") {
    for (int D : {3, 4, 5}) {
        SearchConfig c;
        c.D = D;
        c.restarts = 3;
        c.iterations = 200;
        const SearchResult r = search(c);
        CHECK(unbiased_residual(r.best) < 1e-10);
        CHECK(unitary_residual(r.best) < 1e-10);
        CHECK(std::abs(speedup_from_max_element(r.best, jz_operator(D)).S - r.best_S) < 1e-10);
        for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] >= r.history[i - 1] * (1 - 1e-9));
        const SpeedupBounds b = speedup_bounds(D);
        CHECK(r.best_S >= b.upper_qft * (1 - 1e-9));
        CHECK(r.best_S <= b.upper_all + 1e-9);
        // max element of an unbiased basis is capped by (sum_m |m| / D)^2
        double sm = 0;
        for (int k = 0; k < D; ++k) sm += std::abs(0.5 * (D - 1) - k);
        CHECK(r.best_S <= 8 * (sm / D) * (sm / D) + 1e-9);
    }
}

TEST_CASE("D = 4 reaches the saturating basis") {
    SearchConfig c;
    c.D = 4;
    c.restarts = 0;
    CHECK(search(c).best_S == doctest::Approx(8.0).epsilon(1e-10));
    c.warm_starts = false;
    c.restarts = 8;
    CHECK(search(c).best_S == doctest::Approx(8.0).epsilon(1e-6));
}

TEST_CASE("search is deterministic across worker counts") {
    SearchConfig c;
    c.D = 5;
    c.restarts = 4;
    c.iterations = 100;
    c.threads = 1;
    const SearchResult a = search(c);
    c.threads = 3;
    const SearchResult b = search(c);
    CHECK(a.best_S == b.best_S);
    CHECK(a.best_origin == b.best_origin);
    CHECK(a.history == b.history);
    CHECK(basis_hash(a.best) == basis_hash(b.best));
}

TEST_CASE("search argument checks") {
    SearchConfig c;
    c.D = 1;
    CHECK_THROWS(search(c));
    c.D = 3;
    c.tolerance = 1e-6;
    CHECK_THROWS(search(c));
}

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qpur/types.hpp"

namespace qpur {

struct SearchConfig {
    int D = 4;
    int restarts = 16;
    int iterations = 400;  // gradient iterations per penalty stage
    double tolerance = 1e-10;
    std::uint64_t seed = 1;
    bool warm_starts = true;
    int threads = 0;
};

struct ProjectionResult {
    Mat U;
    double residual = 0.0;  // max | |U_ij| - 1/sqrt(D) |
    int iterations = 0;
    bool converged = false;
};

// Alternating projection: moduli -> 1/sqrt(D), then polar re-unitarisation.
ProjectionResult project_to_unbiased(const Mat& U, double tol = 1e-12, int max_iter = 20000);

struct Candidate {
    std::string origin;  // "qft", "signed-fourier", "permuted-fourier", "restart-<k>"
    Mat U;
    double S = 0.0;
    double residual = 0.0;
    bool accepted = false;
};

struct SearchResult {
    int D = 0;
    Mat best;
    double best_S = 0.0;
    std::string best_origin;
    int row = -1, col = -1;                // location of the max element
    std::vector<double> history;           // incumbent S after each candidate
    std::vector<Candidate> candidates;     // all candidates in evaluation order
    int accepted = 0;
};

SearchResult search(const SearchConfig& cfg);

// Candidate generators, exposed for tests.
Mat signed_fourier(int D);            // even D: S = D^2/2
Mat best_permuted_fourier(int D);     // row permutation of the QFT maximising S (D <= 10)
Candidate random_restart(int D, std::uint64_t seed, int index, int iterations, double tol);

struct ScalingRow {
    int D = 0;
    double S_best = 0.0, S_lower = 0.0, S_upper_all = 0.0, S_qft = 0.0;
};
std::vector<ScalingRow> speedup_scaling_table(const std::vector<int>& Ds, const SearchConfig& base);

std::uint64_t basis_hash(const Mat& U);

} // namespace qpur

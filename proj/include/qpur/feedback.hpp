#pragma once

#include <string>
#include <vector>

#include "qpur/qcore.hpp"
#include "qpur/types.hpp"

namespace qpur {

// dL = drift * dt + noise * dW for one channel measuring X at rate gamma.
struct DLGeneral {
    double drift = 0.0;
    double noise = 0.0;
};
DLGeneral dL_general(const Mat& rho, const Mat& X, double gamma);

// dL/dt = -8 gamma sum_ab W_ab mu_a mu_b, mu = populations by basis slot,
// W = |X_ab|^2 of the observable in the state's eigenbasis.
double dL_complementary(const Vec& slots, const RMat& W, double gamma);
double dL_complementary(const Vec& slots, const Mat& X, double gamma);

// sum_ij W(p(i), p(j)) lambda_i lambda_j, lambda ranked descending.
double arrangement_weight(const Vec& ranked, const Permutation& p, const RMat& W);
// Populations by slot for a ranked spectrum placed according to p.
Vec place(const Vec& ranked, const Permutation& p);

enum class PermutationMode { Exhaustive, Zigzag, Worst };
PermutationMode parse_permutation_mode(const std::string& s);

struct PermutationChoice {
    Permutation perm;
    double rate = 0.0;  // dL/dt
};
inline constexpr int kExhaustiveMaxDim = 9;
PermutationChoice optimal_permutation(const Vec& ranked, const RMat& W, PermutationMode mode,
                                      double gamma = 1.0);
// Greedy: rank 0 at slot 0, then each rank at the free slot adding the
// least weight (ties to the highest slot).
Permutation worst_permutation(const Vec& ranked, const RMat& W);

struct SpeedupBounds {
    double lower = 0.0;         // (2/3)(D+1)
    double upper_qft = 0.0;     // 4 / (1 - cos(2 pi / D))
    double upper_all = 0.0;     // D^2 / 2
    double worst_qft = 0.0;     // 2 (even D), NaN otherwise
    double global_upper = 0.0;  // 2 (D-1)^2
};
SpeedupBounds speedup_bounds(int D);

enum class FictitiousKind { Flat, Binary };
struct FictitiousState {
    FictitiousKind kind = FictitiousKind::Flat;
    int D = 2;
    double deficit = 0.0;  // Delta (flat) or Delta' (binary)
    Vec spectrum() const;
};
FictitiousState flat_from_impurity(double L, int D);
FictitiousState binary_from_impurity(double L, int D);
// |dL/dt| of the flat state with its large eigenvalue at slot 0 and of the
// binary state on the heaviest pair; both for weights W.
double flat_state_rate(double L, const RMat& W, double gamma = 1.0);
double binary_state_rate(double L, const RMat& W, double gamma = 1.0);

enum class SpeedupMethod {
    AnalyticLower,
    AnalyticUpperQft,
    MaxElement,
    SimulationInterpolation,
    GlobalUpper,
    IdealFlowInterpolation
};
const char* to_string(SpeedupMethod m);

struct SpeedupEstimate {
    double S = 0.0;
    SpeedupMethod method = SpeedupMethod::MaxElement;
    int D = 0;
    int n = 0;  // register qubits, 0 for a qudit
    std::vector<double> targets;
    std::vector<double> t_complementary;
    std::vector<double> t_commute;
    std::vector<double> per_target;
    int row = -1, col = -1;  // location of the max element (MaxElement only)
};

// S = 8 max_{r != c} |(U^dagger X U)_rc|^2.
SpeedupEstimate speedup_from_max_element(const Mat& U, const Mat& X);

double mub_dL_d4(const Vec& slots, int basis_index, double gamma = 1.0);

// Register of n qubits, D = 2^n, each measured at rate kappa.
RMat register_weights(int n);  // sum_r |(T^dagger X^(r) T)_ab|^2
struct RegisterRates {
    double rate = 0.0;       // dL/dt for the given slot populations
    double S_lower = 0.0;    // 2n/(D-1)
    double S_upper = 0.0;    // 2n
};
RegisterRates register_rates(int n, const Vec& slots, double kappa = 1.0);
double register_commuting_mean_lt(int n, double t, double kappa = 1.0);
double register_upper_curve(int n, double t, double L0, double kappa = 1.0);  // exp(-8 kappa n t/(D-1)) L0
double register_lower_curve(int n, double t, double L0, double kappa = 1.0);  // exp(-8 kappa n t) L0

struct RegisterXmax {
    int n = 0;
    double xmax = 0.0;       // max_ij sum_r |X^(r)_ij|
    double wmax = 0.0;       // max_ij sum_r |X^(r)_ij|^2
    double S_implied = 0.0;  // 2 wmax
};
RegisterXmax register_xmax(int n);

// Time for the continuously fed-back QFT protocol (delta t -> 0) to reach
// each target mean impurity, from the deterministic eigenvalue flow.
std::vector<double> ideal_qft_times(int D, const std::vector<double>& targets, double gamma = 1.0);

// Intercept of a least-squares line in x = 1/log10(1/L).
double extrapolate_asymptote(const std::vector<double>& targets, const std::vector<double>& S);

SpeedupEstimate asymptotic_speedup_ideal(int D, const std::vector<double>& targets, double gamma = 1.0);
// From a sampled mean-impurity curve of a feedback simulation.
SpeedupEstimate asymptotic_speedup_from_curve(int D, const std::vector<double>& times,
                                              const std::vector<double>& meanL,
                                              const std::vector<double>& targets, double gamma = 1.0);

// a in S = a D^2, least squares through the origin.
double quadratic_fit_coefficient(const std::vector<double>& D, const std::vector<double>& S);

} // namespace qpur

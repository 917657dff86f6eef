#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qpur/types.hpp"

namespace qpur {

// Tolerances of the state/observable/basis invariants.
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPositivityTol = 1e-10;
inline constexpr double kUnbiasedTol = 1e-10;

// Bijection on {0..D-1}; rank i is placed at basis slot map[i].
struct Permutation {
    std::vector<int> map;

    Permutation() = default;
    explicit Permutation(std::vector<int> m);
    static Permutation identity(int D);
    int dim() const { return static_cast<int>(map.size()); }
    Permutation inverse() const;
    bool operator==(const Permutation&) const = default;
};

struct Eig {
    Vec values;   // descending
    Mat vectors;  // column k pairs with values(k)
};

double angular_momentum(int D);  // J = (D-1)/2

Mat jz_operator(int D);
Mat qft_matrix(int D);

// M_0..M_4 exactly as tabulated (entries are columns).
std::array<Mat, 5> mub_bases_d4();
// Same bases with M_3's columns reordered so every M_i (i>0) gives the
// (2, 1/2, 0) weight pattern on the (adjacent, ends, skip) pairs.
Mat mub_basis_d4_canonical(int i);

Mat permutation_matrix(const Permutation& p);
Permutation conjectured_optimal_permutation(int D);

// U X U^dagger
Mat transformed_observable(const Mat& U, const Mat& X);
// U^dagger X U, the observable seen by a state rotated by U.
Mat effective_observable(const Mat& U, const Mat& X);
// |A_ab|^2
RMat weight_matrix(const Mat& A);

Mat register_observable(int n, int r);
std::vector<Mat> register_observables(int n);

Eig eigendecompose_descending(const Mat& rho);

Mat maximally_mixed(int D);
Mat pure_state(const CVec& psi);
Mat diagonal_state(const Vec& spectrum);
double impurity(const Mat& rho);
double impurity_of_spectrum(const Vec& spectrum);
Mat symmetrize(const Mat& M);

double hermitian_residual(const Mat& M);
double unitary_residual(const Mat& U);
double unbiased_residual(const Mat& U);

// Throw InvalidState / InvalidArgument when an invariant fails.
void validate_state(const Mat& rho);
void validate_observable(const Mat& X);
void validate_unbiased(const Mat& U, double tol = kUnbiasedTol);

// Haar-random unitary from a QR of a complex Ginibre matrix.
template <class Rng>
Mat haar_unitary(int D, Rng& rng) {
    Mat G(D, D);
    for (int i = 0; i < D; ++i)
        for (int j = 0; j < D; ++j) {
            double re = rng.normal(), im = rng.normal();
            G(i, j) = cplx(re, im) / std::sqrt(2.0);
        }
    Eigen::HouseholderQR<Mat> qr(G);
    Mat Q = qr.householderQ();
    Mat R = qr.matrixQR();
    for (int j = 0; j < D; ++j) {
        cplx d = R(j, j);
        double a = std::abs(d);
        Q.col(j) *= (a > 0 ? d / a : cplx(1.0));
    }
    return Q;
}

} // namespace qpur

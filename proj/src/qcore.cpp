#include "qpur/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qpur/errors.hpp"

namespace qpur {

namespace {

void require_dim(int D) {
    if (D < 2) throw InvalidDimension("dimension must be >= 2, got " + std::to_string(D));
}

} // namespace

Permutation::Permutation(std::vector<int> m) : map(std::move(m)) {
    std::vector<char> seen(map.size(), 0);
    for (int v : map) {
        if (v < 0 || v >= static_cast<int>(map.size()) || seen[v])
            throw InvalidArgument("permutation is not a bijection");
        seen[v] = 1;
    }
}

Permutation Permutation::identity(int D) {
    std::vector<int> m(D);
    std::iota(m.begin(), m.end(), 0);
    return Permutation(std::move(m));
}

Permutation Permutation::inverse() const {
    std::vector<int> inv(map.size());
    for (int i = 0; i < dim(); ++i) inv[map[i]] = i;
    return Permutation(std::move(inv));
}

double angular_momentum(int D) { return 0.5 * (D - 1); }

Mat jz_operator(int D) {
    require_dim(D);
    const double J = angular_momentum(D);
    Mat X = Mat::Zero(D, D);
    for (int k = 0; k < D; ++k) X(k, k) = J - k;
    return X;
}

Mat qft_matrix(int D) {
    require_dim(D);
    Mat T(D, D);
    const double s = 1.0 / std::sqrt(static_cast<double>(D));
    for (int r = 0; r < D; ++r)
        for (int c = 0; c < D; ++c) {
            // reduce r*c mod D first so the phase is exact for large D
            const double ang = 2.0 * kPi * static_cast<double>((r * c) % D) / D;
            T(r, c) = cplx(std::cos(ang), std::sin(ang)) * s;
        }
    return T;
}

std::array<Mat, 5> mub_bases_d4() {
    const cplx i(0, 1);
    auto from_cols = [](std::initializer_list<std::array<cplx, 4>> cols) {
        Mat M(4, 4);
        int c = 0;
        for (const auto& col : cols) {
            for (int r = 0; r < 4; ++r) M(r, c) = col[r] * 0.5;
            ++c;
        }
        return M;
    };
    std::array<Mat, 5> M;
    M[0] = Mat::Identity(4, 4);
    M[1] = from_cols({{1, 1, 1, 1}, {1, 1, -1, -1}, {1, -1, -1, 1}, {1, -1, 1, -1}});
    M[2] = from_cols({{1, -1, -i, -i}, {1, -1, i, i}, {1, 1, i, -i}, {1, 1, -i, i}});
    M[3] = from_cols({{1, -i, 1, i}, {1, i, 1, -i}, {1, -i, -1, -i}, {1, i, -1, i}});
    M[4] = from_cols({{1, -i, -i, -1}, {1, -i, i, 1}, {1, i, i, -1}, {1, i, -i, 1}});
    return M;
}

Mat mub_basis_d4_canonical(int i) {
    if (i < 0 || i > 4) throw InvalidArgument("MUB index must be in 0..4");
    Mat M = mub_bases_d4()[i];
    if (i == 3) {
        Mat R(4, 4);
        const int order[4] = {0, 2, 3, 1};
        for (int c = 0; c < 4; ++c) R.col(c) = M.col(order[c]);
        return R;
    }
    return M;
}

Mat permutation_matrix(const Permutation& p) {
    const int D = p.dim();
    Mat P = Mat::Zero(D, D);
    for (int i = 0; i < D; ++i) P(p.map[i], i) = 1.0;
    return P;
}

Permutation conjectured_optimal_permutation(int D) {
    require_dim(D);
    std::vector<int> m(D);
    m[0] = 0;
    for (int i = 1; i < D; ++i) m[i] = (i % 2 == 1) ? (i + 1) / 2 : D - i / 2;
    return Permutation(std::move(m));
}

Mat transformed_observable(const Mat& U, const Mat& X) {
    if (U.rows() != X.rows() || U.cols() != X.cols() || U.rows() != U.cols())
        throw DimensionMismatch("transformed_observable: shapes differ");
    return symmetrize(U * X * U.adjoint());
}

Mat effective_observable(const Mat& U, const Mat& X) {
    if (U.rows() != X.rows() || U.cols() != X.cols() || U.rows() != U.cols())
        throw DimensionMismatch("effective_observable: shapes differ");
    return symmetrize(U.adjoint() * X * U);
}

RMat weight_matrix(const Mat& A) { return A.cwiseAbs2(); }

Mat register_observable(int n, int r) {
    if (n < 1 || n > 16) throw InvalidArgument("register size must be in 1..16");
    if (r < 1 || r > n) throw InvalidArgument("register slot out of range");
    const int D = 1 << n;
    Mat X = Mat::Zero(D, D);
    // slot 1 is the most significant tensor factor
    const int bit = n - r;
    for (int k = 0; k < D; ++k) X(k, k) = ((k >> bit) & 1) ? -1.0 : 1.0;
    return X;
}

std::vector<Mat> register_observables(int n) {
    std::vector<Mat> out;
    for (int r = 1; r <= n; ++r) out.push_back(register_observable(n, r));
    return out;
}

Eig eigendecompose_descending(const Mat& rho) {
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(rho));
    const Vec& w = es.eigenvalues();
    const int D = static_cast<int>(w.size());
    std::vector<int> idx(D);
    // Eigen returns ascending order; walk it backwards so equal eigenvalues
    // keep a fixed relative order before the stable sort.
    for (int k = 0; k < D; ++k) idx[k] = D - 1 - k;
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return w(a) > w(b); });
    Eig out{Vec(D), Mat(D, D)};
    for (int k = 0; k < D; ++k) {
        out.values(k) = w(idx[k]);
        out.vectors.col(k) = es.eigenvectors().col(idx[k]);
    }
    return out;
}

Mat maximally_mixed(int D) {
    require_dim(D);
    return Mat::Identity(D, D) / static_cast<double>(D);
}

Mat pure_state(const CVec& psi) {
    CVec v = psi / psi.norm();
    return v * v.adjoint();
}

Mat diagonal_state(const Vec& spectrum) {
    return spectrum.cast<cplx>().asDiagonal();
}

double impurity(const Mat& rho) {
    // tr(rho^2) = sum |rho_ab|^2 for Hermitian rho
    return 1.0 - rho.cwiseAbs2().sum();
}

double impurity_of_spectrum(const Vec& s) { return 1.0 - s.squaredNorm(); }

Mat symmetrize(const Mat& M) { return 0.5 * (M + M.adjoint()); }

double hermitian_residual(const Mat& M) { return (M - M.adjoint()).cwiseAbs().maxCoeff(); }

double unitary_residual(const Mat& U) {
    return (U * U.adjoint() - Mat::Identity(U.rows(), U.cols())).cwiseAbs().maxCoeff();
}

double unbiased_residual(const Mat& U) {
    const double target = 1.0 / std::sqrt(static_cast<double>(U.rows()));
    return (U.cwiseAbs().array() - target).abs().maxCoeff();
}

void validate_state(const Mat& rho) {
    if (rho.rows() != rho.cols()) throw DimensionMismatch("state must be square");
    if (rho.rows() < 2) throw InvalidDimension("state dimension must be >= 2");
    if (hermitian_residual(rho) > kHermitianTol) throw InvalidState("state is not Hermitian");
    if (std::abs(rho.trace() - 1.0) > kTraceTol) throw InvalidState("state trace differs from 1");
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(rho), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kPositivityTol) throw InvalidState("state is not positive");
}

void validate_observable(const Mat& X) {
    if (X.rows() != X.cols()) throw DimensionMismatch("observable must be square");
    if (hermitian_residual(X) > kHermitianTol) throw InvalidArgument("observable is not Hermitian");
}

void validate_unbiased(const Mat& U, double tol) {
    if (U.rows() != U.cols()) throw DimensionMismatch("basis must be square");
    if (unitary_residual(U) > tol) throw InvalidArgument("basis is not unitary");
    if (unbiased_residual(U) > tol) throw InvalidArgument("basis is not unbiased");
}

} // namespace qpur

#include "qpur/basis_search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "qpur/errors.hpp"
#include "qpur/feedback.hpp"
#include "qpur/qcore.hpp"
#include "qpur/rng.hpp"
#include "qpur/trajectories.hpp"

namespace qpur {

namespace {

Vec jz_diag(int D) {
    Vec x(D);
    for (int k = 0; k < D; ++k) x(k) = 0.5 * (D - 1) - k;
    return x;
}

// |u0^dagger X u1|^2 - mu D sum (|U|^2 - 1/D)^2
double objective(const Mat& U, const Vec& x, double mu) {
    const int D = static_cast<int>(U.rows());
    const cplx a = U.col(0).dot(x.cast<cplx>().asDiagonal() * U.col(1));
    const double pen = (U.cwiseAbs2().array() - 1.0 / D).square().sum();
    return std::norm(a) - mu * D * pen;
}

Mat euclid_gradient(const Mat& U, const Vec& x, double mu) {
    const int D = static_cast<int>(U.rows());
    const CVec xu0 = x.cast<cplx>().asDiagonal() * U.col(0);
    const CVec xu1 = x.cast<cplx>().asDiagonal() * U.col(1);
    const cplx a = U.col(0).dot(xu1);
    Mat G = Mat::Zero(D, D);
    G.col(0) += xu1 * std::conj(a);
    G.col(1) += xu0 * a;
    const Eigen::ArrayXXd dev = U.cwiseAbs2().array() - 1.0 / D;
    G.array() -= 2.0 * mu * D * dev.cast<cplx>() * U.array();
    return G;
}

Mat cayley(const Mat& Om, double eta) {
    const int D = static_cast<int>(Om.rows());
    const Mat I = Mat::Identity(D, D);
    return (I - 0.5 * eta * Om).partialPivLu().solve(I + 0.5 * eta * Om);
}

Mat ascend(Mat U, const Vec& x, double mu, int iters) {
    double eta = 0.1;
    double f = objective(U, x, mu);
    for (int k = 0; k < iters; ++k) {
        const Mat M = U.adjoint() * euclid_gradient(U, x, mu);
        const Mat Om = 0.5 * (M - M.adjoint());
        const double n2 = Om.squaredNorm();
        if (n2 < 1e-24) break;
        Mat Un;
        double fn;
        for (;;) {
            Un = U * cayley(Om, eta);
            fn = objective(Un, x, mu);
            if (fn >= f + 1e-4 * eta * n2) break;
            eta *= 0.5;
            if (eta < 1e-14) return U;
        }
        U = Un;
        f = fn;
        eta *= 1.5;
    }
    return U;
}

Candidate evaluate(std::string origin, const Mat& U, double tol) {
    Candidate c;
    c.origin = std::move(origin);
    c.U = U;
    c.residual = std::max(unbiased_residual(U), unitary_residual(U));
    c.accepted = c.residual <= tol;
    c.S = speedup_from_max_element(U, jz_operator(static_cast<int>(U.rows()))).S;
    return c;
}

} // namespace

ProjectionResult project_to_unbiased(const Mat& U0, double tol, int max_iter) {
    const int D = static_cast<int>(U0.rows());
    const double m = 1.0 / std::sqrt(static_cast<double>(D));
    ProjectionResult r;
    r.U = U0;
    r.residual = std::max(unbiased_residual(U0), unitary_residual(U0));
    if (r.residual < tol) {
        r.converged = true;
        return r;
    }
    Mat U = U0;
    for (int it = 1; it <= max_iter; ++it) {
        Mat W = U;
        for (int i = 0; i < D; ++i)
            for (int j = 0; j < D; ++j) {
                const double a = std::abs(U(i, j));
                W(i, j) = a > 0 ? U(i, j) * (m / a) : cplx(m, 0.0);
            }
        Eigen::JacobiSVD<Mat> svd(W, Eigen::ComputeFullU | Eigen::ComputeFullV);
        U = svd.matrixU() * svd.matrixV().adjoint();
        r.iterations = it;
        r.residual = unbiased_residual(U);
        if (r.residual < tol) break;
    }
    r.U = U;
    r.residual = std::max(r.residual, unitary_residual(U));
    r.converged = r.residual < std::max(tol, 1e-10);
    return r;
}

Mat signed_fourier(int D) {
    if (D < 2 || D % 2) throw InvalidDimension("signed Fourier construction needs even D");
    const Mat F = qft_matrix(D);
    Mat out(D, D);
    int row = 0;
    // even rows of column D/2 carry +1, odd rows -1
    for (int r = 0; r < D; r += 2) out.row(row++) = F.row(r);
    for (int r = 1; r < D; r += 2) out.row(row++) = F.row(r);
    return out;
}

Mat best_permuted_fourier(int D) {
    if (D < 2 || D > 10) throw CostGuard("permuted Fourier scan limited to D <= 10");
    const Vec x = jz_diag(D);
    std::vector<cplx> q(D);
    for (int k = 0; k < D; ++k) q[k] = std::polar(1.0, 2.0 * kPi * k / D);
    std::vector<int> perm(D);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    double best_v = -1.0;
    // X^ depends only on the cyclic class of the row order; fix row 0
    do {
        double v = 0.0;
        for (int k = 1; k < D; ++k) {
            cplx s = 0.0;
            for (int r = 0; r < D; ++r) s += x(perm[r]) * q[(r * k) % D];
            v = std::max(v, std::norm(s));
        }
        if (v > best_v * (1.0 + 1e-12)) {
            best_v = v;
            best = perm;
        }
    } while (std::next_permutation(perm.begin() + 1, perm.end()));
    // row r of the result carries the phases of Fourier row r but sits at
    // the slot of eigenvalue x(best[r])
    const Mat F = qft_matrix(D);
    Mat out(D, D);
    for (int r = 0; r < D; ++r) out.row(best[r]) = F.row(r);
    return out;
}

Candidate random_restart(int D, std::uint64_t seed, int index, int iterations, double tol) {
    PhiloxStream rng(seed, static_cast<std::uint64_t>(index), 2);
    const Vec x = jz_diag(D);
    Mat U = haar_unitary(D, rng);
    for (double mu : {1.0, 10.0, 100.0, 1000.0}) U = ascend(U, x, mu, iterations);
    const ProjectionResult p = project_to_unbiased(U, 1e-12, 20000);
    return evaluate("restart-" + std::to_string(index), p.U, tol);
}

std::uint64_t basis_hash(const Mat& U) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](double v) {
        const long long q = std::llround(v * 1e10);
        for (int b = 0; b < 8; ++b) {
            h ^= static_cast<std::uint64_t>(q >> (8 * b)) & 0xffu;
            h *= 1099511628211ull;
        }
    };
    for (int i = 0; i < U.rows(); ++i)
        for (int j = 0; j < U.cols(); ++j) {
            mix(U(i, j).real());
            mix(U(i, j).imag());
        }
    return h;
}

SearchResult search(const SearchConfig& cfg) {
    if (cfg.D < 2) throw InvalidDimension("dimension must be >= 2");
    if (cfg.tolerance > 1e-8) throw InvalidArgument("acceptance tolerance must be <= 1e-8");
    if (cfg.restarts < 0 || cfg.iterations < 0) throw InvalidArgument("restarts and iterations must be >= 0");
    if (cfg.restarts > 100000) throw CostGuard("at most 100000 restarts per search");
    SearchResult res;
    res.D = cfg.D;
    std::vector<Candidate> cands;
    if (cfg.warm_starts) {
        cands.push_back(evaluate("qft", qft_matrix(cfg.D), cfg.tolerance));
        if (cfg.D % 2 == 0) cands.push_back(evaluate("signed-fourier", signed_fourier(cfg.D), cfg.tolerance));
        if (cfg.D <= 9) cands.push_back(evaluate("permuted-fourier", best_permuted_fourier(cfg.D), cfg.tolerance));
    }
    std::vector<Candidate> rs(cfg.restarts);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int k; (k = next.fetch_add(1)) < cfg.restarts;)
            rs[k] = random_restart(cfg.D, cfg.seed, k, cfg.iterations, cfg.tolerance);
    };
    const int nt = std::max(1, std::min(resolve_threads(cfg.threads), cfg.restarts));
    std::vector<std::thread> pool;
    for (int i = 1; i < nt; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& c : rs) cands.push_back(std::move(c));

    // deterministic reduction in candidate order; ties (within the S noise of an
    // accepted basis) go to the smaller hash
    double best = -1.0;
    const Candidate* inc = nullptr;
    for (const Candidate& c : cands) {
        if (c.accepted) {
            ++res.accepted;
            const bool tie = inc && std::abs(c.S - best) <= 1e-9 * best;
            if (!inc || (c.S > best && !tie) || (tie && basis_hash(c.U) < basis_hash(inc->U))) {
                best = std::max(best, c.S);
                inc = &c;
            }
        }
        res.history.push_back(std::max(best, 0.0));
    }
    if (inc) {
        res.best = inc->U;
        res.best_origin = inc->origin;
        const SpeedupEstimate e = speedup_from_max_element(inc->U, jz_operator(cfg.D));
        res.best_S = e.S;
        res.row = e.row;
        res.col = e.col;
    }
    res.candidates = std::move(cands);
    return res;
}

std::vector<ScalingRow> speedup_scaling_table(const std::vector<int>& Ds, const SearchConfig& base) {
    std::vector<ScalingRow> rows;
    for (int D : Ds) {
        if (D < 2 || D > 10) throw InvalidArgument("scaling table covers D in [2, 10]");
        SearchConfig c = base;
        c.D = D;
        const SearchResult r = search(c);
        const SpeedupBounds b = speedup_bounds(D);
        rows.push_back({D, r.best_S, b.lower, b.upper_all, b.upper_qft});
    }
    return rows;
}

} // namespace qpur

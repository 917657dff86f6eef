#include "qpur/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/numeric/odeint.hpp>

#include "qpur/analytic.hpp"
#include "qpur/errors.hpp"

namespace qpur {

DLGeneral dL_general(const Mat& rho, const Mat& X, double gamma) {
    if (rho.rows() != X.rows()) throw DimensionMismatch("dL_general: shapes differ");
    const cplx ex = (X * rho).trace();
    const Mat Xr = X * rho;
    const Mat Dr = X * rho * X.adjoint() - 0.5 * (X.adjoint() * Xr + rho * X.adjoint() * X);
    const Mat Hr = Xr + rho * X.adjoint() - (ex + std::conj(ex)) * rho;
    DLGeneral out;
    // L = 1 - tr rho^2, dL = -2 tr(rho drho) - tr(drho drho)
    out.drift = -4.0 * gamma * (rho * Dr).trace().real() - 2.0 * gamma * (Hr * Hr).trace().real();
    out.noise = -2.0 * std::sqrt(2.0 * gamma) * (rho * Hr).trace().real();
    return out;
}

double dL_complementary(const Vec& slots, const RMat& W, double gamma) {
    if (slots.size() != W.rows()) throw DimensionMismatch("dL_complementary: shapes differ");
    double s = 0.0;
    const int D = static_cast<int>(slots.size());
    for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b)
            if (a != b) s += W(a, b) * slots(a) * slots(b);
    return -8.0 * gamma * s;
}

double dL_complementary(const Vec& slots, const Mat& X, double gamma) {
    return dL_complementary(slots, weight_matrix(X), gamma);
}

double arrangement_weight(const Vec& ranked, const Permutation& p, const RMat& W) {
    const int D = p.dim();
    double s = 0.0;
    for (int i = 0; i < D; ++i)
        for (int j = 0; j < D; ++j)
            if (i != j) s += W(p.map[i], p.map[j]) * ranked(i) * ranked(j);
    return s;
}

Vec place(const Vec& ranked, const Permutation& p) {
    Vec out(ranked.size());
    for (int i = 0; i < p.dim(); ++i) out(p.map[i]) = ranked(i);
    return out;
}

PermutationMode parse_permutation_mode(const std::string& s) {
    if (s == "exhaustive") return PermutationMode::Exhaustive;
    if (s == "zigzag") return PermutationMode::Zigzag;
    if (s == "worst") return PermutationMode::Worst;
    throw InvalidArgument("unknown permutation mode: " + s);
}

Permutation worst_permutation(const Vec& ranked, const RMat& W) {
    const int D = static_cast<int>(ranked.size());
    std::vector<int> map(D, -1);
    std::vector<char> used(D, 0);
    map[0] = 0;
    used[0] = 1;
    for (int i = 1; i < D; ++i) {
        int best = -1;
        double best_cost = std::numeric_limits<double>::infinity();
        for (int s = D - 1; s >= 0; --s) {
            if (used[s]) continue;
            double c = 0.0;
            for (int j = 0; j < i; ++j) c += W(s, map[j]) * ranked(j);
            if (best < 0 || c < best_cost - 1e-12 * std::abs(best_cost)) {
                best_cost = c;
                best = s;
            }
        }
        map[i] = best;
        used[best] = 1;
    }
    return Permutation(std::move(map));
}

PermutationChoice optimal_permutation(const Vec& ranked, const RMat& W, PermutationMode mode, double gamma) {
    const int D = static_cast<int>(ranked.size());
    if (W.rows() != D || W.cols() != D) throw DimensionMismatch("optimal_permutation: shapes differ");
    PermutationChoice out;
    switch (mode) {
    case PermutationMode::Zigzag:
        out.perm = conjectured_optimal_permutation(D);
        break;
    case PermutationMode::Worst:
        out.perm = worst_permutation(ranked, W);
        break;
    case PermutationMode::Exhaustive: {
        if (D > kExhaustiveMaxDim)
            throw CostGuard("exhaustive permutation search limited to D <= " + std::to_string(kExhaustiveMaxDim));
        std::vector<int> m(D);
        std::iota(m.begin(), m.end(), 0);
        double best = -1.0;
        std::vector<int> arg = m;
        do {
            double s = 0.0;
            for (int i = 0; i < D; ++i)
                for (int j = i + 1; j < D; ++j) s += W(m[i], m[j]) * ranked(i) * ranked(j);
            // lexicographic order: only a strict improvement replaces
            if (s > best + 1e-12 * std::abs(best)) {
                best = s;
                arg = m;
            }
        } while (std::next_permutation(m.begin(), m.end()));
        out.perm = Permutation(arg);
        break;
    }
    }
    out.rate = dL_complementary(place(ranked, out.perm), W, gamma);
    return out;
}

SpeedupBounds speedup_bounds(int D) {
    if (D < 2) throw InvalidDimension("dimension must be >= 2");
    SpeedupBounds b;
    b.lower = 2.0 * (D + 1) / 3.0;
    b.upper_qft = 4.0 / (1.0 - std::cos(2.0 * kPi / D));
    b.upper_all = 0.5 * D * D;
    b.worst_qft = (D % 2 == 0) ? 2.0 : std::numeric_limits<double>::quiet_NaN();
    b.global_upper = 2.0 * (D - 1) * (D - 1);
    return b;
}

Vec FictitiousState::spectrum() const {
    Vec s = Vec::Zero(D);
    if (kind == FictitiousKind::Flat) {
        s.setConstant(deficit / (D - 1));
        s(0) = 1.0 - deficit;
    } else {
        s(0) = 1.0 - deficit;
        s(1) = deficit;
    }
    return s;
}

FictitiousState flat_from_impurity(double L, int D) {
    if (D < 2) throw InvalidDimension("dimension must be >= 2");
    if (L < 0.0 || L > 1.0 - 1.0 / D + 1e-15) throw InvalidArgument("impurity out of range");
    // L = 2 Delta - Delta^2 D/(D-1)
    const double q = std::max(0.0, 1.0 - L * D / (D - 1));
    return {FictitiousKind::Flat, D, (D - 1.0) / D * (1.0 - std::sqrt(q))};
}

FictitiousState binary_from_impurity(double L, int D) {
    if (D < 2) throw InvalidDimension("dimension must be >= 2");
    if (L < 0.0 || L > 0.5 + 1e-15) throw InvalidArgument("binary impurity must be in [0, 1/2]");
    return {FictitiousKind::Binary, D, 0.5 * (1.0 - std::sqrt(std::max(0.0, 1.0 - 2.0 * L)))};
}

double flat_state_rate(double L, const RMat& W, double gamma) {
    const int D = static_cast<int>(W.rows());
    return -dL_complementary(flat_from_impurity(L, D).spectrum(), W, gamma);
}

double binary_state_rate(double L, const RMat& W, double gamma) {
    const int D = static_cast<int>(W.rows());
    double wmax = 0.0;
    for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b)
            if (a != b) wmax = std::max(wmax, W(a, b));
    const Vec s = binary_from_impurity(L, D).spectrum();
    return 8.0 * gamma * wmax * 2.0 * s(0) * s(1);
}

const char* to_string(SpeedupMethod m) {
    switch (m) {
    case SpeedupMethod::AnalyticLower: return "analytic-lower";
    case SpeedupMethod::AnalyticUpperQft: return "analytic-upper-qft";
    case SpeedupMethod::MaxElement: return "max-element";
    case SpeedupMethod::SimulationInterpolation: return "simulation-interpolation";
    case SpeedupMethod::GlobalUpper: return "global-upper";
    case SpeedupMethod::IdealFlowInterpolation: return "ideal-flow-interpolation";
    }
    return "?";
}

SpeedupEstimate speedup_from_max_element(const Mat& U, const Mat& X) {
    const Mat Xb = effective_observable(U, X);
    const int D = static_cast<int>(X.rows());
    SpeedupEstimate e;
    e.method = SpeedupMethod::MaxElement;
    e.D = D;
    double best = -1.0;
    for (int r = 0; r < D; ++r)
        for (int c = 0; c < D; ++c)
            if (r != c && std::norm(Xb(r, c)) > best) {
                best = std::norm(Xb(r, c));
                e.row = r;
                e.col = c;
            }
    e.S = 8.0 * best;
    return e;
}

double mub_dL_d4(const Vec& slots, int basis_index, double gamma) {
    if (slots.size() != 4) throw InvalidDimension("mub_dL_d4 needs a 4-dimensional spectrum");
    if (basis_index < 1 || basis_index > 4) throw InvalidArgument("MUB index must be in 1..4");
    const Mat Xb = effective_observable(mub_basis_d4_canonical(basis_index), jz_operator(4));
    return dL_complementary(slots, Xb, gamma);
}

RMat register_weights(int n) {
    const int D = 1 << n;
    const Mat T = qft_matrix(D);
    RMat W = RMat::Zero(D, D);
    for (const Mat& X : register_observables(n)) W += weight_matrix(effective_observable(T, X));
    return W;
}

RegisterRates register_rates(int n, const Vec& slots, double kappa) {
    const int D = 1 << n;
    if (slots.size() != D) throw DimensionMismatch("register_rates: spectrum must have 2^n entries");
    RegisterRates r;
    r.rate = dL_complementary(slots, register_weights(n), kappa);
    r.S_lower = 2.0 * n / (D - 1);
    r.S_upper = 2.0 * n;
    return r;
}

double register_commuting_mean_lt(int n, double t, double kappa) {
    return n * kPi * std::exp(-4.0 * kappa * t) / (8.0 * std::sqrt(kPi * kappa * t));
}

double register_upper_curve(int n, double t, double L0, double kappa) {
    const int D = 1 << n;
    return std::exp(-8.0 * kappa * n * t / (D - 1)) * L0;
}

double register_lower_curve(int n, double t, double L0, double kappa) {
    return std::exp(-8.0 * kappa * n * t) * L0;
}

RegisterXmax register_xmax(int n) {
    if (n < 1 || n > 8) throw InvalidArgument("register_xmax supports n in 1..8");
    const int D = 1 << n;
    const Mat T = qft_matrix(D);
    RMat A = RMat::Zero(D, D), W = RMat::Zero(D, D);
    for (const Mat& X : register_observables(n)) {
        const Mat Xc = effective_observable(T, X);
        A += Xc.cwiseAbs();
        W += Xc.cwiseAbs2();
    }
    RegisterXmax out;
    out.n = n;
    for (int i = 0; i < D; ++i)
        for (int j = 0; j < D; ++j)
            if (i != j) {
                out.xmax = std::max(out.xmax, A(i, j));
                out.wmax = std::max(out.wmax, W(i, j));
            }
    out.S_implied = 2.0 * out.wmax;
    return out;
}

std::vector<double> ideal_qft_times(int D, const std::vector<double>& targets, double gamma) {
    if (D < 2) throw InvalidDimension("dimension must be >= 2");
    const RMat Wslot = weight_matrix(effective_observable(qft_matrix(D), jz_operator(D)));
    const Permutation p = conjectured_optimal_permutation(D);
    RMat W(D, D);
    for (int i = 0; i < D; ++i)
        for (int j = 0; j < D; ++j) W(i, j) = Wslot(p.map[i], p.map[j]);

    // y = log lambda (rank order); d lambda_i = 8 gamma sum_j W_ij l_i l_j / (l_i - l_j)
    using State = std::vector<double>;
    auto rhs = [&](const State& y, State& dy, double) {
        for (int i = 0; i < D; ++i) {
            double s = 0.0;
            const double li = std::exp(y[i]);
            for (int j = 0; j < D; ++j) {
                if (j == i) continue;
                const double lj = std::exp(y[j]);
                s += W(i, j) * lj / (li - lj);
            }
            dy[i] = 8.0 * gamma * s;
        }
    };
    auto L_of = [&](const State& y) {
        double s = 0.0;
        for (double v : y) s += std::exp(2.0 * v);
        return 1.0 - s;
    };
    const double eps = 1e-6, J = 0.5 * (D - 1);
    State y(D);
    for (int k = 0; k < D; ++k) y[k] = std::log((1.0 + eps * (J - k)) / D);

    std::vector<size_t> order(targets.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return targets[a] > targets[b]; });
    std::vector<double> out(targets.size(), std::numeric_limits<double>::quiet_NaN());

    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_dense_output(1e-12, 1e-12, ode::runge_kutta_dopri5<State>());
    stepper.initialize(y, 0.0, 1e-6);
    size_t next = 0;
    while (next < order.size()) {
        if (stepper.current_time() > 1e4) throw Unreachable("ideal flow did not reach target impurity");
        stepper.do_step(rhs);
        while (next < order.size() && L_of(stepper.current_state()) <= targets[order[next]]) {
            const double target = targets[order[next]];
            double a = stepper.previous_time(), b = stepper.current_time();
            State tmp(D);
            for (int it = 0; it < 100 && b - a > 1e-14 * b; ++it) {
                const double m = 0.5 * (a + b);
                stepper.calc_state(m, tmp);
                (L_of(tmp) > target ? a : b) = m;
            }
            out[order[next]] = 0.5 * (a + b);
            ++next;
        }
    }
    return out;
}

double extrapolate_asymptote(const std::vector<double>& targets, const std::vector<double>& S) {
    if (targets.size() != S.size() || targets.size() < 2) throw InvalidArgument("need at least two targets");
    const size_t n = targets.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double x = 1.0 / std::log10(1.0 / targets[i]);
        sx += x;
        sy += S[i];
        sxx += x * x;
        sxy += x * S[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return (sy - slope * sx) / n;
}

SpeedupEstimate asymptotic_speedup_ideal(int D, const std::vector<double>& targets, double gamma) {
    SpeedupEstimate e;
    e.method = SpeedupMethod::IdealFlowInterpolation;
    e.D = D;
    e.targets = targets;
    e.t_complementary = ideal_qft_times(D, targets, gamma);
    for (size_t i = 0; i < targets.size(); ++i) {
        e.t_commute.push_back(time_to_mean_impurity(targets[i], D, gamma));
        e.per_target.push_back(e.t_commute.back() / e.t_complementary[i]);
    }
    e.S = targets.size() >= 2 ? extrapolate_asymptote(targets, e.per_target) : e.per_target.front();
    return e;
}

SpeedupEstimate asymptotic_speedup_from_curve(int D, const std::vector<double>& times,
                                              const std::vector<double>& meanL,
                                              const std::vector<double>& targets, double gamma) {
    if (times.size() != meanL.size() || times.size() < 2) throw InvalidArgument("curve needs matching samples");
    SpeedupEstimate e;
    e.method = SpeedupMethod::SimulationInterpolation;
    e.D = D;
    e.targets = targets;
    for (double target : targets) {
        double tc = std::numeric_limits<double>::quiet_NaN();
        for (size_t k = 1; k < times.size(); ++k) {
            if (meanL[k] <= target && meanL[k - 1] > target) {
                // interpolate log L linearly in t
                const double y0 = std::log(meanL[k - 1]), y1 = std::log(meanL[k]);
                const double f = (std::log(target) - y0) / (y1 - y0);
                tc = times[k - 1] + f * (times[k] - times[k - 1]);
                break;
            }
        }
        if (!std::isfinite(tc)) throw Unreachable("simulated mean impurity does not reach the target");
        e.t_complementary.push_back(tc);
        e.t_commute.push_back(time_to_mean_impurity(target, D, gamma));
        e.per_target.push_back(e.t_commute.back() / tc);
    }
    e.S = targets.size() >= 2 ? extrapolate_asymptote(targets, e.per_target) : e.per_target.front();
    return e;
}

double quadratic_fit_coefficient(const std::vector<double>& D, const std::vector<double>& S) {
    if (D.size() != S.size() || D.empty()) throw InvalidArgument("fit needs matching samples");
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < D.size(); ++i) {
        num += D[i] * D[i] * S[i];
        den += std::pow(D[i], 4);
    }
    return num / den;
}

} // namespace qpur

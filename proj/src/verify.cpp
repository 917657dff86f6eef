#include "qpur/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>

#include "qpur/analytic.hpp"
#include "qpur/basis_search.hpp"
#include "qpur/errors.hpp"
#include "qpur/feedback.hpp"
#include "qpur/io.hpp"
#include "qpur/qcore.hpp"
#include "qpur/rng.hpp"
#include "qpur/trajectories.hpp"
#include "qpur/wigner.hpp"

namespace qpur {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Measurement within(std::string name, double v, double target, double tol) {
    return {std::move(name), v, target, tol, "within", std::abs(v - target) <= tol};
}
Measurement at_most(std::string name, double v, double bound) {
    return {std::move(name), v, bound, kInf, "<=", v <= bound};
}
Measurement at_least(std::string name, double v, double bound) {
    return {std::move(name), v, bound, kInf, ">=", v >= bound};
}
Measurement in_range(std::string name, double v, double lo, double hi) {
    return {std::move(name), v, 0.5 * (lo + hi), 0.5 * (hi - lo), "in", v >= lo && v <= hi};
}

double wrap_angle(double a) {
    a = std::fmod(a + kPi, 2.0 * kPi);
    if (a < 0) a += 2.0 * kPi;
    return a - kPi;
}

// Check bodies. Tolerances are fixed here.

void c1(CheckResult& r, const VerifyOptions& o) {
    TrajectoryConfig cfg;
    cfg.dim = 3;
    cfg.dt = 1e-4;
    cfg.fb_interval = 1e-3;
    cfg.t_final = 2.0;
    cfg.protocol = Protocol::QftComplementary;
    cfg.ensemble = 100;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    cfg.simulate_linear = true;  // Euler-Maruyama floors near L ~ 2e-2 at this dt
    cfg.sample_interval = 0.01;
    const EnsembleResult e = run_ensemble(cfg);
    double worst = 0.0;
    for (size_t k = 0; k < e.stats.times.size(); ++k) {
        const double t = e.stats.times[k];
        if (t < 0.25 - 1e-9 || t > 2.0 + 1e-9) continue;
        const double law = std::exp(-8.0 * t / 3.0) * (2.0 / 3.0);
        worst = std::max(worst, std::abs(e.stats.mean_L[k] - law) / law);
    }
    r.values.push_back(at_most("max_rel_err_vs_exp(-8t/3)*2/3", worst, 0.05));
}

void c2(CheckResult& r, const VerifyOptions&) {
    const SpeedupBounds b = speedup_bounds(3);
    r.values.push_back(within("S_lower(D=3)", b.lower, 8.0 / 3.0, 1e-12));
    r.values.push_back(within("S_upper_qft(D=3)", b.upper_qft, 8.0 / 3.0, 1e-12));
}

void c3(CheckResult& r, const VerifyOptions&) {
    r.values.push_back(within("log10_mean_L(D=5,t=2)", std::log10(mean_impurity(2.0, 5)), -1.46, 0.02));
    r.values.push_back(within("mean_log10_L(D=5,t=2)", mean_log10_impurity(2.0, 5), -2.41, 0.02));
    const ImpurityDistribution d = log_impurity_distribution(2.0, 5);
    r.values.push_back(within("quantile_1/D(D=5,t=2)", d.quantile(1.0 / 5.0), -3.1736, 0.01));
}

void c4(CheckResult& r, const VerifyOptions&) {
    r.values.push_back(within("fwhm_P(V)(D=5,t=4)", central_peak_fwhm(4.0, 5), 0.418, 0.005));
    r.values.push_back(within("0.83/sqrt(t)", 0.83 / std::sqrt(4.0), 0.415, 1e-12));
}

void c5(CheckResult& r, const VerifyOptions& o) {
    TrajectoryConfig cfg;
    cfg.dim = 5;
    cfg.dt = 1e-4;
    cfg.t_final = 5.0;
    cfg.protocol = Protocol::Commuting;
    cfg.ensemble = o.full ? 1000 : 500;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    cfg.sample_interval = 0.5;
    const EnsembleResult e = run_ensemble(cfg);
    const double t = 5.0, D = 5;
    const double lower = trajectory_bound(BoundKind::PseudoLower, t, 5);
    const double edge = impurity_kernel(0.5 * (D - 1), t, 5);
    double maxL = 0.0, closest = kInf;
    int purer = 0;
    for (double L : e.final_L) {
        maxL = std::max(maxL, L);
        closest = std::min(closest, std::abs(L - lower) / lower);
        if (L < edge) ++purer;
    }
    r.values.push_back(at_most("max_L(t=5)", maxL, 0.52));
    r.values.push_back(at_most("closest_rel_dist_to_pseudo_lower", closest, 0.10));
    r.values.push_back(within("fraction_purer_than_V=J", static_cast<double>(purer) / e.final_L.size(),
                              1.0 / D, 0.05));
}

void c6(CheckResult& r, const VerifyOptions&) {
    for (int D : {3, 5, 7}) {
        double worst_excess = -kInf;
        for (double t = 0.25; t <= 4.0 + 1e-9; t += 0.25) {
            const double L = mean_impurity(t, D), L2 = mean_impurity_two_eig(t, D).value;
            worst_excess = std::max(worst_excess, (L2 - L) / L);
        }
        char nm[64];
        std::snprintf(nm, sizeof nm, "max_(L2-L)/L(D=%d)", D);
        r.values.push_back(at_most(nm, worst_excess, 1e-12));
        const double L = mean_impurity(4.0, D), L2 = mean_impurity_two_eig(4.0, D).value;
        std::snprintf(nm, sizeof nm, "rel_gap_t=4(D=%d)", D);
        r.values.push_back(at_most(nm, (L - L2) / L, 0.05));
    }
}

void c7(CheckResult& r, const VerifyOptions&) {
    double e_sum = 0.0, e_max = 0.0;
    for (int D = 2; D <= 16; ++D) {
        const Mat Xc = effective_observable(qft_matrix(D), jz_operator(D));
        double s = 0.0, m = 0.0;
        for (int a = 0; a < D; ++a) {
            if (a != 1) s += std::norm(Xc(a, 1));
            for (int b = 0; b < D; ++b)
                if (a != b) m = std::max(m, std::norm(Xc(a, b)));
        }
        const double want_s = (D * D - 1) / 12.0, want_m = 4.0 / (1.0 - std::cos(2.0 * kPi / D));
        e_sum = std::max(e_sum, std::abs(s - want_s) / want_s);
        e_max = std::max(e_max, std::abs(8.0 * m - want_m) / want_m);
    }
    r.values.push_back(at_most("max_rel_err_column_sum(D=2..16)", e_sum, 1e-12));
    r.values.push_back(at_most("max_rel_err_8max|X|^2(D=2..16)", e_max, 1e-12));
}

void c8(CheckResult& r, const VerifyOptions& o) {
    TrajectoryConfig cfg;
    cfg.dim = 4;
    cfg.dt = 1e-4;
    cfg.fb_interval = 1e-3;
    cfg.t_final = 4.0;
    cfg.protocol = Protocol::QftComplementary;
    cfg.ensemble = 100;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    cfg.simulate_linear = true;
    cfg.sample_interval = 0.005;
    const EnsembleResult e = run_ensemble(cfg);
    const SpeedupEstimate s = asymptotic_speedup_from_curve(4, e.stats.times, e.stats.mean_L, {1e-2, 1e-3, 1e-4});
    r.values.push_back(in_range("S_sim(D=4,dt_fb=1e-3)", s.S, 10.0 / 3.0, 4.0));
    double worst = 0.0;
    for (int D = 2; D <= 10; D += 2) {
        const RMat W = weight_matrix(effective_observable(qft_matrix(D), jz_operator(D)));
        for (double dp : {0.01, 0.1, 0.3}) {
            Vec ranked = Vec::Zero(D);
            ranked(0) = 1.0 - dp;
            ranked(1) = dp;
            const Permutation p = worst_permutation(ranked, W);
            const double S = std::abs(dL_complementary(place(ranked, p), W, 1.0)) / impurity_of_spectrum(ranked);
            worst = std::max(worst, std::abs(S - 2.0));
        }
    }
    r.values.push_back(at_most("max|S_worst-2|(even D<=10)", worst, 1e-12));
}

void c9(CheckResult& r, const VerifyOptions&) {
    std::vector<double> Ds, Ss;
    for (int D = 3; D <= 10; ++D) {
        Ds.push_back(D);
        Ss.push_back(asymptotic_speedup_ideal(D, {1e-2, 1e-3, 1e-4}).S);
    }
    r.values.push_back(within("quadratic_fit_a(D=3..10)", quadratic_fit_coefficient(Ds, Ss), 0.19, 0.02));
}

void c10(CheckResult& r, const VerifyOptions& o) {
    const Mat Jz = jz_operator(4);
    double worst = 0.0;
    PhiloxStream rng(o.seed, 0, 2);
    for (int i = 1; i <= 4; ++i) {
        Mat U = mub_basis_d4_canonical(i);
        if (o.tamper_mub && i == 1) U.col(1).swap(U.col(2));
        const Mat Xb = effective_observable(U, Jz);
        for (int s = 0; s < 50; ++s) {
            Vec l(4);
            for (int k = 0; k < 4; ++k) l(k) = rng.uniform();
            l /= l.sum();
            const double want =
                -8.0 * (2 * l(0) * l(1) + 0.5 * (l(1) * l(2) + l(0) * l(3)) + 2 * l(2) * l(3));
            worst = std::max(worst, std::abs(dL_complementary(l, Xb, 1.0) - want));
        }
    }
    r.values.push_back(at_most("max|dL-weights|(M1..M4)", worst, 1e-14));
    Mat U1 = mub_basis_d4_canonical(1);
    if (o.tamper_mub) U1.col(1).swap(U1.col(2));
    r.values.push_back(within("S_binary(M1)", speedup_from_max_element(U1, Jz).S, 8.0, 1e-12));
    Vec half(4);
    half << 0.5, 0.0, 0.5, 0.0;
    r.values.push_back(at_most("|dL(1/2,0,1/2,0)|", std::abs(dL_complementary(half, effective_observable(U1, Jz), 1.0)), 1e-14));
}

void c11(CheckResult& r, const VerifyOptions& o) {
    for (int D = 2; D <= 10; ++D) {
        SearchConfig sc;
        sc.D = D;
        sc.seed = o.seed;
        sc.threads = o.threads;
        sc.restarts = (D % 2 == 0) ? (o.full ? 8 : 2) : (o.full ? 32 : 12);
        const SearchResult s = search(sc);
        char nm[48];
        std::snprintf(nm, sizeof nm, "S_best(D=%d)", D);
        if (D % 2 == 0) r.values.push_back(within(nm, s.best_S, D * D / 2.0, 0.01 * D * D / 2.0));
        else r.values.push_back(at_least(nm, s.best_S, 0.98 * (D - 1) * (D - 1) / 2.0));
    }
}

void c12(CheckResult& r, const VerifyOptions& o) {
    double e_b = 0.0;
    for (int n = 1; n <= 6; ++n) {
        const int D = 1 << n;
        const RegisterRates rr = register_rates(n, Vec::Constant(D, 1.0 / D));
        e_b = std::max({e_b, std::abs(rr.S_lower - 2.0 * n / (D - 1)), std::abs(rr.S_upper - 2.0 * n)});
    }
    r.values.push_back(at_most("max_bound_err(n=1..6)", e_b, 1e-15));
    for (int n = 2; n <= 6; ++n) {
        char nm[48];
        std::snprintf(nm, sizeof nm, "S_xmax(n=%d)", n);
        r.values.push_back(in_range(nm, register_xmax(n).S_implied, 1.5, 2.5));
    }
    TrajectoryConfig cfg;
    cfg.qubits = 2;
    cfg.dt = 1e-4;
    cfg.fb_interval = 1e-3;
    cfg.t_final = 1.0;
    cfg.protocol = Protocol::RegisterQft;
    cfg.ensemble = 100;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    cfg.simulate_linear = true;
    cfg.sample_interval = 0.05;
    const EnsembleResult e = run_ensemble(cfg);
    // slack: 5% plus three standard errors of the ensemble mean
    double above = -kInf, below = -kInf;
    for (size_t k = 0; k < e.stats.times.size(); ++k) {
        const double t = e.stats.times[k];
        if (t <= 0.0) continue;
        const double m = e.stats.mean_L[k], se = e.stats.stderr_L[k];
        const double ub = register_upper_curve(2, t, 0.75), lb = register_lower_curve(2, t, 0.75);
        above = std::max(above, (m - 3 * se - ub) / ub);
        below = std::max(below, (lb - m - 3 * se) / lb);
    }
    r.values.push_back(at_most("n=2_sim_excess_over_S_lower_curve", above, 0.05));
    r.values.push_back(at_most("n=2_sim_deficit_under_S_upper_curve", below, 0.05));
}

void c13(CheckResult& r, const VerifyOptions& o) {
    for (int D = 2; D <= 8; ++D) {
        PhiloxStream rng(o.seed, static_cast<std::uint64_t>(D), 2);
        const Mat Jz = jz_operator(D);
        double worst = 0.0;
        for (int s = 0; s < 1000; ++s) {
            const Mat U = haar_unitary(D, rng);
            const double dp = 0.5 * rng.uniform();
            Vec l = Vec::Zero(D);
            l(0) = 1.0 - dp;
            l(1) = dp;
            const Mat rho = diagonal_state(l);
            const DLGeneral g = dL_general(rho, effective_observable(U, Jz), 1.0);
            worst = std::max(worst, -g.drift / impurity(rho));
        }
        char nm[48];
        std::snprintf(nm, sizeof nm, "max_S_sample(D=%d)", D);
        r.values.push_back(at_most(nm, worst, 2.0 * (D - 1) * (D - 1) * (1.0 + 1e-12)));
    }
}

void c14(CheckResult& r, const VerifyOptions& o) {
    double flat = 0.0;
    for (int D = 2; D <= 10; ++D) {
        const WignerGrid g = wigner_grid(maximally_mixed(D), 64);
        flat = std::max(flat, (g.values.array() - 1.0 / (4.0 * kPi)).abs().maxCoeff());
    }
    r.values.push_back(at_most("max|W_mixed-1/(4pi)|", flat, 1e-10));
    double pars = 0.0;
    for (int D : {2, 4, 10}) {
        PhiloxStream rng(o.seed, static_cast<std::uint64_t>(100 + D), 2);
        for (int s = 0; s < 100; ++s) {
            const Mat U = haar_unitary(D, rng);
            Vec l(D);
            for (int k = 0; k < D; ++k) l(k) = rng.uniform();
            l /= l.sum();
            const Mat rho = U * diagonal_state(l) * U.adjoint();
            const MultipoleDecomposition m = multipoles(rho);
            double s2 = 0.0;
            for (const cplx& c : m.coeff) s2 += std::norm(c);
            pars = std::max(pars, std::abs(s2 - (rho * rho).trace().real()));
        }
    }
    r.values.push_back(at_most("max_parseval_err", pars, 1e-12));
    const int N = 128, D = 10;
    double off = 0.0;
    for (int q = 0; q < D; ++q) {
        const WignerGrid g = wigner_grid(pure_state(phase_state(D, q)), N);
        off = std::max(off, std::abs(wrap_angle(peak_phi(g) - phase_angle(D, q))));
    }
    r.values.push_back(at_most("max_peak_offset_cells(D=10)", off / (2.0 * kPi / N), 1.0));
}

const std::map<std::string, std::pair<std::string, std::function<void(CheckResult&, const VerifyOptions&)>>>& table() {
    static const std::map<std::string, std::pair<std::string, std::function<void(CheckResult&, const VerifyOptions&)>>> t{
        {"C1", {"D=3 QFT ensemble follows exp(-8t/3)(2/3)", c1}},
        {"C2", {"D=3 lower and QFT upper speed-up bounds coincide at 8/3", c2}},
        {"C3", {"commuting quadrature anchors D=5 t=2", c3}},
        {"C4", {"central peak FWHM of P(V) D=5 t=4", c4}},
        {"C5", {"commuting trajectory spread D=5 t=5", c5}},
        {"C6", {"two-eigenvalue mean below exact mean", c6}},
        {"C7", {"QFT observable identities D=2..16", c7}},
        {"C8", {"D=4 simulated speed-up window and worst permutation", c8}},
        {"C9", {"quadratic fit of QFT speed-up D=3..10", c9}},
        {"C10", {"D=4 MUB weights, S=8 and stalled spectrum", c10}},
        {"C11", {"unbiased basis search", c11}},
        {"C12", {"qubit register bounds and n=2 simulation", c12}},
        {"C13", {"global speed-up bound on random samples", c13}},
        {"C14", {"Wigner function properties", c14}},
    };
    return t;
}

} // namespace

const std::vector<std::string>& acceptance_ids() {
    static const std::vector<std::string> ids{"C1", "C2", "C3", "C4",  "C5",  "C6",  "C7",
                                              "C8", "C9", "C10", "C11", "C12", "C13", "C14"};
    return ids;
}

CheckResult run_check(const std::string& id, const VerifyOptions& opt) {
    const auto it = table().find(id);
    if (it == table().end()) throw InvalidArgument("unknown check id " + id);
    CheckResult r;
    r.id = id;
    r.title = it->second.first;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        it->second.second(r, opt);
        r.passed = !r.values.empty() &&
                   std::all_of(r.values.begin(), r.values.end(), [](const Measurement& m) { return m.pass; });
    } catch (const Error& e) {
        r.error = e.kind() + ": " + e.what();
    } catch (const std::exception& e) {
        r.error = std::string("internal: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

std::vector<CheckResult> run_acceptance(const VerifyOptions& opt) {
    std::vector<CheckResult> out;
    for (const auto& id : acceptance_ids()) {
        if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end()) continue;
        out.push_back(run_check(id, opt));
    }
    return out;
}

std::string summary_line(const CheckResult& r) {
    std::string s = (r.passed ? "PASS " : "FAIL ") + r.id + "  " + r.title;
    char buf[256];
    for (const Measurement& m : r.values) {
        if (m.relation == "within")
            std::snprintf(buf, sizeof buf, " | %s=%.6g (want %.6g +- %.3g)%s", m.name.c_str(), m.value, m.target,
                          m.tol, m.pass ? "" : " !");
        else if (m.relation == "in")
            std::snprintf(buf, sizeof buf, " | %s=%.6g (want [%.6g, %.6g])%s", m.name.c_str(), m.value,
                          m.target - m.tol, m.target + m.tol, m.pass ? "" : " !");
        else
            std::snprintf(buf, sizeof buf, " | %s=%.6g (want %s %.6g)%s", m.name.c_str(), m.value,
                          m.relation.c_str(), m.target, m.pass ? "" : " !");
        s += buf;
    }
    if (!r.error.empty()) s += " | error " + r.error;
    std::snprintf(buf, sizeof buf, " [%.1fs]", r.seconds);
    return s + buf;
}

nlohmann::json to_json(const CheckResult& r) {
    nlohmann::json vals = nlohmann::json::array();
    for (const Measurement& m : r.values) {
        nlohmann::json v{{"name", m.name}, {"value", m.value}, {"relation", m.relation},
                         {"target", m.target}, {"pass", m.pass}};
        if (std::isfinite(m.tol)) v["tolerance"] = m.tol;
        vals.push_back(v);
    }
    nlohmann::json j{{"id", r.id}, {"title", r.title}, {"status", r.passed ? "pass" : "fail"},
                     {"measurements", vals}, {"seconds", r.seconds}};
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

nlohmann::json report_json(const std::vector<CheckResult>& rs, const VerifyOptions& opt) {
    nlohmann::json checks = nlohmann::json::array();
    int failed = 0;
    for (const auto& r : rs) {
        checks.push_back(to_json(r));
        failed += !r.passed;
    }
    return {{"suite", opt.full ? "full" : "fast"}, {"seed", opt.seed}, {"version", version()},
            {"checks", checks}, {"passed", static_cast<int>(rs.size()) - failed}, {"failed", failed}};
}

} // namespace qpur

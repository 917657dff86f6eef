#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qpur/analytic.hpp"
#include "qpur/basis_search.hpp"
#include "qpur/errors.hpp"
#include "qpur/feedback.hpp"
#include "qpur/io.hpp"
#include "qpur/qcore.hpp"
#include "qpur/trajectories.hpp"
#include "qpur/verify.hpp"
#include "qpur/wigner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qpur;

namespace {

struct Common {
    int dim = 5;
    int qubits = 0;
    double gamma = 1.0;
    double dt = 1e-4;
    double fb_interval = 0.0;
    double t_final = 2.0;
    int ensemble = 100;
    std::uint64_t seed = 1;
    std::string protocol = "commuting";
    std::string out = "qpur_out";
    int threads = 0;
};

struct Extra {
    int points = 200;
    double t_min = 0.0;
    bool linear = false;
    double sample_interval = 0.01;
    bool keep_records = false;
    int mub_index = 1;
    std::vector<double> quantiles{0.1, 0.5, 0.9};
    int dmin = 0, dmax = 0;
    bool simulate = false;
    int restarts = 16;
    int iterations = 400;
    int resolution = 128;
    std::vector<std::string> states;
    bool full = false;
    bool tamper_mub = false;
    std::vector<std::string> only;
    bool seed_given = false;
};

json echo(const std::string& cmd, const Common& c, const Extra& x) {
    return {{"subcommand", cmd},
            {"dim", c.dim},
            {"qubits", c.qubits},
            {"gamma", c.gamma},
            {"dt", c.dt},
            {"fb_interval", c.fb_interval},
            {"t_final", c.t_final},
            {"ensemble", c.ensemble},
            {"seed", c.seed},
            {"protocol", c.protocol},
            {"threads", c.threads},
            {"points", x.points},
            {"t_min", x.t_min},
            {"linear", x.linear},
            {"sample_interval", x.sample_interval},
            {"keep_records", x.keep_records},
            {"mub_index", x.mub_index},
            {"quantiles", x.quantiles},
            {"dmin", x.dmin},
            {"dmax", x.dmax},
            {"simulate", x.simulate},
            {"restarts", x.restarts},
            {"iterations", x.iterations},
            {"resolution", x.resolution},
            {"states", x.states},
            {"full", x.full},
            {"only", x.only}};
}

// Writes table into the output directory, records it and echoes small
// tables to stdout.
class Session {
public:
    Session(const std::string& cmd, const Common& c, const Extra& x)
        : dir_(c.out), manifest_("qpur " + cmd, echo(cmd, c, x), c.seed) {
        fs::create_directories(dir_);
    }
    void csv(const std::string& name, const CsvTable& t, bool print = false) {
        const fs::path p = dir_ / name;
        t.write(p);
        manifest_.add_output(p);
        if (print) std::cout << t.str();
    }
    void json_file(const std::string& name, const json& j) {
        const fs::path p = dir_ / name;
        write_json(p, j);
        manifest_.add_output(p);
    }
    void finish() const { manifest_.write(dir_); }

private:
    fs::path dir_;
    RunManifest manifest_;
};

// Internal computations run at gamma = 1; --gamma only rescales the
// reported times.
std::vector<double> time_grid(const Common& c, const Extra& x) {
    if (c.t_final <= 0) throw InvalidArgument("--t-final must be > 0");
    if (x.points <= 1) return {c.t_final};
    const double lo = x.t_min > 0 ? x.t_min : c.t_final / x.points;
    std::vector<double> ts;
    for (int k = 0; k < x.points; ++k) ts.push_back(lo + (c.t_final - lo) * k / (x.points - 1));
    return ts;
}

void check_gamma(const Common& c) {
    if (!(c.gamma > 0)) throw InvalidArgument("--gamma must be > 0");
}

int cmd_mean_impurity(const Common& c, const Extra& x) {
    check_gamma(c);
    Session s("mean-impurity", c, x);
    CsvTable t({{"t", "1/gamma"},
                {"t_scaled", "time"},
                {"mean_L", "1"},
                {"log10_mean_L", "1"},
                {"mean_log10_L", "1"},
                {"two_eig_L", "1"},
                {"upper_bound_L", "1"},
                {"pseudo_lower_L", "1"},
                {"physical_likely_L", "1"}});
    for (double tt : time_grid(c, x)) {
        const double L = mean_impurity(tt, c.dim);
        const double pl = c.dim >= 3 ? trajectory_bound(BoundKind::PseudoLower, tt, c.dim) : std::nan("");
        t.add_row({tt, tt / c.gamma, L, std::log10(L), mean_log10_impurity(tt, c.dim),
                   mean_impurity_two_eig(tt, c.dim).value, trajectory_bound(BoundKind::Upper, tt, c.dim), pl,
                   trajectory_bound(BoundKind::PhysicalLikely, tt, c.dim)});
    }
    s.csv("mean_impurity.csv", t, t.rows() <= 20);
    s.finish();
    return 0;
}

int cmd_two_eig(const Common& c, const Extra& x) {
    check_gamma(c);
    Session s("two-eig", c, x);
    CsvTable t({{"t", "1/gamma"},
                {"t_scaled", "time"},
                {"region_I", "1"},
                {"region_II", "1"},
                {"two_eig_L", "1"},
                {"mean_L", "1"},
                {"long_time_L", "1"}});
    for (double tt : time_grid(c, x)) {
        const TwoEigResult r = mean_impurity_two_eig(tt, c.dim);
        t.add_row({tt, tt / c.gamma, r.region_I, r.region_II, r.value, mean_impurity(tt, c.dim), r.long_time});
    }
    s.csv("two_eig.csv", t, t.rows() <= 20);
    s.finish();
    return 0;
}

TrajectoryConfig trajectory_config(const Common& c, const Extra& x) {
    TrajectoryConfig cfg;
    cfg.dim = c.dim;
    cfg.qubits = c.qubits;
    cfg.dt = c.dt;
    cfg.t_final = c.t_final;
    cfg.protocol = parse_protocol(c.protocol);
    cfg.fb_interval = c.fb_interval;
    cfg.mub_index = x.mub_index;
    cfg.ensemble = c.ensemble;
    cfg.seed = c.seed;
    cfg.simulate_linear = x.linear;
    cfg.sample_interval = x.sample_interval;
    cfg.threads = c.threads;
    cfg.keep_records = x.keep_records;
    cfg.quantiles = x.quantiles;
    cfg.validate();
    return cfg;
}

CsvTable aggregate_table(const EnsembleStats& st, const std::vector<double>& qs, double gamma) {
    std::vector<Column> cols{{"t", "1/gamma"},     {"t_scaled", "time"}, {"mean_L", "1"}, {"mean_log10_L", "1"},
                             {"stderr_L", "1"},    {"min_L", "1"},       {"max_L", "1"}};
    for (double q : qs) {
        char nm[32];
        std::snprintf(nm, sizeof nm, "q%g_L", q);
        cols.push_back({nm, "1"});
    }
    CsvTable t(cols);
    for (size_t k = 0; k < st.times.size(); ++k) {
        std::vector<CsvTable::Cell> row{st.times[k], st.times[k] / gamma, st.mean_L[k], st.mean_log_L[k],
                                        st.stderr_L[k], st.min_L[k], st.max_L[k]};
        for (double q : qs) row.push_back(st.quantiles.at(q)[k]);
        t.add_row(row);
    }
    return t;
}

int cmd_simulate(const Common& c, const Extra& x) {
    check_gamma(c);
    const TrajectoryConfig cfg = trajectory_config(c, x);
    Session s("simulate", c, x);
    const EnsembleResult e = run_ensemble(cfg);
    s.csv("aggregate.csv", aggregate_table(e.stats, cfg.quantiles, c.gamma));
    CsvTable fin({{"trajectory", "1"}, {"final_L", "1"}});
    for (size_t i = 0; i < e.final_L.size(); ++i) fin.add_row({static_cast<long long>(i), e.final_L[i]});
    s.csv("final.csv", fin);
    for (size_t i = 0; i < e.records.size(); ++i) {
        const TrajectoryRecord& r = e.records[i];
        CsvTable t({{"t", "1/gamma"}, {"L", "1"}, {"log10_L", "1"}, {"V", "1"}, {"dR", "sqrt(1/gamma)"}});
        for (size_t k = 0; k < r.times.size(); ++k)
            t.add_row({r.times[k], r.impurity[k], r.log_impurity[k], r.V[k], r.dR[k]});
        char nm[40];
        std::snprintf(nm, sizeof nm, "trajectory_%04zu.csv", i);
        s.csv(nm, t);
    }
    std::printf("t_final=%s mean_L=%s\n", format_double(e.stats.times.back()).c_str(),
                format_double(e.stats.mean_L.back()).c_str());
    s.finish();
    return 0;
}

int cmd_distribution(const Common& c, const Extra& x) {
    check_gamma(c);
    Session s("distribution", c, x);
    const double tt = c.t_final;
    const ImpurityDistribution d = log_impurity_distribution(tt, c.dim);
    CsvTable t({{"ell", "log10"}, {"density", "1/log10"}});
    for (size_t k = 0; k < d.ell.size(); ++k) t.add_row({d.ell[k], d.density[k]});
    s.csv("distribution.csv", t);
    const double J = 0.5 * (c.dim - 1), w = J + 6.0 / std::sqrt(4.0 * tt);
    CsvTable rv({{"V", "1"}, {"P_V", "1"}, {"log10_Lambda", "log10"}});
    const int n = std::max(x.points, 2);
    for (int k = 0; k < n; ++k) {
        const double V = -w + 2.0 * w * k / (n - 1);
        rv.add_row({V, record_density_V(V, tt, c.dim), log10_impurity_kernel(V, tt, c.dim)});
    }
    s.csv("record_density.csv", rv);
    json summary{{"D", c.dim},
                 {"t", tt},
                 {"total_mass", d.total_mass()},
                 {"mean_ell", d.mean()},
                 {"mean_log10_L_quadrature", mean_log10_impurity(tt, c.dim)},
                 {"log10_mean_L", std::log10(mean_impurity(tt, c.dim))},
                 {"quantile_1_over_D", d.quantile(1.0 / c.dim)},
                 {"central_peak_fwhm", nullptr}};
    // null while neighbouring peaks still overlap
    try {
        summary["central_peak_fwhm"] = central_peak_fwhm(tt, c.dim);
    } catch (const qpur::InvalidArgument&) {
    }
    s.json_file("distribution_summary.json", summary);
    std::cout << summary.dump(2) << "\n";
    s.finish();
    return 0;
}

int cmd_bounds(const Common& c, const Extra& x) {
    Session s("bounds", c, x);
    if (c.qubits > 0) {
        CsvTable t({{"n", "1"}, {"D", "1"}, {"S_lower", "1"}, {"S_upper", "1"}, {"X_max", "1"}, {"S_xmax", "1"}});
        for (int n = 1; n <= c.qubits; ++n) {
            const int D = 1 << n;
            const RegisterRates rr = register_rates(n, Vec::Constant(D, 1.0 / D));
            const RegisterXmax xm = register_xmax(n);
            t.add_row({static_cast<long long>(n), static_cast<long long>(D), rr.S_lower, rr.S_upper, xm.xmax,
                       xm.S_implied});
        }
        s.csv("register_bounds.csv", t, true);
    } else {
        const SpeedupBounds b = speedup_bounds(c.dim);
        CsvTable t({{"D", "1"},
                    {"S_lower", "1"},
                    {"S_upper_qft", "1"},
                    {"S_upper_all", "1"},
                    {"S_worst_qft", "1"},
                    {"S_global_upper", "1"}});
        t.add_row({static_cast<long long>(c.dim), b.lower, b.upper_qft, b.upper_all, b.worst_qft, b.global_upper});
        s.csv("bounds.csv", t, true);
    }
    s.finish();
    return 0;
}

const std::vector<double> kTargets{1e-2, 1e-3, 1e-4};

int cmd_speedup(const Common& c, const Extra& x) {
    check_gamma(c);
    Session s("speedup", c, x);
    const int lo = x.dmin > 0 ? x.dmin : c.dim, hi = x.dmax > 0 ? x.dmax : c.dim;
    if (lo < 2 || hi < lo) throw InvalidArgument("need 2 <= dmin <= dmax");
    std::vector<double> Ds, Ss;
    std::vector<SpeedupEstimate> est;
    for (int D = lo; D <= hi; ++D) {
        est.push_back(asymptotic_speedup_ideal(D, kTargets));
        Ds.push_back(D);
        Ss.push_back(est.back().S);
    }
    const double a = quadratic_fit_coefficient(Ds, Ss);
    CsvTable t({{"D", "1"},
                {"S_lower", "1"},
                {"S_upper_qft", "1"},
                {"S_upper_all", "1"},
                {"S_ideal_qft", "1"},
                {"S_fit", "1"}});
    for (size_t i = 0; i < Ds.size(); ++i) {
        const SpeedupBounds b = speedup_bounds(static_cast<int>(Ds[i]));
        t.add_row({static_cast<long long>(Ds[i]), b.lower, b.upper_qft, b.upper_all, Ss[i], a * Ds[i] * Ds[i]});
    }
    s.csv("speedup_scaling.csv", t, true);
    CsvTable pt({{"D", "1"}, {"target_L", "1"}, {"t_commute", "1/gamma"}, {"t_complementary", "1/gamma"}, {"S", "1"}});
    for (const auto& e : est)
        for (size_t k = 0; k < e.targets.size(); ++k)
            pt.add_row({static_cast<long long>(e.D), e.targets[k], e.t_commute[k], e.t_complementary[k],
                        e.per_target[k]});
    s.csv("speedup_targets.csv", pt);
    std::printf("quadratic_fit_a=%s\n", format_double(a).c_str());

    if (x.simulate) {
        Common cc = c;
        if (cc.protocol == "commuting") cc.protocol = "qft";
        if (cc.fb_interval == 0.0) cc.fb_interval = 1e-3;
        const TrajectoryConfig cfg = trajectory_config(cc, x);
        const EnsembleResult e = run_ensemble(cfg);
        CsvTable st({{"t", "1/gamma"}, {"mean_L", "1"}, {"t_commute", "1/gamma"}, {"S", "1"}});
        for (size_t k = 0; k < e.stats.times.size(); ++k) {
            const double tt = e.stats.times[k], L = e.stats.mean_L[k];
            if (tt <= 0 || !(L > 0)) continue;
            double tc = std::nan("");
            try {
                tc = time_to_mean_impurity(L, cfg.D());
            } catch (const Unreachable&) {
            }
            st.add_row({tt, L, tc, tc / tt});
        }
        s.csv("speedup_simulated.csv", st);
        try {
            const SpeedupEstimate se =
                asymptotic_speedup_from_curve(cfg.D(), e.stats.times, e.stats.mean_L, kTargets);
            std::printf("simulated_asymptotic_S=%s\n", format_double(se.S).c_str());
        } catch (const Unreachable& u) {
            std::printf("simulated_asymptotic_S=nan (%s)\n", u.what());
        }
    }
    s.finish();
    return 0;
}

json matrix_json(const Mat& U) {
    json re = json::array(), im = json::array();
    for (int i = 0; i < U.rows(); ++i) {
        json r = json::array(), m = json::array();
        for (int j = 0; j < U.cols(); ++j) {
            r.push_back(U(i, j).real());
            m.push_back(U(i, j).imag());
        }
        re.push_back(r);
        im.push_back(m);
    }
    return {{"real", re}, {"imag", im}};
}

int cmd_search(const Common& c, const Extra& x) {
    Session s("search", c, x);
    const int lo = x.dmin > 0 ? x.dmin : c.dim, hi = x.dmax > 0 ? x.dmax : c.dim;
    CsvTable t({{"D", "1"},
                {"S_best", "1"},
                {"S_lower", "1"},
                {"S_upper_qft", "1"},
                {"S_upper_all", "1"},
                {"accepted", "1"},
                {"origin", "label"}});
    for (int D = lo; D <= hi; ++D) {
        SearchConfig sc;
        sc.D = D;
        sc.restarts = x.restarts;
        sc.iterations = x.iterations;
        sc.seed = c.seed;
        sc.threads = c.threads;
        const SearchResult r = search(sc);
        const SpeedupBounds b = speedup_bounds(D);
        t.add_row({static_cast<long long>(D), r.best_S, b.lower, b.upper_qft, b.upper_all,
                   static_cast<long long>(r.accepted), r.best_origin});
        CsvTable h({{"candidate", "1"}, {"origin", "label"}, {"S", "1"}, {"residual", "1"}, {"incumbent_S", "1"}});
        for (size_t k = 0; k < r.candidates.size(); ++k)
            h.add_row({static_cast<long long>(k), r.candidates[k].origin, r.candidates[k].S,
                       r.candidates[k].residual, r.history[k]});
        s.csv("search_history_D" + std::to_string(D) + ".csv", h);
        s.json_file("basis_D" + std::to_string(D) + ".json",
                    {{"D", D}, {"S", r.best_S}, {"origin", r.best_origin}, {"row", r.row}, {"col", r.col},
                     {"U", matrix_json(r.best)}});
    }
    s.csv("search.csv", t, true);
    s.finish();
    return 0;
}

int cmd_register(const Common& c, const Extra& x) {
    check_gamma(c);
    const int n = c.qubits > 0 ? c.qubits : 2;
    const int D = 1 << n;
    Session s("register", c, x);
    CsvTable xm({{"n", "1"}, {"X_max", "1"}, {"W_max", "1"}, {"S_xmax", "1"}, {"S_lower", "1"}, {"S_upper", "1"}});
    for (int k = 1; k <= std::max(n, 6); ++k) {
        const RegisterXmax r = register_xmax(k);
        const int Dk = 1 << k;
        xm.add_row({static_cast<long long>(k), r.xmax, r.wmax, r.S_implied, 2.0 * k / (Dk - 1), 2.0 * k});
    }
    s.csv("register_xmax.csv", xm, true);

    std::vector<double> mean_sim;
    std::vector<double> times;
    if (x.simulate) {
        Common cc = c;
        cc.qubits = n;
        if (cc.protocol == "commuting") cc.protocol = "register-qft";
        if (cc.fb_interval == 0.0) cc.fb_interval = 1e-3;
        Extra xx = x;
        xx.linear = true;
        const TrajectoryConfig cfg = trajectory_config(cc, xx);
        const EnsembleResult e = run_ensemble(cfg);
        times = e.stats.times;
        mean_sim = e.stats.mean_L;
    } else {
        times = time_grid(c, x);
    }
    const double L0 = 1.0 - 1.0 / D;
    CsvTable t({{"t", "1/kappa"},
                {"commuting_long_time_L", "1"},
                {"S_lower_curve_L", "1"},
                {"S_upper_curve_L", "1"},
                {"simulated_mean_L", "1"}});
    for (size_t k = 0; k < times.size(); ++k) {
        const double tt = times[k];
        const double lt = tt > 0 ? register_commuting_mean_lt(n, tt) : std::nan("");
        t.add_row({tt, lt, register_upper_curve(n, tt, L0), register_lower_curve(n, tt, L0),
                   mean_sim.empty() ? std::nan("") : mean_sim[k]});
    }
    s.csv("register_curves.csv", t);
    s.finish();
    return 0;
}

Mat state_from_label(const std::string& label, int D) {
    const auto pos = label.find(':');
    const std::string kind = label.substr(0, pos);
    auto arg = [&](size_t i) {
        std::vector<int> v;
        size_t p = pos;
        while (p != std::string::npos) {
            const size_t q = label.find(':', p + 1);
            v.push_back(std::stoi(label.substr(p + 1, q == std::string::npos ? q : q - p - 1)));
            p = q;
        }
        if (i >= v.size()) throw InvalidArgument("state label " + label + " needs more indices");
        return v[i];
    };
    if (kind == "mixed") return maximally_mixed(D);
    if (kind == "phase") return pure_state(phase_state(D, arg(0)));
    if (kind == "dicke") {
        CVec v = CVec::Zero(D);
        v(arg(0)) = 1.0;
        return pure_state(v);
    }
    if (kind == "mub") {
        if (D != 4) throw InvalidDimension("mub states need --dim 4");
        return pure_state(mub_basis_d4_canonical(arg(0)).col(arg(1)));
    }
    throw InvalidArgument("unknown state label " + label + " (mixed, phase:r, dicke:k, mub:i:k)");
}

int cmd_wigner(const Common& c, const Extra& x) {
    Session s("wigner", c, x);
    std::vector<std::string> labels = x.states;
    if (labels.empty())
        for (int r = 0; r < c.dim; ++r) labels.push_back("phase:" + std::to_string(r));
    for (const auto& label : labels) {
        const Mat rho = state_from_label(label, c.dim);
        const WignerGrid g = wigner_grid(rho, x.resolution);
        CsvTable t({{"phi", "rad"}, {"z", "hbar"}, {"W", "1/sr"}});
        for (size_t j = 0; j < g.z.size(); ++j)
            for (size_t i = 0; i < g.phi.size(); ++i) t.add_row({g.phi[i], g.z[j], g.values(j, i)});
        std::string stem = "wigner_" + label;
        for (char& ch : stem)
            if (ch == ':') ch = '_';
        s.csv(stem + ".csv", t);
        s.json_file(stem + ".json", {{"D", c.dim},
                                     {"state", label},
                                     {"convention", g.convention},
                                     {"resolution", x.resolution},
                                     {"integral", g.integral()},
                                     {"min_W", g.values.minCoeff()},
                                     {"max_W", g.values.maxCoeff()},
                                     {"peak_phi", peak_phi(g)},
                                     {"max_imag", g.max_imag}});
    }
    s.finish();
    return 0;
}

int cmd_verify(const Common& c, const Extra& x) {
    VerifyOptions o;
    o.full = x.full;
    o.threads = c.threads;
    o.only = x.only;
    o.tamper_mub = x.tamper_mub;
    if (x.seed_given) o.seed = c.seed;
    Session s("verify", c, x);
    const auto rs = run_acceptance(o);
    int failed = 0;
    for (const auto& r : rs) {
        std::printf("%s\n", summary_line(r).c_str());
        failed += !r.passed;
    }
    s.json_file("verify_report.json", report_json(rs, o));
    s.finish();
    return failed ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuous-measurement purification toolkit"};
    app.set_version_flag("--version", std::string(version()));
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "TOML file; command line flags take precedence");

    Common c;
    Extra x;
    app.add_option("--dim", c.dim, "Qudit dimension D")->check(CLI::Range(2, 64));
    app.add_option("--qubits", c.qubits, "Register size n (D = 2^n)")->check(CLI::Range(0, 8));
    app.add_option("--gamma", c.gamma, "Measurement rate; rescales reported times only");
    app.add_option("--dt", c.dt, "Integration step (1/gamma)");
    app.add_option("--fb-interval", c.fb_interval, "Feedback interval (1/gamma); 0 = none");
    app.add_option("--t-final,--t", c.t_final, "Final or evaluation time (1/gamma)");
    app.add_option("--ensemble", c.ensemble, "Number of trajectories");
    app.add_option("--seed", c.seed, "Master seed");
    app.add_option("--protocol", c.protocol, "commuting|qft|mub|worst|register-qft|register-random");
    app.add_option("--out", c.out, "Output directory");
    app.add_option("--threads", c.threads, "Worker threads (0: QP_THREADS or all cores)");

    auto* mi = app.add_subcommand("mean-impurity", "Mean impurity of the commuting measurement");
    auto* te = app.add_subcommand("two-eig", "Two-eigenvalue approximation");
    auto* sim = app.add_subcommand("simulate", "Ensemble of quantum trajectories");
    auto* dist = app.add_subcommand("distribution", "Distribution of log10 impurity and of the record");
    auto* bnd = app.add_subcommand("bounds", "Analytic speed-up bounds");
    auto* spd = app.add_subcommand("speedup", "Asymptotic speed-up of the QFT protocol");
    auto* srch = app.add_subcommand("search", "Search for the unbiased basis with the largest speed-up");
    auto* reg = app.add_subcommand("register", "Qubit register bounds and curves");
    auto* wig = app.add_subcommand("wigner", "Spin Wigner function on the equal-area grid");
    auto* ver = app.add_subcommand("verify", "Acceptance suite");

    for (auto* sc : {mi, te, reg, dist}) sc->add_option("--points", x.points, "Number of grid points");
    for (auto* sc : {mi, te, reg}) sc->add_option("--t-min", x.t_min, "First time of the grid (1/gamma)");
    for (auto* sc : {sim, spd, reg}) {
        sc->add_option("--sample-interval", x.sample_interval, "Sampling interval (1/gamma)");
        sc->add_flag("--linear", x.linear, "Exponential (Kraus) integrator instead of Euler-Maruyama");
        sc->add_option("--mub-index", x.mub_index, "D=4 MUB index for --protocol mub")->check(CLI::Range(1, 4));
    }
    sim->add_flag("--keep-records", x.keep_records, "Write one CSV per trajectory");
    sim->add_option("--quantiles", x.quantiles, "Ensemble quantiles of L");
    for (auto* sc : {spd, reg}) sc->add_flag("--simulate", x.simulate, "Also run a feedback ensemble");
    for (auto* sc : {spd, srch}) {
        sc->add_option("--dmin", x.dmin, "Smallest D of a sweep");
        sc->add_option("--dmax", x.dmax, "Largest D of a sweep");
    }
    srch->add_option("--restarts", x.restarts, "Random restarts");
    srch->add_option("--iterations", x.iterations, "Gradient iterations per penalty stage");
    wig->add_option("--resolution", x.resolution, "Grid points per axis (>= 32)");
    wig->add_option("--state", x.states, "mixed | phase:r | dicke:k | mub:i:k (repeatable)");
    ver->add_flag("--full", x.full, "Larger ensembles and more search restarts");
    ver->add_flag("--fast", "Default suite");
    ver->add_option("--only", x.only, "Run only these check ids (C1..C14)");
    ver->add_flag("--tamper-mub", x.tamper_mub, "Negative test: corrupt the D=4 MUB before C10");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    x.seed_given = app.count("--seed") > 0;
    // feedback protocols default to delta t = 1e-3
    if (c.protocol != "commuting" && c.protocol != "none" && c.fb_interval == 0.0) c.fb_interval = 1e-3;
    try {
        if (*mi) return cmd_mean_impurity(c, x);
        if (*te) return cmd_two_eig(c, x);
        if (*sim) return cmd_simulate(c, x);
        if (*dist) return cmd_distribution(c, x);
        if (*bnd) return cmd_bounds(c, x);
        if (*spd) return cmd_speedup(c, x);
        if (*srch) return cmd_search(c, x);
        if (*reg) return cmd_register(c, x);
        if (*wig) return cmd_wigner(c, x);
        if (*ver) return cmd_verify(c, x);
    } catch (const Error& e) {
        std::cerr << error_json(e.kind(), e.what()).dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << error_json("internal", e.what()).dump() << "\n";
        return 1;
    }
    return 2;
}

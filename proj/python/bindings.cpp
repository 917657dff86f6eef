#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qpur/analytic.hpp"
#include "qpur/basis_search.hpp"
#include "qpur/errors.hpp"
#include "qpur/feedback.hpp"
#include "qpur/io.hpp"
#include "qpur/qcore.hpp"
#include "qpur/trajectories.hpp"
#include "qpur/verify.hpp"
#include "qpur/wigner.hpp"

namespace py = pybind11;
using namespace qpur;

namespace {

py::dict bounds_dict(int D) {
    const SpeedupBounds b = speedup_bounds(D);
    py::dict d;
    d["lower"] = b.lower;
    d["upper_qft"] = b.upper_qft;
    d["upper_all"] = b.upper_all;
    d["worst_qft"] = b.worst_qft;
    d["global_upper"] = b.global_upper;
    return d;
}

py::dict simulate(int dim, const std::string& protocol, double t_final, double dt, double fb_interval,
                  int ensemble, std::uint64_t seed, bool linear, double sample_interval, int qubits, int threads) {
    TrajectoryConfig cfg;
    cfg.dim = dim;
    cfg.qubits = qubits;
    cfg.protocol = parse_protocol(protocol);
    cfg.t_final = t_final;
    cfg.dt = dt;
    cfg.fb_interval = (cfg.protocol != Protocol::Commuting && fb_interval == 0.0) ? 1e-3 : fb_interval;
    cfg.ensemble = ensemble;
    cfg.seed = seed;
    cfg.simulate_linear = linear;
    cfg.sample_interval = sample_interval;
    cfg.threads = threads;
    EnsembleResult e;
    {
        py::gil_scoped_release release;
        e = run_ensemble(cfg);
    }
    py::dict d;
    d["times"] = e.stats.times;
    d["mean_L"] = e.stats.mean_L;
    d["mean_log10_L"] = e.stats.mean_log_L;
    d["stderr_L"] = e.stats.stderr_L;
    d["final_L"] = e.final_L;
    return d;
}

py::dict search_dict(int D, int restarts, int iterations, std::uint64_t seed, int threads) {
    SearchConfig c;
    c.D = D;
    c.restarts = restarts;
    c.iterations = iterations;
    c.seed = seed;
    c.threads = threads;
    SearchResult r;
    {
        py::gil_scoped_release release;
        r = search(c);
    }
    py::dict d;
    d["S"] = r.best_S;
    d["U"] = r.best;
    d["origin"] = r.best_origin;
    d["history"] = r.history;
    d["accepted"] = r.accepted;
    return d;
}

py::dict wigner_dict(const Mat& rho, int resolution) {
    const WignerGrid g = wigner_grid(rho, resolution);
    py::dict d;
    d["phi"] = g.phi;
    d["z"] = g.z;
    d["W"] = g.values;
    d["convention"] = g.convention;
    d["max_imag"] = g.max_imag;
    return d;
}

py::dict check_dict(const std::string& id, bool full) {
    VerifyOptions o;
    o.full = full;
    CheckResult r;
    {
        py::gil_scoped_release release;
        r = run_check(id, o);
    }
    py::dict d;
    d["id"] = r.id;
    d["passed"] = r.passed;
    d["line"] = summary_line(r);
    py::dict vals;
    for (const auto& m : r.values) vals[py::str(m.name)] = m.value;
    d["values"] = vals;
    return d;
}

} // namespace

PYBIND11_MODULE(_qpur, m) {
    m.doc() = "Continuous-measurement purification toolkit";
    m.attr("__version__") = version();

    PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> exc;
    exc.call_once_and_store_result([&]() { return py::exception<Error>(m, "QpurError"); });
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(exc.get_stored(), (e.kind() + ": " + e.what()).c_str());
        }
    });

    // qcore
    m.def("jz_operator", &jz_operator, py::arg("D"));
    m.def("qft_matrix", &qft_matrix, py::arg("D"));
    m.def("mub_basis_d4", &mub_basis_d4_canonical, py::arg("index"));
    m.def("effective_observable", &effective_observable, py::arg("U"), py::arg("X"));
    m.def("impurity", &impurity, py::arg("rho"));
    m.def("maximally_mixed", &maximally_mixed, py::arg("D"));
    m.def("pure_state", &pure_state, py::arg("psi"));

    // analytic
    m.def("mean_impurity", [](double t, int D) { return mean_impurity(t, D); }, py::arg("t"), py::arg("D"));
    m.def("mean_log10_impurity", [](double t, int D) { return mean_log10_impurity(t, D); }, py::arg("t"),
          py::arg("D"));
    m.def("two_eig_impurity", [](double t, int D) { return mean_impurity_two_eig(t, D).value; }, py::arg("t"),
          py::arg("D"));
    m.def("trajectory_bound",
          [](const std::string& kind, double t, int D) { return trajectory_bound(parse_bound_kind(kind), t, D); },
          py::arg("kind"), py::arg("t"), py::arg("D"));
    m.def("central_peak_fwhm", [](double t, int D) { return central_peak_fwhm(t, D); }, py::arg("t"),
          py::arg("D"));
    m.def("record_density_V", [](double V, double t, int D) { return record_density_V(V, t, D); }, py::arg("V"),
          py::arg("t"), py::arg("D"));
    m.def(
        "log_impurity_distribution",
        [](double t, int D) {
            const ImpurityDistribution d = log_impurity_distribution(t, D);
            py::dict out;
            out["ell"] = d.ell;
            out["density"] = d.density;
            out["mean"] = d.mean();
            out["quantile_1_over_D"] = d.quantile(1.0 / D);
            return out;
        },
        py::arg("t"), py::arg("D"));
    m.def("time_to_mean_impurity", [](double L, int D) { return time_to_mean_impurity(L, D); }, py::arg("L"),
          py::arg("D"));

    // feedback
    m.def("speedup_bounds", &bounds_dict, py::arg("D"));
    m.def("speedup_from_max_element", [](const Mat& U, const Mat& X) { return speedup_from_max_element(U, X).S; },
          py::arg("U"), py::arg("X"));
    m.def("dL_complementary",
          [](const Vec& slots, const Mat& X, double gamma) { return dL_complementary(slots, X, gamma); },
          py::arg("slots"), py::arg("X"), py::arg("gamma") = 1.0);
    m.def("asymptotic_speedup_ideal",
          [](int D, std::vector<double> targets) { return asymptotic_speedup_ideal(D, targets).S; }, py::arg("D"),
          py::arg("targets") = std::vector<double>{1e-2, 1e-3, 1e-4});
    m.def("quadratic_fit_coefficient", &quadratic_fit_coefficient, py::arg("D"), py::arg("S"));
    m.def("register_xmax", [](int n) { return register_xmax(n).S_implied; }, py::arg("n"));

    // trajectories, search, wigner
    m.def("simulate", &simulate, py::arg("dim") = 3, py::arg("protocol") = "commuting", py::arg("t_final") = 1.0,
          py::arg("dt") = 1e-4, py::arg("fb_interval") = 0.0, py::arg("ensemble") = 100, py::arg("seed") = 1,
          py::arg("linear") = false, py::arg("sample_interval") = 0.01, py::arg("qubits") = 0,
          py::arg("threads") = 0);
    m.def("search", &search_dict, py::arg("D"), py::arg("restarts") = 16, py::arg("iterations") = 400,
          py::arg("seed") = 1, py::arg("threads") = 0);
    m.def("clebsch_gordan", &clebsch_gordan, py::arg("j1"), py::arg("m1"), py::arg("j2"), py::arg("m2"),
          py::arg("J"), py::arg("M"));
    m.def("phase_state", &phase_state, py::arg("D"), py::arg("r"));
    m.def("wigner_grid", &wigner_dict, py::arg("rho"), py::arg("resolution") = 128);
    m.def("overlap_from_wigner", &overlap_from_wigner, py::arg("rho"), py::arg("sigma"),
          py::arg("resolution") = 128);

    // io, verify
    m.def("git_blob_sha1", &git_blob_sha1, py::arg("content"));
    m.def("run_check", &check_dict, py::arg("id"), py::arg("full") = false);
    m.def("acceptance_ids", &acceptance_ids);
}
